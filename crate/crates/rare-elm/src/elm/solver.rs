use nalgebra::{DMatrix, DVector};

use super::{check_connectivity, evaluate, KnownConstant, WeightMatrix};
use crate::error::{Error, Result};

/// Rows `a·z = b` and `a·z ≤ b` on the `s`-vector `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraints {
    s: usize,
    eq: Vec<(Vec<f64>, f64)>,
    ineq: Vec<(Vec<f64>, f64)>,
}

impl LinearConstraints {
    /// Starts from the homogeneous row `Σ λ_t z_t = 0`.
    pub fn homogeneous(lambdas: &[f64]) -> Self {
        Self {
            s: lambdas.len(),
            eq: vec![(lambdas.to_vec(), 0.0)],
            ineq: Vec::new(),
        }
    }

    /// Starts from `z_index = value` instead of the homogeneous row.
    pub fn fixing(s: usize, index: usize, value: f64) -> Self {
        let mut a = vec![0.0; s];
        a[index] = 1.0;
        Self {
            s,
            eq: vec![(a, value)],
            ineq: Vec::new(),
        }
    }

    pub fn with_equality(mut self, a: Vec<f64>, b: f64) -> Self {
        assert_eq!(a.len(), self.s, "constraint row length");
        self.eq.push((a, b));
        self
    }

    pub fn with_inequality(mut self, a: Vec<f64>, b: f64) -> Self {
        assert_eq!(a.len(), self.s, "constraint row length");
        self.ineq.push((a, b));
        self
    }

    /// Force `ℓ_a/ℓ_b` to the ratio of two known constants:
    /// `z_a - z_b = ln λ_a - ln λ_b - ln ℓ_a + ln ℓ_b`.
    pub fn pin_ratio(self, lambdas: &[f64], a: KnownConstant, b: KnownConstant) -> Self {
        let mut row = vec![0.0; self.s];
        row[a.index] = 1.0;
        row[b.index] = -1.0;
        let rhs = lambdas[a.index].ln() - lambdas[b.index].ln() - a.log_value + b.log_value;
        self.with_equality(row, rhs)
    }

    /// Require `ℓ_lo ≤ ℓ_hi`: `z_hi - z_lo ≤ ln λ_hi - ln λ_lo`.
    pub fn ordered(self, lambdas: &[f64], lo: usize, hi: usize) -> Self {
        let mut row = vec![0.0; self.s];
        row[lo] = -1.0;
        row[hi] = 1.0;
        let rhs = lambdas[hi].ln() - lambdas[lo].ln();
        self.with_inequality(row, rhs)
    }

    pub fn eq_rows(&self) -> &[(Vec<f64>, f64)] {
        &self.eq
    }

    pub fn ineq_rows(&self) -> &[(Vec<f64>, f64)] {
        &self.ineq
    }
}

/// KKT tolerance and iteration cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 100_000,
        }
    }
}

/// Minimizer of `D` with recovered normalizing constants.
#[derive(Debug, Clone, PartialEq)]
pub struct ElmSolution {
    pub z_hat: Vec<f64>,
    pub ell_hat: Vec<f64>,
    pub log_ell_hat: Vec<f64>,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Multipliers of the inequality rows, in input order.
    pub ineq_multipliers: Vec<f64>,
}

/// `ln ℓ_t = ln λ_t - z_t`, shifted so the known component matches exactly.
pub fn recover_log_ell(z: &[f64], lambdas: &[f64], known: KnownConstant) -> Vec<f64> {
    let raw: Vec<f64> = z.iter().zip(lambdas).map(|(z, l)| l.ln() - z).collect();
    let shift = known.log_value - raw[known.index];
    let mut out: Vec<f64> = raw.iter().map(|v| v + shift).collect();
    out[known.index] = known.log_value;
    out
}

/// Drop equality rows implied by earlier ones; fail when they contradict.
fn independent_rows(rows: &[(Vec<f64>, f64)], s: usize) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let mut kept: Vec<&(Vec<f64>, f64)> = Vec::new();
    for row in rows {
        let a = DVector::from_column_slice(&row.0);
        if kept.is_empty() {
            if a.amax() == 0.0 {
                if row.1.abs() > 1e-12 {
                    return Err(Error::InfeasibleConstraints(
                        "zero row with nonzero right-hand side".into(),
                    ));
                }
                continue;
            }
            kept.push(row);
            continue;
        }
        let k = DMatrix::from_fn(kept.len(), s, |i, j| kept[i].0[j]);
        let gram = &k * k.transpose();
        let coef = gram
            .clone()
            .lu()
            .solve(&(&k * &a))
            .ok_or_else(|| Error::InfeasibleConstraints("singular constraint Gram matrix".into()))?;
        let resid = &a - k.transpose() * &coef;
        if resid.amax() <= 1e-10 * a.amax() {
            let implied: f64 = coef.iter().zip(&kept).map(|(c, r)| c * r.1).sum();
            if (implied - row.1).abs() > 1e-9 * (1.0 + row.1.abs()) {
                return Err(Error::InfeasibleConstraints(format!(
                    "equality rows are inconsistent (implied {implied}, required {})",
                    row.1
                )));
            }
        } else {
            kept.push(row);
        }
    }
    let a = DMatrix::from_fn(kept.len(), s, |i, j| kept[i].0[j]);
    let b = DVector::from_iterator(kept.len(), kept.iter().map(|r| r.1));
    Ok((a, b))
}

struct Residual {
    dual: DVector<f64>,
    primal: DVector<f64>,
    slack: DVector<f64>,
    comp: DVector<f64>,
}

impl Residual {
    fn norm(&self) -> f64 {
        (self.dual.norm_squared() + self.primal.norm_squared() + self.slack.norm_squared() + self.comp.norm_squared())
            .sqrt()
    }
}

/// Minimize `D(z)` subject to linear equalities and inequalities.
///
/// Starts from the minimum-norm point of the equality rows. Without inequality
/// rows this is a damped Newton method in the null space of the equalities;
/// otherwise a primal-dual interior-point method on the slack form
/// `Gz + w = h`, `w ≥ 0`. Both use the analytic Hessian. Converged when the
/// stationarity, feasibility and complementarity residuals all fall below
/// `tol`.
pub fn constrained_minimize(
    w: &WeightMatrix,
    lambdas: &[f64],
    constraints: &LinearConstraints,
    known: KnownConstant,
    opts: SolverOptions,
) -> Result<ElmSolution> {
    let s = w.s();
    if lambdas.len() != s || constraints.s != s || known.index >= s {
        return Err(Error::DimensionMismatch(format!(
            "problem has {s} densities, lambdas {} and constraints {}",
            lambdas.len(),
            constraints.s
        )));
    }
    let conn = check_connectivity(w);
    if !conn.connected {
        return Err(Error::Disconnected(conn.components));
    }
    let (a, b) = independent_rows(&constraints.eq, s)?;
    let p = constraints.ineq.len();
    let g = DMatrix::from_fn(p, s, |i, j| constraints.ineq[i].0[j]);
    let h = DVector::from_iterator(p, constraints.ineq.iter().map(|r| r.1));

    let z0 = least_norm_point(&a, &b, s)?;
    let out = if p == 0 {
        newton_equality(w, lambdas, &a, z0, opts)?
    } else {
        let prob = Problem {
            w,
            lambdas,
            a: &a,
            b: &b,
            g: &g,
            h: &h,
        };
        let out = interior_point(&prob, z0, opts)?;
        polish(&prob, out, opts)
    };
    let zs: Vec<f64> = out.z.iter().copied().collect();
    let log_ell = recover_log_ell(&zs, lambdas, known);
    if log_ell.iter().any(|v| !v.is_finite()) {
        return Err(Error::Degenerate(format!("non-finite solution {zs:?}")));
    }
    Ok(ElmSolution {
        ell_hat: log_ell.iter().map(|v| v.exp()).collect(),
        log_ell_hat: log_ell,
        z_hat: zs,
        kkt_residual: out.kkt,
        iterations: out.iterations,
        converged: out.converged,
        ineq_multipliers: out.mu.iter().copied().collect(),
    })
}

struct Outcome {
    z: DVector<f64>,
    kkt: f64,
    iterations: usize,
    converged: bool,
    mu: DVector<f64>,
}

struct Problem<'a> {
    w: &'a WeightMatrix,
    lambdas: &'a [f64],
    a: &'a DMatrix<f64>,
    b: &'a DVector<f64>,
    g: &'a DMatrix<f64>,
    h: &'a DVector<f64>,
}

/// Re-solves with the active inequality rows as equalities, which removes the
/// residual barrier bias. Keeps the interior-point answer unless the polished
/// point is feasible with nonnegative multipliers.
fn polish(prob: &Problem<'_>, out: Outcome, opts: SolverOptions) -> Outcome {
    let Problem { w, lambdas, a, b, g, h } = *prob;
    if !out.converged {
        return out;
    }
    let s = out.z.len();
    let q = a.nrows();
    let p = g.nrows();
    let slack = h - g * &out.z;
    let active: Vec<usize> = (0..p).filter(|&i| out.mu[i] > slack[i]).collect();
    let m = q + active.len();
    let aa = DMatrix::from_fn(m, s, |i, j| if i < q { a[(i, j)] } else { g[(active[i - q], j)] });
    let bb = DVector::from_fn(m, |i, _| if i < q { b[i] } else { h[active[i - q]] });
    let z0 = if m == 0 {
        out.z.clone()
    } else {
        let Some(y) = (&aa * aa.transpose()).lu().solve(&(&bb - &aa * &out.z)) else {
            return out;
        };
        &out.z + aa.transpose() * y
    };
    let Ok(pol) = newton_equality(w, lambdas, &aa, z0, opts) else {
        return out;
    };
    if !pol.converged {
        return out;
    }
    let gz = g * &pol.z;
    if (0..p).any(|i| !active.contains(&i) && gz[i] > h[i] + 1e-12 * (1.0 + h[i].abs())) {
        return out;
    }
    let mut mu = DVector::zeros(p);
    if m > 0 {
        let Ok(e) = evaluate(w, pol.z.as_slice(), lambdas, false) else {
            return out;
        };
        let Some(y) = (&aa * aa.transpose()).lu().solve(&(-(&aa * &e.gradient))) else {
            return out;
        };
        for (k, &i) in active.iter().enumerate() {
            if y[q + k] < -1e-8 {
                return out;
            }
            mu[i] = y[q + k].max(0.0);
        }
    }
    Outcome {
        iterations: out.iterations + pol.iterations,
        mu,
        ..pol
    }
}

/// Minimum-norm solution of `Az = b`.
fn least_norm_point(a: &DMatrix<f64>, b: &DVector<f64>, s: usize) -> Result<DVector<f64>> {
    if a.nrows() == 0 {
        return Ok(DVector::zeros(s));
    }
    let y = (a * a.transpose())
        .lu()
        .solve(b)
        .ok_or_else(|| Error::InfeasibleConstraints("dependent equality rows".into()))?;
    Ok(a.transpose() * y)
}

/// Projection of `v` onto the null space of `A`.
fn project_null(
    a: &DMatrix<f64>,
    gram_lu: &nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    v: &DVector<f64>,
) -> DVector<f64> {
    if a.nrows() == 0 {
        return v.clone();
    }
    let y = gram_lu.solve(&(a * v)).unwrap_or_else(|| DVector::zeros(a.nrows()));
    v - a.transpose() * y
}

/// Feasible-start Newton method for equality rows only, with an Armijo search
/// on `D`. Steps stay in the null space of `A`, so every iterate is feasible.
fn newton_equality(
    w: &WeightMatrix,
    lambdas: &[f64],
    a: &DMatrix<f64>,
    z0: DVector<f64>,
    opts: SolverOptions,
) -> Result<Outcome> {
    let s = z0.len();
    let q = a.nrows();
    let gram_lu = (a * a.transpose()).lu();
    let mut z = z0;
    let mut e = evaluate(w, z.as_slice(), lambdas, true)?;
    let mut kkt = f64::INFINITY;
    for iter in 0..opts.max_iter {
        let pg = project_null(a, &gram_lu, &e.gradient);
        kkt = pg.amax();
        if kkt < opts.tol {
            return Ok(Outcome {
                z,
                kkt,
                iterations: iter,
                converged: true,
                mu: DVector::zeros(0),
            });
        }
        let dim = s + q;
        let mut m = DMatrix::<f64>::zeros(dim, dim);
        m.view_mut((0, 0), (s, s))
            .copy_from(e.hessian.as_ref().expect("requested"));
        m.view_mut((s, 0), (q, s)).copy_from(a);
        m.view_mut((0, s), (s, q)).copy_from(&a.transpose());
        let mut rhs = DVector::<f64>::zeros(dim);
        rhs.rows_mut(0, s).copy_from(&(-&e.gradient));
        let mut dz = match solve_regularized(&m, &rhs, s) {
            Ok(step) => project_null(a, &gram_lu, &step.rows(0, s).into_owned()),
            Err(_) => -&pg,
        };
        let mut slope = e.gradient.dot(&dz);
        if !(slope < 0.0) || dz.iter().any(|v| !v.is_finite()) {
            dz = -&pg;
            slope = -pg.norm_squared();
        }
        // Saturated columns flatten D; cap the step so the search starts sane.
        let big = dz.amax();
        if big > 50.0 {
            dz *= 50.0 / big;
            slope *= 50.0 / big;
        }
        let mut step = 1.0;
        let mut accepted = None;
        // Inside the quadratic region the decrease drowns in rounding of D.
        if -slope <= 1e-9 * (1.0 + e.value.abs()) {
            accepted = Some(&z + &dz);
        }
        for _ in 0..80 {
            if accepted.is_some() {
                break;
            }
            let zt = &z + step * &dz;
            if let Ok(v) = crate::elm::objective_d(w, zt.as_slice(), lambdas) {
                if v <= e.value + 1e-4 * step * slope {
                    accepted = Some(zt);
                    break;
                }
            }
            step *= 0.5;
        }
        let zt = match accepted {
            Some(zt) => zt,
            None => {
                // D is flat to rounding; take the full step if it shrinks the gradient.
                let zt = &z + &dz;
                let et = evaluate(w, zt.as_slice(), lambdas, false)?;
                if project_null(a, &gram_lu, &et.gradient).amax() < kkt {
                    zt
                } else if kkt < opts.tol.sqrt() * 1e-2 {
                    return Ok(Outcome {
                        z,
                        kkt,
                        iterations: iter + 1,
                        converged: false,
                        mu: DVector::zeros(0),
                    });
                } else {
                    return Err(Error::MaxIterations {
                        iterations: iter + 1,
                        residual: kkt,
                    });
                }
            }
        };
        z = zt;
        e = evaluate(w, z.as_slice(), lambdas, true)?;
    }
    Err(Error::MaxIterations {
        iterations: opts.max_iter,
        residual: kkt,
    })
}

/// Primal-dual interior-point iterations for problems with inequality rows.
fn interior_point(prob: &Problem<'_>, z0: DVector<f64>, opts: SolverOptions) -> Result<Outcome> {
    let Problem { w, lambdas, a, b, g, h } = *prob;
    let s = z0.len();
    let q = a.nrows();
    let p = g.nrows();
    let mut z = z0;
    let mut nu = DVector::<f64>::zeros(q);
    let mut slack = DVector::from_iterator(p, (h - g * &z).iter().map(|v| v.max(1.0)));
    let mut mu = DVector::<f64>::from_element(p, 1.0);
    let sigma = 0.1;

    let residual = |z: &DVector<f64>,
                    nu: &DVector<f64>,
                    slack: &DVector<f64>,
                    mu: &DVector<f64>,
                    target: f64,
                    want_hessian: bool|
     -> Result<(Residual, Option<DMatrix<f64>>)> {
        let e = evaluate(w, z.as_slice(), lambdas, want_hessian)?;
        let dual = e.gradient + a.transpose() * nu + g.transpose() * mu;
        let primal = a * z - b;
        let sl = g * z + slack - h;
        let comp = DVector::from_iterator(p, mu.iter().zip(slack.iter()).map(|(m, w)| m * w - target));
        Ok((
            Residual {
                dual,
                primal,
                slack: sl,
                comp,
            },
            e.hessian,
        ))
    };

    let mut best_slack_inf = f64::INFINITY;
    let mut stall = 0usize;
    let mut kkt = f64::INFINITY;
    for iter in 0..opts.max_iter {
        let gap = if p > 0 { mu.dot(&slack) / p as f64 } else { 0.0 };
        let (r, hess) = residual(&z, &nu, &slack, &mu, 0.0, true)?;
        kkt = r.dual.amax().max(r.primal.amax()).max(r.slack.amax()).max(gap);
        if kkt < opts.tol {
            return Ok(Outcome {
                z,
                kkt,
                iterations: iter,
                converged: true,
                mu,
            });
        }
        if p > 0 {
            let slack_inf = r.slack.amax();
            if slack_inf < 0.5 * best_slack_inf {
                best_slack_inf = slack_inf;
                stall = 0;
            } else {
                stall += 1;
            }
            if stall > 200 && slack_inf > 1e-6 && mu.amax() > 1e8 {
                return Err(Error::InfeasibleConstraints(format!(
                    "inequality rows cannot be met (violation {slack_inf:e})"
                )));
            }
        }
        let target = sigma * gap;
        let rc = DVector::from_iterator(p, mu.iter().zip(slack.iter()).map(|(m, w)| m * w - target));
        let ratio = DVector::from_iterator(p, mu.iter().zip(slack.iter()).map(|(m, w)| m / w));

        let mut k = hess.expect("requested");
        let mut rhs1 = -&r.dual;
        if p > 0 {
            k += g.transpose() * DMatrix::from_diagonal(&ratio) * g;
            let corr = DVector::from_iterator(p, (0..p).map(|i| (mu[i] * r.slack[i] - rc[i]) / slack[i]));
            rhs1 -= g.transpose() * corr;
        }
        let dim = s + q;
        let mut kkt_mat = DMatrix::<f64>::zeros(dim, dim);
        kkt_mat.view_mut((0, 0), (s, s)).copy_from(&k);
        kkt_mat.view_mut((s, 0), (q, s)).copy_from(a);
        kkt_mat.view_mut((0, s), (s, q)).copy_from(&a.transpose());
        let mut rhs = DVector::<f64>::zeros(dim);
        rhs.rows_mut(0, s).copy_from(&rhs1);
        rhs.rows_mut(s, q).copy_from(&(-&r.primal));
        let step = match solve_regularized(&kkt_mat, &rhs, s) {
            Err(Error::Degenerate(_)) if p > 0 && !(mu.amax() <= 1e8) => {
                return Err(Error::InfeasibleConstraints(format!(
                    "inequality rows cannot be met (violation {:e})",
                    r.slack.amax()
                )))
            }
            other => other?,
        };
        let dz = step.rows(0, s).into_owned();
        let dnu = step.rows(s, q).into_owned();
        let dw = -&r.slack - g * &dz;
        let dmu = DVector::from_iterator(p, (0..p).map(|i| (-rc[i] - mu[i] * dw[i]) / slack[i]));

        let mut alpha: f64 = 1.0;
        for i in 0..p {
            if dw[i] < 0.0 {
                alpha = alpha.min(-0.99 * slack[i] / dw[i]);
            }
            if dmu[i] < 0.0 {
                alpha = alpha.min(-0.99 * mu[i] / dmu[i]);
            }
        }
        let (r_target, _) = residual(&z, &nu, &slack, &mu, target, false)?;
        let base = r_target.norm();
        let mut accepted = false;
        for _ in 0..60 {
            let zt = &z + alpha * &dz;
            if zt.iter().all(|v| v.is_finite()) {
                let nt = &nu + alpha * &dnu;
                let wt = &slack + alpha * &dw;
                let mt = &mu + alpha * &dmu;
                if let Ok((rt, _)) = residual(&zt, &nt, &wt, &mt, target, false) {
                    if rt.norm() <= (1.0 - 0.01 * alpha) * base {
                        z = zt;
                        nu = nt;
                        slack = wt;
                        mu = mt;
                        accepted = true;
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            // Residual no longer decreases at machine precision.
            if kkt < opts.tol.sqrt() * 1e-2 {
                return Ok(Outcome {
                    z,
                    kkt,
                    iterations: iter + 1,
                    converged: false,
                    mu,
                });
            }
            return Err(Error::MaxIterations {
                iterations: iter + 1,
                residual: kkt,
            });
        }
    }
    Err(Error::MaxIterations {
        iterations: opts.max_iter,
        residual: kkt,
    })
}

fn solve_regularized(m: &DMatrix<f64>, rhs: &DVector<f64>, s: usize) -> Result<DVector<f64>> {
    if let Some(x) = m.clone().lu().solve(rhs) {
        if x.iter().all(|v| v.is_finite()) {
            return Ok(x);
        }
    }
    let scale = m.amax().max(1.0);
    for k in [1e-12, 1e-10, 1e-8] {
        let mut mm = m.clone();
        for i in 0..s {
            mm[(i, i)] += k * scale;
        }
        if let Some(x) = mm.lu().solve(rhs) {
            if x.iter().all(|v| v.is_finite()) {
                return Ok(x);
            }
        }
    }
    Err(Error::Degenerate("Newton system is singular".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(s: usize, n: usize) -> WeightMatrix {
        WeightMatrix::from_rows(&vec![vec![1.0; n]; s], (0..n).map(|j| j % s).collect()).unwrap()
    }

    #[test]
    fn identical_densities_homogeneous() {
        let w = ones(2, 8);
        let lam = [0.5, 0.5];
        let sol = constrained_minimize(
            &w,
            &lam,
            &LinearConstraints::homogeneous(&lam),
            KnownConstant::new(0, 1.0),
            SolverOptions::default(),
        )
        .unwrap();
        assert!(sol.z_hat.iter().all(|v| v.abs() < 1e-10));
        assert!((sol.ell_hat[1] - 1.0).abs() < 1e-10);
        assert!(sol.converged);
    }

    #[test]
    fn pinned_ratio_is_exact() {
        let w = WeightMatrix::from_rows(
            &[
                vec![1.0, 1.0, 0.0, 2.0, 1.0],
                vec![1.0, 0.5, 1.0, 1.0, 3.0],
                vec![0.0, 1.0, 1.0, 1.0, 1.0],
            ],
            vec![0, 0, 1, 1, 2],
        )
        .unwrap();
        let lam = [0.4, 0.4, 0.2];
        let k0 = KnownConstant::new(0, 10.0 * (-5.0f64).exp());
        let k1 = KnownConstant::new(1, 1.0);
        let c = LinearConstraints::homogeneous(&lam).pin_ratio(&lam, k0, k1);
        let sol = constrained_minimize(&w, &lam, &c, k0, SolverOptions::default()).unwrap();
        let ratio = sol.log_ell_hat[0] - sol.log_ell_hat[1];
        assert!((ratio - (10f64.ln() - 5.0)).abs() < 1e-10);
    }

    #[test]
    fn inconsistent_equalities() {
        let w = ones(2, 4);
        let lam = [0.5, 0.5];
        let c = LinearConstraints::homogeneous(&lam).with_equality(vec![1.0, 1.0], 1.0);
        let r = constrained_minimize(&w, &lam, &c, KnownConstant::new(0, 1.0), SolverOptions::default());
        assert!(matches!(r, Err(Error::InfeasibleConstraints(_))));
        let dup = LinearConstraints::homogeneous(&lam).with_equality(vec![1.0, 1.0], 0.0);
        assert!(constrained_minimize(&w, &lam, &dup, KnownConstant::new(0, 1.0), SolverOptions::default()).is_ok());
    }

    #[test]
    fn contradictory_inequalities() {
        let w = ones(2, 4);
        let lam = [0.5, 0.5];
        let c = LinearConstraints::homogeneous(&lam)
            .with_inequality(vec![1.0, -1.0], -1.0)
            .with_inequality(vec![-1.0, 1.0], -1.0);
        let r = constrained_minimize(&w, &lam, &c, KnownConstant::new(0, 1.0), SolverOptions::default());
        assert!(
            matches!(
                r,
                Err(Error::InfeasibleConstraints(_)) | Err(Error::MaxIterations { .. })
            ),
            "{r:?}"
        );
    }

    #[test]
    fn active_inequality_binds() {
        // Unconstrained optimum has ℓ₂ = 4ℓ₁; demanding ℓ₂ ≤ ℓ₁ forces equality.
        let w = WeightMatrix::from_rows(
            &[vec![1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0], vec![1.0; 8]],
            vec![0, 0, 0, 0, 1, 1, 1, 1],
        )
        .unwrap();
        let lam = [0.5, 0.5];
        let k = KnownConstant::new(0, 1.0);
        let free = constrained_minimize(
            &w,
            &lam,
            &LinearConstraints::homogeneous(&lam),
            k,
            SolverOptions::default(),
        )
        .unwrap();
        assert!(free.ell_hat[1] > 1.5);
        let c = LinearConstraints::homogeneous(&lam).ordered(&lam, 1, 0);
        let sol = constrained_minimize(&w, &lam, &c, k, SolverOptions::default()).unwrap();
        assert!((sol.ell_hat[1] - 1.0).abs() < 1e-8, "{:?}", sol.ell_hat);
        assert!(sol.ineq_multipliers[0] > 1e-6);
    }

    #[test]
    fn fixing_path_matches_homogeneous() {
        let w = WeightMatrix::from_rows(
            &[vec![1.0, 1.0, 0.0, 2.0, 1.0], vec![1.0, 0.5, 1.0, 1.0, 3.0]],
            vec![0, 0, 1, 1, 1],
        )
        .unwrap();
        let lam = [0.4, 0.6];
        let k = KnownConstant::new(0, 1.0);
        let a = constrained_minimize(
            &w,
            &lam,
            &LinearConstraints::homogeneous(&lam),
            k,
            SolverOptions::default(),
        )
        .unwrap();
        let b = constrained_minimize(
            &w,
            &lam,
            &LinearConstraints::fixing(2, 0, 0.0),
            k,
            SolverOptions::default(),
        )
        .unwrap();
        assert!((a.ell_hat[1] - b.ell_hat[1]).abs() < 1e-9);
    }
}

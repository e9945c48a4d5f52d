//! Variational lower bound and the two-density ELM built on it.
//!
//! With `yᵢ = Xᵢ^α` iid `Exp(1)`, the map `y ↦ Σ yᵢ^{1/α}` is convex for
//! `α ≤ 1`, so its tangent plane at any `λ > 0` lies below it:
//!
//! ```text
//! S_L(y; λ) = (1/α)·Σ λᵢ^{1/α-1}·yᵢ - ((1-α)/α)·Σ λᵢ^{1/α} ≤ S(y)
//! ```
//!
//! Applied to the sorted vector `y_[1] ≤ … ≤ y_[d]`, the order-statistic
//! representation turns `{S_L ≥ γ}` into `{Σ β_j Z_j ≥ γ*}` for iid `Exp(1)`
//! `Z_j`, a generalized Erlang tail computed from a bidiagonal matrix
//! exponential. The bound is maximized over `λ` by cross-entropy search and
//! then serves as the known constant of a two-density ELM.

use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::distributions::RandomStream;
use crate::elm::{constrained_minimize, ElmSolution, KnownConstant, LinearConstraints, SolverOptions, WeightMatrix};
use crate::error::{domain, Error, Result};
use crate::samplers::{gibbs_lower_bound_density_with, gibbs_scheme_b_with, GibbsOptions, ProblemSpec, SampleBlock};

/// Flag attached when every pooled sample satisfies the linearized event and
/// the ordering constraint `ℓ̂₁ ≤ ℓ̂₂` is active.
pub const BOUNDARY: &str = "boundary";

/// Sum of independent exponentials with rates `ν_j`, i.e. the absorption time
/// of the chain `1 → 2 → … → d → ∅`, observed against a threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct ErlangPhase {
    rates: Vec<f64>,
    threshold: f64,
}

impl ErlangPhase {
    pub fn from_rates(rates: Vec<f64>, threshold: f64) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::EmptyInput("at least one phase is required".into()));
        }
        if rates.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(domain("rates must be finite and > 0"));
        }
        if !(threshold >= 0.0) || threshold.is_nan() {
            return Err(domain(format!("threshold must be >= 0, got {threshold}")));
        }
        Ok(Self { rates, threshold })
    }

    /// Phase for `Σ β_j Z_j ≥ γ*`: rates `1/β_j` with `β` from the tangent
    /// coefficients of `params`.
    pub fn from_variational(params: &VariationalParams) -> Result<Self> {
        Self::from_rates(params.betas().iter().map(|b| 1.0 / b).collect(), params.gamma_star())
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Upper-bidiagonal sub-generator with `-ν_j` on the diagonal.
    pub fn generator(&self) -> DMatrix<f64> {
        let d = self.rates.len();
        DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                -self.rates[i]
            } else if j == i + 1 {
                self.rates[i]
            } else {
                0.0
            }
        })
    }
}

/// `ln(e₁ᵀ·exp(M)·1)` for an upper-bidiagonal `M` with nonpositive diagonal
/// and nonnegative superdiagonal.
///
/// Scaling and squaring with every quantity kept nonnegative. The diagonal of
/// `exp(M/2^s)` is held as `expm1` values and squared through
/// `u ← u·(2 + u)`, so entries within an ulp of 1 keep their exponent across
/// many squarings. The strictly upper part comes from the Taylor series of the
/// shifted, entrywise nonnegative `M/2^s + δI`. Returns `-∞` if the unscaled
/// entries overflow, which happens only for tails below `e^{-10^{20}}` or so.
fn log_first_row_sum(diag: &[f64], sup: &[f64]) -> f64 {
    let d = diag.len();
    let norm = (0..d)
        .map(|j| -diag[j] + if j > 0 { sup[j - 1] } else { 0.0 })
        .fold(0.0, f64::max);
    let s = if norm > 1.0 { norm.log2().ceil() as i32 } else { 0 };
    let scale = 2f64.powi(-s);
    let xd: Vec<f64> = diag.iter().map(|v| v * scale).collect();
    let delta = xd.iter().map(|v| -v).fold(0.0, f64::max);

    let idx = |i: usize, j: usize| i * d + j;
    let mut y = vec![0.0; d * d];
    for i in 0..d {
        y[idx(i, i)] = xd[i] + delta;
        if i + 1 < d {
            y[idx(i, i + 1)] = sup[i] * scale;
        }
    }
    let mut e = vec![0.0; d * d];
    let mut term = vec![0.0; d * d];
    for i in 0..d {
        e[idx(i, i)] = 1.0;
        term[idx(i, i)] = 1.0;
    }
    let mut next = vec![0.0; d * d];
    for k in 1..64 {
        next.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..d {
            for m in i..d {
                let x = term[idx(i, m)];
                if x == 0.0 {
                    continue;
                }
                for j in m..(m + 2).min(d) {
                    next[idx(i, j)] += x * y[idx(m, j)];
                }
            }
        }
        let inv = 1.0 / k as f64;
        for (t, n) in term.iter_mut().zip(&next) {
            *t = n * inv;
        }
        for (a, b) in e.iter_mut().zip(&term) {
            *a += b;
        }
        // Entry (i, j) first appears in term j - i.
        if k >= d && term.iter().zip(&e).all(|(t, v)| *t <= 1e-17 * v) {
            break;
        }
    }
    let shrink = (-delta).exp();
    let mut u: Vec<f64> = xd.iter().map(|x| x.exp_m1()).collect();
    let mut n = vec![0.0; d * d];
    for i in 0..d {
        for j in i + 1..d {
            n[idx(i, j)] = e[idx(i, j)] * shrink;
        }
    }
    let mut n2 = vec![0.0; d * d];
    for _ in 0..s {
        for i in 0..d {
            for j in i + 1..d {
                let mut acc = n[idx(i, j)] * (2.0 + u[i] + u[j]);
                for m in i + 1..j {
                    acc += n[idx(i, m)] * n[idx(m, j)];
                }
                n2[idx(i, j)] = acc;
            }
        }
        std::mem::swap(&mut n, &mut n2);
        for v in u.iter_mut() {
            *v *= 2.0 + *v;
        }
    }
    let first = (1.0 + u[0]) + n[1..d].iter().sum::<f64>();
    if first > 0.0 && first.is_finite() {
        first.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// `ln Q` for `Q = e₁ᵀ·exp(A·γ*)·1`, the probability that the phase-type
/// variable exceeds the threshold.
///
/// The slowest rate is factored out, `e^{At} = e^{-ν_min t}·e^{(A + ν_min I)t}`,
/// so tails far below the smallest positive double remain representable.
pub fn log_erlang_tail(phase: &ErlangPhase) -> Result<f64> {
    let t = phase.threshold;
    if t == 0.0 {
        return Ok(0.0);
    }
    let r_min = phase.rates.iter().copied().fold(f64::INFINITY, f64::min);
    // A phase with rate ν moves Q by a factor of at most ν/(ν - ν_min).
    let rates: Vec<f64> = phase.rates.iter().copied().filter(|&r| r_min / r >= 1e-17).collect();
    if rates.len() == 1 {
        return Ok(-r_min * t);
    }
    let diag: Vec<f64> = rates.iter().map(|r| (r_min - r) * t).collect();
    let sup: Vec<f64> = rates[..rates.len() - 1].iter().map(|r| r * t).collect();
    let out = log_first_row_sum(&diag, &sup) - r_min * t;
    if out.is_nan() {
        return Err(Error::Degenerate("tail probability evaluated to NaN".into()));
    }
    Ok(out.min(0.0))
}

/// Tail probability of the phase-type variable, clamped to `[0, 1]`.
pub fn erlang_tail(phase: &ErlangPhase) -> Result<f64> {
    Ok(log_erlang_tail(phase)?.exp().clamp(0.0, 1.0))
}

/// Closed form `Σᵢ e^{-νᵢt}·Π_{j≠i} ν_j/(ν_j - νᵢ)` for distinct rates.
///
/// Rates closer than `1e-8` relative are rejected; the alternating sum loses
/// all precision there and [`erlang_tail`] should be used.
pub fn hypoexponential_tail(rates: &[f64], t: f64) -> Result<f64> {
    let phase = ErlangPhase::from_rates(rates.to_vec(), t)?;
    let nu = phase.rates();
    for i in 0..nu.len() {
        for j in 0..i {
            if (nu[i] - nu[j]).abs() <= 1e-8 * nu[i].max(nu[j]) {
                return Err(domain(format!("rates {} and {} are not distinct", nu[j], nu[i])));
            }
        }
    }
    let mut total = 0.0;
    for (i, &ni) in nu.iter().enumerate() {
        let mut coef = 1.0;
        for (j, &nj) in nu.iter().enumerate() {
            if j != i {
                coef *= nj / (nj - ni);
            }
        }
        total += coef * (-ni * t).exp();
    }
    Ok(total)
}

/// Tangent point `λ > 0` of the lower bound for a given problem.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationalParams {
    lambdas: Vec<f64>,
    alpha: f64,
    gamma: f64,
}

impl VariationalParams {
    pub fn new(spec: &ProblemSpec, lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.len() != spec.d() {
            return Err(Error::DimensionMismatch(format!(
                "{} tangent coordinates for dimension {}",
                lambdas.len(),
                spec.d()
            )));
        }
        if lambdas.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(domain("tangent point must be finite and > 0"));
        }
        if spec.alpha() > 1.0 {
            return Err(domain(format!(
                "the tangent plane bounds S from below only for α <= 1, got {}",
                spec.alpha()
            )));
        }
        Ok(Self {
            lambdas,
            alpha: spec.alpha(),
            gamma: spec.gamma(),
        })
    }

    /// The symmetric tangent point `λᵢ = (γ/d)^α`, the image of `x = γ/d·1`.
    pub fn symmetric(spec: &ProblemSpec) -> Result<Self> {
        Self::new(
            spec,
            vec![(spec.gamma() / spec.d() as f64).powf(spec.alpha()); spec.d()],
        )
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `γ* = αγ + (1-α)·Σ λᵢ^{1/α}`.
    pub fn gamma_star(&self) -> f64 {
        let a = self.alpha;
        a * self.gamma + (1.0 - a) * self.lambdas.iter().map(|l| l.powf(1.0 / a)).sum::<f64>()
    }

    /// Tangent coefficients `cᵢ = λᵢ^{1/α-1}`.
    pub fn coefficients(&self) -> Vec<f64> {
        let p = 1.0 / self.alpha - 1.0;
        self.lambdas.iter().map(|l| l.powf(p)).collect()
    }

    /// `β_j = (c_j + … + c_d)/(d - j + 1)`.
    pub fn betas(&self) -> Vec<f64> {
        let c = self.coefficients();
        let d = c.len();
        let mut out = vec![0.0; d];
        let mut acc = 0.0;
        for j in (0..d).rev() {
            acc += c[j];
            out[j] = acc / (d - j) as f64;
        }
        out
    }

    /// Whether the sorted row `y` lies in `{S_L ≥ γ}`, i.e. `Σ cᵢ y_[i] ≥ γ*`.
    pub fn linearized_hit(&self, sorted_y: &[f64]) -> bool {
        self.coefficients()
            .iter()
            .zip(sorted_y)
            .map(|(c, y)| c * y)
            .sum::<f64>()
            >= self.gamma_star()
    }
}

/// `S_L(y; λ)`; never exceeds `Σ yᵢ^{1/α}` for `y ≥ 0`.
pub fn s_lower(y: &[f64], params: &VariationalParams) -> f64 {
    let a = params.alpha;
    let c = params.coefficients();
    let lin: f64 = c.iter().zip(y).map(|(c, y)| c * y).sum();
    let off: f64 = params.lambdas.iter().map(|l| l.powf(1.0 / a)).sum();
    lin / a - (1.0 - a) / a * off
}

/// `ℓ_L = P(S_L(Y_sorted; λ) ≥ γ)`.
pub fn bound_value(params: &VariationalParams) -> Result<f64> {
    erlang_tail(&ErlangPhase::from_variational(params)?)
}

pub fn log_bound_value(params: &VariationalParams) -> Result<f64> {
    log_erlang_tail(&ErlangPhase::from_variational(params)?)
}

/// Cross-entropy search settings on `ln λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CeOptions {
    pub population: usize,
    pub init_mean: f64,
    pub init_std: f64,
    pub elite_fraction: f64,
    /// Stop once the population maximum of `ℓ_L` changes by less than this,
    /// relatively, between iterations.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CeOptions {
    fn default() -> Self {
        Self {
            population: 1000,
            init_mean: 0.0,
            init_std: 3.0,
            elite_fraction: 0.5,
            tol: 1e-6,
            max_iter: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CeResult {
    pub params: VariationalParams,
    pub ell_l: f64,
    pub log_ell_l: f64,
    pub iterations: usize,
    pub converged: bool,
    pub cpu_seconds: f64,
}

/// Maximize `ℓ_L(λ)` by cross-entropy search over `ln λ`.
///
/// Each iteration draws a Gaussian population, keeps the better half by
/// `ln ℓ_L` and refits mean and standard deviation to it. The symmetric tangent
/// point seeds the incumbent, so the result never falls below it.
pub fn ce_maximize_bound(spec: &ProblemSpec, opts: &CeOptions, rng: &mut RandomStream) -> Result<CeResult> {
    if opts.population < 2 {
        return Err(domain("population must hold at least two candidates"));
    }
    if !(opts.elite_fraction > 0.0 && opts.elite_fraction <= 1.0) {
        return Err(domain("elite fraction must lie in (0, 1]"));
    }
    if !(opts.init_std > 0.0) {
        return Err(domain("initial standard deviation must be > 0"));
    }
    let start = Instant::now();
    let d = spec.d();
    let score = |log_lam: &[f64]| -> f64 {
        let lam: Vec<f64> = log_lam.iter().map(|v| v.exp()).collect();
        match VariationalParams::new(spec, lam).and_then(|p| log_bound_value(&p)) {
            Ok(v) if !v.is_nan() => v,
            _ => f64::NEG_INFINITY,
        }
    };
    let sym = VariationalParams::symmetric(spec)?;
    let mut best_x: Vec<f64> = sym.lambdas().iter().map(|l| l.ln()).collect();
    let mut best = score(&best_x);
    let mut mean = vec![opts.init_mean; d];
    let mut std = vec![opts.init_std; d];
    let n = opts.population;
    let n_elite = ((opts.elite_fraction * n as f64).floor() as usize).clamp(2, n);
    let mut prev_max = f64::NAN;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        let pop: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|k| mean[k] + std[k] * rng.standard_normal()).collect())
            .collect();
        let scores: Vec<f64> = pop.par_iter().map(|x| score(x)).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
        let top = scores[order[0]];
        if top > best {
            best = top;
            best_x = pop[order[0]].clone();
        }
        let elite = &order[..n_elite];
        for k in 0..d {
            let m = elite.iter().map(|&i| pop[i][k]).sum::<f64>() / n_elite as f64;
            let v = elite.iter().map(|&i| (pop[i][k] - m).powi(2)).sum::<f64>() / (n_elite - 1) as f64;
            mean[k] = m;
            std[k] = v.sqrt();
        }
        // |Δ ln max ℓ_L| approximates the relative change of max ℓ_L.
        if top.is_finite() && prev_max.is_finite() && (top - prev_max).abs() < opts.tol {
            converged = true;
            break;
        }
        if std.iter().all(|s| *s == 0.0) {
            converged = true;
            break;
        }
        prev_max = top;
    }
    let at_mean = score(&mean);
    if at_mean > best {
        best = at_mean;
        best_x = mean;
    }
    let params = VariationalParams::new(spec, best_x.iter().map(|v| v.exp()).collect())?;
    Ok(CeResult {
        params,
        ell_l: best.exp().clamp(0.0, 1.0),
        log_ell_l: best,
        iterations,
        converged,
        cpu_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Sample sizes and controls for [`scheme_b_run`].
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeBOptions {
    /// Size of the lower-bound block.
    pub n1: usize,
    /// Length of the zero-variance chain.
    pub n2: usize,
    /// Count the lower-bound block without drawing it; every such sample lies
    /// in both supports, so its weight column is `(1, 1)`.
    pub virtual_f1: bool,
    pub ce: CeOptions,
    pub gibbs: GibbsOptions,
    pub solver: SolverOptions,
}

impl SchemeBOptions {
    pub fn equal(n: usize) -> Self {
        Self {
            n1: n,
            n2: n,
            virtual_f1: true,
            ce: CeOptions::default(),
            gibbs: GibbsOptions::default(),
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SchemeBResult {
    pub solution: ElmSolution,
    pub ce: CeResult,
    /// Known constant of the lower-bound density.
    pub ell_l: f64,
    pub ell_s: f64,
    pub log_ell_s: f64,
    /// Chain rows inside the linearized event.
    pub hits: usize,
    pub n1: usize,
    pub n2: usize,
    /// The ordering constraint is active (`hits = n2`).
    pub boundary: bool,
    pub cpu_seconds: f64,
}

/// Stationary point of the two-density likelihood, `ℓ̂₂ = ℓ_L·n₂/hits`.
pub fn scheme_b_closed_form(ell_l: f64, n2: usize, hits: usize) -> Result<f64> {
    if hits == 0 {
        return Err(Error::Degenerate(
            "no chain sample satisfies the linearized event; the likelihood is unbounded".into(),
        ));
    }
    if hits > n2 {
        return Err(domain(format!("{hits} hits exceed {n2} samples")));
    }
    Ok(ell_l * n2 as f64 / hits as f64)
}

/// Two-density ELM anchored on the maximized lower bound.
///
/// Runs [`ce_maximize_bound`] on substream 0, draws the zero-variance chain on
/// substream 1 and, unless the block is virtual, the lower-bound density on
/// substream 2. The program keeps `ℓ̂₁ ≤ ℓ̂₂` as an inequality row and rescales
/// so that `ℓ̂₁ = ℓ_L`.
pub fn scheme_b_run(spec: &ProblemSpec, opts: &SchemeBOptions, rng: &RandomStream) -> Result<SchemeBResult> {
    if opts.n1 == 0 || opts.n2 == 0 {
        return Err(Error::EmptyInput("both densities need at least one sample".into()));
    }
    if spec.gamma() <= 0.0 {
        return Err(domain("threshold must be > 0"));
    }
    let start = Instant::now();
    let ce = ce_maximize_bound(spec, &opts.ce, &mut rng.substream(0))?;
    if !(ce.ell_l > 0.0) {
        return Err(Error::Degenerate(format!("lower bound {:e} is not positive", ce.ell_l)));
    }
    let chain = gibbs_scheme_b_with(spec, opts.n2, &opts.gibbs, &mut rng.substream(1))?;
    let params = &ce.params;
    let hits = chain.rows().filter(|y| params.linearized_hit(y)).count();

    let inv = 1.0 / spec.alpha();
    let gamma = spec.gamma();
    let mut row1 = Vec::with_capacity(opts.n1 + opts.n2);
    let mut row2 = Vec::with_capacity(opts.n1 + opts.n2);
    if opts.virtual_f1 {
        row1.resize(opts.n1, 1.0);
        row2.resize(opts.n1, 1.0);
    } else {
        let f1: SampleBlock = gibbs_lower_bound_density_with(
            &params.betas(),
            params.gamma_star(),
            opts.n1,
            &opts.gibbs,
            &mut rng.substream(2),
        )?;
        for y in f1.rows() {
            row1.push(1.0);
            row2.push(if y.iter().map(|v| v.powf(inv)).sum::<f64>() >= gamma {
                1.0
            } else {
                0.0
            });
        }
    }
    for y in chain.rows() {
        row1.push(if params.linearized_hit(y) { 1.0 } else { 0.0 });
        row2.push(1.0);
    }
    let sources: Vec<usize> = (0..opts.n1 + opts.n2).map(|j| usize::from(j >= opts.n1)).collect();
    let w = WeightMatrix::from_rows(&[row1, row2], sources)?;
    let n = (opts.n1 + opts.n2) as f64;
    let lambdas = [opts.n1 as f64 / n, opts.n2 as f64 / n];
    let known = KnownConstant {
        index: 0,
        log_value: ce.log_ell_l,
    };
    let constraints = LinearConstraints::homogeneous(&lambdas).ordered(&lambdas, 0, 1);
    let solution = constrained_minimize(&w, &lambdas, &constraints, known, opts.solver)?;
    let log_ell_s = solution.log_ell_hat[1];
    Ok(SchemeBResult {
        ell_l: ce.ell_l,
        ell_s: log_ell_s.exp(),
        log_ell_s,
        hits,
        n1: opts.n1,
        n2: opts.n2,
        boundary: hits == opts.n2,
        cpu_seconds: start.elapsed().as_secs_f64(),
        ce,
        solution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erlang_examples() {
        let p = ErlangPhase::from_rates(vec![1.0], 0.0).unwrap();
        assert_eq!(erlang_tail(&p).unwrap(), 1.0);
        let p = ErlangPhase::from_rates(vec![1.0, 1.0], 5.0).unwrap();
        assert!((erlang_tail(&p).unwrap() - 6.0 * (-5.0f64).exp()).abs() < 1e-14);
        let p = ErlangPhase::from_rates(vec![1.0, 2.0], 1.0).unwrap();
        let exact = 2.0 * (-1.0f64).exp() - (-2.0f64).exp();
        assert!((erlang_tail(&p).unwrap() - exact).abs() < 1e-14);
        assert!((hypoexponential_tail(&[1.0, 2.0], 1.0).unwrap() - exact).abs() < 1e-15);
        assert!(hypoexponential_tail(&[1.0, 1.0], 1.0).is_err());
    }

    #[test]
    fn deep_tail_stays_in_log_domain() {
        // Erlang(3,1) tail at t: e^{-t}(1 + t + t²/2)
        let t = 2000.0;
        let p = ErlangPhase::from_rates(vec![1.0; 3], t).unwrap();
        let exact = -t + (1.0 + t + t * t / 2.0f64).ln();
        let got = log_erlang_tail(&p).unwrap();
        assert!((got - exact).abs() < 1e-10 * exact.abs(), "{got} vs {exact}");
        assert_eq!(erlang_tail(&p).unwrap(), 0.0);
    }

    #[test]
    fn tangent_point_is_exact() {
        let spec = ProblemSpec::new(3, 0.5, 10.0).unwrap();
        let p = VariationalParams::new(&spec, vec![0.5, 1.0, 2.0]).unwrap();
        let s: f64 = p.lambdas().iter().map(|l| l * l).sum();
        assert!((s_lower(p.lambdas(), &p) - s).abs() < 1e-12);
    }

    #[test]
    fn betas_average_the_tail() {
        let spec = ProblemSpec::new(3, 0.5, 10.0).unwrap();
        let p = VariationalParams::new(&spec, vec![1.0, 2.0, 3.0]).unwrap();
        let b = p.betas();
        assert!((b[0] - 2.0).abs() < 1e-15);
        assert!((b[1] - 2.5).abs() < 1e-15);
        assert!((b[2] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_edges() {
        assert!(matches!(scheme_b_closed_form(1e-3, 10, 0), Err(Error::Degenerate(_))));
        assert_eq!(scheme_b_closed_form(1e-3, 10, 10).unwrap(), 1e-3);
        assert!((scheme_b_closed_form(1e-3, 10, 5).unwrap() - 2e-3).abs() < 1e-18);
    }

    #[test]
    fn ce_linear_case_is_erlang() {
        let spec = ProblemSpec::new(4, 1.0, 10.0).unwrap();
        let ce = ce_maximize_bound(
            &spec,
            &CeOptions {
                population: 50,
                ..Default::default()
            },
            &mut RandomStream::new(5, 0),
        )
        .unwrap();
        let exact = (-10.0f64).exp() * (1.0 + 10.0 + 50.0 + 1000.0 / 6.0);
        assert!((ce.ell_l / exact - 1.0).abs() < 1e-10, "{} vs {exact}", ce.ell_l);
    }
}

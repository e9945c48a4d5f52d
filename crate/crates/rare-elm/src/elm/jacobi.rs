use super::{check_connectivity, KnownConstant, WeightMatrix};
use crate::error::{Error, Result};

/// Stopping rule and iteration cap for [`jacobi_solve_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for JacobiOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 100_000,
        }
    }
}

/// Fixed-point iteration on the moment-matching equations
/// `ℓ_i = Σ_j w_ij / Σ_k w_kj·n_k/ℓ_k`, started from `ℓ = 1`.
///
/// The equations only determine `ℓ` up to scale; the result is rescaled so that
/// `ℓ_known` equals the known value. Iteration stops once
/// `max_i |ℓ_i - ℓ_i'|/ℓ_i ≤ tol` between successive iterates.
pub fn jacobi_solve(w: &WeightMatrix, counts: &[usize], known: KnownConstant, tol: f64) -> Result<Vec<f64>> {
    jacobi_solve_with(
        w,
        counts,
        known,
        JacobiOptions {
            tol,
            ..Default::default()
        },
    )
}

pub fn jacobi_solve_with(
    w: &WeightMatrix,
    counts: &[usize],
    known: KnownConstant,
    opts: JacobiOptions,
) -> Result<Vec<f64>> {
    let s = w.s();
    if counts.len() != s || known.index >= s {
        return Err(Error::DimensionMismatch(format!(
            "{} counts and reference {} for {s} densities",
            counts.len(),
            known.index
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Domain("tolerance must be > 0".into()));
    }
    let conn = check_connectivity(w);
    if !conn.connected {
        return Err(Error::Disconnected(conn.components));
    }
    // Column scaling cancels between numerator and denominator, so the
    // max-normalized weights give the same iteration without overflow.
    let n = w.n();
    let mut ell = vec![1.0; s];
    let mut next = vec![0.0; s];
    let mut c = vec![0.0; s];
    let mut change = f64::INFINITY;
    for _ in 0..opts.max_iter {
        for k in 0..s {
            c[k] = counts[k] as f64 / ell[k];
        }
        next.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..n {
            let col = w.scaled_column(j);
            let denom: f64 = col.iter().zip(&c).map(|(a, c)| a * c).sum();
            for i in 0..s {
                next[i] += col[i] / denom;
            }
        }
        let scale = next[known.index];
        for v in next.iter_mut() {
            *v /= scale;
        }
        change = next
            .iter()
            .zip(&ell)
            .map(|(a, b)| ((a - b) / a).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut ell, &mut next);
        if change <= opts.tol {
            let v = known.log_value.exp();
            return Ok(ell.iter().map(|l| l * v).collect());
        }
    }
    Err(Error::MaxIterations {
        iterations: opts.max_iter,
        residual: change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_densities() {
        let w = WeightMatrix::from_rows(&[vec![1.0; 6], vec![1.0; 6]], vec![0, 0, 0, 1, 1, 1]).unwrap();
        let ell = jacobi_solve(&w, &[3, 3], KnownConstant::new(0, 1.0), 1e-12).unwrap();
        assert!((ell[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disconnected_rejected() {
        let w = WeightMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]], vec![0, 1]).unwrap();
        assert!(matches!(
            jacobi_solve(&w, &[1, 1], KnownConstant::new(0, 1.0), 1e-10),
            Err(Error::Disconnected(_))
        ));
    }

    #[test]
    fn half_support_ratio() {
        // f₂ = f₁·𝕀{A}: 4 of the 10 draws from f₁ land in A, all 5 from f₂ do.
        let n1 = 10;
        let upper_from_f1 = 4;
        let row1 = vec![1.0; 15];
        let mut row2 = vec![0.0; 15];
        for v in row2.iter_mut().take(upper_from_f1) {
            *v = 1.0;
        }
        for v in row2.iter_mut().skip(n1) {
            *v = 1.0;
        }
        let sources: Vec<usize> = (0..15).map(|j| usize::from(j >= n1)).collect();
        let w = WeightMatrix::from_rows(&[row1, row2], sources).unwrap();
        let ell = jacobi_solve(&w, &[10, 5], KnownConstant::new(0, 1.0), 1e-13).unwrap();
        assert!((ell[1] - 0.4).abs() < 1e-10, "{ell:?}");
    }
}

//! Benchmark estimators and efficiency metrics.
//!
//! Single-run estimators report the within-run relative error
//! `RE = sd(Z)/(ℓ̂·√N)`. [`efficiency_report`] instead measures spread across
//! independent full runs, which is how ELM estimates are assessed.

use std::time::Instant;

use crate::distributions::RandomStream;
use crate::error::{Error, Result};
use crate::samplers::{log_marginal_ratio, row_sum, sample_f2, MarginalTable, ProblemSpec};

/// Flag attached when crude Monte Carlo sees no hits.
pub const NO_HITS: &str = "no-hits";

/// Estimate with its efficiency figures.
///
/// `rv = re²` and `rtvp = cpu_seconds·rv` for single runs; for replicate
/// summaries `rtvp = reps·cpu_seconds·rv` with `cpu_seconds` per run.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub ell_hat: f64,
    pub re: f64,
    pub rv: f64,
    pub rtvp: f64,
    pub cpu_seconds: f64,
    pub n: usize,
    pub reps: usize,
    pub flags: Vec<String>,
}

impl EstimateReport {
    pub fn log10_ell(&self) -> f64 {
        self.ell_hat.log10()
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }
}

/// Sample mean and `N-1` standard deviation. Constant samples give exactly 0.
pub fn sample_stats(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let first = values[0];
    if values.iter().all(|&v| v == first) {
        return (first, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

/// Single-run report from per-sample values `Z₁…Z_N`.
pub fn within_run_report(values: &[f64], cpu_seconds: f64) -> EstimateReport {
    let (mean, sd) = sample_stats(values);
    let re = if sd == 0.0 {
        0.0
    } else {
        sd / (mean * (values.len() as f64).sqrt())
    };
    single_run(mean, re, cpu_seconds, values.len())
}

fn single_run(ell_hat: f64, re: f64, cpu_seconds: f64, n: usize) -> EstimateReport {
    let rv = re * re;
    EstimateReport {
        ell_hat,
        re,
        rv,
        rtvp: cpu_seconds * rv,
        cpu_seconds,
        n,
        reps: 1,
        flags: Vec::new(),
    }
}

/// `τ·Var(Z)/ℓ²`, the work-normalized squared relative error of one sample.
pub fn rtvp(variance: f64, ell: f64, tau: f64) -> f64 {
    tau * variance / (ell * ell)
}

/// Crude Monte Carlo: the hit fraction of `n` iid Weibull vectors.
///
/// Zero hits yield `ell_hat = 0`, an undefined (`NaN`) relative error and the
/// [`NO_HITS`] flag rather than an error.
pub fn cmc_estimate(spec: &ProblemSpec, n: usize, rng: &mut RandomStream) -> Result<EstimateReport> {
    if n == 0 {
        return Err(Error::EmptyInput("sample size must be >= 1".into()));
    }
    let start = Instant::now();
    let inv = 1.0 / spec.alpha();
    let gamma = spec.gamma();
    let mut hits = 0usize;
    for _ in 0..n {
        let mut s = 0.0;
        for _ in 0..spec.d() {
            s += (-rng.uniform_pos().ln()).powf(inv);
        }
        if s >= gamma {
            hits += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let p = hits as f64 / n as f64;
    if hits == 0 {
        let mut r = single_run(0.0, f64::NAN, secs, n);
        r.flags.push(NO_HITS.to_string());
        return Ok(r);
    }
    let re = if hits == n || n < 2 {
        0.0
    } else {
        let var = p * (1.0 - p) * n as f64 / (n - 1) as f64;
        var.sqrt() / (p * (n as f64).sqrt())
    };
    Ok(single_run(p, re, secs, n))
}

/// Asmussen–Kroese conditional estimator.
///
/// Each replication draws `X₁…X_{d-1}` and returns
/// `d·F̄(max(γ - Σ_{j<d} X_j, max_{j<d} X_j))`, unbiased for `ℓ`. At `d = 1`
/// every replication equals `e^{-γ^α}` exactly.
pub fn ak_estimate(spec: &ProblemSpec, n: usize, rng: &mut RandomStream) -> Result<EstimateReport> {
    if n == 0 {
        return Err(Error::EmptyInput("sample size must be >= 1".into()));
    }
    let start = Instant::now();
    let (d, alpha, gamma) = (spec.d(), spec.alpha(), spec.gamma());
    let inv = 1.0 / alpha;
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let mut s = 0.0;
        let mut m: f64 = 0.0;
        for _ in 1..d {
            let x = (-rng.uniform_pos().ln()).powf(inv);
            s += x;
            m = m.max(x);
        }
        let t = (gamma - s).max(m);
        ys.push(d as f64 * (-t.powf(alpha)).exp());
    }
    Ok(within_run_report(&ys, start.elapsed().as_secs_f64()))
}

/// Importance sampling from the product of estimated marginals:
/// mean of `𝕀{S(Y) ≥ γ}·f(Y)/f₂(Y)` over `Y ~ f₂`.
pub fn mcis_estimate(
    spec: &ProblemSpec,
    table: &MarginalTable,
    m: usize,
    rng: &mut RandomStream,
) -> Result<EstimateReport> {
    if table.d() != spec.d() {
        return Err(Error::DimensionMismatch(format!(
            "table dimension {} differs from {}",
            table.d(),
            spec.d()
        )));
    }
    let start = Instant::now();
    let ys = sample_f2(table, m, rng)?;
    let gamma = spec.gamma();
    let mut vals = Vec::with_capacity(m);
    for (k, y) in ys.rows().enumerate() {
        if row_sum(y) >= gamma {
            let lr = log_marginal_ratio(table, y);
            if lr == f64::NEG_INFINITY {
                return Err(Error::Degenerate(format!(
                    "importance draw {k} lies outside the support of the marginal table"
                )));
            }
            vals.push((-lr).exp());
        } else {
            vals.push(0.0);
        }
    }
    Ok(within_run_report(&vals, start.elapsed().as_secs_f64()))
}

/// Summarize independent replicate estimates `ℓ̂₁…ℓ̂_K`.
///
/// `re = sd/mean` treats each replicate as one draw, `rtvp = K·τ·re²` with
/// `τ = per_run_seconds`.
pub fn efficiency_report(replicates: &[f64], per_run_seconds: f64) -> Result<EstimateReport> {
    if replicates.len() < 2 {
        return Err(Error::EmptyInput("efficiency needs at least two replicates".into()));
    }
    let (mean, sd) = sample_stats(replicates);
    if mean == 0.0 || !mean.is_finite() {
        return Err(Error::Degenerate(format!("replicate mean is {mean}")));
    }
    let re = sd / mean;
    let rv = re * re;
    let reps = replicates.len();
    Ok(EstimateReport {
        ell_hat: mean,
        re,
        rv,
        rtvp: reps as f64 * per_run_seconds * rv,
        cpu_seconds: per_run_seconds,
        n: 0,
        reps,
        flags: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::{build_marginal_table, gibbs_fs};

    #[test]
    fn stats_of_constant_sample_are_exact() {
        assert_eq!(sample_stats(&[0.1; 7]), (0.1, 0.0));
        let (m, s) = sample_stats(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn efficiency_examples() {
        let r = efficiency_report(&[1.0, 1.0, 1.0], 2.0).unwrap();
        assert_eq!((r.re, r.rtvp), (0.0, 0.0));

        // mean 0.1 and sd 0.02 over 100 replicates
        let mut reps = vec![0.1; 100];
        let h = 0.02 * (99.0f64 / 100.0).sqrt();
        for (i, v) in reps.iter_mut().enumerate() {
            *v += if i % 2 == 0 { h } else { -h };
        }
        let r = efficiency_report(&reps, 1.0).unwrap();
        assert!((r.ell_hat - 0.1).abs() < 1e-15);
        assert!((r.re - 0.2).abs() < 1e-12);
        assert!((r.rtvp - 4.0).abs() < 1e-10);
        assert_eq!(r.rv, r.re * r.re);

        assert!((rtvp(4.0, 0.1, 2.0) - 800.0).abs() < 1e-9);
        assert!(efficiency_report(&[0.0, 0.0], 1.0).is_err());
        assert!(efficiency_report(&[1.0], 1.0).is_err());
    }

    #[test]
    fn cmc_certain_event() {
        let mut rng = RandomStream::new(1, 0);
        let r = cmc_estimate(&ProblemSpec::new(3, 0.5, 0.0).unwrap(), 1000, &mut rng).unwrap();
        assert_eq!((r.ell_hat, r.re), (1.0, 0.0));
    }

    #[test]
    fn cmc_flags_no_hits() {
        let mut rng = RandomStream::new(1, 1);
        let r = cmc_estimate(&ProblemSpec::new(10, 0.9, 90.0).unwrap(), 1000, &mut rng).unwrap();
        assert_eq!(r.ell_hat, 0.0);
        assert!(r.re.is_nan());
        assert!(r.has_flag(NO_HITS));
    }

    #[test]
    fn ak_exact_in_one_dimension() {
        let mut rng = RandomStream::new(2, 0);
        for &(a, g) in &[(0.5, 4.0), (1.0, 3.0), (0.2, 10.0)] {
            let r = ak_estimate(&ProblemSpec::new(1, a, g).unwrap(), 50, &mut rng).unwrap();
            assert_eq!(r.ell_hat, (-g.powf(a)).exp());
            assert_eq!(r.re, 0.0);
            assert_eq!(r.rv, 0.0);
        }
    }

    #[test]
    fn mcis_identity_table_is_cmc() {
        let spec = ProblemSpec::new(2, 1.0, 3.0).unwrap();
        let table = MarginalTable::from_constants(&spec, vec![0.0], 1).unwrap();
        let mut rng = RandomStream::new(3, 0);
        let r = mcis_estimate(&spec, &table, 20_000, &mut rng).unwrap();
        let exact = (-3.0f64).exp() * 4.0;
        let se = r.re * r.ell_hat;
        assert!((r.ell_hat - exact).abs() < 4.0 * se, "{} vs {exact}", r.ell_hat);
    }

    #[test]
    fn mcis_one_dimension_is_exact_in_expectation() {
        let spec = ProblemSpec::new(1, 0.6, 8.0).unwrap();
        let mut rng = RandomStream::new(4, 0);
        let fs = gibbs_fs(&spec, 2000, &mut rng).unwrap();
        let table = build_marginal_table(&spec, &fs, 0.5, true, &mut rng).unwrap();
        let r = mcis_estimate(&spec, &table, 20_000, &mut rng).unwrap();
        let exact = (-(8.0f64).powf(0.6)).exp();
        assert!((r.ell_hat - exact).abs() <= 3.0 * r.re * r.ell_hat + 1e-13 * exact);
    }
}

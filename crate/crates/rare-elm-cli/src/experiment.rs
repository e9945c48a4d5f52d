use std::time::Instant;

use rare_elm::distributions::splitmix64;
use rare_elm::elm::{scheme_a_run, SchemeAOptions};
use rare_elm::estimators::{ak_estimate, cmc_estimate, efficiency_report, mcis_estimate, sample_stats};
use rare_elm::lower_bound::{ce_maximize_bound, scheme_b_run, CeOptions, SchemeBOptions, BOUNDARY};
use rare_elm::samplers::{build_marginal_table, gibbs_fs_with, GibbsOptions};
use rare_elm::{ProblemSpec, RandomStream};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, Method};
use crate::output::ResultRow;

/// Flag for replicates whose optimizer stopped short of the tolerance.
pub const NOT_CONVERGED: &str = "not-converged";

/// Root stream of a cell: `seed ⊕ hash(α, γ, d, method)`.
pub fn cell_stream(cfg: &ExperimentConfig) -> RandomStream {
    let mut h = splitmix64(cfg.alpha.to_bits());
    h = splitmix64(h ^ cfg.gamma.to_bits());
    h = splitmix64(h ^ cfg.d as u64);
    h = splitmix64(h ^ cfg.method as u64);
    RandomStream::new(cfg.seed ^ h, 0)
}

/// Outcome of one replicate.
#[derive(Debug, Clone)]
struct Replicate {
    ell: f64,
    within_re: Option<f64>,
    seconds: f64,
    flags: Vec<String>,
}

fn gibbs(cfg: &ExperimentConfig) -> GibbsOptions {
    GibbsOptions {
        burn_in: cfg.burn_in,
        thin: cfg.thin,
        ..GibbsOptions::default()
    }
}

fn replicate(cfg: &ExperimentConfig, rng: RandomStream) -> rare_elm::Result<Replicate> {
    let spec = ProblemSpec::new(cfg.d, cfg.alpha, cfg.gamma)?;
    let n = cfg.n_per_density;
    let budget = cfg.method.budget(n);
    let start = Instant::now();
    let mut flags = Vec::new();
    let (ell, within_re) = match cfg.method {
        Method::Cmc | Method::Ak => {
            let mut r = rng;
            let rep = if cfg.method == Method::Cmc {
                cmc_estimate(&spec, budget, &mut r)?
            } else {
                ak_estimate(&spec, budget, &mut r)?
            };
            flags.extend(rep.flags.iter().cloned());
            (rep.ell_hat, Some(rep.re))
        }
        Method::Mcis => {
            let chain = gibbs_fs_with(&spec, budget, &gibbs(cfg), &mut rng.substream(0))?;
            let table = build_marginal_table(&spec, &chain, cfg.subsample, true, &mut rng.substream(1))?;
            let rep = mcis_estimate(&spec, &table, budget, &mut rng.substream(2))?;
            (rep.ell_hat, Some(rep.re))
        }
        Method::ElmA | Method::ElmA3 => {
            let mut opts = SchemeAOptions::equal(n, cfg.method == Method::ElmA);
            opts.subsample_fraction = cfg.subsample;
            opts.gibbs = gibbs(cfg);
            let r = scheme_a_run(&spec, &opts, &rng)?;
            if !r.solution.converged {
                flags.push(NOT_CONVERGED.to_string());
            }
            (r.ell_s, None)
        }
        Method::ElmB => {
            let mut opts = SchemeBOptions::equal(n);
            opts.gibbs = gibbs(cfg);
            let r = scheme_b_run(&spec, &opts, &rng)?;
            if r.boundary {
                flags.push(BOUNDARY.to_string());
            }
            if !r.solution.converged {
                flags.push(NOT_CONVERGED.to_string());
            }
            (r.ell_s, None)
        }
        Method::LowerBound => {
            let r = ce_maximize_bound(&spec, &CeOptions::default(), &mut rng.clone())?;
            if !r.converged {
                flags.push(NOT_CONVERGED.to_string());
            }
            (r.ell_l, None)
        }
    };
    Ok(Replicate {
        ell,
        within_re,
        seconds: start.elapsed().as_secs_f64(),
        flags,
    })
}

fn push_unique(flags: &mut Vec<String>, f: &str) {
    if !flags.iter().any(|g| g == f) {
        flags.push(f.to_string());
    }
}

fn aggregate(cfg: &ExperimentConfig, outcomes: Vec<rare_elm::Result<Replicate>>) -> ResultRow {
    let mut flags = Vec::new();
    let mut ok = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => {
                for f in &r.flags {
                    push_unique(&mut flags, f);
                }
                ok.push(r);
            }
            Err(e) => push_unique(&mut flags, &e.to_string()),
        }
    }
    let mut row = ResultRow {
        method: cfg.method,
        alpha: cfg.alpha,
        gamma: cfg.gamma,
        d: cfg.d,
        n: cfg.method.budget(cfg.n_per_density),
        reps: cfg.reps,
        ell_hat: f64::NAN,
        re: f64::NAN,
        rtvp: f64::NAN,
        cpu_seconds: f64::NAN,
        flags,
    };
    if ok.is_empty() {
        return row;
    }
    let tau = ok.iter().map(|r| r.seconds).sum::<f64>() / ok.len() as f64;
    let values: Vec<f64> = ok.iter().map(|r| r.ell).collect();
    row.cpu_seconds = tau;
    if ok.len() == 1 {
        row.ell_hat = values[0];
        row.re = ok[0].within_re.unwrap_or(f64::NAN);
        row.rtvp = tau * row.re * row.re;
        return row;
    }
    match efficiency_report(&values, tau) {
        Ok(rep) => {
            row.ell_hat = rep.ell_hat;
            row.re = rep.re;
            row.rtvp = rep.rtvp;
        }
        Err(_) => row.ell_hat = sample_stats(&values).0,
    }
    row
}

/// Replicate values of one cell, in replicate order. Failed replicates are
/// `Err`.
pub fn replicates(cfg: &ExperimentConfig) -> Vec<rare_elm::Result<f64>> {
    let root = cell_stream(cfg);
    (0..cfg.reps as u64)
        .into_par_iter()
        .map(|k| replicate(cfg, root.substream(k)).map(|r| r.ell))
        .collect()
}

/// Run `cfg.reps` replicates on disjoint substreams and summarize them.
pub fn run_experiment(cfg: &ExperimentConfig) -> Vec<ResultRow> {
    run_cells(std::slice::from_ref(cfg))
}

/// Run every cell, replicates in parallel, and return rows ordered by
/// (method, γ, α, d).
pub fn run_cells(cells: &[ExperimentConfig]) -> Vec<ResultRow> {
    let jobs: Vec<(usize, u64)> = cells
        .iter()
        .enumerate()
        .flat_map(|(i, c)| (0..c.reps as u64).map(move |k| (i, k)))
        .collect();
    let roots: Vec<RandomStream> = cells.iter().map(cell_stream).collect();
    let results: Vec<(usize, rare_elm::Result<Replicate>)> = jobs
        .into_par_iter()
        .map(|(i, k)| (i, replicate(&cells[i], roots[i].substream(k))))
        .collect();
    let mut per_cell: Vec<Vec<rare_elm::Result<Replicate>>> = cells.iter().map(|_| Vec::new()).collect();
    for (i, r) in results {
        per_cell[i].push(r);
    }
    let mut rows: Vec<ResultRow> = cells.iter().zip(per_cell).map(|(c, o)| aggregate(c, o)).collect();
    sort_rows(&mut rows);
    rows
}

/// The γ × α grid of `template`'s method and dimension.
pub fn sweep(template: &ExperimentConfig, gammas: &[f64], alphas: &[f64]) -> Vec<ResultRow> {
    let cells: Vec<ExperimentConfig> = gammas
        .iter()
        .flat_map(|&gamma| {
            alphas.iter().map(move |&alpha| ExperimentConfig {
                alpha,
                gamma,
                ..template.clone()
            })
        })
        .collect();
    run_cells(&cells)
}

pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        a.method
            .cmp(&b.method)
            .then(a.gamma.total_cmp(&b.gamma))
            .then(a.alpha.total_cmp(&b.alpha))
            .then(a.d.cmp(&b.d))
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_ak_in_one_dimension() {
        let mut cfg = ExperimentConfig::new(Method::Ak, 1.0, 2.0, 1);
        cfg.reps = 3;
        cfg.n_per_density = 100;
        let vals: Vec<f64> = replicates(&cfg).into_iter().map(|r| r.unwrap()).collect();
        assert!(vals.iter().all(|&v| (v - (-2.0f64).exp()).abs() < 1e-16));
        let rows = run_experiment(&cfg);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].re, 0.0);
    }

    #[test]
    fn cell_streams_differ_by_setting() {
        let a = ExperimentConfig::new(Method::Ak, 0.5, 10.0, 4);
        let mut b = a.clone();
        b.method = Method::Cmc;
        let mut c = a.clone();
        c.gamma = 11.0;
        let draw = |cfg: &ExperimentConfig| cell_stream(cfg).uniform();
        assert_ne!(draw(&a), draw(&b));
        assert_ne!(draw(&a), draw(&c));
        assert_eq!(draw(&a), draw(&a.clone()));
    }

    #[test]
    fn errors_become_flags() {
        let mut cfg = ExperimentConfig::new(Method::ElmA, 0.5, 10.0, 1);
        cfg.reps = 2;
        cfg.n_per_density = 50;
        let rows = run_experiment(&cfg);
        assert!(rows[0].ell_hat.is_nan());
        assert_eq!(rows[0].flags.len(), 1);
        assert!(rows[0].flags[0].contains("d >= 2"));
    }
}

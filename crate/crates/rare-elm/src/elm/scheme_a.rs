use std::sync::Arc;
use std::time::Instant;

use super::{
    build_weight_matrix, constrained_minimize, Component, DensitySequence, ElmSolution, SolverOptions, WeightMatrix,
};
use crate::distributions::RandomStream;
use crate::error::{Error, Result};
use crate::samplers::{
    build_marginal_table, gibbs_f3_with, gibbs_fs_with, log_marginal_ratio, row_sum, sample_f1, sample_f2,
    GibbsOptions, MarginalTable, ProblemSpec, SampleBlock,
};

/// Per-density sample sizes. `n3` is ignored by the three-density variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemeABudgets {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub ns: usize,
}

impl SchemeABudgets {
    pub fn equal(n: usize) -> Self {
        Self {
            n1: n,
            n2: n,
            n3: n,
            ns: n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeAOptions {
    pub budgets: SchemeABudgets,
    /// Keep `f₃ ∝ f·𝕀{S ≥ γ, max < γ}` in the sequence.
    pub include_f3: bool,
    /// Fraction of the `f_s` chain feeding the marginal table.
    pub subsample_fraction: f64,
    pub pool_coordinates: bool,
    pub gibbs: GibbsOptions,
    pub solver: SolverOptions,
}

impl SchemeAOptions {
    /// `n` samples per density and the default sampler settings.
    pub fn equal(n: usize, include_f3: bool) -> Self {
        Self {
            budgets: SchemeABudgets::equal(n),
            include_f3,
            subsample_fraction: 0.5,
            pool_coordinates: true,
            gibbs: GibbsOptions::default(),
            solver: SolverOptions::default(),
        }
    }
}

/// Outcome of one ELM run; the last component is the zero-variance density.
#[derive(Debug, Clone)]
pub struct SchemeAResult {
    pub solution: ElmSolution,
    pub ell_s: f64,
    pub log_ell_s: f64,
    pub cpu_seconds: f64,
    /// Total pooled sample size.
    pub n: usize,
    pub table: Option<Arc<MarginalTable>>,
}

/// Pooled Scheme-A sample: the density sequence, its weight matrix and the
/// marginal table behind `f₂`.
pub struct SchemeAProblem {
    pub sequence: DensitySequence,
    pub weights: WeightMatrix,
    pub table: Arc<MarginalTable>,
}

/// Draw every block of the sequence `f₁, f₂, [f₃,] f_s` and evaluate the
/// pooled weight matrix.
///
/// Independent substreams of `rng`: 0 for the `f_s` chain, 1 for the table
/// subsample, 2 for `f₂`, 3 for `f₃` and 4 for `f₁`.
pub fn scheme_a_problem(spec: &ProblemSpec, opts: &SchemeAOptions, rng: &RandomStream) -> Result<SchemeAProblem> {
    let d = spec.d();
    if opts.include_f3 && d < 2 {
        return Err(Error::Infeasible("the four-density sequence needs d >= 2".into()));
    }
    if spec.gamma() <= 0.0 {
        return Err(Error::Domain("threshold must be > 0".into()));
    }
    let b = opts.budgets;
    let fs = gibbs_fs_with(spec, b.ns, &opts.gibbs, &mut rng.substream(0))?;
    let table = Arc::new(build_marginal_table(
        spec,
        &fs,
        opts.subsample_fraction,
        opts.pool_coordinates,
        &mut rng.substream(1),
    )?);
    let f2 = sample_f2(&table, b.n2, &mut rng.substream(2))?;
    let f1 = sample_f1(spec, b.n1, &mut rng.substream(4))?;

    let gamma = spec.gamma();
    let ga = spec.gamma_alpha();
    let t = Arc::clone(&table);
    let mut comps = vec![
        Component::new(
            "f1",
            b.n1,
            Box::new(move |x: &[f64]| {
                let k = x.iter().filter(|&&v| v >= gamma).count();
                (k as f64).ln()
            }),
        )
        .known((d as f64).ln() - ga),
        Component::new("f2", b.n2, Box::new(move |x: &[f64]| log_marginal_ratio(&t, x))).known(0.0),
    ];
    let mut blocks: Vec<SampleBlock> = vec![f1, f2];
    if opts.include_f3 {
        let f3 = gibbs_f3_with(spec, b.n3, &opts.gibbs, &mut rng.substream(3))?;
        comps.push(Component::new(
            "f3",
            b.n3,
            Box::new(move |x: &[f64]| {
                if row_sum(x) >= gamma && x.iter().all(|&v| v < gamma) {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }),
        ));
        blocks.push(f3);
    }
    comps.push(Component::new(
        "fs",
        b.ns,
        Box::new(move |x: &[f64]| indicator(row_sum(x) >= gamma)),
    ));
    blocks.push(fs);

    let sequence = DensitySequence::new(comps)?;
    let weights = build_weight_matrix(&sequence, &blocks)?;
    Ok(SchemeAProblem {
        sequence,
        weights,
        table,
    })
}

/// ELM with the sequence `f₁, f₂, [f₃,] f_s`.
///
/// `f₁` mixes single-exceedance densities and has `ℓ₁ = d·e^{-γ^α}`; `f₂` is the
/// product-of-marginals estimate with `ℓ₂ = 1`. Both are imposed: the ratio
/// `ℓ₁/ℓ₂` as an equality row, the value of `ℓ₁` by rescaling. Sampling follows
/// [`scheme_a_problem`].
pub fn scheme_a_run(spec: &ProblemSpec, opts: &SchemeAOptions, rng: &RandomStream) -> Result<SchemeAResult> {
    let start = Instant::now();
    let SchemeAProblem {
        sequence: seq,
        weights: w,
        table,
    } = scheme_a_problem(spec, opts, rng)?;
    let lambdas = seq.lambdas();
    let solution = constrained_minimize(&w, &lambdas, &seq.default_constraints(), seq.reference(), opts.solver)?;
    let log_ell_s = *solution.log_ell_hat.last().expect("nonempty");
    Ok(SchemeAResult {
        ell_s: log_ell_s.exp(),
        log_ell_s,
        cpu_seconds: start.elapsed().as_secs_f64(),
        n: seq.total(),
        solution,
        table: Some(table),
    })
}

/// ELM with only `f` (known `ℓ = 1`) and the zero-variance density. Works for
/// every `d`, including `d = 1`.
///
/// Substream 0 drives the `f_s` chain, substream 1 the iid draws from `f`.
pub fn two_density_run(spec: &ProblemSpec, n_per_density: usize, rng: &RandomStream) -> Result<SchemeAResult> {
    if spec.gamma() <= 0.0 {
        return Err(Error::Domain("threshold must be > 0".into()));
    }
    let start = Instant::now();
    let d = spec.d();
    let fs = gibbs_fs_with(spec, n_per_density, &GibbsOptions::default(), &mut rng.substream(0))?;
    let mut r = rng.substream(1);
    let inv = 1.0 / spec.alpha();
    let plain: Vec<f64> = (0..n_per_density * d)
        .map(|_| (-r.uniform_pos().ln()).powf(inv))
        .collect();
    let f = SampleBlock::new(plain, d, 0, None)?;
    let gamma = spec.gamma();
    let seq = DensitySequence::new(vec![
        Component::new("f", n_per_density, Box::new(|_: &[f64]| 0.0)).known(0.0),
        Component::new(
            "fs",
            n_per_density,
            Box::new(move |x: &[f64]| indicator(row_sum(x) >= gamma)),
        ),
    ])?;
    let w = build_weight_matrix(&seq, &[f, fs])?;
    let solution = constrained_minimize(
        &w,
        &seq.lambdas(),
        &seq.default_constraints(),
        seq.reference(),
        SolverOptions::default(),
    )?;
    let log_ell_s = solution.log_ell_hat[1];
    Ok(SchemeAResult {
        ell_s: log_ell_s.exp(),
        log_ell_s,
        cpu_seconds: start.elapsed().as_secs_f64(),
        n: seq.total(),
        solution,
        table: None,
    })
}

fn indicator(b: bool) -> f64 {
    if b {
        0.0
    } else {
        f64::NEG_INFINITY
    }
}

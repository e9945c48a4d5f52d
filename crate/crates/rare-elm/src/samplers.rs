//! Samplers for the densities pooled by the estimators.
//!
//! Four densities live on the Weibull scale `x`:
//!
//! | index | density | support |
//! |---|---|---|
//! | 0 | `f₁ ∝ f(x)·Σ 𝕀{xᵢ ≥ γ}` | some coordinate ≥ γ |
//! | 1 | `f₂`, product of estimated marginals of `f_s` | everything above the table minimum |
//! | 2 | `f₃ ∝ f(x)·𝕀{S ≥ γ, max < γ}` | sum ≥ γ, no single coordinate ≥ γ |
//! | 3 | `f_s ∝ f(x)·𝕀{S ≥ γ}` | sum ≥ γ |
//!
//! `f₁` and `f₂` are sampled exactly, `f₃` and `f_s` by systematic-scan Gibbs.
//! Two more samplers work on the exponential scale `y = x^α`: the zero-variance
//! chain with sorted rows, and the chain for the linearized event used by the
//! lower bound.

use crate::distributions::{truncated_inverse_unchecked, RandomStream, WeibullParams};
use crate::error::{domain, Error, Result};

/// `P(X₁ + … + X_d ≥ γ)` with `Xᵢ ~ Weib(α, 1)` iid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemSpec {
    d: usize,
    alpha: f64,
    gamma: f64,
}

impl ProblemSpec {
    /// `γ = 0` is accepted (the event is certain); samplers that need a
    /// nonempty truncation region reject it themselves.
    pub fn new(d: usize, alpha: f64, gamma: f64) -> Result<Self> {
        if d == 0 {
            return Err(domain("dimension must be >= 1"));
        }
        WeibullParams::new(alpha)?;
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(domain(format!("threshold must be finite and >= 0, got {gamma}")));
        }
        Ok(Self { d, alpha, gamma })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `γ^α`, so that `P(X ≥ γ) = e^{-γ^α}`.
    pub fn gamma_alpha(&self) -> f64 {
        self.gamma.powf(self.alpha)
    }

    pub fn weibull(&self) -> WeibullParams {
        WeibullParams::new(self.alpha).expect("validated at construction")
    }
}

/// Burn-in and thinning of the chain that produced a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainInfo {
    pub burn_in: usize,
    pub thin: usize,
}

/// `n × d` sample matrix, row-major, tagged with the density it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBlock {
    values: Vec<f64>,
    d: usize,
    source_index: usize,
    chain_info: Option<ChainInfo>,
}

impl SampleBlock {
    pub fn new(values: Vec<f64>, d: usize, source_index: usize, chain_info: Option<ChainInfo>) -> Result<Self> {
        if d == 0 || !values.len().is_multiple_of(d) {
            return Err(Error::DimensionMismatch(format!(
                "{} values do not form rows of width {d}",
                values.len()
            )));
        }
        Ok(Self {
            values,
            d,
            source_index,
            chain_info,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.d)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source_index(&self) -> usize {
        self.source_index
    }

    /// `None` for exact iid samplers.
    pub fn chain_info(&self) -> Option<ChainInfo> {
        self.chain_info
    }

    pub fn with_source(mut self, source_index: usize) -> Self {
        self.source_index = source_index;
        self
    }
}

/// Left-to-right row sum. Every support indicator in the crate uses this exact
/// summation order.
#[inline]
pub fn row_sum(x: &[f64]) -> f64 {
    x.iter().sum()
}

/// Chain controls shared by the Gibbs samplers.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsOptions {
    pub burn_in: usize,
    pub thin: usize,
    /// Shuffle the coordinates of each retained row.
    pub permute: bool,
    /// Starting state; must lie in the target support.
    pub init: Option<Vec<f64>>,
}

impl Default for GibbsOptions {
    fn default() -> Self {
        Self {
            burn_in: 0,
            thin: 1,
            permute: true,
            init: None,
        }
    }
}

impl GibbsOptions {
    fn chain_info(&self) -> ChainInfo {
        ChainInfo {
            burn_in: self.burn_in,
            thin: self.thin,
        }
    }

    fn sweeps(&self, n: usize) -> Result<usize> {
        if self.thin == 0 {
            return Err(domain("thinning factor must be >= 1"));
        }
        Ok(self.burn_in + n * self.thin)
    }

    fn retains(&self, sweep: usize) -> bool {
        sweep >= self.burn_in && (sweep - self.burn_in).is_multiple_of(self.thin)
    }
}

fn check_count(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::EmptyInput("sample size must be >= 1".into()))
    } else {
        Ok(())
    }
}

fn start_state(spec: &ProblemSpec, opts: &GibbsOptions) -> Result<Vec<f64>> {
    match &opts.init {
        None => {
            let mut x = vec![spec.gamma / spec.d as f64; spec.d];
            lift_to_threshold(&mut x, spec.gamma, spec.gamma.max(f64::MIN_POSITIVE));
            Ok(x)
        }
        Some(x) if x.len() != spec.d => Err(Error::DimensionMismatch(format!(
            "initial state has {} coordinates, expected {}",
            x.len(),
            spec.d
        ))),
        Some(x) if x.iter().any(|v| !(*v >= 0.0 && v.is_finite())) => {
            Err(domain("initial state must be finite and nonnegative"))
        }
        Some(x) => Ok(x.clone()),
    }
}

/// Rounding can leave a row sum a few ulps below `γ`; push the largest
/// coordinate that stays below `cap` up until the indicator holds.
fn lift_to_threshold(row: &mut [f64], gamma: f64, cap: f64) {
    for _ in 0..64 {
        let s = row_sum(row);
        if s >= gamma {
            return;
        }
        let Some(i) = (0..row.len())
            .filter(|&i| row[i].next_up() < cap)
            .max_by(|&a, &b| row[a].total_cmp(&row[b]))
        else {
            return;
        };
        row[i] = (row[i] + (gamma - s)).max(row[i].next_up()).min(cap.next_down());
    }
}

/// Gibbs chain for the zero-variance density `f_s ∝ f(x)·𝕀{S(x) ≥ γ}`.
///
/// Each conditional is a Weibull truncated below at `(γ - Σ_{j≠i} x_j)₊`. The
/// chain starts at `x = (γ/d, …, γ/d)`.
pub fn gibbs_fs(spec: &ProblemSpec, n: usize, rng: &mut RandomStream) -> Result<SampleBlock> {
    gibbs_fs_with(spec, n, &GibbsOptions::default(), rng)
}

pub fn gibbs_fs_with(spec: &ProblemSpec, n: usize, opts: &GibbsOptions, rng: &mut RandomStream) -> Result<SampleBlock> {
    check_count(n)?;
    let (d, alpha, gamma) = (spec.d, spec.alpha, spec.gamma);
    let mut x = start_state(spec, opts)?;
    if row_sum(&x) < gamma {
        return Err(domain("initial state has row sum below the threshold"));
    }
    let inv = 1.0 / alpha;
    let mut out = Vec::with_capacity(n * d);
    let mut s = row_sum(&x);
    for sweep in 0..opts.sweeps(n)? {
        for xj in x.iter_mut() {
            let rest = s - *xj;
            let a = (gamma - rest).max(0.0);
            *xj = (a.powf(alpha) - rng.uniform_pos().ln()).powf(inv).max(a);
            s = rest + *xj;
        }
        s = row_sum(&x);
        if opts.retains(sweep) {
            let start = out.len();
            out.extend_from_slice(&x);
            let row = &mut out[start..];
            if opts.permute {
                rng.shuffle(row);
            }
            lift_to_threshold(row, gamma, f64::INFINITY);
        }
    }
    SampleBlock::new(out, d, 3, Some(opts.chain_info()))
}

/// Gibbs chain for `f₃ ∝ f(x)·𝕀{S ≥ γ, max xᵢ < γ}`.
///
/// Conditionals are Weibulls truncated to `[(γ - Σ_{j≠i} x_j)₊, γ)`. The support
/// is empty when `d = 1` or `γ = 0`.
pub fn gibbs_f3(spec: &ProblemSpec, n: usize, rng: &mut RandomStream) -> Result<SampleBlock> {
    gibbs_f3_with(spec, n, &GibbsOptions::default(), rng)
}

pub fn gibbs_f3_with(spec: &ProblemSpec, n: usize, opts: &GibbsOptions, rng: &mut RandomStream) -> Result<SampleBlock> {
    check_count(n)?;
    let (d, alpha, gamma) = (spec.d, spec.alpha, spec.gamma);
    if d < 2 || gamma <= 0.0 {
        return Err(Error::Infeasible(format!(
            "{{S >= γ, max < γ}} is empty for d={d}, γ={gamma}"
        )));
    }
    let mut x = start_state(spec, opts)?;
    if row_sum(&x) < gamma || x.iter().any(|&v| v >= gamma) {
        return Err(domain("initial state lies outside {S >= γ, max < γ}"));
    }
    let mut out = Vec::with_capacity(n * d);
    let mut s = row_sum(&x);
    for sweep in 0..opts.sweeps(n)? {
        for xj in x.iter_mut() {
            let rest = s - *xj;
            let a = (gamma - rest).max(0.0);
            *xj = truncated_inverse_unchecked(alpha, a, gamma, rng.uniform());
            s = rest + *xj;
        }
        s = row_sum(&x);
        if opts.retains(sweep) {
            let start = out.len();
            out.extend_from_slice(&x);
            let row = &mut out[start..];
            if opts.permute {
                rng.shuffle(row);
            }
            lift_to_threshold(row, gamma, gamma);
        }
    }
    SampleBlock::new(out, d, 2, Some(opts.chain_info()))
}

/// Exact iid draws from `f₁`: choose a coordinate uniformly, draw it from the
/// Weibull truncated to `[γ, ∞)`, draw the rest untruncated.
pub fn sample_f1(spec: &ProblemSpec, n: usize, rng: &mut RandomStream) -> Result<SampleBlock> {
    check_count(n)?;
    let (d, alpha, gamma) = (spec.d, spec.alpha, spec.gamma);
    let ga = spec.gamma_alpha();
    let inv = 1.0 / alpha;
    let mut out = Vec::with_capacity(n * d);
    for _ in 0..n {
        let pick = rng.index(d);
        for j in 0..d {
            let e = -rng.uniform_pos().ln();
            out.push(if j == pick {
                (ga + e).powf(inv).max(gamma)
            } else {
                e.powf(inv)
            });
        }
    }
    SampleBlock::new(out, d, 0, None)
}

/// Sorted constants `C` with log prefix sums of `e^{C^α}`.
#[derive(Debug, Clone, PartialEq)]
struct ConstantTable {
    constants: Vec<f64>,
    log_cumulative: Vec<f64>,
    log_norm: f64,
}

impl ConstantTable {
    fn from_unsorted(mut constants: Vec<f64>, alpha: f64) -> Self {
        constants.sort_by(f64::total_cmp);
        let mut log_cumulative = Vec::with_capacity(constants.len());
        let mut acc = f64::NEG_INFINITY;
        for &c in &constants {
            // C is ascending, so the new term dominates the running sum.
            let v = c.powf(alpha);
            acc = v + (acc - v).exp().ln_1p();
            log_cumulative.push(acc);
        }
        let log_norm = (constants.len() as f64).ln();
        Self {
            constants,
            log_cumulative,
            log_norm,
        }
    }

    /// `ln((1/len)·Σ_k e^{C_k^α}·𝕀{x ≥ C_k})`, or `-∞` below every constant.
    #[inline]
    fn log_marginal(&self, x: f64) -> f64 {
        let k = self.constants.partition_point(|&c| c <= x);
        if k == 0 {
            f64::NEG_INFINITY
        } else {
            self.log_cumulative[k - 1] - self.log_norm
        }
    }
}

/// Estimated marginals of the zero-variance density, one table per coordinate
/// or a single table shared by all of them.
///
/// The marginal of coordinate `i` is `f(xᵢ)·(1/m)·Σ_j e^{C_{ji}^α}·𝕀{xᵢ ≥ C_{ji}}`
/// with `C_{ji} = (γ - Σ_{k≠i} X_{jk})₊`. Each term integrates to one, so the
/// product over coordinates is a normalized density.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalTable {
    alpha: f64,
    gamma: f64,
    d: usize,
    sample_count: usize,
    tables: Vec<ConstantTable>,
}

impl MarginalTable {
    /// A pooled table built directly from constants. Mostly useful in tests.
    pub fn from_constants(spec: &ProblemSpec, constants: Vec<f64>, sample_count: usize) -> Result<Self> {
        if constants.is_empty() {
            return Err(Error::EmptyInput("marginal table needs at least one constant".into()));
        }
        if constants.iter().any(|c| !(*c >= 0.0 && c.is_finite())) {
            return Err(domain("constants must be finite and nonnegative"));
        }
        Ok(Self {
            alpha: spec.alpha,
            gamma: spec.gamma,
            d: spec.d,
            sample_count,
            tables: vec![ConstantTable::from_unsorted(constants, spec.alpha)],
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Number of chain rows that contributed constants.
    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn is_pooled(&self) -> bool {
        self.tables.len() == 1
    }

    fn table(&self, coordinate: usize) -> &ConstantTable {
        if self.is_pooled() {
            &self.tables[0]
        } else {
            &self.tables[coordinate]
        }
    }

    pub fn sorted_constants(&self, coordinate: usize) -> &[f64] {
        &self.table(coordinate).constants
    }

    pub fn log_cumulative_weights(&self, coordinate: usize) -> &[f64] {
        &self.table(coordinate).log_cumulative
    }

    /// Prefix sums of `e^{C^α}`; entries overflow to `∞` for extreme thresholds.
    pub fn cumulative_weights(&self, coordinate: usize) -> Vec<f64> {
        self.table(coordinate).log_cumulative.iter().map(|v| v.exp()).collect()
    }

    /// Normalizing count of the coordinate's marginal (table length).
    pub fn normalization(&self, coordinate: usize) -> f64 {
        self.table(coordinate).log_norm.exp()
    }

    /// Multiply every prefix sum and normalizing count by `factor`.
    pub fn with_scaled_normalization(&self, factor: f64) -> Self {
        let shift = factor.ln();
        let mut out = self.clone();
        for t in &mut out.tables {
            t.log_norm += shift;
            for v in &mut t.log_cumulative {
                *v += shift;
            }
        }
        out
    }
}

/// Build the marginal table from a zero-variance chain.
///
/// A random subsample of `⌊fraction·n⌋` rows supplies the constants. With
/// `pool_coordinates` the `d` constants of each row go into one shared table,
/// which exchangeability of `f_s` permits.
pub fn build_marginal_table(
    spec: &ProblemSpec,
    fs_samples: &SampleBlock,
    subsample_fraction: f64,
    pool_coordinates: bool,
    rng: &mut RandomStream,
) -> Result<MarginalTable> {
    if fs_samples.d() != spec.d {
        return Err(Error::DimensionMismatch(format!(
            "sample width {} differs from dimension {}",
            fs_samples.d(),
            spec.d
        )));
    }
    if !(subsample_fraction > 0.0 && subsample_fraction <= 1.0) {
        return Err(domain(format!(
            "subsample fraction must lie in (0, 1], got {subsample_fraction}"
        )));
    }
    let m = (subsample_fraction * fs_samples.len() as f64).floor() as usize;
    if m == 0 {
        return Err(Error::EmptyInput(
            "subsample of the zero-variance chain is empty".into(),
        ));
    }
    let picked = rand::seq::index::sample(rng, fs_samples.len(), m);
    let d = spec.d;
    let mut per_coord: Vec<Vec<f64>> = vec![Vec::with_capacity(m); if pool_coordinates { 1 } else { d }];
    if pool_coordinates {
        per_coord[0].reserve(m * d);
    }
    for j in picked.iter() {
        let row = fs_samples.row(j);
        for i in 0..d {
            let rest: f64 = row.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, v)| v).sum();
            let c = (spec.gamma - rest).max(0.0);
            per_coord[if pool_coordinates { 0 } else { i }].push(c);
        }
    }
    Ok(MarginalTable {
        alpha: spec.alpha,
        gamma: spec.gamma,
        d,
        sample_count: m,
        tables: per_coord
            .into_iter()
            .map(|c| ConstantTable::from_unsorted(c, spec.alpha))
            .collect(),
    })
}

/// `ln(f₂(x)/f(x))`, `-∞` when some coordinate lies below every constant.
pub fn log_marginal_ratio(table: &MarginalTable, x: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), table.d);
    let mut acc = 0.0;
    for (i, &xi) in x.iter().enumerate() {
        acc += table.table(i).log_marginal(xi);
    }
    acc
}

/// `f₂(x)/f(x) = Π_i (1/m)·Σ_j e^{C_{ji}^α}·𝕀{xᵢ ≥ C_{ji}}`.
///
/// Each coordinate is a binary search for the rightmost constant `≤ xᵢ`
/// followed by a prefix-sum lookup. Returns 0 for unsupported points.
pub fn marginal_ratio(table: &MarginalTable, x: &[f64]) -> f64 {
    log_marginal_ratio(table, x).exp()
}

/// Iid draws from the product of estimated marginals: per coordinate, pick a
/// stored constant uniformly and draw `(C^α - ln U)^{1/α}`.
pub fn sample_f2(table: &MarginalTable, n: usize, rng: &mut RandomStream) -> Result<SampleBlock> {
    check_count(n)?;
    let (d, alpha) = (table.d, table.alpha);
    let inv = 1.0 / alpha;
    let mut out = Vec::with_capacity(n * d);
    for _ in 0..n {
        for i in 0..d {
            let t = table.table(i);
            let c = t.constants[rng.index(t.constants.len())];
            out.push((c.powf(alpha) - rng.uniform_pos().ln()).powf(inv).max(c));
        }
    }
    SampleBlock::new(out, d, 1, None)
}

/// Gibbs chain for the zero-variance density on the exponential scale
/// `y = x^α`, where it reads `e^{-Σy}·𝕀{Σ y_i^{1/α} ≥ γ}`.
///
/// Conditional draws are `yᵢ = ((γ - Σ_{j≠i} y_j^{1/α})₊)^α - ln U`. Retained
/// rows are sorted ascending. The chain starts at `y = ((γ/d)^α, …)`.
pub fn gibbs_scheme_b(spec: &ProblemSpec, n: usize, rng: &mut RandomStream) -> Result<SampleBlock> {
    gibbs_scheme_b_with(spec, n, &GibbsOptions::default(), rng)
}

pub fn gibbs_scheme_b_with(
    spec: &ProblemSpec,
    n: usize,
    opts: &GibbsOptions,
    rng: &mut RandomStream,
) -> Result<SampleBlock> {
    check_count(n)?;
    let (d, alpha, gamma) = (spec.d, spec.alpha, spec.gamma);
    let inv = 1.0 / alpha;
    let to_x = |v: f64| v.powf(inv);
    let mut y = match &opts.init {
        None => {
            let mut y = vec![(gamma / d as f64).powf(alpha); d];
            for _ in 0..64 {
                if y.iter().map(|&v| to_x(v)).sum::<f64>() >= gamma {
                    break;
                }
                y.iter_mut().for_each(|v| *v = v.next_up());
            }
            y
        }
        Some(_) => start_state(spec, opts)?,
    };
    let mut s: f64 = y.iter().map(|&v| to_x(v)).sum();
    if s < gamma {
        return Err(domain("initial state lies below the threshold"));
    }
    let mut out = Vec::with_capacity(n * d);
    for sweep in 0..opts.sweeps(n)? {
        for yj in y.iter_mut() {
            let rest = s - to_x(*yj);
            let a = (gamma - rest).max(0.0);
            *yj = a.powf(alpha) - rng.uniform_pos().ln();
            s = rest + to_x(*yj);
        }
        s = y.iter().map(|&v| to_x(v)).sum();
        if opts.retains(sweep) {
            let start = out.len();
            out.extend_from_slice(&y);
            let row = &mut out[start..];
            row.sort_by(f64::total_cmp);
            for _ in 0..64 {
                if row.iter().map(|&v| to_x(v)).sum::<f64>() >= gamma {
                    break;
                }
                row[d - 1] = row[d - 1].next_up();
            }
        }
    }
    SampleBlock::new(out, d, 1, Some(opts.chain_info()))
}

/// Gibbs chain for iid `Exp(1)` variables `z` restricted to `Σ β_j z_j ≥ γ*`,
/// returned through the order-statistic map `y_[i] = Σ_{j≤i} z_j/(d-j+1)`.
///
/// With `β_j` the averaged tangent coefficients of the lower bound, the rows are
/// draws from the sorted exponential vector conditioned on the linearized event.
pub fn gibbs_lower_bound_density(
    betas: &[f64],
    gamma_star: f64,
    n: usize,
    rng: &mut RandomStream,
) -> Result<SampleBlock> {
    gibbs_lower_bound_density_with(betas, gamma_star, n, &GibbsOptions::default(), rng)
}

pub fn gibbs_lower_bound_density_with(
    betas: &[f64],
    gamma_star: f64,
    n: usize,
    opts: &GibbsOptions,
    rng: &mut RandomStream,
) -> Result<SampleBlock> {
    check_count(n)?;
    let d = betas.len();
    if d == 0 || betas.iter().any(|b| !(*b > 0.0 && b.is_finite())) {
        return Err(domain("coefficients must be finite and > 0"));
    }
    if !(gamma_star > 0.0 && gamma_star.is_finite()) {
        return Err(domain(format!("threshold must be finite and > 0, got {gamma_star}")));
    }
    let mut z: Vec<f64> = betas.iter().map(|b| gamma_star / (d as f64 * b)).collect();
    let mut t: f64 = z.iter().zip(betas).map(|(z, b)| z * b).sum();
    let mut out = Vec::with_capacity(n * d);
    for sweep in 0..opts.sweeps(n)? {
        for i in 0..d {
            let rest = t - z[i] * betas[i];
            z[i] = ((gamma_star - rest) / betas[i]).max(0.0) - rng.uniform_pos().ln();
            t = rest + z[i] * betas[i];
        }
        t = z.iter().zip(betas).map(|(z, b)| z * b).sum();
        if opts.retains(sweep) {
            let mut acc = 0.0;
            for (j, zj) in z.iter().enumerate() {
                acc += zj / (d - j) as f64;
                out.push(acc);
            }
        }
    }
    SampleBlock::new(out, d, 0, Some(opts.chain_info()))
}

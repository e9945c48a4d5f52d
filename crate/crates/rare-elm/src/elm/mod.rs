//! Empirical likelihood maximization over a pooled sample.
//!
//! Densities `f_t = w_t/ℓ_t`, `t = 1…s`, are sampled `n_t` times each and the
//! samples pooled. With `λ_t = n_t/n` and `z_t = -ln(ℓ_t/λ_t)`, the empirical
//! log-likelihood of the mixture is, up to constants, `-n·D(z)` with
//!
//! ```text
//! D(z) = (1/n)·Σ_j ln(Σ_k w_k(X_j)·e^{z_k}) - Σ_k λ_k·z_k
//! ```
//!
//! `D` is convex and invariant under `z ↦ z + c·1`, so one linear constraint
//! (by default `Σ λ_k z_k = 0`) fixes the translation and known constants are
//! imposed afterwards by rescaling or as extra equality rows. The 1/n factor
//! does not move the minimizer; it keeps gradients O(1).

mod jacobi;
mod scheme_a;
mod solver;

pub use jacobi::{jacobi_solve, jacobi_solve_with, JacobiOptions};
pub use scheme_a::{
    scheme_a_problem, scheme_a_run, two_density_run, SchemeABudgets, SchemeAOptions, SchemeAProblem, SchemeAResult,
};
pub use solver::{constrained_minimize, recover_log_ell, ElmSolution, LinearConstraints, SolverOptions};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::samplers::SampleBlock;

/// Log of an unnormalized weight ratio `w_t(x)/f(x)`; `-∞` off the support.
pub type LogWeightFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A density with a known normalizing constant, `ℓ_index = exp(log_value)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnownConstant {
    pub index: usize,
    pub log_value: f64,
}

impl KnownConstant {
    pub fn new(index: usize, value: f64) -> Self {
        Self {
            index,
            log_value: value.ln(),
        }
    }
}

/// One member of a density sequence.
pub struct Component {
    pub name: String,
    pub log_weight: LogWeightFn,
    pub known_log_constant: Option<f64>,
    pub n: usize,
}

impl Component {
    pub fn new(name: impl Into<String>, n: usize, log_weight: LogWeightFn) -> Self {
        Self {
            name: name.into(),
            log_weight,
            known_log_constant: None,
            n,
        }
    }

    pub fn known(mut self, log_constant: f64) -> Self {
        self.known_log_constant = Some(log_constant);
        self
    }
}

/// Ordered densities with their sample allocations.
pub struct DensitySequence {
    components: Vec<Component>,
}

impl DensitySequence {
    /// At least one component must carry a known constant and every
    /// allocation must be positive.
    pub fn new(components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::EmptyInput("density sequence is empty".into()));
        }
        if components.iter().all(|c| c.known_log_constant.is_none()) {
            return Err(Error::Domain("no density has a known normalizing constant".into()));
        }
        if let Some(c) = components.iter().find(|c| c.n == 0) {
            return Err(Error::EmptyInput(format!("density {} has no samples", c.name)));
        }
        Ok(Self { components })
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn counts(&self) -> Vec<usize> {
        self.components.iter().map(|c| c.n).collect()
    }

    pub fn total(&self) -> usize {
        self.components.iter().map(|c| c.n).sum()
    }

    pub fn lambdas(&self) -> Vec<f64> {
        let n = self.total() as f64;
        self.components.iter().map(|c| c.n as f64 / n).collect()
    }

    pub fn known_constants(&self) -> Vec<KnownConstant> {
        self.components
            .iter()
            .enumerate()
            .filter_map(|(index, c)| c.known_log_constant.map(|log_value| KnownConstant { index, log_value }))
            .collect()
    }

    /// The first known constant, used to rescale recovered estimates.
    pub fn reference(&self) -> KnownConstant {
        self.known_constants()[0]
    }

    /// Homogeneous row plus one equality per additional known constant,
    /// pinning its ratio to the reference.
    pub fn default_constraints(&self) -> LinearConstraints {
        let lambdas = self.lambdas();
        let known = self.known_constants();
        let mut c = LinearConstraints::homogeneous(&lambdas);
        for k in &known[1..] {
            c = c.pin_ratio(&lambdas, known[0], *k);
        }
        c
    }
}

/// `s × n` weight ratios over the pooled sample, stored by column in log form
/// together with a column-scaled linear copy.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    s: usize,
    n: usize,
    log_w: Vec<f64>,
    scaled: Vec<f64>,
    col_max: Vec<f64>,
    sources: Vec<usize>,
}

impl WeightMatrix {
    /// Build from column-major log weights. Every column must be positive
    /// under its own source density.
    pub fn from_log_columns(s: usize, log_w: Vec<f64>, sources: Vec<usize>) -> Result<Self> {
        if s == 0 || log_w.len() != s * sources.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} log weights for {s} densities and {} samples",
                log_w.len(),
                sources.len()
            )));
        }
        let n = sources.len();
        let mut scaled = vec![0.0; s * n];
        let mut col_max = vec![0.0; n];
        for j in 0..n {
            let col = &log_w[j * s..(j + 1) * s];
            if col.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
                return Err(Error::Domain(format!("sample {j} has an invalid weight")));
            }
            let src = sources[j];
            if src >= s {
                return Err(Error::DimensionMismatch(format!(
                    "sample {j} claims density {src} of {s}"
                )));
            }
            if col[src] == f64::NEG_INFINITY {
                return Err(Error::UnsupportedPoint { column: j });
            }
            let m = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            col_max[j] = m;
            for t in 0..s {
                scaled[j * s + t] = (col[t] - m).exp();
            }
        }
        Ok(Self {
            s,
            n,
            log_w,
            scaled,
            col_max,
            sources,
        })
    }

    /// Build from linear weights given as `s` rows of length `n`.
    pub fn from_rows(rows: &[Vec<f64>], sources: Vec<usize>) -> Result<Self> {
        let s = rows.len();
        let n = sources.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(
                "rows differ in length from the source list".into(),
            ));
        }
        if rows.iter().flatten().any(|v| !(*v >= 0.0)) {
            return Err(Error::Domain("weights must be nonnegative".into()));
        }
        let mut log_w = Vec::with_capacity(s * n);
        for j in 0..n {
            for r in rows {
                log_w.push(r[j].ln());
            }
        }
        Self::from_log_columns(s, log_w, sources)
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn log_entry(&self, t: usize, j: usize) -> f64 {
        self.log_w[j * self.s + t]
    }

    pub fn entry(&self, t: usize, j: usize) -> f64 {
        self.log_entry(t, j).exp()
    }

    pub fn column_sources(&self) -> &[usize] {
        &self.sources
    }

    /// Samples contributed by each density.
    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.s];
        for &t in &self.sources {
            c[t] += 1;
        }
        c
    }

    pub(crate) fn scaled_column(&self, j: usize) -> &[f64] {
        &self.scaled[j * self.s..(j + 1) * self.s]
    }

    pub(crate) fn log_column(&self, j: usize) -> &[f64] {
        &self.log_w[j * self.s..(j + 1) * self.s]
    }

    pub(crate) fn col_max(&self, j: usize) -> f64 {
        self.col_max[j]
    }
}

/// Evaluate every density's weight on every pooled sample.
///
/// `pooled[t]` must hold the samples of density `t`, with `n_t` rows.
pub fn build_weight_matrix(seq: &DensitySequence, pooled: &[SampleBlock]) -> Result<WeightMatrix> {
    let s = seq.len();
    if pooled.len() != s {
        return Err(Error::DimensionMismatch(format!(
            "{} sample blocks for {s} densities",
            pooled.len()
        )));
    }
    let d = pooled[0].d();
    for (t, (block, comp)) in pooled.iter().zip(seq.components()).enumerate() {
        if block.len() != comp.n {
            return Err(Error::DimensionMismatch(format!(
                "density {} expects {} samples, block {t} has {}",
                comp.name,
                comp.n,
                block.len()
            )));
        }
        if block.d() != d {
            return Err(Error::DimensionMismatch(format!(
                "block {t} has width {}, expected {d}",
                block.d()
            )));
        }
    }
    let n = seq.total();
    let mut log_w = Vec::with_capacity(s * n);
    let mut sources = Vec::with_capacity(n);
    for (t, block) in pooled.iter().enumerate() {
        for row in block.rows() {
            for comp in seq.components() {
                log_w.push((comp.log_weight)(row));
            }
            sources.push(t);
        }
    }
    WeightMatrix::from_log_columns(s, log_w, sources)
}

/// Connectivity of the overlap graph on densities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Connectivity {
    pub connected: bool,
    /// Components as sorted lists of density indices, ordered by first member.
    pub components: Vec<Vec<usize>>,
}

/// Densities `i` and `j` are adjacent when some pooled sample has positive
/// weight under both. A unique likelihood maximizer needs this graph connected.
pub fn check_connectivity(w: &WeightMatrix) -> Connectivity {
    let s = w.s;
    let mut parent: Vec<usize> = (0..s).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for j in 0..w.n {
        let col = w.log_column(j);
        let mut first = None;
        for (t, &v) in col.iter().enumerate() {
            if v > f64::NEG_INFINITY {
                match first {
                    None => first = Some(t),
                    Some(f) => {
                        let (a, b) = (find(&mut parent, f), find(&mut parent, t));
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_slot = vec![usize::MAX; s];
    for t in 0..s {
        let r = find(&mut parent, t);
        if root_slot[r] == usize::MAX {
            root_slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_slot[r]].push(t);
    }
    Connectivity {
        connected: groups.len() == 1,
        components: groups,
    }
}

/// Value, gradient and (optionally) Hessian of `D` at one point.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: Option<DMatrix<f64>>,
}

fn check_shapes(w: &WeightMatrix, z: &[f64], lambdas: &[f64]) -> Result<()> {
    if z.len() != w.s || lambdas.len() != w.s {
        return Err(Error::DimensionMismatch(format!(
            "z has {} and lambdas {} entries for {} densities",
            z.len(),
            lambdas.len(),
            w.s
        )));
    }
    Ok(())
}

/// One pass over the columns. Responsibilities `r_tj = w_tj·e^{z_t}/Σ_k w_kj·e^{z_k}`
/// come from the column-scaled weights; columns whose scaled sum underflows
/// fall back to an explicit log-sum-exp.
pub fn evaluate(w: &WeightMatrix, z: &[f64], lambdas: &[f64], with_hessian: bool) -> Result<Evaluation> {
    check_shapes(w, z, lambdas)?;
    let s = w.s;
    let zmax = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ez: Vec<f64> = z.iter().map(|v| (v - zmax).exp()).collect();
    let mut value = 0.0;
    let mut grad = vec![0.0; s];
    let mut hess = if with_hessian { vec![0.0; s * s] } else { Vec::new() };
    let mut r = vec![0.0; s];
    for j in 0..w.n {
        let col = w.scaled_column(j);
        let mut b = 0.0;
        for t in 0..s {
            r[t] = col[t] * ez[t];
            b += r[t];
        }
        let lse;
        if b > 1e-280 {
            lse = w.col_max(j) + zmax + b.ln();
            for v in r.iter_mut() {
                *v /= b;
            }
        } else {
            let lc = w.log_column(j);
            let m = (0..s).map(|t| lc[t] + z[t]).fold(f64::NEG_INFINITY, f64::max);
            if m == f64::NEG_INFINITY {
                return Err(Error::UnsupportedPoint { column: j });
            }
            let sum: f64 = (0..s).map(|t| (lc[t] + z[t] - m).exp()).sum();
            lse = m + sum.ln();
            for t in 0..s {
                r[t] = (lc[t] + z[t] - lse).exp();
            }
        }
        value += lse;
        for t in 0..s {
            grad[t] += r[t];
        }
        if with_hessian {
            for a in 0..s {
                if r[a] == 0.0 {
                    continue;
                }
                hess[a * s + a] += r[a];
                for c in 0..s {
                    hess[a * s + c] -= r[a] * r[c];
                }
            }
        }
    }
    let n = w.n as f64;
    let lin: f64 = lambdas.iter().zip(z).map(|(l, z)| l * z).sum();
    let gradient = DVector::from_iterator(s, grad.iter().zip(lambdas).map(|(g, l)| g / n - l));
    let hessian = with_hessian.then(|| DMatrix::from_row_slice(s, s, &hess) / n);
    Ok(Evaluation {
        value: value / n - lin,
        gradient,
        hessian,
    })
}

/// `D(z) = (1/n)·Σ_j ln(Σ_k w_kj·e^{z_k}) - λ·z`.
pub fn objective_d(w: &WeightMatrix, z: &[f64], lambdas: &[f64]) -> Result<f64> {
    evaluate(w, z, lambdas, false).map(|e| e.value)
}

/// `∂D/∂z_t = (1/n)·Σ_j r_tj - λ_t`; components sum to zero.
pub fn gradient_d(w: &WeightMatrix, z: &[f64], lambdas: &[f64]) -> Result<Vec<f64>> {
    evaluate(w, z, lambdas, false).map(|e| e.gradient.as_slice().to_vec())
}

/// `∇²D = (1/n)·Σ_j (diag(r_j) - r_j·r_jᵀ)`, positive semidefinite with `1` in
/// its null space.
pub fn hessian_d(w: &WeightMatrix, z: &[f64], lambdas: &[f64]) -> Result<DMatrix<f64>> {
    evaluate(w, z, lambdas, true).map(|e| e.hessian.expect("requested"))
}

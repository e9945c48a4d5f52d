//! Estimators for `ℓ = P(X₁ + … + X_d ≥ γ)` with iid `Weib(α, 1)` summands.
//!
//! The centerpiece is empirical likelihood maximization (ELM): draw from a
//! sequence of unnormalized densities, pool the samples, and recover every
//! normalizing constant jointly from one convex program. Two pooling schemes
//! are provided:
//!
//! - [`elm::scheme_a_run`] pools four densities anchored by two constants known
//!   in closed form.
//! - [`lower_bound::scheme_b_run`] pools the zero-variance density with a
//!   linearized event whose probability is a generalized Erlang tail.
//!
//! Crude Monte Carlo, the Asmussen–Kroese conditional estimator and marginal
//! importance sampling sit alongside in [`estimators`] for comparison.

#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distributions;
pub mod elm;
pub mod error;
pub mod estimators;
pub mod lower_bound;
pub mod samplers;

pub use distributions::RandomStream;
pub use error::{Error, Result};
pub use samplers::{ProblemSpec, SampleBlock};

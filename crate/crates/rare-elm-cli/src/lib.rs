//! Experiment driver for the `rare-elm` estimators.
//!
//! A cell is one method on one problem `(α, γ, d)`, replicated `reps` times on
//! disjoint substreams of a stream derived from the seed and the cell itself.
//! Cells run in parallel; rows come back in a fixed order and render as CSV or
//! an aligned table.

mod config;
mod experiment;
mod output;

pub use config::{ConfigError, ExperimentConfig, Format, Method, RawConfig, Settings, KEYS};
pub use experiment::{cell_stream, replicates, run_cells, run_experiment, sort_rows, sweep, NOT_CONVERGED};
pub use output::{
    parse_csv, render, render_csv, render_table, scientific, write_output, OutputError, ResultRow, HEADER,
};

/// Subcommands of the binary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// One problem; several comma-separated methods give a comparison.
    Estimate,
    /// Cartesian grid over comma-separated methods, γ, α and d.
    Sweep,
    /// The maximized lower bound only, one CE run unless `reps` is set.
    LowerBound,
}

/// Resolve the settings of a subcommand from merged file and flag values.
pub fn plan(mode: Mode, raw: &RawConfig) -> Result<Settings, ConfigError> {
    let mut raw = raw.clone();
    if mode == Mode::LowerBound {
        if let Some(m) = raw.get("method").filter(|m| *m != "lower-bound") {
            return Err(ConfigError::Invalid {
                key: "method".into(),
                value: m.into(),
                reason: "the lower-bound command only runs lower-bound".into(),
            });
        }
        raw.set("method", "lower-bound")?;
        if raw.get("reps").is_none() {
            raw.set("reps", "1")?;
        }
    }
    let settings = Settings::from_raw(&raw)?;
    if mode == Mode::Estimate {
        settings.require_single_problem()?;
    }
    Ok(settings)
}

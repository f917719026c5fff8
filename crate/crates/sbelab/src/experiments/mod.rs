mod cauchy;
mod invariance;
mod ito;
mod scaling;
mod simulate;
mod uniqueness;

use rayon::prelude::*;
use sbelab_core::dynamics::ModelKind;
use sbelab_core::gaussian::{Purpose, RngStream, StreamId};
use sbelab_core::statistics::ScalingFit;

use crate::config::{ExperimentKind, ExperimentSpec};
use crate::error::{HarnessError, Result};
use crate::output::{Gate, Outcome, RowKey, Table};

pub use uniqueness::{check_coupling, UniquenessRow};

pub fn run_experiment(spec: &ExperimentSpec) -> Result<Outcome> {
    match spec.kind {
        ExperimentKind::Simulate => simulate::run(spec),
        ExperimentKind::Invariance | ExperimentKind::Ns2dInvariance => invariance::run(spec),
        ExperimentKind::DriftScaling => scaling::run(spec),
        ExperimentKind::Cauchy => cauchy::run_m(spec),
        ExperimentKind::MollifierCauchy => cauchy::run_eps(spec),
        ExperimentKind::ItoCheck => ito::run(spec),
        ExperimentKind::Uniqueness => uniqueness::run(spec),
    }
}

/// Root stream of path `path`. Keyed by the experiment name, so runs of one
/// experiment at different resolutions or step sizes share noise.
pub(crate) fn stream(spec: &ExperimentSpec, path: usize) -> RngStream {
    RngStream::new(spec.seed, StreamId::new(spec.kind.name(), path as u64, Purpose::Noise))
}

/// Runs `f` on every path index in parallel; results come back in path order.
pub(crate) fn ensemble<T, F>(paths: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    (0..paths).into_par_iter().map(f).collect()
}

pub(crate) fn bad(spec: &ExperimentSpec, msg: impl std::fmt::Display) -> HarnessError {
    HarnessError::Config(format!("{}: {msg}", spec.kind))
}

pub(crate) fn require_1d(spec: &ExperimentSpec, allowed: &[ModelKind]) -> Result<()> {
    if allowed.contains(&spec.model.kind) {
        Ok(())
    } else {
        let names: Vec<_> = allowed.iter().map(|k| k.name()).collect();
        Err(bad(spec, format!("model {} not supported (use {})", spec.model.kind, names.join(", "))))
    }
}

/// `max / min >= 10`.
pub(crate) fn spans_decade(xs: impl IntoIterator<Item = f64>) -> bool {
    let (lo, hi) = xs
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    lo > 0.0 && hi / lo >= 10.0 - 1e-9
}

pub(crate) fn fit_table() -> Table {
    Table::new(
        "fits",
        &["label", "mode", "slope", "slope_se", "intercept", "x_min", "x_max", "points", "weighted", "target", "tolerance", "status"],
    )
}

/// Appends `fit` to `table` and returns its gate `|slope - centre| <= tol`.
pub(crate) fn push_fit(table: &mut Table, key: &RowKey, fit: &ScalingFit, mode: &str, centre: f64, tol: f64) -> Gate {
    let gate = Gate::within(format!("{} (mode {mode})", fit.label), fit.slope, centre, tol);
    table.push(
        key,
        vec![
            fit.label.clone(),
            mode.to_string(),
            fit.slope.to_string(),
            fit.slope_se.to_string(),
            fit.intercept.to_string(),
            fit.range.0.to_string(),
            fit.range.1.to_string(),
            fit.points.to_string(),
            fit.weighted.to_string(),
            centre.to_string(),
            tol.to_string(),
            gate.status().to_string(),
        ],
    );
    gate
}

pub(crate) fn outcome(tables: Vec<Table>, gates: Vec<Gate>) -> Outcome {
    Outcome { tables, gates }
}

use sbelab_core::dynamics::{simulate_with, Dynamics, ModelKind};
use sbelab_core::spectral::{Disk, Lattice, Line, SpectralField};
use sbelab_core::statistics::stationarity_test;

use super::{bad, ensemble, outcome, stream};
use crate::config::{ExperimentKind, ExperimentSpec};
use crate::error::Result;
use crate::output::{Gate, Outcome, RowKey, Table};

pub const PASS_FRACTION: f64 = 0.95;

pub fn run(spec: &ExperimentSpec) -> Result<Outcome> {
    let is_ns = spec.model.kind == ModelKind::Ns2d;
    if spec.kind == ExperimentKind::Ns2dInvariance && !is_ns {
        return Err(bad(spec, "needs model = ns2d"));
    }
    if is_ns {
        let d = Dynamics::<Disk>::from_config(&spec.model)?;
        let tracked: Vec<usize> = (0..d.lattice().len()).collect();
        suite(spec, &d, &tracked)
    } else {
        let d = Dynamics::<Line>::from_config(&spec.model)?;
        let tracked: Vec<usize> = spec.modes_or(spec.model.n).iter().map(|k| k - 1).collect();
        suite(spec, &d, &tracked)
    }
}

/// Ensemble from the invariant measure, z-scores of `E|x_k|^2` and `E|x_k|^4`
/// at `t = 0, T/2, T`.
fn suite<L: Lattice>(spec: &ExperimentSpec, d: &Dynamics<L>, tracked: &[usize]) -> Result<Outcome> {
    let steps = spec.model.steps();
    let mut checkpoints = vec![0, steps / 2, steps];
    checkpoints.dedup();
    let snaps: Vec<Vec<SpectralField<L>>> = ensemble(spec.paths, |p| {
        let mut out = Vec::with_capacity(checkpoints.len());
        simulate_with(d, None, &stream(spec, p), |j, state, _| {
            if checkpoints.contains(&j) {
                out.push(state.u.clone());
            }
        })?;
        Ok(out)
    })?;

    let key = RowKey::new(spec);
    let lat = d.lattice();
    let measure = d.measure();
    let mut table = Table::new("zscores", &["t", "mode", "moment", "empirical", "exact", "z", "status"]);
    let mut gates = Vec::new();
    for (c, &j) in checkpoints.iter().enumerate() {
        let t = j as f64 * spec.model.dt;
        let fields: Vec<SpectralField<L>> = snaps.iter().map(|s| s[c].clone()).collect();
        let report = stationarity_test(&fields, measure)?;
        let mut pass = 0;
        for &i in tracked {
            let k = lat.mode(i);
            let e2 = measure.wick_moment(&[(k, false), (k, true)])?;
            let e4 = measure.wick_moment(&[(k, false), (k, true), (k, false), (k, true)])?;
            for (moment, m, exact, z) in [(2, report.m2[i], e2, report.z2[i]), (4, report.m4[i], e4, report.z4[i])] {
                let ok = z.abs() < 3.0;
                pass += ok as usize;
                table.push(
                    &key,
                    vec![
                        t.to_string(),
                        format!("{k:?}"),
                        moment.to_string(),
                        m.to_string(),
                        exact.to_string(),
                        z.to_string(),
                        if ok { "pass" } else { "fail" }.to_string(),
                    ],
                );
            }
        }
        let frac = pass as f64 / (2 * tracked.len()) as f64;
        gates.push(Gate::check(format!("pass fraction at t = {t}"), frac, format!(">= {PASS_FRACTION}"), frac >= PASS_FRACTION));
    }
    Ok(outcome(vec![table], gates))
}

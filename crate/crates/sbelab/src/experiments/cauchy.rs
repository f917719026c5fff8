use num_complex::Complex64;
use sbelab_core::drift::{drift_coordinates, mollified_coordinates, DriftAccumulator};
use sbelab_core::dynamics::{simulate_with, Dynamics, ModelKind};
use sbelab_core::spectral::{Field1d, Line};
use sbelab_core::statistics::{lp_norm, scaling_regression};

use super::{bad, ensemble, fit_table, outcome, push_fit, require_1d, spans_decade, stream};
use crate::config::ExperimentSpec;
use crate::error::Result;
use crate::output::{Outcome, RowKey, Table};

pub const TOL: f64 = 0.2;

/// `||sup_t |(G^M - G^N)_k|||_2` against `M`.
pub fn run_m(spec: &ExperimentSpec) -> Result<Outcome> {
    require_1d(spec, &[ModelKind::Ou, ModelKind::Sbe])?;
    let n = spec.model.n;
    let ms = spec.m_list.clone().ok_or_else(|| bad(spec, "needs M_list"))?;
    if !spans_decade(ms.iter().map(|&m| m as f64)) {
        return Err(bad(spec, "M_list must span at least one decade"));
    }
    let modes = spec.modes_or(2);
    let xs: Vec<f64> = ms.iter().map(|&m| m as f64).collect();
    suite(
        spec,
        &xs,
        "M",
        &|u, i| drift_coordinates(u, ms[i], &modes),
        &|u| drift_coordinates(u, n, &modes),
        &modes,
        0.5 - spec.model.theta,
    )
}

/// `||sup_t |(B^eps - B^{eps_ref})_k|||_2` against `eps`, with
/// `eps_ref = 1 / N` (the mollifier is the identity on the whole band there).
pub fn run_eps(spec: &ExperimentSpec) -> Result<Outcome> {
    require_1d(spec, &[ModelKind::Ou, ModelKind::Sbe])?;
    let eps_ref = 1.0 / spec.model.n as f64;
    let eps = spec.eps_list.clone().ok_or_else(|| bad(spec, "needs eps_list"))?;
    if !spans_decade(eps.iter().copied()) {
        return Err(bad(spec, "eps_list must span at least one decade"));
    }
    if let Some(e) = eps.iter().find(|&&e| e <= eps_ref) {
        return Err(bad(spec, format!("eps = {e} must exceed the reference 1/N = {eps_ref}")));
    }
    let modes = spec.modes_or(2);
    suite(
        spec,
        &eps,
        "eps",
        &|u, i| mollified_coordinates(u, eps[i], &modes),
        &|u| mollified_coordinates(u, eps_ref, &modes),
        &modes,
        spec.model.theta - 0.5,
    )
}

type Coords<'a> = dyn Fn(&Field1d, usize) -> Vec<Complex64> + Sync + 'a;
type Reference<'a> = dyn Fn(&Field1d) -> Vec<Complex64> + Sync + 'a;

fn suite(
    spec: &ExperimentSpec,
    xs: &[f64],
    name: &str,
    coords: &Coords,
    reference: &Reference,
    modes: &[usize],
    centre: f64,
) -> Result<Outcome> {
    let cfg = &spec.model;
    let steps = cfg.steps();
    let stride = cfg.stride;
    let d = Dynamics::<Line>::from_config(cfg)?;
    // [x][mode]: sup_t |difference|
    let sups: Vec<Vec<Vec<f64>>> = ensemble(spec.paths, |p| {
        let mut accs: Vec<DriftAccumulator> = xs.iter().map(|_| DriftAccumulator::plain(modes)).collect();
        let mut refacc = DriftAccumulator::plain(modes);
        let mut sup = vec![vec![0.0f64; modes.len()]; xs.len()];
        let mut pending: Option<(Vec<Vec<Complex64>>, Vec<Complex64>)> = None;
        simulate_with(&d, None, &stream(spec, p), |j, state, _| {
            if let Some((prev, prev_ref)) = pending.take() {
                for (acc, c) in accs.iter_mut().zip(&prev) {
                    acc.advance_silent(cfg.dt, c);
                }
                refacc.advance_silent(cfg.dt, &prev_ref);
            }
            if j % stride == 0 {
                for (xi, acc) in accs.iter().enumerate() {
                    for (i, (a, b)) in acc.current().iter().zip(refacc.current()).enumerate() {
                        sup[xi][i] = sup[xi][i].max((a - b).norm());
                    }
                }
            }
            if j < steps {
                let u = &state.u;
                pending = Some(((0..xs.len()).map(|i| coords(u, i)).collect(), reference(u)));
            }
        })?;
        Ok(sup)
    })?;

    let key = RowKey::new(spec);
    let mut norms = Table::new("differences", &[name, "mode", "estimate", "se"]);
    let mut fits = fit_table();
    let mut gates = Vec::new();
    for (i, &k) in modes.iter().enumerate() {
        let mut points = Vec::new();
        for (xi, &x) in xs.iter().enumerate() {
            let vals: Vec<f64> = sups.iter().map(|s| s[xi][i]).collect();
            let (e, se) = lp_norm(&vals, 2.0)?;
            norms.push(&key, vec![x.to_string(), k.to_string(), e.to_string(), se.to_string()]);
            if e > 0.0 {
                points.push((x, e, se));
            }
        }
        let f = scaling_regression(&format!("Cauchy difference vs {name}"), &points)?;
        gates.push(push_fit(&mut fits, &key, &f, &k.to_string(), centre, TOL));
    }
    Ok(outcome(vec![norms, fits], gates))
}

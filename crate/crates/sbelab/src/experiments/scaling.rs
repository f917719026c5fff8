use num_complex::Complex64;
use sbelab_core::drift::{drift_coordinates, DriftAccumulator};
use sbelab_core::dynamics::{simulate_with, Dynamics, ModelKind};
use sbelab_core::spectral::Line;
use sbelab_core::statistics::{batch_means, log_log_slope, lp_norm, quadratic_variation, scaling_regression, BATCHES};

use super::{bad, ensemble, fit_table, outcome, push_fit, require_1d, stream};
use crate::config::ExperimentSpec;
use crate::error::Result;
use crate::output::{Gate, Outcome, RowKey, Table};

/// Number of horizons `T, T/2, ..., T/64` in the T-exponent ladder.
pub const HORIZONS: usize = 7;
/// Dyadic levels below the finest one used in the QV fit.
pub const QV_LEVELS: usize = 8;
pub const K_TOL: f64 = 0.2;
pub const T_TOL: f64 = 0.1;
pub const QV_MIN_EXPONENT: f64 = 0.1;

struct PathStats {
    /// `[m][mode][horizon]`: `sup_{t <= T_j} |(G^M_t)_k|`.
    sup_plain: Vec<Vec<Vec<f64>>>,
    /// `[mode][record]`: `|(G~^N_t)_k|`.
    mild_abs: Vec<Vec<f64>>,
    /// `[mode][level]`: dyadic QV of `Re (G^{M*})_k`.
    qv: Vec<Vec<f64>>,
}

/// `||sup_t |(G^M)_k|||_2` and `sup_t ||(G~^N_t)_k||_2` against `|k|`; with
/// `M_list`, `sup_M` of the first against `T`; on a dyadic sampling grid, the
/// quadratic variation of `G^{M*}` across meshes.
pub fn run(spec: &ExperimentSpec) -> Result<Outcome> {
    require_1d(spec, &[ModelKind::Ou, ModelKind::Sbe])?;
    let cfg = &spec.model;
    let n = cfg.n;
    let theta = cfg.theta;
    let modes = spec.modes_or(n);
    let stride = cfg.stride;
    let steps = cfg.steps();
    if steps == 0 || steps % stride != 0 {
        return Err(bad(spec, "T / dt must be a positive multiple of stride"));
    }
    let records = steps / stride;
    let sample_dt = cfg.dt * stride as f64;
    if sample_dt > cfg.horizon / 100.0 + 1e-12 {
        return Err(bad(spec, "sup-norms need stride * dt <= T / 100"));
    }
    let horizon_ladder = spec.m_list.is_some();
    let horizons: Vec<usize> = if horizon_ladder {
        if records % (1 << (HORIZONS - 1)) != 0 {
            return Err(bad(spec, format!("T / (dt * stride) must be divisible by {}", 1 << (HORIZONS - 1))));
        }
        (0..HORIZONS).map(|j| records >> j).collect()
    } else {
        vec![records]
    };
    let dyadic = records.is_power_of_two() && records >= 4;
    let levels: Vec<usize> = if dyadic {
        let top = records.trailing_zeros() as usize;
        (top.saturating_sub(QV_LEVELS).max(1)..=top).collect()
    } else {
        Vec::new()
    };
    // balances the two drift bounds at the finest mesh
    let m_star = (sample_dt.powf(-1.0 / (1.0 + 2.0 * theta)).round() as usize).clamp(1, n);

    let mut ms: Vec<usize> = vec![n];
    ms.extend(spec.m_list.iter().flatten());
    if dyadic {
        ms.push(m_star);
    }
    ms.sort_unstable();
    ms.dedup();
    let idx = |m: usize| ms.iter().position(|&x| x == m).expect("listed");
    let i_n = idx(n);
    let i_star = if dyadic { idx(m_star) } else { i_n };

    let d = Dynamics::<Line>::from_config(cfg)?;
    let stats = ensemble(spec.paths, |p| {
        let nm = modes.len();
        let mut plain: Vec<DriftAccumulator> = ms.iter().map(|_| DriftAccumulator::plain(&modes)).collect();
        let mut mild = DriftAccumulator::mild(&modes, theta);
        let mut running = vec![vec![0.0f64; nm]; ms.len()];
        let mut sup_plain = vec![vec![vec![0.0; horizons.len()]; nm]; ms.len()];
        let mut mild_abs = vec![Vec::with_capacity(records + 1); nm];
        let mut qv_paths = vec![Vec::with_capacity(if dyadic { records + 1 } else { 0 }); nm];
        let mut pending: Option<Vec<Vec<Complex64>>> = None;
        simulate_with(&d, None, &stream(spec, p), |j, state, _| {
            if let Some(prev) = pending.take() {
                for (acc, c) in plain.iter_mut().zip(&prev) {
                    acc.advance_silent(cfg.dt, c);
                }
                mild.advance_silent(cfg.dt, &prev[i_n]);
            }
            if j % stride == 0 {
                let r = j / stride;
                for (mi, acc) in plain.iter().enumerate() {
                    for (i, v) in acc.current().iter().enumerate() {
                        running[mi][i] = running[mi][i].max(v.norm());
                        for (h, &rh) in horizons.iter().enumerate() {
                            if rh == r {
                                sup_plain[mi][i][h] = running[mi][i];
                            }
                        }
                    }
                }
                for (i, v) in mild.current().iter().enumerate() {
                    mild_abs[i].push(v.norm());
                }
                if dyadic {
                    for (i, v) in plain[i_star].current().iter().enumerate() {
                        qv_paths[i].push(v.re);
                    }
                }
            }
            if j < steps {
                pending = Some(ms.iter().map(|&m| drift_coordinates(&state.u, m, &modes)).collect());
            }
        })?;
        let mut qv = Vec::new();
        if dyadic {
            for path in &qv_paths {
                qv.push(quadratic_variation(path, cfg.horizon, &levels)?.qv);
            }
        }
        Ok(PathStats { sup_plain, mild_abs, qv })
    })?;

    let key = RowKey::new(spec);
    let mut norms = Table::new("norms", &["quantity", "M", "mode", "horizon", "estimate", "se"]);
    let mut fits = fit_table();
    let mut gates = Vec::new();

    let mut g_points = Vec::new();
    let mut gm_points = Vec::new();
    for (i, &k) in modes.iter().enumerate() {
        let plain: Vec<f64> = stats.iter().map(|s| s.sup_plain[i_n][i][0]).collect();
        let (e, se) = lp_norm(&plain, 2.0)?;
        norms.push(&key, vec!["sup_t |G^M|".into(), n.to_string(), k.to_string(), cfg.horizon.to_string(), e.to_string(), se.to_string()]);
        g_points.push((k as f64, e, se));
        // the norm is taken at each time, then maximised
        let second = |r: usize| stats.iter().map(|s| s.mild_abs[i][r].powi(2)).sum::<f64>();
        let r_max = (0..=records).max_by(|&a, &b| second(a).total_cmp(&second(b))).unwrap_or(0);
        let at_max: Vec<f64> = stats.iter().map(|s| s.mild_abs[i][r_max]).collect();
        let (e, se) = lp_norm(&at_max, 2.0)?;
        norms.push(&key, vec!["sup_t ||G~^N||".into(), n.to_string(), k.to_string(), cfg.horizon.to_string(), e.to_string(), se.to_string()]);
        gm_points.push((k as f64, e, se));
    }
    if modes.len() >= 5 {
        let f = scaling_regression("sup_t G^N vs k", &g_points)?;
        gates.push(push_fit(&mut fits, &key, &f, "all", 1.5 - theta, K_TOL));
        let f = scaling_regression("sup_t ||G~^N|| vs k", &gm_points)?;
        gates.push(push_fit(&mut fits, &key, &f, "all", 1.5 - 2.0 * theta, K_TOL));
    }

    if horizon_ladder {
        let listed: Vec<usize> = spec.m_list.clone().unwrap_or_default();
        for (i, &k) in modes.iter().enumerate() {
            let mut points = Vec::new();
            for (h, &rh) in horizons.iter().enumerate() {
                let t = rh as f64 * sample_dt;
                let mut best = (0.0, 0.0, 0);
                for &m in &listed {
                    let sups: Vec<f64> = stats.iter().map(|s| s.sup_plain[idx(m)][i][h]).collect();
                    let (e, se) = lp_norm(&sups, 2.0)?;
                    norms.push(&key, vec!["sup_t<=T |G^M|".into(), m.to_string(), k.to_string(), t.to_string(), e.to_string(), se.to_string()]);
                    if e > best.0 {
                        best = (e, se, m);
                    }
                }
                norms.push(
                    &key,
                    vec!["sup_M sup_t<=T |G^M|".into(), best.2.to_string(), k.to_string(), t.to_string(), best.0.to_string(), best.1.to_string()],
                );
                points.push((t, best.0, best.1));
            }
            let f = scaling_regression("sup_M G^M vs T", &points)?;
            let target = 2.0 * theta / (1.0 + 2.0 * theta);
            gates.push(push_fit(&mut fits, &key, &f, &k.to_string(), target, T_TOL));
        }
    }

    let mut tables = vec![norms];
    if dyadic {
        let mut qv_table = Table::new("qv", &["M", "mode", "level", "mesh", "mean_qv", "se"]);
        for (i, &k) in modes.iter().enumerate() {
            let mut pts = Vec::new();
            for (l, &level) in levels.iter().enumerate() {
                let per_path: Vec<f64> = stats.iter().map(|s| s.qv[i][l]).collect();
                let (mean, se) = batch_means(&per_path, BATCHES)?;
                let mesh = cfg.horizon / (1u64 << level) as f64;
                qv_table.push(&key, vec![m_star.to_string(), k.to_string(), level.to_string(), mesh.to_string(), mean.to_string(), se.to_string()]);
                pts.push((mesh, mean));
            }
            let slope = log_log_slope(&pts)?;
            let name = format!("QV exponent of G^{m_star} (mode {k})");
            gates.push(if theta > 0.5 {
                Gate::check(name, slope, format!(">= {QV_MIN_EXPONENT}"), slope >= QV_MIN_EXPONENT)
            } else {
                Gate::report(name, slope, "no decay claimed for theta <= 1/2")
            });
        }
        tables.push(qv_table);
    }
    tables.push(fits);
    Ok(outcome(tables, gates))
}

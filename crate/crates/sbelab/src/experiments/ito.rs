use sbelab_core::drift::{martingale_decompose, Observable, Part};
use sbelab_core::dynamics::{simulate_path, Dynamics, ModelKind};
use sbelab_core::spectral::{Line, QuadraticForm};
use sbelab_core::statistics::{batch_means, log_log_slope, BATCHES};

use super::{bad, ensemble, outcome, require_1d, stream};
use crate::config::ExperimentSpec;
use crate::error::Result;
use crate::output::{Gate, Outcome, RowKey, Table};

pub const MIN_RESIDUAL_SLOPE: f64 = 0.4;
pub const QV_TOL: f64 = 0.1;

/// Forward/backward martingale decomposition of `h = Re (H_N)_k` along
/// stationary paths, for each step size in `dt_list`: residual of the key
/// identity and `[M+]_T / T` against the Wick value `4 E[energy(h)]` (the
/// carré du champ of `L0` is four times the energy).
pub fn run(spec: &ExperimentSpec) -> Result<Outcome> {
    require_1d(spec, &[ModelKind::Ou, ModelKind::Sbe])?;
    let mut dts = spec.dt_list.clone().ok_or_else(|| bad(spec, "needs dt_list"))?;
    if dts.len() < 2 {
        return Err(bad(spec, "dt_list needs at least two step sizes"));
    }
    dts.sort_by(|a, b| b.total_cmp(a));
    let n = spec.model.n;
    let theta = spec.model.theta;
    let k = spec.modes.as_ref().and_then(|m| m.first().copied()).unwrap_or(2.min(n));
    let lattice = Line::new(n);
    let observable = Observable::new(&QuadraticForm::poisson(n, theta), k as i64, Part::Re, &lattice);
    let oracle = 4.0 * observable.expected_energy(&sbelab_core::gaussian::MeasureSpec::white_noise(n), theta)?;
    let horizon = spec.model.horizon;

    let key = RowKey::new(spec);
    let mut table = Table::new(
        "ito",
        &["mode", "residual_mean", "residual_se", "qv_forward_over_T", "qv_forward_se", "qv_backward_over_T", "oracle", "ratio"],
    );
    let mut residuals = Vec::new();
    let mut finest_ratio = f64::NAN;
    for &dt in &dts {
        let mut cfg = spec.model.clone().with_stride(1).recording_noise();
        cfg.dt = dt;
        let d = Dynamics::<Line>::from_config(&cfg)?;
        let rows = ensemble(spec.paths, |p| {
            let tr = simulate_path(&d, None, &stream(spec, p))?;
            let pair = martingale_decompose(&tr, &d, &observable, theta)?;
            Ok((pair.residual(), pair.qv_forward / horizon, pair.qv_backward / horizon))
        })?;
        let col = |f: fn(&(f64, f64, f64)) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
        let (res, res_se) = batch_means(&col(|r| r.0), BATCHES)?;
        let (qf, qf_se) = batch_means(&col(|r| r.1), BATCHES)?;
        let (qb, _) = batch_means(&col(|r| r.2), BATCHES)?;
        let ratio = qf / oracle;
        table.push(
            &key.clone().with_dt(dt),
            vec![
                k.to_string(),
                res.to_string(),
                res_se.to_string(),
                qf.to_string(),
                qf_se.to_string(),
                qb.to_string(),
                oracle.to_string(),
                ratio.to_string(),
            ],
        );
        residuals.push((dt, res));
        finest_ratio = ratio;
    }
    let slope = log_log_slope(&residuals)?;
    let gates = vec![
        Gate::check("residual slope in dt", slope, format!(">= {MIN_RESIDUAL_SLOPE}"), slope >= MIN_RESIDUAL_SLOPE),
        Gate::within("[M+]_T / (4 T E energy) at finest dt", finest_ratio, 1.0, QV_TOL),
    ];
    Ok(outcome(vec![table], gates))
}

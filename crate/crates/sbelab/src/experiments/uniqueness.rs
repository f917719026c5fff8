use num_complex::Complex64;
use sbelab_core::drift::DriftAccumulator;
use sbelab_core::dynamics::{simulate_path, Dynamics, ModelKind, TrajectoryRecorder};
use sbelab_core::spectral::{burgers_nonlinearity, Lattice, Line};
use sbelab_core::statistics::log_log_slope;
use sbelab_core::Error as CoreError;

use super::{bad, ensemble, outcome, require_1d, stream};
use crate::config::ExperimentSpec;
use crate::error::Result;
use crate::output::{Gate, Outcome, RowKey, Table};

pub const THRESHOLD_THETA: f64 = 1.25;
pub const MIN_DECREASING: f64 = 0.9;
pub const MAX_MEDIAN_SLOPE: f64 = -0.5;

/// Weighted distances between the reference run and one Galerkin resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniquenessRow {
    pub n: usize,
    /// `sup_t sup_{k<=N} |k|^w |(u - u^N)_k|`
    pub a: f64,
    /// `sup_t sup_{k<=N} |k|^w |(phi^N_t)_k|`, `phi^N` the mild integral of `F(u) - F_N(u)`
    pub phi: f64,
    /// Contraction constant: `A_N <= Q_T A_N + Phi_N` holds step by step.
    pub q: f64,
}

/// Rejects a pair of runs unless they were driven by the same stream and every
/// mode of `coarse` draws from the same per-mode generator as in `fine`.
pub fn check_coupling<L: Lattice>(fine: &TrajectoryRecorder<L>, coarse: &TrajectoryRecorder<L>) -> sbelab_core::Result<()> {
    if fine.stream != coarse.stream {
        return Err(CoreError::StreamMismatch(format!("streams {:?} and {:?} differ", fine.stream, coarse.stream)));
    }
    let m = coarse.mode_keys.len();
    if m > fine.mode_keys.len() || fine.mode_keys[..m] != coarse.mode_keys[..] {
        return Err(CoreError::StreamMismatch("per-mode noise keys differ on shared modes".into()));
    }
    if fine.dt != coarse.dt || fine.len() != coarse.len() {
        return Err(CoreError::StreamMismatch("runs use different time grids".into()));
    }
    Ok(())
}

/// Runs the reference `u` at `N_ref = N` and each Galerkin resolution of the
/// ladder with the same noise, and reports `A_N`, `Phi_N` and `Q_T`.
pub fn run(spec: &ExperimentSpec) -> Result<Outcome> {
    require_1d(spec, &[ModelKind::Sbe])?;
    let n_ref = spec.model.n;
    let theta = spec.model.theta;
    let eps = spec.epsilon;
    let ladder: Vec<usize> = match &spec.m_list {
        Some(l) => l.clone(),
        None => [16, 8, 4, 2].iter().map(|d| n_ref / d).filter(|&n| n > 0).collect(),
    };
    if ladder.len() < 2 || ladder.windows(2).any(|w| w[1] <= w[0]) || ladder.iter().any(|&n| n >= n_ref) {
        return Err(bad(spec, "the resolution ladder must increase strictly, stay below N and hold two or more values"));
    }
    let w = 2.0 * theta - 1.5 - 2.0 * eps;
    let cfg = spec.model.clone().with_stride(1);
    let reference = Dynamics::<Line>::from_config(&cfg)?;
    let mut resolutions = Vec::new();
    for &n in ladder.iter().chain(std::iter::once(&n_ref)) {
        let mut c = cfg.clone();
        c.n = n;
        resolutions.push(Dynamics::<Line>::from_config(&c)?);
    }

    let per_path: Vec<Vec<UniquenessRow>> = ensemble(spec.paths, |p| {
        let s = stream(spec, p);
        let u = simulate_path(&reference, None, &s)?;
        let full: Vec<_> = u.fields.iter().map(|x| burgers_nonlinearity(x, n_ref)).collect();
        resolutions
            .iter()
            .map(|d| {
                let un = simulate_path(d, None, &s)?;
                check_coupling(&u, &un)?;
                Ok(compare(&u, &un, &full, d.config().n, theta, w))
            })
            .collect()
    })?;

    let key = RowKey::new(spec);
    let mut rows = Table::new("uniqueness", &["path", "N_ref", "epsilon", "A_N", "Phi_N", "Q_T", "A_N_le_2Phi_N"]);
    let mut paths = Table::new("paths", &["path", "slope", "strictly_decreasing"]);
    let mut slopes = Vec::new();
    let mut decreasing = 0;
    let mut ref_zero = true;
    for (p, r) in per_path.iter().enumerate() {
        for row in r {
            rows.push(
                &key.clone().with_n(row.n),
                vec![
                    p.to_string(),
                    n_ref.to_string(),
                    eps.to_string(),
                    row.a.to_string(),
                    row.phi.to_string(),
                    row.q.to_string(),
                    (row.a <= 2.0 * row.phi).to_string(),
                ],
            );
        }
        let (ladder_rows, last) = r.split_at(r.len() - 1);
        ref_zero &= last[0].a == 0.0;
        let pts: Vec<(f64, f64)> = ladder_rows.iter().map(|x| (x.n as f64, x.a)).collect();
        let slope = log_log_slope(&pts).unwrap_or(f64::NAN);
        let dec = ladder_rows.windows(2).all(|w| w[1].a < w[0].a);
        decreasing += dec as usize;
        slopes.push(slope);
        paths.push(&key, vec![p.to_string(), slope.to_string(), dec.to_string()]);
    }

    let mut decay = Table::new("decay", &["median_A_N", "median_Phi_N", "median_Q_T"]);
    for (i, &n) in ladder.iter().enumerate() {
        let col = |f: fn(&UniquenessRow) -> f64| median(per_path.iter().map(|r| f(&r[i])).collect());
        decay.push(&key.clone().with_n(n), vec![col(|r| r.a).to_string(), col(|r| r.phi).to_string(), col(|r| r.q).to_string()]);
    }

    let frac = decreasing as f64 / spec.paths as f64;
    let med = median(slopes);
    let q_med = median(per_path.iter().map(|r| r[0].q).collect());
    let mut gates = vec![Gate::check("Delta^N == 0 at N = N_ref", if ref_zero { 0.0 } else { 1.0 }, "exactly 0", ref_zero)];
    if theta > THRESHOLD_THETA {
        gates.push(Gate::check("fraction of paths with A_N strictly decreasing", frac, format!(">= {MIN_DECREASING}"), frac >= MIN_DECREASING));
        gates.push(Gate::check("median log-log slope of A_N in N", med, format!("<= {MAX_MEDIAN_SLOPE}"), med <= MAX_MEDIAN_SLOPE));
    } else {
        gates.push(Gate::report("fraction of paths with A_N strictly decreasing", frac, "theta <= 5/4: reported only"));
        gates.push(Gate::report("median log-log slope of A_N in N", med, "theta <= 5/4: reported only"));
    }
    gates.push(Gate::report(format!("median Q_T at N = {}", ladder[0]), q_med, "contraction when < 0.5"));
    Ok(outcome(vec![rows, paths, decay], gates))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m == 0 {
        f64::NAN
    } else if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

fn compare(
    u: &TrajectoryRecorder<Line>,
    un: &TrajectoryRecorder<Line>,
    full: &[sbelab_core::spectral::Field1d],
    n: usize,
    theta: f64,
    w: f64,
) -> UniquenessRow {
    let modes: Vec<usize> = (1..=n).collect();
    let weight: Vec<f64> = modes.iter().map(|&k| (k as f64).powf(w)).collect();
    let inv_weight: Vec<f64> = weight.iter().map(|x| 1.0 / x).collect();
    let dt = u.dt;
    let mut phi_acc = DriftAccumulator::mild(&modes, theta);
    let mut q_acc = DriftAccumulator::mild(&modes, theta);
    let (mut a, mut phi, mut q) = (0.0f64, 0.0f64, 0.0f64);
    let sup = |acc: &DriftAccumulator| acc.current().iter().zip(&weight).map(|(v, w)| w * v.norm()).fold(0.0, f64::max);
    let last = u.len() - 1;
    for j in 0..=last {
        let (x, y) = (&u.fields[j].coeffs()[..n], un.fields[j].coeffs());
        for i in 0..n {
            a = a.max(weight[i] * (x[i] - y[i]).norm());
        }
        if j == last {
            break;
        }
        let truncated = burgers_nonlinearity(&u.fields[j], n);
        let gap: Vec<Complex64> = (0..n).map(|i| full[j].coeffs()[i] - truncated.coeffs()[i]).collect();
        phi_acc.advance_silent(dt, &gap);
        phi = phi.max(sup(&phi_acc));

        let v: Vec<f64> = (0..n).map(|i| (x[i] + y[i]).norm()).collect();
        let bound: Vec<Complex64> = modes
            .iter()
            .map(|&k| Complex64::new(k as f64 * pair_bound(k as i64, n as i64, &inv_weight, &v), 0.0))
            .collect();
        q_acc.advance_silent(dt, &bound);
        q = q.max(sup(&q_acc));
    }
    UniquenessRow { n, a, phi, q }
}

/// `sum over k1 + k2 = k, 0 < |k1|, |k2| <= n of a_{|k1|} b_{|k2|}`.
fn pair_bound(k: i64, n: i64, a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for k1 in (k - n).max(-n)..=n.min(k + n) {
        let k2 = k - k1;
        if k1 != 0 && k2 != 0 {
            s += a[(k1.unsigned_abs() - 1) as usize] * b[(k2.unsigned_abs() - 1) as usize];
        }
    }
    s
}

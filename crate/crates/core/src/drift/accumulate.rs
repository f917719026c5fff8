use num_complex::Complex64;

use crate::dynamics::{phi1, TrajectoryRecorder};
use crate::error::{invalid, Result};
use crate::spectral::{burgers_coordinate, mollifier_symbol, Field1d, Lattice, Line, Split};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AccumulatorKind {
    /// `int_0^t D(u_s) ds`
    Plain,
    /// `int_0^t e^{-A^theta (t-s)} D(u_s) ds`
    Mild { theta: f64 },
}

/// Running time integral of a drift, tracked on a set of modes and sampled at
/// every update. Left-endpoint rule; the mild version uses the exact factor
/// `e^{-lambda_k dt}` per update.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftAccumulator {
    pub kind: AccumulatorKind,
    pub modes: Vec<usize>,
    pub times: Vec<f64>,
    /// `values[j][i]`: time `times[j]`, mode `modes[i]`.
    pub values: Vec<Vec<Complex64>>,
    current: Vec<Complex64>,
    pending_time: f64,
    cached: Option<(f64, Vec<f64>, Vec<f64>)>,
}

impl DriftAccumulator {
    pub fn new(kind: AccumulatorKind, modes: &[usize]) -> Self {
        let zero = vec![Complex64::new(0.0, 0.0); modes.len()];
        DriftAccumulator {
            kind,
            modes: modes.to_vec(),
            times: vec![0.0],
            values: vec![zero.clone()],
            current: zero,
            pending_time: 0.0,
            cached: None,
        }
    }

    pub fn plain(modes: &[usize]) -> Self {
        Self::new(AccumulatorKind::Plain, modes)
    }

    pub fn mild(modes: &[usize], theta: f64) -> Self {
        Self::new(AccumulatorKind::Mild { theta }, modes)
    }

    /// Integrate the integrand `d` (one value per tracked mode, evaluated at
    /// the left endpoint) over a step `dt`, and record the result.
    pub fn advance(&mut self, dt: f64, d: &[Complex64]) {
        self.advance_silent(dt, d);
        self.record();
    }

    /// As [`advance`](Self::advance) but without recording a sample.
    pub fn advance_silent(&mut self, dt: f64, d: &[Complex64]) {
        match self.kind {
            AccumulatorKind::Plain => {
                for (c, v) in self.current.iter_mut().zip(d) {
                    *c += dt * v;
                }
            }
            AccumulatorKind::Mild { theta } => {
                let stale = self.cached.as_ref().is_none_or(|(h, _, _)| *h != dt);
                if stale {
                    let lam: Vec<f64> = self.modes.iter().map(|&k| ((k * k) as f64).powf(theta)).collect();
                    let decay = lam.iter().map(|l| (-l * dt).exp()).collect();
                    let phi = lam.iter().map(|&l| phi1(l, dt)).collect();
                    self.cached = Some((dt, decay, phi));
                }
                let (_, decay, phi) = self.cached.as_ref().expect("filled above");
                for i in 0..self.current.len() {
                    self.current[i] = decay[i] * self.current[i] + phi[i] * d[i];
                }
            }
        }
        self.pending_time += dt;
    }

    pub fn record(&mut self) {
        self.times.push(self.pending_time);
        self.values.push(self.current.clone());
    }

    pub fn current(&self) -> &[Complex64] {
        &self.current
    }

    /// `sup_t |value_i(t)|` over recorded times.
    pub fn sup_abs(&self, i: usize) -> f64 {
        self.values.iter().map(|v| v[i].norm()).fold(0.0, f64::max)
    }

    /// Path of mode index `i` restricted to its real part.
    pub fn real_path(&self, i: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[i].re).collect()
    }
}

/// `F_M(u)_k` for each tracked `k`.
pub fn drift_coordinates(u: &Field1d, m: usize, modes: &[usize]) -> Vec<Complex64> {
    let s = Split::new(&u.coeffs()[..m.min(u.cutoff())]);
    modes.iter().map(|&k| burgers_coordinate(&s, k)).collect()
}

/// `F(rho_eps * u)_k` for each tracked `k`, no cutoff beyond `u`'s own.
pub fn mollified_coordinates(u: &Field1d, eps: f64, modes: &[usize]) -> Vec<Complex64> {
    let smoothed: Vec<Complex64> = u
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| c * mollifier_symbol(eps, (i + 1) as f64))
        .collect();
    let s = Split::new(&smoothed);
    modes.iter().map(|&k| burgers_coordinate(&s, k)).collect()
}

fn check(traj: &TrajectoryRecorder<Line>, m: usize, modes: &[usize]) -> Result<()> {
    if traj.is_empty() {
        return invalid("empty trajectory");
    }
    if m == 0 || m > traj.lattice().cutoff() {
        return invalid(format!("M = {m} must lie in 1..={}", traj.lattice().cutoff()));
    }
    if modes.iter().any(|&k| k == 0) {
        return invalid("mode 0 is not tracked");
    }
    Ok(())
}

fn run(traj: &TrajectoryRecorder<Line>, mut acc: DriftAccumulator, f: impl Fn(&Field1d) -> Vec<Complex64>) -> DriftAccumulator {
    let h = traj.sample_dt();
    for u in &traj.fields[..traj.len() - 1] {
        acc.advance(h, &f(u));
    }
    acc
}

/// `G^M_t = int_0^t F_M(u_s) ds` on the recorded grid.
pub fn accumulate_drift(traj: &TrajectoryRecorder<Line>, m: usize, modes: &[usize]) -> Result<DriftAccumulator> {
    check(traj, m, modes)?;
    Ok(run(traj, DriftAccumulator::plain(modes), |u| drift_coordinates(u, m, modes)))
}

/// `G~^M_t = int_0^t e^{-A^theta (t-s)} F_M(u_s) ds` on the recorded grid.
pub fn accumulate_mild_drift(traj: &TrajectoryRecorder<Line>, m: usize, theta: f64, modes: &[usize]) -> Result<DriftAccumulator> {
    check(traj, m, modes)?;
    Ok(run(traj, DriftAccumulator::mild(modes, theta), |u| drift_coordinates(u, m, modes)))
}

/// `B^eps_t = int_0^t F(rho_eps * u_s) ds` on the recorded grid.
pub fn mollified_drift(traj: &TrajectoryRecorder<Line>, eps: f64, modes: &[usize]) -> Result<DriftAccumulator> {
    if !(eps > 0.0) {
        return invalid(format!("eps must be positive, got {eps}"));
    }
    check(traj, traj.lattice().cutoff().max(1), modes)?;
    Ok(run(traj, DriftAccumulator::plain(modes), |u| mollified_coordinates(u, eps, modes)))
}

use num_complex::Complex64;

use super::observable::Observable;
use crate::dynamics::{Dynamics, TrajectoryRecorder};
use crate::error::{invalid, Error, Result};
use crate::spectral::{Line, SpectralField};

/// Discrete forward and backward martingales of one observable along a path,
/// and the terms of the identity
///
/// `2 int_0^t L0 h(u_s) ds = -M+_t + M-_{T-t} - M-_T`.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingalePair {
    pub times: Vec<f64>,
    /// `M+` at `times[j]`.
    pub forward: Vec<f64>,
    /// `M-` at reversed time `times[i]`, i.e. built from `u(T - s)`.
    pub backward: Vec<f64>,
    /// `2 int_0^t L0 h`, left-endpoint rule.
    pub generator_integral: Vec<f64>,
    pub qv_forward: f64,
    pub qv_backward: f64,
}

impl MartingalePair {
    /// `-M+_t + M-_{T-t} - M-_T` at `times[j]`.
    pub fn martingale_side(&self, j: usize) -> f64 {
        let n = self.times.len() - 1;
        -self.forward[j] + self.backward[n - j] - self.backward[n]
    }

    /// `sup_t` of the gap between the two sides of the identity.
    pub fn residual(&self) -> f64 {
        (0..self.times.len())
            .map(|j| (self.generator_integral[j] - self.martingale_side(j)).abs())
            .fold(0.0, f64::max)
    }
}

/// Forward increments are `D h(u_j) . eta_j` with the recorded innovations.
/// The time-reversed path solves the same scheme with drift `-D`, so its
/// innovations are reconstructed as
/// `eta^_j = u_j - e^{-lambda dt} u_{j+1} + phi1 D(u_{j+1})` and the backward
/// increments are `D h(u_{j+1}) . eta^_j`.
pub fn martingale_decompose(
    traj: &TrajectoryRecorder<Line>,
    dynamics: &Dynamics<Line>,
    observable: &Observable<Line>,
    theta: f64,
) -> Result<MartingalePair> {
    let noise = traj.noise.as_ref().ok_or(Error::MissingNoise)?;
    if traj.stride != 1 || noise.len() + 1 != traj.len() {
        return invalid("martingale decomposition needs every step recorded (stride 1)");
    }
    if traj.lattice() != dynamics.lattice() || traj.dt != dynamics.config().dt {
        return invalid("trajectory and dynamics disagree on lattice or step");
    }
    let n = noise.len();
    let dt = traj.dt;
    let fields = &traj.fields;

    let mut forward = Vec::with_capacity(n + 1);
    let mut generator_integral = Vec::with_capacity(n + 1);
    let (mut m, mut g, mut qv) = (0.0, 0.0, 0.0);
    forward.push(0.0);
    generator_integral.push(0.0);
    for j in 0..n {
        let inc = observable.directional(&fields[j], &noise[j]);
        m += inc;
        qv += inc * inc;
        g += 2.0 * dt * observable.generator(&fields[j], theta);
        forward.push(m);
        generator_integral.push(g);
    }

    // backward increments indexed by forward step j, then summed in reversed time
    let mut back_inc = vec![0.0; n];
    let decay = dynamics.decay();
    let phi = dynamics.phi1();
    for j in 0..n {
        let next = &fields[j + 1];
        let d = dynamics.drift_at(next);
        let eta: Vec<Complex64> = (0..next.coeffs().len())
            .map(|i| {
                let mut e = fields[j].coeffs()[i] - decay[i] * next.coeffs()[i];
                if let Some(d) = &d {
                    e += phi[i] * d.coeffs()[i];
                }
                e
            })
            .collect();
        back_inc[j] = observable.directional(next, &eta);
    }
    let mut backward = Vec::with_capacity(n + 1);
    let (mut mb, mut qvb) = (0.0, 0.0);
    backward.push(0.0);
    for i in 0..n {
        let inc = back_inc[n - 1 - i];
        mb += inc;
        qvb += inc * inc;
        backward.push(mb);
    }
    Ok(MartingalePair {
        times: traj.times.clone(),
        forward,
        backward,
        generator_integral,
        qv_forward: qv,
        qv_backward: qvb,
    })
}

/// Value of the observable along the recorded path.
pub fn observe(traj: &TrajectoryRecorder<Line>, observable: &Observable<Line>) -> Vec<f64> {
    traj.fields.iter().map(|u: &SpectralField<Line>| observable.value(u)).collect()
}

//! Exponential-Euler integrators for the Galerkin models.
//!
//! Every model has the per-mode form `du_k = (-lambda_k u_k + D_k(u)) dt + noise`,
//! and one step reads
//!
//! `u_k <- e^{-lambda_k dt} u_k + phi1(lambda_k, dt) D_k(u) + eta_k`,
//!
//! where `eta_k` is the exact Ornstein-Uhlenbeck innovation with variance
//! `v_k (1 - e^{-2 lambda_k dt})` for stationary variance `v_k`. With the drift
//! off this is the exact OU transition kernel.

use std::fmt;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::gaussian::{circular_normal, MeasureSpec, Purpose, RngStream, StreamId};
use crate::spectral::{
    burgers_nonlinearity, ddt_nonlinearity, ss_nonlinearity, Disk, Lattice, Line,
    NsDrift, SpectralField,
};

pub const BLOW_UP_LIMIT: f64 = 1e6;
pub const STEP_RULE_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Ou,
    Sbe,
    Ddt,
    SsLattice,
    Ns2d,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Ou => "ou",
            ModelKind::Sbe => "sbe",
            ModelKind::Ddt => "ddt",
            ModelKind::SsLattice => "ss_lattice",
            ModelKind::Ns2d => "ns2d",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "ou" => ModelKind::Ou,
            "sbe" => ModelKind::Sbe,
            "ddt" => ModelKind::Ddt,
            "ss_lattice" | "ss" => ModelKind::SsLattice,
            "ns2d" => ModelKind::Ns2d,
            _ => return None,
        })
    }

    pub fn is_2d(self) -> bool {
        self == ModelKind::Ns2d
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub kind: ModelKind,
    /// Dissipation exponent: `lambda_k = |k|^{2 theta}` in 1d.
    pub theta: f64,
    /// DDT smoothing exponent, or the hyperviscosity exponent in 2d.
    pub sigma: f64,
    pub n: usize,
    pub dt: f64,
    pub horizon: f64,
    pub stride: usize,
    pub record_noise: bool,
    /// Switch the nonlinear drift off (the model then reduces to its OU part).
    pub drift: bool,
    /// Switch the linear damping and, with it, the noise off.
    pub dissipation: bool,
    /// Multiplies the noise amplitude; 1 keeps the invariant measure.
    pub noise_scale: f64,
}

impl ModelConfig {
    pub fn new(kind: ModelKind, theta: f64, n: usize, dt: f64, horizon: f64) -> Self {
        ModelConfig {
            kind,
            theta,
            sigma: 0.0,
            n,
            dt,
            horizon,
            stride: 1,
            record_noise: false,
            drift: kind != ModelKind::Ou,
            dissipation: true,
            noise_scale: 1.0,
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }

    pub fn recording_noise(mut self) -> Self {
        self.record_noise = true;
        self
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    /// Damping rate of mode `k` (before the dissipation switch).
    pub fn rate(&self, norm_sq: f64) -> f64 {
        match self.kind {
            ModelKind::SsLattice => {
                let h = 2.0 * std::f64::consts::PI / (2 * self.n + 1) as f64;
                2.0 * (1.0 - (norm_sq.sqrt() * h).cos()) / (h * h)
            }
            ModelKind::Ns2d => norm_sq.powf(1.0 + self.sigma),
            _ => norm_sq.powf(self.theta),
        }
    }

    /// Local Lipschitz scale of `D_k` at a typical stationary state.
    fn sensitivity(&self, k: f64) -> f64 {
        if !self.drift {
            return 0.0;
        }
        let amp = (2.0 * self.n as f64).sqrt();
        match self.kind {
            ModelKind::Ou => 0.0,
            ModelKind::Sbe => 2.0 * k * amp,
            ModelKind::Ddt => 2.0 * k.powf(1.0 - 2.0 * self.sigma) * amp,
            ModelKind::SsLattice => 6.0 * k * amp,
            ModelKind::Ns2d => {
                let full = 2 * Disk::new(self.n).len();
                2.0 * self.n as f64 * (full as f64).sqrt()
            }
        }
    }

    /// `max_k phi1(lambda_k, dt) * sensitivity_k`; must not exceed
    /// [`STEP_RULE_LIMIT`]. The linear part is integrated exactly, so only the
    /// explicit drift increment is constrained.
    pub fn step_rule_value(&self) -> f64 {
        (1..=self.n)
            .map(|k| {
                let k = k as f64;
                let lam = if self.dissipation { self.rate(k * k) } else { 0.0 };
                phi1(lam, self.dt) * self.sensitivity(k)
            })
            .fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta >= 0.0) {
            return invalid("theta must be >= 0");
        }
        if !(self.sigma >= 0.0) {
            return invalid("sigma must be >= 0");
        }
        if self.kind == ModelKind::Ns2d && !(self.sigma > 0.0) {
            return invalid("ns2d needs sigma > 0");
        }
        if self.n == 0 {
            return invalid("cutoff N must be positive");
        }
        if !(self.dt > 0.0) {
            return invalid("dt must be positive");
        }
        if !(self.horizon >= 0.0) || (self.horizon > 0.0 && self.horizon < self.dt) {
            return invalid("T must be 0 or at least dt");
        }
        if self.stride == 0 {
            return invalid("stride must be positive");
        }
        if !(self.noise_scale >= 0.0) {
            return invalid("noise scale must be >= 0");
        }
        let v = self.step_rule_value();
        if v > STEP_RULE_LIMIT {
            return Err(Error::StepRule(format!(
                "max_k phi1(lambda_k, dt) * drift scale = {v:.3} > {STEP_RULE_LIMIT} for model {} with N = {}, dt = {}",
                self.kind, self.n, self.dt
            )));
        }
        Ok(())
    }
}

/// `(1 - e^{-lambda dt}) / lambda`, equal to `dt` at `lambda = 0`.
pub fn phi1(lambda: f64, dt: f64) -> f64 {
    let x = lambda * dt;
    if x.abs() < 1e-8 {
        dt * (1.0 - 0.5 * x)
    } else {
        -(-x).exp_m1() / lambda
    }
}

/// Nonlinear part of a model.
pub trait DriftField<L: Lattice>: Send + Sync {
    fn eval(&self, x: &SpectralField<L>) -> SpectralField<L>;
}

struct Burgers(usize);
struct Ddt(usize, f64);
struct Lattice1d(usize);

impl DriftField<Line> for Burgers {
    fn eval(&self, x: &SpectralField<Line>) -> SpectralField<Line> {
        burgers_nonlinearity(x, self.0)
    }
}

impl DriftField<Line> for Ddt {
    fn eval(&self, x: &SpectralField<Line>) -> SpectralField<Line> {
        ddt_nonlinearity(x, self.0, self.1)
    }
}

impl DriftField<Line> for Lattice1d {
    fn eval(&self, x: &SpectralField<Line>) -> SpectralField<Line> {
        ss_nonlinearity(x, self.0)
    }
}

impl DriftField<Disk> for NsDrift {
    fn eval(&self, x: &SpectralField<Disk>) -> SpectralField<Disk> {
        self.apply(x)
    }
}

/// Per-mode coefficients of one model at one step size.
pub struct Dynamics<L: Lattice> {
    config: ModelConfig,
    measure: MeasureSpec<L>,
    rates: Vec<f64>,
    decay: Vec<f64>,
    phi1: Vec<f64>,
    noise_sd: Vec<f64>,
    drift: Option<Box<dyn DriftField<L>>>,
}

impl<L: Lattice> fmt::Debug for Dynamics<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Dynamics")
            .field("config", &self.config)
            .field("drift", &self.drift.is_some())
            .finish()
    }
}

impl Dynamics<Line> {
    pub fn from_config(cfg: &ModelConfig) -> Result<Self> {
        cfg.validate()?;
        let drift: Option<Box<dyn DriftField<Line>>> = match (cfg.kind, cfg.drift) {
            (_, false) | (ModelKind::Ou, _) => None,
            (ModelKind::Sbe, true) => Some(Box::new(Burgers(cfg.n))),
            (ModelKind::Ddt, true) => Some(Box::new(Ddt(cfg.n, cfg.sigma))),
            (ModelKind::SsLattice, true) => Some(Box::new(Lattice1d(cfg.n))),
            (ModelKind::Ns2d, true) => return invalid("ns2d runs on a 2d lattice"),
        };
        let measure = MeasureSpec::white_noise(cfg.n);
        Ok(Self::assemble(cfg, measure, drift))
    }
}

impl Dynamics<Disk> {
    pub fn from_config(cfg: &ModelConfig) -> Result<Self> {
        cfg.validate()?;
        if cfg.kind != ModelKind::Ns2d {
            return invalid(format!("model {} runs on a 1d lattice", cfg.kind));
        }
        let drift: Option<Box<dyn DriftField<Disk>>> = if cfg.drift {
            Some(Box::new(NsDrift::new(cfg.n)))
        } else {
            None
        };
        Ok(Self::assemble(cfg, MeasureSpec::ns_gibbs(cfg.n), drift))
    }
}

impl<L: Lattice> Dynamics<L> {
    fn assemble(cfg: &ModelConfig, measure: MeasureSpec<L>, drift: Option<Box<dyn DriftField<L>>>) -> Self {
        let lat = &measure.lattice;
        let m = lat.len();
        let mut rates = Vec::with_capacity(m);
        let mut decay = Vec::with_capacity(m);
        let mut phi = Vec::with_capacity(m);
        let mut sd = Vec::with_capacity(m);
        for i in 0..m {
            let lam = if cfg.dissipation { cfg.rate(lat.norm_sq(i)) } else { 0.0 };
            rates.push(lam);
            decay.push((-lam * cfg.dt).exp());
            phi.push(phi1(lam, cfg.dt));
            let var = measure.variance(i) * -(-2.0 * lam * cfg.dt).exp_m1();
            sd.push(cfg.noise_scale * var.sqrt());
        }
        Dynamics {
            config: cfg.clone(),
            measure,
            rates,
            decay,
            phi1: phi,
            noise_sd: sd,
            drift,
        }
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn lattice(&self) -> &L {
        &self.measure.lattice
    }

    pub fn measure(&self) -> &MeasureSpec<L> {
        &self.measure
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn decay(&self) -> &[f64] {
        &self.decay
    }

    pub fn phi1(&self) -> &[f64] {
        &self.phi1
    }

    pub fn noise_sd(&self) -> &[f64] {
        &self.noise_sd
    }

    pub fn has_drift(&self) -> bool {
        self.drift.is_some()
    }

    /// `D(x)`, or `None` when the drift is off.
    pub fn drift_at(&self, x: &SpectralField<L>) -> Option<SpectralField<L>> {
        self.drift.as_ref().map(|d| d.eval(x))
    }

    /// One step given unit circular normals `xi`; writes the innovation
    /// `eta_k = sd_k xi_k` actually added into `eta`.
    pub fn step(&self, state: &mut PathState<L>, xi: &[Complex64], eta: &mut [Complex64]) -> Result<()> {
        let d = self.drift_at(&state.u);
        let u = state.u.coeffs_mut();
        for i in 0..u.len() {
            eta[i] = self.noise_sd[i] * xi[i];
            let mut v = self.decay[i] * u[i];
            if let Some(d) = &d {
                v += self.phi1[i] * d.coeffs()[i];
            }
            u[i] = v + eta[i];
        }
        state.steps += 1;
        state.t = state.steps as f64 * self.config.dt;
        let norm = (2.0 * u.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt();
        if !(norm <= BLOW_UP_LIMIT) {
            return Err(Error::BlowUp {
                t: state.t,
                norm,
                limit: BLOW_UP_LIMIT,
            });
        }
        Ok(())
    }

    /// Draws fresh noise from `noise` and steps.
    pub fn advance(&self, state: &mut PathState<L>, noise: &mut PathNoise) -> Result<()> {
        noise.draw();
        let (xi, eta) = (&noise.xi, &mut noise.eta);
        self.step(state, xi, eta)
    }

    fn expect(&self, kinds: &[ModelKind], op: &str) {
        assert!(
            kinds.contains(&self.config.kind),
            "{op} called for model {}",
            self.config.kind
        );
    }

    pub fn noise_for(&self, stream: &RngStream) -> PathNoise {
        PathNoise::new(self.lattice(), stream)
    }

    /// Fresh sample of the invariant measure from the `Initial` stream of `stream`'s path.
    pub fn initial(&self, stream: &RngStream) -> SpectralField<L> {
        self.measure.sample(&stream.with(stream.id.path, Purpose::Initial))
    }
}

impl Dynamics<Line> {
    pub fn ou_step(&self, state: &mut PathState<Line>, noise: &mut PathNoise) -> Result<()> {
        self.expect(&[ModelKind::Ou], "ou_step");
        self.advance(state, noise)
    }

    pub fn sbe_step(&self, state: &mut PathState<Line>, noise: &mut PathNoise) -> Result<()> {
        self.expect(&[ModelKind::Sbe, ModelKind::Ddt], "sbe_step");
        self.advance(state, noise)
    }

    pub fn ss_step(&self, state: &mut PathState<Line>, noise: &mut PathNoise) -> Result<()> {
        self.expect(&[ModelKind::SsLattice], "ss_step");
        self.advance(state, noise)
    }
}

impl Dynamics<Disk> {
    pub fn ns_step(&self, state: &mut PathState<Disk>, noise: &mut PathNoise) -> Result<()> {
        self.expect(&[ModelKind::Ns2d], "ns_step");
        self.advance(state, noise)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathState<L: Lattice> {
    pub t: f64,
    pub steps: usize,
    pub u: SpectralField<L>,
}

impl<L: Lattice> PathState<L> {
    pub fn new(u: SpectralField<L>) -> Self {
        PathState { t: 0.0, steps: 0, u }
    }
}

/// One generator per mode, keyed by the mode and not by its slot, so that
/// resolutions sharing a mode share its Brownian path.
#[derive(Debug, Clone)]
pub struct PathNoise {
    rngs: Vec<ChaCha8Rng>,
    keys: Vec<u64>,
    stream: RngStream,
    pub xi: Vec<Complex64>,
    pub eta: Vec<Complex64>,
}

impl PathNoise {
    pub fn new<L: Lattice>(lattice: &L, stream: &RngStream) -> Self {
        let noise = stream.with(stream.id.path, Purpose::Noise);
        let keys: Vec<u64> = (0..lattice.len()).map(|i| lattice.mode_key(i)).collect();
        let rngs = keys.iter().map(|&k| noise.rng_for(k)).collect();
        let m = lattice.len();
        PathNoise {
            rngs,
            keys,
            stream: noise,
            xi: vec![Complex64::new(0.0, 0.0); m],
            eta: vec![Complex64::new(0.0, 0.0); m],
        }
    }

    pub fn stream(&self) -> &RngStream {
        &self.stream
    }

    pub fn mode_keys(&self) -> &[u64] {
        &self.keys
    }

    pub fn draw(&mut self) {
        for (x, rng) in self.xi.iter_mut().zip(&mut self.rngs) {
            *x = circular_normal(rng);
        }
    }
}

/// Recorded path: fields at `t_j = j * dt * stride` and, optionally, every
/// per-step innovation.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecorder<L: Lattice> {
    pub dt: f64,
    pub stride: usize,
    pub times: Vec<f64>,
    pub fields: Vec<SpectralField<L>>,
    pub noise: Option<Vec<Vec<Complex64>>>,
    pub stream: StreamId,
    pub mode_keys: Vec<u64>,
}

impl<L: Lattice> TrajectoryRecorder<L> {
    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// Spacing between recorded samples.
    pub fn sample_dt(&self) -> f64 {
        self.dt * self.stride as f64
    }

    pub fn lattice(&self) -> &L {
        self.fields[0].lattice()
    }
}

/// Runs `dynamics` from `initial` (or a fresh invariant sample), calling
/// `observe(step, state, innovation)` after every step and once at step 0
/// with an empty innovation slice.
pub fn simulate_with<L, F>(
    dynamics: &Dynamics<L>,
    initial: Option<SpectralField<L>>,
    stream: &RngStream,
    mut observe: F,
) -> Result<SpectralField<L>>
where
    L: Lattice,
    F: FnMut(usize, &PathState<L>, &[Complex64]),
{
    let u0 = match initial {
        Some(u) => {
            if u.lattice() != dynamics.lattice() {
                return invalid("initial field lives on a different lattice");
            }
            u
        }
        None => dynamics.initial(stream),
    };
    let mut state = PathState::new(u0);
    let mut noise = dynamics.noise_for(stream);
    observe(0, &state, &[]);
    for j in 1..=dynamics.config().steps() {
        dynamics.advance(&mut state, &mut noise)?;
        observe(j, &state, &noise.eta);
    }
    Ok(state.u)
}

/// Records every `stride`-th field (and all innovations when the config asks).
pub fn simulate_path<L: Lattice>(
    dynamics: &Dynamics<L>,
    initial: Option<SpectralField<L>>,
    stream: &RngStream,
) -> Result<TrajectoryRecorder<L>> {
    let cfg = dynamics.config();
    let mut times = Vec::new();
    let mut fields = Vec::new();
    let mut noise = cfg.record_noise.then(Vec::new);
    simulate_with(dynamics, initial, stream, |j, state, eta| {
        if j > 0 {
            if let Some(n) = noise.as_mut() {
                n.push(eta.to_vec());
            }
        }
        if j % cfg.stride == 0 {
            times.push(state.t);
            fields.push(state.u.clone());
        }
    })?;
    Ok(TrajectoryRecorder {
        dt: cfg.dt,
        stride: cfg.stride,
        times,
        fields,
        noise,
        stream: stream.id.clone(),
        mode_keys: (0..dynamics.lattice().len()).map(|i| dynamics.lattice().mode_key(i)).collect(),
    })
}

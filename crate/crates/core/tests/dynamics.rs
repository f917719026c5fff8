use num_complex::Complex64;
use sbelab_core::dynamics::{
    simulate_path, simulate_with, Dynamics, ModelConfig, ModelKind, PathState,
};
use sbelab_core::gaussian::{Purpose, RngStream, StreamId};
use sbelab_core::spectral::{Disk, Field1d, Field2d, Lattice, Line};

fn stream(path: u64) -> RngStream {
    RngStream::new(11, StreamId::new("dynamics-tests", path, Purpose::Noise))
}

fn second_moments<L: Lattice>(fields: &[sbelab_core::spectral::SpectralField<L>]) -> Vec<f64> {
    let m = fields[0].coeffs().len();
    let mut out = vec![0.0; m];
    for f in fields {
        for (o, c) in out.iter_mut().zip(f.coeffs()) {
            *o += c.norm_sqr();
        }
    }
    out.iter().map(|s| s / fields.len() as f64).collect()
}

#[test]
fn huge_ou_step_lands_on_white_noise() {
    let mut cfg = ModelConfig::new(ModelKind::Ou, 1.0, 8, 1e3, 1e3);
    cfg.validate().unwrap();
    cfg.stride = 1;
    let d = Dynamics::<Line>::from_config(&cfg).unwrap();
    let zero = Field1d::zeros(Line::new(8));
    let finals: Vec<_> = (0..40_000)
        .map(|p| simulate_with(&d, Some(zero.clone()), &stream(p), |_, _, _| {}).unwrap())
        .collect();
    for (i, m) in second_moments(&finals).iter().enumerate() {
        assert!((m - 1.0).abs() < 0.02, "mode {}: {m}", i + 1);
    }
}

#[test]
fn noiseless_ou_decays_exactly() {
    let mut cfg = ModelConfig::new(ModelKind::Ou, 1.0, 4, 2f64.ln(), 2f64.ln());
    cfg.noise_scale = 0.0;
    let d = Dynamics::<Line>::from_config(&cfg).unwrap();
    let mut x = Field1d::zeros(Line::new(4));
    x.set(1, Complex64::new(1.0, 0.0));
    let out = simulate_with(&d, Some(x), &stream(0), |_, _, _| {}).unwrap();
    assert!((out.get(1) - Complex64::new(0.5, 0.0)).norm() < 1e-15);
}

#[test]
fn ou_is_stationary_from_white_noise() {
    let cfg = ModelConfig::new(ModelKind::Ou, 1.0, 8, 1e-3, 1.0);
    let d = Dynamics::<Line>::from_config(&cfg).unwrap();
    let finals: Vec<_> = (0..10_000)
        .map(|p| simulate_with(&d, None, &stream(p), |_, _, _| {}).unwrap())
        .collect();
    for m in second_moments(&finals) {
        assert!((m - 1.0).abs() < 0.02, "{m}");
    }
}

#[test]
fn drift_off_reproduces_ou_bitwise() {
    let mut sbe = ModelConfig::new(ModelKind::Sbe, 1.0, 16, 1e-4, 0.01);
    sbe.drift = false;
    let ou = ModelConfig::new(ModelKind::Ou, 1.0, 16, 1e-4, 0.01);
    let a = simulate_path(&Dynamics::<Line>::from_config(&sbe).unwrap(), None, &stream(5)).unwrap();
    let b = simulate_path(&Dynamics::<Line>::from_config(&ou).unwrap(), None, &stream(5)).unwrap();
    assert_eq!(a.fields, b.fields);
}

#[test]
fn bare_drift_step_by_hand() {
    let dt = 1e-3;
    let mut cfg = ModelConfig::new(ModelKind::Sbe, 1.0, 4, dt, dt);
    cfg.dissipation = false;
    let d = Dynamics::<Line>::from_config(&cfg).unwrap();
    assert!(d.noise_sd().iter().all(|&s| s == 0.0));
    let mut x = Field1d::zeros(Line::new(4));
    x.set(1, Complex64::new(1.0, 0.0));
    let out = simulate_with(&d, Some(x), &stream(0), |_, _, _| {}).unwrap();
    assert!((out.get(2) - Complex64::new(0.0, 2.0 * dt)).norm() < 1e-18);
}

#[test]
fn lattice_model_linear_part_is_stationary() {
    let mut cfg = ModelConfig::new(ModelKind::SsLattice, 1.0, 16, 0.05, 0.5);
    cfg.drift = false;
    let d = Dynamics::<Line>::from_config(&cfg).unwrap();
    let finals: Vec<_> = (0..40_000)
        .map(|p| simulate_with(&d, None, &stream(p), |_, _, _| {}).unwrap())
        .collect();
    for m in second_moments(&finals) {
        assert!((m - 1.0).abs() < 0.02, "{m}");
    }
}

#[test]
fn ns_linear_part_keeps_gibbs_variances() {
    let mut cfg = ModelConfig::new(ModelKind::Ns2d, 0.0, 4, 0.01, 0.2).with_sigma(0.5);
    cfg.drift = false;
    let d = Dynamics::<Disk>::from_config(&cfg).unwrap();
    let n = 8_000;
    let finals: Vec<_> = (0..n)
        .map(|p| simulate_with(&d, None, &stream(p), |_, _, _| {}).unwrap())
        .collect();
    let lat = d.lattice().clone();
    for (i, m) in second_moments(&finals).iter().enumerate() {
        let v = 1.0 / lat.norm_sq(i);
        // |x|^2 is exponential with mean v, so the standard error is v / sqrt(n)
        let se = v / (n as f64).sqrt();
        assert!((m - v).abs() < 3.5 * se, "{:?}: {m} vs {v}", lat.mode(i));
    }
}

#[test]
fn ns_drift_micro_step_keeps_kinetic_energy() {
    let energy = |x: &Field2d| -> f64 {
        let l = x.lattice();
        (0..l.len()).map(|i| 2.0 * l.norm_sq(i) * x.coeffs()[i].norm_sqr()).sum()
    };
    let mut cfg = ModelConfig::new(ModelKind::Ns2d, 0.0, 5, 1e-3, 1e-3).with_sigma(0.5);
    cfg.dissipation = false;
    let x0 = Dynamics::<Disk>::from_config(&cfg).unwrap().initial(&stream(1));
    let e0 = energy(&x0);
    let mut errs = Vec::new();
    for dt in [1e-3, 5e-4] {
        cfg.dt = dt;
        cfg.horizon = dt;
        let d = Dynamics::<Disk>::from_config(&cfg).unwrap();
        let x1 = simulate_with(&d, Some(x0.clone()), &stream(1), |_, _, _| {}).unwrap();
        errs.push((energy(&x1) - e0).abs());
    }
    // second order in dt: halving dt divides the change by about 4
    let ratio = errs[0] / errs[1];
    assert!(ratio > 3.5 && ratio < 4.5, "ratio {ratio}");
}

#[test]
fn runs_are_deterministic_and_coupled_across_cutoffs() {
    let cfg = ModelConfig::new(ModelKind::Sbe, 1.0, 16, 1e-4, 0.01);
    let d16 = Dynamics::<Line>::from_config(&cfg).unwrap();
    let a = simulate_path(&d16, None, &stream(3)).unwrap();
    let b = simulate_path(&d16, None, &stream(3)).unwrap();
    assert_eq!(a, b);
    let cfg32 = ModelConfig { n: 32, ..cfg };
    let d32 = Dynamics::<Line>::from_config(&cfg32).unwrap();
    let c = simulate_path(&d32, None, &stream(3)).unwrap();
    assert_eq!(&c.fields[0].coeffs()[..16], a.fields[0].coeffs());
}

#[test]
fn recorder_layout() {
    let cfg = ModelConfig::new(ModelKind::Sbe, 1.0, 8, 1e-3, 0.1).with_stride(10).recording_noise();
    let d = Dynamics::<Line>::from_config(&cfg).unwrap();
    let tr = simulate_path(&d, None, &stream(0)).unwrap();
    assert_eq!(tr.len(), 11);
    assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
    assert_eq!(tr.times[0], 0.0);
    assert_eq!(tr.noise.as_ref().unwrap().len(), 100);
    let zero = ModelConfig::new(ModelKind::Ns2d, 0.0, 3, 1e-3, 0.0).with_sigma(0.5);
    let tr = simulate_path(&Dynamics::<Disk>::from_config(&zero).unwrap(), None, &stream(0)).unwrap();
    assert_eq!(tr.len(), 1);
}

#[test]
fn blow_up_is_reported() {
    // no damping, no step rule protection from a huge initial field
    let mut cfg = ModelConfig::new(ModelKind::Sbe, 1.0, 8, 1e-4, 1.0);
    cfg.dissipation = false;
    let d = Dynamics::<Line>::from_config(&cfg).unwrap();
    let mut x = Field1d::zeros(Line::new(8));
    x.set(1, Complex64::new(1e3, 0.0));
    x.set(2, Complex64::new(0.0, 1e3));
    let err = simulate_with(&d, Some(x), &stream(0), |_, _, _| {}).unwrap_err();
    assert!(matches!(err, sbelab_core::Error::BlowUp { .. }), "{err}");
    let _ = PathState::new(Field1d::zeros(Line::new(1)));
}

use num_complex::Complex64;
use sbelab_core::gaussian::{
    circular_normal, complex_bm_increment, wick_moment_oracle, MeasureSpec, Purpose, RngStream,
    StreamId,
};

fn stream(path: u64) -> RngStream {
    RngStream::new(2024, StreamId::new("gaussian-tests", path, Purpose::Initial))
}

#[test]
fn white_noise_second_moments() {
    let mu = MeasureSpec::white_noise(8);
    let n = 100_000;
    let mut m2 = [0.0; 8];
    let mut sq = [Complex64::new(0.0, 0.0); 8];
    for p in 0..n {
        let x = mu.sample(&stream(p));
        for (i, c) in x.coeffs().iter().enumerate() {
            m2[i] += c.norm_sqr();
            sq[i] += c * c;
        }
    }
    for i in 0..8 {
        assert!((m2[i] / n as f64 - 1.0).abs() < 0.02, "E|x_{}|^2 = {}", i + 1, m2[i] / n as f64);
        assert!((sq[i] / n as f64).norm() < 0.02);
    }
}

#[test]
fn gibbs_unit_mode_variance() {
    let g = MeasureSpec::ns_gibbs(3);
    let n = 100_000;
    let mut m2 = 0.0;
    let mut m2_diag = 0.0;
    for p in 0..n {
        let x = g.sample(&stream(p));
        m2 += x.get([1, 0]).norm_sqr();
        m2_diag += x.get([1, 1]).norm_sqr();
    }
    assert!((m2 / n as f64 - 1.0).abs() < 0.02);
    assert!((m2_diag / n as f64 - 0.5).abs() < 0.01);
}

#[test]
fn brownian_increments() {
    let mut a = stream(0).with(0, Purpose::Noise).rng();
    let mut b = stream(0).with(1, Purpose::Noise).rng();
    let n = 100_000;
    let (mut m2, mut cross) = (0.0, Complex64::new(0.0, 0.0));
    for _ in 0..n {
        let x = complex_bm_increment(1.0, &mut a).unwrap();
        let y = complex_bm_increment(1.0, &mut b).unwrap();
        m2 += x.norm_sqr();
        cross += x * y.conj();
    }
    assert!((m2 / n as f64 - 1.0).abs() < 0.02);
    assert!((cross / n as f64).norm() < 0.02);
    assert!(complex_bm_increment(0.0, &mut a).is_err());
}

#[test]
fn fourth_moment_oracle_against_monte_carlo() {
    let mu = MeasureSpec::white_noise(2);
    let exact = wick_moment_oracle(&mu, &[(1, false), (1, true), (1, false), (1, true)]).unwrap();
    assert_eq!(exact, 2.0);
    let mut rng = stream(9).rng();
    let n = 1_000_000;
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let v = circular_normal(&mut rng).norm_sqr().powi(2);
        s += v;
        s2 += v * v;
    }
    let mean = s / n as f64;
    let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
    assert!((mean - exact).abs() < 4.0 * se, "{mean} vs {exact} (se {se})");
}

#[test]
fn integration_by_parts() {
    // phi = x_1 x_{-1}: D_1 phi = x_{-1}, compared with x_{-1} phi
    let mu = MeasureSpec::white_noise(2);
    let n = 200_000;
    let mut diff = Vec::with_capacity(n);
    for p in 0..n {
        let x = mu.sample(&stream(p as u64));
        let xm = x.get(-1);
        let phi = x.get(1) * xm;
        diff.push(xm - xm * phi);
    }
    let mean: Complex64 = diff.iter().sum::<Complex64>() / n as f64;
    let var: f64 = diff.iter().map(|d| (d - mean).norm_sqr()).sum::<f64>() / n as f64;
    let se = (var / n as f64).sqrt();
    assert!(mean.norm() < 3.0 * se, "{mean} (se {se})");
}

#[test]
fn identical_streams_are_bitwise_equal() {
    let mu = MeasureSpec::ns_gibbs(4);
    let a = mu.sample(&stream(3));
    let b = mu.sample(&stream(3));
    assert_eq!(
        a.coeffs().iter().map(|c| (c.re.to_bits(), c.im.to_bits())).collect::<Vec<_>>(),
        b.coeffs().iter().map(|c| (c.re.to_bits(), c.im.to_bits())).collect::<Vec<_>>()
    );
}

use num_complex::Complex64;

use super::observable::Observable;
use super::Part;
use crate::spectral::{Field1d, Lattice, QuadraticForm, SpectralField};

/// `H_N(x)_k = -i k sum x_k1 x_k2 / (|k1|^{2 theta} + |k2|^{2 theta})`, the
/// solution of `L0 H_N = F_N`, returned on the lattice of `x`.
pub fn h_poisson(x: &Field1d, n: usize, theta: f64) -> Field1d {
    let m = n.min(x.cutoff());
    let c = &x.coeffs()[..m];
    let lam: Vec<f64> = (1..=m).map(|k| ((k * k) as f64).powf(theta)).collect();
    let mut out = Field1d::zeros(x.lattice().clone());
    for k in 1..=m {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 1..k {
            acc += c[j - 1] * c[k - j - 1] / (lam[j - 1] + lam[k - j - 1]);
        }
        for j in 1..=m - k {
            acc += 2.0 * c[j - 1].conj() * c[k + j - 1] / (lam[j - 1] + lam[k + j - 1]);
        }
        out.coeffs_mut()[k - 1] = Complex64::new(0.0, -(k as f64)) * acc;
    }
    out
}

/// `L0` applied to every output coordinate of `q`, evaluated at `x`, on the
/// output lattice of `q`. For each coordinate this is
/// `-sum_q |q|^{2 theta} x_q D_q Q_k + sum_q |q|^{2 theta} D_{-q} D_q Q_k`.
pub fn generator_apply<L: Lattice>(form: &QuadraticForm<L>, x: &SpectralField<L>, theta: f64) -> SpectralField<L> {
    let out = form.output().clone();
    let coeffs = (0..out.len())
        .map(|i| {
            let k = out.mode(i);
            let re = Observable::new(form, k, Part::Re, x.lattice()).generator(x, theta);
            let im = Observable::new(form, k, Part::Im, x.lattice()).generator(x, theta);
            Complex64::new(re, im)
        })
        .collect();
    SpectralField::from_coeffs(out, coeffs)
}

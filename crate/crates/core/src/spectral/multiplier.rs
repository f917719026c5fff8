use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::{Lattice, Line, SpectralField};
use crate::error::{invalid, Error, Result};

type Symbol<M> = Arc<dyn Fn(M) -> Complex64 + Send + Sync>;

/// Fourier multiplier `x_k -> m(k) x_k`.
///
/// Construction checks `m(-k) = conj(m(k))` on a probe band so that the image
/// of a real field is again real.
#[derive(Clone)]
pub struct Multiplier<L: Lattice> {
    label: String,
    symbol: Symbol<L::Mode>,
}

impl<L: Lattice> fmt::Debug for Multiplier<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Multiplier").field("label", &self.label).finish()
    }
}

impl<L: Lattice> Multiplier<L> {
    /// Checks the symbol on every mode of `probe`.
    pub fn new<F>(label: impl Into<String>, symbol: F, probe: &L) -> Result<Self>
    where
        F: Fn(L::Mode) -> Complex64 + Send + Sync + 'static,
    {
        let label = label.into();
        for i in 0..probe.len() {
            let k = probe.mode(i);
            let a = symbol(k);
            let b = symbol(L::neg_mode(k));
            let scale = a.norm().max(1.0);
            if !((a.conj() - b).norm() <= 1e-12 * scale) {
                return Err(Error::NonHermitianMultiplier {
                    label,
                    k: format!("{k:?}"),
                });
            }
        }
        Ok(Multiplier {
            label,
            symbol: Arc::new(symbol),
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn symbol(&self, k: L::Mode) -> Complex64 {
        (self.symbol)(k)
    }

    fn real_radial(label: String, f: impl Fn(f64) -> f64 + Send + Sync + 'static, probe: &L) -> Self {
        Self::new(label, move |k| Complex64::new(f(L::mode_norm_sq(k)), 0.0), probe)
            .expect("radial real symbols are Hermitian")
    }

    /// `A^theta`, symbol `|k|^{2 theta}`.
    pub fn fractional_laplacian(theta: f64, probe: &L) -> Self {
        Self::real_radial(format!("A^{theta}"), move |n2| n2.powf(theta), probe)
    }

    /// `A^{-sigma}`, symbol `|k|^{-2 sigma}`.
    pub fn inverse_power(sigma: f64, probe: &L) -> Self {
        Self::real_radial(format!("A^-{sigma}"), move |n2| n2.powf(-sigma), probe)
    }

    /// `exp(-t A^theta)`.
    pub fn heat_semigroup(theta: f64, t: f64, probe: &L) -> Self {
        Self::real_radial(
            format!("exp(-{t} A^{theta})"),
            move |n2| (-t * n2.powf(theta)).exp(),
            probe,
        )
    }

    /// `rho_hat(eps k)`.
    pub fn mollifier(eps: f64, probe: &L) -> Result<Self> {
        if !(eps > 0.0) {
            return invalid(format!("mollifier scale must be positive, got {eps}"));
        }
        Ok(Self::real_radial(
            format!("rho_hat({eps} k)"),
            move |n2| mollifier_symbol(eps, n2.sqrt()),
            probe,
        ))
    }
}

impl Multiplier<Line> {
    /// `d/dxi`, symbol `i k`.
    pub fn derivative(probe: &Line) -> Self {
        Self::new("B", |k: i64| Complex64::new(0.0, k as f64), probe)
            .expect("ik is Hermitian")
    }

    /// Lattice forward difference on `2N+1` sites: `g_N(k) = (e^{ikh} - 1)/h`
    /// with `h = 2 pi/(2N+1)`.
    pub fn lattice_gradient(n: usize, probe: &Line) -> Self {
        let h = 2.0 * std::f64::consts::PI / (2 * n + 1) as f64;
        Self::new(
            format!("g_{n}"),
            move |k: i64| (Complex64::new(0.0, k as f64 * h).exp() - 1.0) / h,
            probe,
        )
        .expect("lattice gradient is Hermitian")
    }
}

pub fn apply_multiplier<L: Lattice>(x: &SpectralField<L>, m: &Multiplier<L>) -> SpectralField<L> {
    let lat = x.lattice().clone();
    let coeffs = x
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, &c)| m.symbol(lat.mode(i)) * c)
        .collect();
    SpectralField::from_coeffs(lat, coeffs)
}

/// Compactly supported Fourier cutoff `rho_hat(eps |k|)`: one on `|xi| <= 1`,
/// `exp(1 - 1/(1 - (|xi| - 1)^2))` on `1 < |xi| < 2`, zero beyond.
pub fn mollifier_symbol(eps: f64, k_norm: f64) -> f64 {
    let xi = (eps * k_norm).abs();
    if xi <= 1.0 {
        1.0
    } else if xi < 2.0 {
        let s = xi - 1.0;
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

/// `[sum over k != 0 of (|k|^alpha |x_k|)^p]^{1/p}`; `p = f64::INFINITY` gives
/// the weighted sup.
pub fn fl_norm<L: Lattice>(x: &SpectralField<L>, p: f64, alpha: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return invalid(format!("FL norm needs p >= 1, got {p}"));
    }
    let lat = x.lattice();
    let terms = x
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| lat.norm_sq(i).powf(alpha / 2.0) * c.norm());
    if p.is_infinite() {
        return Ok(terms.fold(0.0, f64::max));
    }
    // each representative stands for the pair {k, -k}
    let s: f64 = terms.map(|t| 2.0 * t.powf(p)).sum();
    Ok(s.powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{Disk, Field1d};
    use approx::assert_relative_eq;

    fn unit(n: usize, k: i64) -> Field1d {
        let mut x = Field1d::zeros(Line::new(n));
        x.set(k, Complex64::new(1.0, 0.0));
        x
    }

    #[test]
    fn derivative_of_first_mode() {
        let x = unit(4, 1);
        let b = Multiplier::derivative(x.lattice());
        assert_eq!(apply_multiplier(&x, &b).get(1), Complex64::new(0.0, 1.0));
        assert_eq!(apply_multiplier(&x, &b).get(-1), Complex64::new(0.0, -1.0));
    }

    #[test]
    fn laplacian_and_heat() {
        let x = unit(4, 2);
        let a = Multiplier::fractional_laplacian(1.0, x.lattice());
        assert_relative_eq!(apply_multiplier(&x, &a).get(2).re, 4.0);
        let x = unit(4, 1);
        let e = Multiplier::heat_semigroup(1.0, 2f64.ln(), x.lattice());
        assert_relative_eq!(apply_multiplier(&x, &e).get(1).re, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn non_hermitian_symbol_rejected() {
        let r = Multiplier::new("bad", |k: i64| Complex64::new(k as f64, 0.0), &Line::new(3));
        assert!(matches!(r, Err(Error::NonHermitianMultiplier { .. })));
        let r = Multiplier::new("bad2d", |k: [i32; 2]| Complex64::new(0.0, (k[0] * k[0]) as f64), &Disk::new(2));
        assert!(r.is_err());
    }

    #[test]
    fn mollifier_profile() {
        assert_eq!(mollifier_symbol(0.1, 5.0), 1.0);
        assert_eq!(mollifier_symbol(0.1, 25.0), 0.0);
        let v = mollifier_symbol(0.1, 15.0);
        assert!(v > 0.0 && v < 1.0);
        let vals: Vec<f64> = (10..=20).map(|k| mollifier_symbol(0.1, k as f64)).collect();
        assert!(vals.windows(2).all(|w| w[1] <= w[0]));
        // at |xi| = 1.5: exp(1 - 1/0.75)
        assert_relative_eq!(v, (1.0f64 - 1.0 / 0.75).exp(), epsilon = 1e-14);
    }

    #[test]
    fn fl_norms() {
        let mut x = unit(4, 1);
        assert_relative_eq!(fl_norm(&x, f64::INFINITY, 2.0).unwrap(), 1.0);
        x.set(2, Complex64::new(1.0, 0.0));
        assert_relative_eq!(fl_norm(&x, 2.0, 1.0).unwrap(), 10f64.sqrt(), epsilon = 1e-14);
        assert_eq!(fl_norm(&Field1d::zeros(Line::new(3)), 2.0, 0.5).unwrap(), 0.0);
        assert!(fl_norm(&x, 0.5, 0.0).is_err());
    }

    #[test]
    fn lattice_gradient_symbol() {
        let g = Multiplier::lattice_gradient(2, &Line::new(2));
        assert_relative_eq!(g.symbol(1).norm_sqr(), 0.875, epsilon = 2e-3);
        let h = 2.0 * std::f64::consts::PI / 5.0;
        assert_relative_eq!(g.symbol(1).norm_sqr(), 2.0 * (1.0 - h.cos()) / (h * h), epsilon = 1e-13);
        let big = Multiplier::lattice_gradient(5000, &Line::new(1));
        assert_relative_eq!(big.symbol(1).im, 1.0, epsilon = 1e-6);
    }
}

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::{Disk, Lattice, Line, SpectralField};
use crate::error::{Error, Result};

type Coefficient<M> = Arc<dyn Fn(M, M, M) -> Complex64 + Send + Sync>;
type Linear<M> = Arc<dyn Fn(M) -> Complex64 + Send + Sync>;

/// Polynomial map `(Qx)_k = l(k) x_k + sum over k1 + k2 = k of q(k, k1, k2) x_k1 x_k2`.
///
/// The sum runs over ordered pairs of nonzero modes; cutoff indicators are
/// part of `q`. This is the slow generic evaluator used for generator and
/// energy computations and as a reference for the fast kernels.
#[derive(Clone)]
pub struct QuadraticForm<L: Lattice> {
    label: String,
    output: L,
    quad: Option<Coefficient<L::Mode>>,
    linear: Option<Linear<L::Mode>>,
}

impl<L: Lattice> fmt::Debug for QuadraticForm<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuadraticForm")
            .field("label", &self.label)
            .field("output", &self.output)
            .finish()
    }
}

const PROBE_CUTOFF: usize = 6;

impl<L: Lattice> QuadraticForm<L> {
    /// Pure quadratic form on output modes of `output`. Hermitian symmetry
    /// `q(-k,-k1,-k2) = conj(q(k,k1,k2))` is checked on a small probe band.
    pub fn new<F>(label: impl Into<String>, output: L, q: F) -> Result<Self>
    where
        F: Fn(L::Mode, L::Mode, L::Mode) -> Complex64 + Send + Sync + 'static,
    {
        let label = label.into();
        let probe = output.with_cutoff(output.cutoff().min(PROBE_CUTOFF));
        let full = full_modes(&probe);
        for &k in &full {
            for &k1 in &full {
                let k2 = L::add_modes(k, L::neg_mode(k1));
                let a = q(k, k1, k2);
                let b = q(L::neg_mode(k), L::neg_mode(k1), L::neg_mode(k2));
                if !((a.conj() - b).norm() <= 1e-12 * a.norm().max(1.0)) {
                    return Err(Error::NonHermitianForm {
                        label,
                        triple: format!("({k:?}, {k1:?}, {k2:?})"),
                    });
                }
            }
        }
        Ok(QuadraticForm {
            label,
            output,
            quad: Some(Arc::new(q)),
            linear: None,
        })
    }

    /// Linear form `x_k -> l(k) x_k`; `l` must satisfy `l(-k) = conj(l(k))`.
    pub fn linear<F>(label: impl Into<String>, output: L, l: F) -> Result<Self>
    where
        F: Fn(L::Mode) -> Complex64 + Send + Sync + 'static,
    {
        let label = label.into();
        for &k in &full_modes(&output) {
            let (a, b) = (l(k), l(L::neg_mode(k)));
            if !((a.conj() - b).norm() <= 1e-12 * a.norm().max(1.0)) {
                return Err(Error::NonHermitianForm {
                    label,
                    triple: format!("({k:?}, -, -)"),
                });
            }
        }
        Ok(QuadraticForm {
            label,
            output,
            quad: None,
            linear: Some(Arc::new(l)),
        })
    }

    /// Identity map restricted to `output`.
    pub fn identity(output: L) -> Self {
        Self::linear("id", output, |_| Complex64::new(1.0, 0.0)).expect("identity is Hermitian")
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn output(&self) -> &L {
        &self.output
    }

    pub fn quad_coefficient(&self, k: L::Mode, k1: L::Mode, k2: L::Mode) -> Complex64 {
        self.quad.as_ref().map_or(Complex64::new(0.0, 0.0), |q| q(k, k1, k2))
    }

    pub fn linear_coefficient(&self, k: L::Mode) -> Complex64 {
        self.linear.as_ref().map_or(Complex64::new(0.0, 0.0), |l| l(k))
    }

    /// Coordinate `k` of `Q(x)`. Zero if `k` is outside the output band.
    pub fn coordinate(&self, x: &SpectralField<L>, k: L::Mode) -> Complex64 {
        if self.output.locate(k).is_none() {
            return Complex64::new(0.0, 0.0);
        }
        let mut acc = self.linear_coefficient(k) * x.get(k);
        if let Some(q) = &self.quad {
            let lat = x.lattice();
            for k1 in full_modes(lat) {
                let k2 = L::add_modes(k, L::neg_mode(k1));
                if lat.locate(k2).is_some() {
                    acc += q(k, k1, k2) * x.get(k1) * x.get(k2);
                }
            }
        }
        acc
    }

    pub fn evaluate(&self, x: &SpectralField<L>) -> SpectralField<L> {
        let coeffs = (0..self.output.len())
            .map(|i| self.coordinate(x, self.output.mode(i)))
            .collect();
        SpectralField::from_coeffs(self.output.clone(), coeffs)
    }

    /// Nonzero partial derivatives `D_q Q_k(x)` over all modes `q` stored in
    /// `x`'s lattice (both signs), where `D_q` differentiates in `x_q`
    /// treating `x_q` and `x_{-q}` as independent.
    pub fn gradient(&self, x: &SpectralField<L>, k: L::Mode) -> Vec<(L::Mode, Complex64)> {
        let mut out = Vec::new();
        if self.output.locate(k).is_none() {
            return out;
        }
        let lat = x.lattice();
        for q in full_modes(lat) {
            let mut d = Complex64::new(0.0, 0.0);
            if q == k {
                d += self.linear_coefficient(k);
            }
            let r = L::add_modes(k, L::neg_mode(q));
            if lat.locate(r).is_some() {
                d += (self.quad_coefficient(k, q, r) + self.quad_coefficient(k, r, q)) * x.get(r);
            }
            if d != Complex64::new(0.0, 0.0) {
                out.push((q, d));
            }
        }
        out
    }

    /// Constant second derivative `D_{q1} D_{q2} Q_k`.
    pub fn hessian(&self, k: L::Mode, q1: L::Mode, q2: L::Mode) -> Complex64 {
        if L::add_modes(q1, q2) != k || self.output.locate(k).is_none() {
            return Complex64::new(0.0, 0.0);
        }
        self.quad_coefficient(k, q1, q2) + self.quad_coefficient(k, q2, q1)
    }
}

/// All stored modes of a lattice, each representative followed by its partner.
pub(crate) fn full_modes<L: Lattice>(lat: &L) -> Vec<L::Mode> {
    (0..lat.len())
        .flat_map(|i| {
            let k = lat.mode(i);
            [k, L::neg_mode(k)]
        })
        .collect()
}

fn within(n: usize, ks: &[i64]) -> bool {
    ks.iter().all(|&k| k != 0 && k.unsigned_abs() as usize <= n)
}

impl QuadraticForm<Line> {
    /// `F_N(x)_k = i k sum x_k1 x_k2` with all of `|k|, |k1|, |k2| <= N`.
    pub fn burgers(n: usize) -> Self {
        Self::new(format!("F_{n}"), Line::new(n), move |k, k1, k2| {
            if within(n, &[k, k1, k2]) {
                Complex64::new(0.0, k as f64)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .expect("Burgers form is Hermitian")
    }

    /// `A^{-sigma} F_N(A^{-sigma} x)`.
    pub fn ddt(n: usize, sigma: f64) -> Self {
        let w = move |k: i64| ((k * k) as f64).powf(-sigma);
        Self::new(format!("F_{n},sigma={sigma}"), Line::new(n), move |k, k1, k2| {
            if within(n, &[k, k1, k2]) {
                Complex64::new(0.0, k as f64 * w(k) * w(k1) * w(k2))
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .expect("DDT form is Hermitian")
    }

    /// Lattice drift `g(k) - conj(g(k)) + g(k1) - conj(g(k2))`, unsymmetrized.
    pub fn ss_lattice(n: usize) -> Self {
        let h = 2.0 * std::f64::consts::PI / (2 * n + 1) as f64;
        let g = move |k: i64| (Complex64::new(0.0, k as f64 * h).exp() - 1.0) / h;
        Self::new(format!("Fb_{n}"), Line::new(n), move |k, k1, k2| {
            if within(n, &[k, k1, k2]) {
                g(k) - g(k).conj() + g(k1) - g(k2).conj()
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .expect("lattice drift is Hermitian")
    }

    /// Poisson solution `H_N(x)_k = -i k sum x_k1 x_k2 / (|k1|^{2 theta} + |k2|^{2 theta})`.
    pub fn poisson(n: usize, theta: f64) -> Self {
        let lam = move |k: i64| ((k * k) as f64).powf(theta);
        Self::new(format!("H_{n},theta={theta}"), Line::new(n), move |k, k1, k2| {
            if within(n, &[k, k1, k2]) {
                Complex64::new(0.0, -(k as f64) / (lam(k1) + lam(k2)))
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .expect("Poisson form is Hermitian")
    }
}

impl QuadraticForm<Disk> {
    /// `B^N_k = sum b(k,k1,k2) x_k1 x_k2`, `b = (k_perp . k1)(k . k2)/|k|^2`,
    /// `(a, b)_perp = (b, -a)`, on the disk `|k| <= N`.
    pub fn navier_stokes(n: usize) -> Self {
        let disk = Disk::new(n);
        let r2 = (n * n) as i64;
        let inside = move |k: [i32; 2]| {
            let s = (k[0] as i64).pow(2) + (k[1] as i64).pow(2);
            s != 0 && s <= r2
        };
        Self::new(format!("B_{n}"), disk, move |k, k1, k2| {
            if inside(k) && inside(k1) && inside(k2) {
                Complex64::new(ns_coefficient(k, k1, k2), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .expect("Navier-Stokes form is Hermitian")
    }
}

pub(crate) fn ns_coefficient(k: [i32; 2], k1: [i32; 2], k2: [i32; 2]) -> f64 {
    let [a, b] = [k[0] as f64, k[1] as f64];
    let perp_dot = b * k1[0] as f64 - a * k1[1] as f64;
    let dot = a * k2[0] as f64 + b * k2[1] as f64;
    perp_dot * dot / (a * a + b * b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Field1d;

    #[test]
    fn ns_coefficient_by_hand() {
        assert_eq!(ns_coefficient([1, 0], [0, 1], [1, -1]), -1.0);
    }

    #[test]
    fn burgers_single_pair() {
        let mut x = Field1d::zeros(Line::new(3));
        x.set(1, Complex64::new(1.0, 0.0));
        let f = QuadraticForm::burgers(3).evaluate(&x);
        assert_eq!(f.get(2), Complex64::new(0.0, 2.0));
        assert_eq!(f.get(-2), Complex64::new(0.0, -2.0));
    }

    #[test]
    fn non_hermitian_rejected() {
        let r = QuadraticForm::new("bad", Line::new(3), |k: i64, _, _| Complex64::new(k as f64, 0.0));
        assert!(matches!(r, Err(Error::NonHermitianForm { .. })));
    }

    #[test]
    fn gradient_of_poisson_by_hand() {
        // H_2 at x_1 = 1: D_1 H_2 = -2i, D_{-1} H_2 = 0
        let mut x = Field1d::zeros(Line::new(2));
        x.set(1, Complex64::new(1.0, 0.0));
        let g = QuadraticForm::poisson(2, 1.0).gradient(&x, 2);
        assert_eq!(g, vec![(1, Complex64::new(0.0, -2.0))]);
    }
}

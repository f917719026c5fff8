//! Truncated Fourier fields and the operations acting on them.

mod lattice;
mod multiplier;
mod nonlinear;
mod quadratic;

pub use lattice::{Disk, Lattice, Line, Slot};
pub use multiplier::{apply_multiplier, fl_norm, mollifier_symbol, Multiplier};
pub use nonlinear::{
    burgers_coordinate, burgers_nonlinearity, ddt_nonlinearity, ns_nonlinearity, ss_nonlinearity, NsDrift,
    Split,
};
pub use quadratic::QuadraticForm;

use num_complex::Complex64;

/// Mean-zero field with Hermitian symmetry `x(-k) = conj(x(k))`, stored as one
/// coefficient per representative of the lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField<L: Lattice> {
    lattice: L,
    coeffs: Vec<Complex64>,
}

pub type Field1d = SpectralField<Line>;
pub type Field2d = SpectralField<Disk>;

impl<L: Lattice> SpectralField<L> {
    pub fn zeros(lattice: L) -> Self {
        let n = lattice.len();
        SpectralField {
            lattice,
            coeffs: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Panics if `coeffs.len()` does not match the lattice.
    pub fn from_coeffs(lattice: L, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), lattice.len(), "coefficient count");
        SpectralField { lattice, coeffs }
    }

    pub fn lattice(&self) -> &L {
        &self.lattice
    }

    pub fn cutoff(&self) -> usize {
        self.lattice.cutoff()
    }

    /// Coefficient at any mode; zero outside the stored band.
    pub fn get(&self, k: L::Mode) -> Complex64 {
        match self.lattice.locate(k) {
            Some(s) if s.conjugate => self.coeffs[s.index].conj(),
            Some(s) => self.coeffs[s.index],
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Sets `x(k)` and, implicitly, `x(-k)`. Returns false if `k` is not stored.
    pub fn set(&mut self, k: L::Mode, value: Complex64) -> bool {
        match self.lattice.locate(k) {
            Some(s) => {
                self.coeffs[s.index] = if s.conjugate { value.conj() } else { value };
                true
            }
            None => false,
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Copy onto a lattice of cutoff `n`, zero-filling modes the source lacks.
    pub fn project(&self, n: usize) -> Self {
        let lattice = self.lattice.with_cutoff(n);
        let coeffs = (0..lattice.len())
            .map(|i| self.get(lattice.mode(i)))
            .collect();
        SpectralField { lattice, coeffs }
    }

    /// Zero the modes with `|k| > n` while keeping the storage size.
    pub fn truncate(&self, n: usize) -> Self {
        let n2 = (n * n) as f64;
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            if self.lattice.norm_sq(i) > n2 {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        out
    }

    /// Real pairing `sum over all k != 0 of conj(x_k) y_k`, i.e. twice the sum
    /// over representatives of `Re(conj(x_k) y_k)`.
    pub fn dot(&self, other: &Self) -> f64 {
        2.0 * self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a.conj() * b).re)
            .sum::<f64>()
    }

    /// Largest stored `|x_k|`.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

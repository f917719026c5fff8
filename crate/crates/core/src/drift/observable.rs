use num_complex::Complex64;

use crate::error::Result;
use crate::gaussian::MeasureSpec;
use crate::spectral::{Lattice, QuadraticForm, SpectralField};

/// Real or imaginary part of one output coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Re,
    Im,
}

impl Part {
    pub fn name(self) -> &'static str {
        match self {
            Part::Re => "re",
            Part::Im => "im",
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Term {
    coef: Complex64,
    partner: usize,
}

/// Real observable `h = Re Q_k` or `Im Q_k` of a quadratic form, with its
/// derivatives tabulated on a fixed lattice.
///
/// Modes are addressed by "full" index `2 i + c`: representative `i`, and its
/// partner `-k` when `c = 1`. `D_q h(x) = a_q + sum beta x_r` has at most two
/// terms per `q`.
#[derive(Debug, Clone)]
pub struct Observable<L: Lattice> {
    lattice: L,
    mode: L::Mode,
    part: Part,
    constant: Vec<Complex64>,
    terms: Vec<Vec<Term>>,
}

fn full_index(slot: crate::spectral::Slot) -> usize {
    2 * slot.index + slot.conjugate as usize
}

impl<L: Lattice> Observable<L> {
    pub fn new(form: &QuadraticForm<L>, k: L::Mode, part: Part, lattice: &L) -> Self {
        let nk = L::neg_mode(k);
        let (ck, cnk) = match part {
            Part::Re => (Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0)),
            Part::Im => (Complex64::new(0.0, -0.5), Complex64::new(0.0, 0.5)),
        };
        let m = 2 * lattice.len();
        let mut constant = vec![Complex64::new(0.0, 0.0); m];
        let mut terms = vec![Vec::new(); m];
        for f in 0..m {
            let q = full_mode(lattice, f);
            if q == k {
                constant[f] += ck * form.linear_coefficient(k);
            }
            if q == nk {
                constant[f] += cnk * form.linear_coefficient(nk);
            }
            for (c, out) in [(ck, k), (cnk, nk)] {
                let r = L::add_modes(out, L::neg_mode(q));
                if let Some(slot) = lattice.locate(r) {
                    let coef = c * form.hessian(out, q, r);
                    if coef != Complex64::new(0.0, 0.0) {
                        terms[f].push(Term {
                            coef,
                            partner: full_index(slot),
                        });
                    }
                }
            }
        }
        Observable {
            lattice: lattice.clone(),
            mode: k,
            part,
            constant,
            terms,
        }
    }

    pub fn mode(&self) -> L::Mode {
        self.mode
    }

    pub fn part(&self) -> Part {
        self.part
    }

    fn rate(&self, f: usize, theta: f64) -> f64 {
        self.lattice.norm_sq(f / 2).powf(theta)
    }

    /// `D_q h(x)` for every full index `q`.
    pub fn gradient(&self, x: &SpectralField<L>) -> Vec<Complex64> {
        let full = full_values(x);
        (0..self.constant.len())
            .map(|f| self.gradient_at(&full, f))
            .collect()
    }

    fn gradient_at(&self, full: &[Complex64], f: usize) -> Complex64 {
        self.terms[f]
            .iter()
            .fold(self.constant[f], |acc, t| acc + t.coef * full[t.partner])
    }

    pub fn value(&self, x: &SpectralField<L>) -> f64 {
        let full = full_values(x);
        // Euler's identity for a form of degree one plus degree two
        let mut acc = Complex64::new(0.0, 0.0);
        for f in 0..self.constant.len() {
            let quad = self.terms[f]
                .iter()
                .fold(Complex64::new(0.0, 0.0), |a, t| a + t.coef * full[t.partner]);
            acc += full[f] * (self.constant[f] + 0.5 * quad);
        }
        acc.re
    }

    /// `sum_q D_q h(x) eta_q` over all nonzero modes, for a Hermitian `eta`.
    pub fn directional(&self, x: &SpectralField<L>, eta: &[Complex64]) -> f64 {
        let full = full_values(x);
        let mut acc = 0.0;
        for (i, e) in eta.iter().enumerate() {
            // the -q term is the conjugate of the q term
            acc += 2.0 * (self.gradient_at(&full, 2 * i) * e).re;
        }
        acc
    }

    /// `L0 h(x) = sum_q |q|^{2 theta} (-x_q D_q h + D_{-q} D_q h)`.
    pub fn generator(&self, x: &SpectralField<L>, theta: f64) -> f64 {
        let full = full_values(x);
        let mut acc = Complex64::new(0.0, 0.0);
        for f in 0..self.constant.len() {
            let lam = self.rate(f, theta);
            acc -= lam * full[f] * self.gradient_at(&full, f);
            let minus = f ^ 1;
            for t in &self.terms[f] {
                if t.partner == minus {
                    acc += lam * t.coef;
                }
            }
        }
        acc.re
    }

    /// Dirichlet energy `(1/2) sum_q |q|^{2 theta} |D_q h(x)|^2`.
    pub fn energy(&self, x: &SpectralField<L>, theta: f64) -> f64 {
        let full = full_values(x);
        0.5 * (0..self.constant.len())
            .map(|f| self.rate(f, theta) * self.gradient_at(&full, f).norm_sqr())
            .sum::<f64>()
    }

    /// Exact mean of [`Observable::energy`] under a Gaussian measure on the
    /// same lattice, by Wick pairing of the linear functions `D_q h`.
    pub fn expected_energy(&self, spec: &MeasureSpec<L>, theta: f64) -> Result<f64> {
        let mut total = 0.0;
        for f in 0..self.constant.len() {
            let mut e = self.constant[f].norm_sqr();
            for a in &self.terms[f] {
                for b in &self.terms[f] {
                    let ra = full_mode(&self.lattice, a.partner);
                    let rb = full_mode(&self.lattice, b.partner);
                    let w = spec.wick_moment(&[(ra, false), (rb, true)])?;
                    e += (a.coef * b.coef.conj()).re * w;
                }
            }
            total += 0.5 * self.rate(f, theta) * e;
        }
        Ok(total)
    }
}

fn full_mode<L: Lattice>(lat: &L, f: usize) -> L::Mode {
    let k = lat.mode(f / 2);
    if f % 2 == 1 {
        L::neg_mode(k)
    } else {
        k
    }
}

fn full_values<L: Lattice>(x: &SpectralField<L>) -> Vec<Complex64> {
    x.coeffs().iter().flat_map(|&c| [c, c.conj()]).collect()
}

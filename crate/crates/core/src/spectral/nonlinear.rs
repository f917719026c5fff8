//! Direct-summation kernels for the model nonlinearities.
//!
//! In 1d only the modes `k = 1..=N` are stored, and every quadratic
//! convolution reduces to two sums over positive indices:
//!
//! `sum_{k1+k2=k} x_k1 x_k2 = sum_{j=1}^{k-1} x_j x_{k-j} + 2 sum_{m=1}^{N-k} conj(x_m) x_{k+m}`.
//!
//! Both are written as dot products of contiguous slices (the first against a
//! reversed copy), with split real/imaginary storage and four accumulators so
//! the compiler can vectorize them.

use num_complex::Complex64;

use super::quadratic::ns_coefficient;
use super::{Disk, Field1d, Field2d, Lattice};

/// Split-storage copy of the first `m` coefficients, plus the reversed copy.
#[derive(Debug, Clone)]
pub struct Split {
    re: Vec<f64>,
    im: Vec<f64>,
    rev_re: Vec<f64>,
    rev_im: Vec<f64>,
}

impl Split {
    pub fn new(coeffs: &[Complex64]) -> Self {
        let re: Vec<f64> = coeffs.iter().map(|c| c.re).collect();
        let im: Vec<f64> = coeffs.iter().map(|c| c.im).collect();
        let rev_re = re.iter().rev().copied().collect();
        let rev_im = im.iter().rev().copied().collect();
        Split { re, im, rev_re, rev_im }
    }

    /// Coefficients multiplied by real weights `w[j]`.
    pub fn weighted(coeffs: &[Complex64], w: &[f64]) -> Self {
        let scaled: Vec<Complex64> = coeffs.iter().zip(w).map(|(c, &w)| c * w).collect();
        Split::new(&scaled)
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    /// `sum_{j=1}^{k-1} a_j b_{k-j}`.
    pub fn forward(a: &Split, b: &Split, k: usize) -> Complex64 {
        let m = a.len();
        // j runs over [max(1, k - m), min(k - 1, m)]
        let j0 = k.saturating_sub(m).max(1);
        let j1 = k.saturating_sub(1).min(m);
        if j0 > j1 {
            return Complex64::new(0.0, 0.0);
        }
        let len = j1 - j0 + 1;
        // a_j sits at index j - 1, b_{k-j} at reversed index m - k + j
        let s = m + j0 - k;
        mul_sum(
            &a.re[j0 - 1..j0 - 1 + len],
            &a.im[j0 - 1..j0 - 1 + len],
            &b.rev_re[s..s + len],
            &b.rev_im[s..s + len],
            false,
        )
    }

    /// `sum_{m=1}^{M-k} conj(a_m) b_{k+m}`.
    pub fn backward(a: &Split, b: &Split, k: usize) -> Complex64 {
        let m = a.len();
        if k >= m {
            return Complex64::new(0.0, 0.0);
        }
        let len = m - k;
        mul_sum(&a.re[..len], &a.im[..len], &b.re[k..], &b.im[k..], true)
    }
}

/// `sum_j a_j b_j` (or `conj(a_j) b_j`) over split slices of equal length.
fn mul_sum(ar: &[f64], ai: &[f64], br: &[f64], bi: &[f64], conj: bool) -> Complex64 {
    let n = ar.len();
    let (ar, ai, br, bi) = (&ar[..n], &ai[..n], &br[..n], &bi[..n]);
    let sign = if conj { -1.0 } else { 1.0 };
    let mut re = [0.0f64; 4];
    let mut im = [0.0f64; 4];
    let chunks = n / 4;
    for c in 0..chunks {
        for l in 0..4 {
            let i = 4 * c + l;
            let (xr, xi) = (ar[i], sign * ai[i]);
            re[l] += xr * br[i] - xi * bi[i];
            im[l] += xr * bi[i] + xi * br[i];
        }
    }
    for i in 4 * chunks..n {
        let (xr, xi) = (ar[i], sign * ai[i]);
        re[0] += xr * br[i] - xi * bi[i];
        im[0] += xr * bi[i] + xi * br[i];
    }
    Complex64::new((re[0] + re[1]) + (re[2] + re[3]), (im[0] + im[1]) + (im[2] + im[3]))
}

/// `sum_{k1+k2=k} x_k1 x_k2` over modes `1 <= |k1|, |k2| <= m`, for `1 <= k <= m`.
fn convolution(s: &Split, k: usize) -> Complex64 {
    Split::forward(s, s, k) + 2.0 * Split::backward(s, s, k)
}

/// Single coordinate `F_N(x)_k`; `s` holds the first `min(N, K_max)` modes.
pub fn burgers_coordinate(s: &Split, k: usize) -> Complex64 {
    if k == 0 || k > s.len() {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(0.0, k as f64) * convolution(s, k)
}

fn band(x: &Field1d, n: usize) -> usize {
    n.min(x.cutoff())
}

/// `F_N(x)_k = i k sum_{k1+k2=k} x_k1 x_k2` with `|k|, |k1|, |k2| <= N`,
/// returned on the lattice of `x`.
pub fn burgers_nonlinearity(x: &Field1d, n: usize) -> Field1d {
    let m = band(x, n);
    let s = Split::new(&x.coeffs()[..m]);
    let mut out = Field1d::zeros(x.lattice().clone());
    for (i, c) in out.coeffs_mut()[..m].iter_mut().enumerate() {
        *c = burgers_coordinate(&s, i + 1);
    }
    out
}

/// `A^{-sigma} F_N(A^{-sigma} x)`.
pub fn ddt_nonlinearity(x: &Field1d, n: usize, sigma: f64) -> Field1d {
    let m = band(x, n);
    let w: Vec<f64> = (1..=m).map(|k| (k as f64).powf(-2.0 * sigma)).collect();
    let s = Split::weighted(&x.coeffs()[..m], &w);
    let mut out = Field1d::zeros(x.lattice().clone());
    for (i, c) in out.coeffs_mut()[..m].iter_mut().enumerate() {
        *c = w[i] * burgers_coordinate(&s, i + 1);
    }
    out
}

/// Lattice drift `sum x_k1 x_k2 [g(k) - conj g(k) + g(k1) - conj g(k2)]` with
/// `g(k) = (e^{ikh} - 1)/h`, `h = 2 pi/(2N+1)`, integer convolution on
/// `1 <= |k|, |k1|, |k2| <= N`.
///
/// After symmetrizing in `(k1, k2)` the real parts cancel and the coefficient
/// becomes `i [2 s(k) + s(k1) + s(k2)]` with `s(k) = sin(kh)/h`.
pub fn ss_nonlinearity(x: &Field1d, n: usize) -> Field1d {
    let h = 2.0 * std::f64::consts::PI / (2 * n + 1) as f64;
    let m = band(x, n);
    let sv: Vec<f64> = (1..=m).map(|k| (k as f64 * h).sin() / h).collect();
    let plain = Split::new(&x.coeffs()[..m]);
    let weighted = Split::weighted(&x.coeffs()[..m], &sv);
    let mut out = Field1d::zeros(x.lattice().clone());
    for (i, c) in out.coeffs_mut()[..m].iter_mut().enumerate() {
        let k = i + 1;
        let conv = convolution(&plain, k);
        // sum over ordered pairs of s(k1) x_k1 x_k2
        let skew = Split::forward(&weighted, &plain, k) + Split::backward(&plain, &weighted, k)
            - Split::backward(&weighted, &plain, k);
        *c = Complex64::new(0.0, 2.0) * (sv[i] * conv + skew);
    }
    out
}

/// Precomputed triads for the 2d drift on the disk `|k| <= N`.
///
/// For each representative `k` the list holds unordered pairs `{k1, k2}` with
/// `k1 + k2 = k` and the symmetrized coefficient `b(k,k1,k2) + b(k,k2,k1)`
/// (halved on the diagonal `k1 = k2`).
#[derive(Debug, Clone)]
pub struct NsDrift {
    disk: Disk,
    starts: Vec<usize>,
    triads: Vec<Triad>,
}

#[derive(Debug, Clone, Copy)]
struct Triad {
    i1: u32,
    c1: bool,
    i2: u32,
    c2: bool,
    coef: f64,
}

impl NsDrift {
    pub fn new(n: usize) -> Self {
        let disk = Disk::new(n);
        let full: Vec<[i32; 2]> = (0..disk.len())
            .flat_map(|i| {
                let k = disk.mode(i);
                [k, Disk::neg_mode(k)]
            })
            .collect();
        let mut starts = Vec::with_capacity(disk.len() + 1);
        let mut triads = Vec::new();
        for i in 0..disk.len() {
            starts.push(triads.len());
            let k = disk.mode(i);
            for (a, &k1) in full.iter().enumerate() {
                let k2 = [k[0] - k1[0], k[1] - k1[1]];
                let Some(s2) = disk.locate(k2) else { continue };
                let b = 2 * s2.index + s2.conjugate as usize;
                if b < a {
                    continue;
                }
                let s1 = disk.locate(k1).expect("stored");
                let mut coef = ns_coefficient(k, k1, k2) + ns_coefficient(k, k2, k1);
                if a == b {
                    coef *= 0.5;
                }
                if coef != 0.0 {
                    triads.push(Triad {
                        i1: s1.index as u32,
                        c1: s1.conjugate,
                        i2: s2.index as u32,
                        c2: s2.conjugate,
                        coef,
                    });
                }
            }
        }
        starts.push(triads.len());
        NsDrift { disk, starts, triads }
    }

    pub fn cutoff(&self) -> usize {
        self.disk.cutoff()
    }

    pub fn triad_count(&self) -> usize {
        self.triads.len()
    }

    /// `B^N(x)` on the lattice of `x`; modes of `x` beyond `N` are ignored.
    pub fn apply(&self, x: &Field2d) -> Field2d {
        let src: Vec<Complex64> = (0..self.disk.len())
            .map(|i| x.get(self.disk.mode(i)))
            .collect();
        let mut out = Field2d::zeros(x.lattice().clone());
        for i in 0..self.disk.len() {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in &self.triads[self.starts[i]..self.starts[i + 1]] {
                let a = src[t.i1 as usize];
                let b = src[t.i2 as usize];
                let a = if t.c1 { a.conj() } else { a };
                let b = if t.c2 { b.conj() } else { b };
                acc += t.coef * a * b;
            }
            out.set(self.disk.mode(i), acc);
        }
        out
    }
}

pub fn ns_nonlinearity(x: &Field2d, n: usize) -> Field2d {
    NsDrift::new(n.min(x.cutoff())).apply(x)
}

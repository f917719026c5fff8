use super::observable::{Observable, Part};
use crate::error::Result;
use crate::gaussian::MeasureSpec;
use crate::spectral::{Lattice, QuadraticForm, SpectralField};

/// Dirichlet energy of `Re Q_k` or `Im Q_k` at `x`.
pub fn dirichlet_energy<L: Lattice>(form: &QuadraticForm<L>, k: L::Mode, part: Part, x: &SpectralField<L>, theta: f64) -> f64 {
    Observable::new(form, k, part, x.lattice()).energy(x, theta)
}

/// Exact `E[dirichlet_energy]` under `spec`.
pub fn expected_dirichlet_energy<L: Lattice>(form: &QuadraticForm<L>, k: L::Mode, part: Part, spec: &MeasureSpec<L>, theta: f64) -> Result<f64> {
    Observable::new(form, k, part, &spec.lattice).expected_energy(spec, theta)
}

/// `sum over k1 + k2 = k, 0 < |k|, |k1|, |k2| <= N` of `coef(k1, k2)`.
pub fn i_sum_with(k: i64, n: usize, coef: impl Fn(i64, i64) -> f64) -> f64 {
    let n = n as i64;
    if k == 0 || k.abs() > n {
        return 0.0;
    }
    let lo = (k - n).max(-n);
    let hi = (k + n).min(n);
    (lo..=hi)
        .filter(|&k1| k1 != 0 && k1 != k)
        .map(|k1| coef(k1, k - k1))
        .sum()
}

fn rate(k: i64, theta: f64) -> f64 {
    ((k * k) as f64).powf(theta)
}

/// `I_N(k) = sum |k|^2 / (|k1|^{2 theta} + |k2|^{2 theta})`.
pub fn i_sum(k: i64, n: usize, theta: f64) -> f64 {
    let k2 = (k * k) as f64;
    i_sum_with(k, n, |a, b| k2 / (rate(a, theta) + rate(b, theta)))
}

/// `I_{N,M}(k) = sum (1_N - 1_M)^2 c(k, k1, k2)` where `1_N` is the indicator
/// that all of `|k|, |k1|, |k2|` are at most `N`.
pub fn i_sum_diff(k: i64, n: usize, m: usize, theta: f64) -> f64 {
    let (big, small) = (n.max(m), n.min(m) as i64);
    let k2 = (k * k) as f64;
    let inside = |a: i64, b: i64| k.abs() <= small && a.abs() <= small && b.abs() <= small;
    i_sum_with(k, big, |a, b| {
        if inside(a, b) {
            0.0
        } else {
            k2 / (rate(a, theta) + rate(b, theta))
        }
    })
}

/// Coefficient for the smoothed drift `A^{-sigma} F(A^{-sigma} x)`, read
/// symmetrically: `|k|^{2-4 sigma} / (|k1|^{4 sigma} |k2|^{4 sigma} (|k1|^2 + |k2|^2))`.
pub fn ddt_coefficient(k: i64, k1: i64, k2: i64, sigma: f64) -> f64 {
    let a = |j: i64| (j * j) as f64;
    a(k).powf(1.0 - 2.0 * sigma) / (a(k1).powf(2.0 * sigma) * a(k2).powf(2.0 * sigma) * (a(k1) + a(k2)))
}

pub fn i_sum_ddt(k: i64, n: usize, sigma: f64) -> f64 {
    i_sum_with(k, n, |a, b| ddt_coefficient(k, a, b, sigma))
}

/// 2d sum `sum |k1|^{2+2 sigma} / (|k1|^{2+2 sigma} + |k2|^{2+2 sigma})^2` over
/// `k1 + k2 = k` in the disk `|.| <= N`.
pub fn i_sum_2d(k: [i32; 2], n: usize, sigma: f64) -> f64 {
    let r2 = (n * n) as i64;
    let nn = n as i32;
    let norm2 = |v: [i32; 2]| (v[0] as i64).pow(2) + (v[1] as i64).pow(2);
    if k == [0, 0] || norm2(k) > r2 {
        return 0.0;
    }
    let p = 1.0 + sigma;
    let mut total = 0.0;
    for ax in -nn..=nn {
        for ay in -nn..=nn {
            let k1 = [ax, ay];
            let k2 = [k[0] - ax, k[1] - ay];
            let (a, b) = (norm2(k1), norm2(k2));
            if a == 0 || b == 0 || a > r2 || b > r2 {
                continue;
            }
            let (la, lb) = ((a as f64).powf(p), (b as f64).powf(p));
            total += la / ((la + lb) * (la + lb));
        }
    }
    total
}

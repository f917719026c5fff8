//! Ensemble estimators: batch-mean error bars, sup-norm moments, log-log
//! regression, Gaussian stationarity z-scores, dyadic quadratic variation and
//! exponential-moment probes.

use crate::drift::DriftAccumulator;
use crate::error::{invalid, Error, Result};
use crate::gaussian::MeasureSpec;
use crate::spectral::{Lattice, SpectralField};

pub const BATCHES: usize = 16;

/// Mean and batch-means standard error with `batches` contiguous batches.
/// Batch sizes differ by at most one when the count does not divide evenly.
pub fn batch_means(values: &[f64], batches: usize) -> Result<(f64, f64)> {
    let n = values.len();
    if batches < 2 || n < batches {
        return Err(Error::TooFewSamples { needed: batches.max(2), got: n });
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut bm = Vec::with_capacity(batches);
    for b in 0..batches {
        let (lo, hi) = (b * n / batches, (b + 1) * n / batches);
        bm.push(values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64);
    }
    let bmean = bm.iter().sum::<f64>() / batches as f64;
    let var = bm.iter().map(|v| (v - bmean).powi(2)).sum::<f64>() / (batches - 1) as f64;
    Ok((mean, (var / batches as f64).sqrt()))
}

/// `(E|s|^p)^{1/p}` over an ensemble of scalars, with a delta-method error
/// from the batch-means error of `E|s|^p`.
pub fn lp_norm(values: &[f64], p: f64) -> Result<(f64, f64)> {
    if !(p >= 1.0) || !p.is_finite() {
        return invalid(format!("p must be finite and >= 1, got {p}"));
    }
    let powered: Vec<f64> = values.iter().map(|v| v.abs().powf(p)).collect();
    let (m, se) = batch_means(&powered, BATCHES)?;
    if m == 0.0 {
        return Ok((0.0, 0.0));
    }
    let est = m.powf(1.0 / p);
    Ok((est, est / (p * m) * se))
}

/// `|| sup_t |(G_t)_k| ||_{L^p}` over an ensemble of accumulators, for the
/// tracked mode at position `mode_index`.
pub fn lp_sup_norm(ensemble: &[DriftAccumulator], mode_index: usize, p: f64) -> Result<(f64, f64)> {
    let sups: Vec<f64> = ensemble.iter().map(|a| a.sup_abs(mode_index)).collect();
    lp_norm(&sups, p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub label: String,
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub range: (f64, f64),
    pub points: usize,
    pub weighted: bool,
}

fn least_squares(x: &[f64], y: &[f64], w: &[f64]) -> (f64, f64, f64, f64) {
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(w).map(|(a, b)| b * (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).zip(w).map(|((a, c), b)| b * (a - mx) * (c - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let chi2: f64 = x
        .iter()
        .zip(y)
        .zip(w)
        .map(|((a, c), b)| b * (c - intercept - slope * a).powi(2))
        .sum();
    (slope, intercept, sxx, chi2)
}

/// Fit `log y = a + b log x`. Points are `(x, y, se_y)`; weights are
/// `(y / se_y)^2`, the inverse variance of `log y`. Falls back to ordinary
/// least squares when some error is zero.
pub fn scaling_regression(label: &str, points: &[(f64, f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 5 {
        return Err(Error::TooFewSamples { needed: 5, got: points.len() });
    }
    if let Some(p) = points.iter().find(|p| !(p.0 > 0.0 && p.1 > 0.0)) {
        return invalid(format!("log-log fit needs positive values, got ({}, {})", p.0, p.1));
    }
    let x: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let weighted = points.iter().all(|p| p.2 > 0.0 && p.2.is_finite());
    let w: Vec<f64> = if weighted {
        points.iter().map(|p| (p.1 / p.2).powi(2)).collect()
    } else {
        vec![1.0; points.len()]
    };
    let (slope, intercept, sxx, chi2) = least_squares(&x, &y, &w);
    let dof = (points.len() - 2) as f64;
    let slope_se = if weighted {
        // inflate by the scatter when the fit is worse than the error bars say
        ((chi2 / dof).max(1.0) / sxx).sqrt()
    } else {
        (chi2 / dof / sxx).sqrt()
    };
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    Ok(ScalingFit {
        label: label.to_string(),
        slope,
        intercept,
        slope_se,
        range: (lo, hi),
        points: points.len(),
        weighted,
    })
}

/// Unweighted slope of `log y` against `log x` for short ladders (two or more
/// points) where [`scaling_regression`] does not apply.
pub fn log_log_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: points.len() });
    }
    if let Some(p) = points.iter().find(|p| !(p.0 > 0.0 && p.1 > 0.0)) {
        return invalid(format!("log-log fit needs positive values, got ({}, {})", p.0, p.1));
    }
    let x: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    Ok(least_squares(&x, &y, &vec![1.0; x.len()]).0)
}

/// Per-mode z-scores of the empirical `E|x_k|^2` and `E|x_k|^4` against the
/// exact Gaussian values, with standard errors taken from the exact null
/// (`E|x|^8` and `E|x|^4` from the Wick oracle).
#[derive(Debug, Clone, PartialEq)]
pub struct StationarityReport {
    pub paths: usize,
    pub z2: Vec<f64>,
    pub z4: Vec<f64>,
    pub m2: Vec<f64>,
    pub m4: Vec<f64>,
}

impl StationarityReport {
    /// Fraction of (mode, moment) tests with `|z| < 3`.
    pub fn pass_fraction(&self) -> f64 {
        let all = self.z2.iter().chain(&self.z4);
        let total = self.z2.len() + self.z4.len();
        all.filter(|z| z.abs() < 3.0).count() as f64 / total as f64
    }

    pub fn passes(&self) -> bool {
        self.pass_fraction() >= 0.95
    }
}

pub const MIN_STATIONARITY_PATHS: usize = 256;

pub fn stationarity_test<L: Lattice>(fields: &[SpectralField<L>], spec: &MeasureSpec<L>) -> Result<StationarityReport> {
    let n = fields.len();
    if n < MIN_STATIONARITY_PATHS {
        return Err(Error::TooFewSamples { needed: MIN_STATIONARITY_PATHS, got: n });
    }
    let lat = &spec.lattice;
    let (mut z2, mut z4, mut m2s, mut m4s) = (vec![], vec![], vec![], vec![]);
    for i in 0..lat.len() {
        let k = lat.mode(i);
        let pow = |j: usize| -> Result<f64> {
            let mono: Vec<_> = (0..j).flat_map(|_| [(k, false), (k, true)]).collect();
            spec.wick_moment(&mono)
        };
        let (e2, e4, e8) = (pow(1)?, pow(2)?, pow(4)?);
        let mut m2 = 0.0;
        let mut m4 = 0.0;
        for f in fields {
            let a = f.get(k).norm_sqr();
            m2 += a;
            m4 += a * a;
        }
        m2 /= n as f64;
        m4 /= n as f64;
        let se2 = ((e4 - e2 * e2) / n as f64).sqrt();
        let se4 = ((e8 - e4 * e4) / n as f64).sqrt();
        z2.push((m2 - e2) / se2);
        z4.push((m4 - e4) / se4);
        m2s.push(m2);
        m4s.push(m4);
    }
    Ok(StationarityReport { paths: n, z2, z4, m2: m2s, m4: m4s })
}

#[derive(Debug, Clone, PartialEq)]
pub struct QVReport {
    pub levels: Vec<usize>,
    pub mesh: Vec<f64>,
    pub qv: Vec<f64>,
    /// Slope of `log QV` against `log mesh`.
    pub exponent: f64,
    pub exponent_se: f64,
}

/// Dyadic quadratic variation of a path sampled at `2^L + 1` uniform points on
/// `[0, horizon]`, for each requested level `l <= L`.
pub fn quadratic_variation(path: &[f64], horizon: f64, levels: &[usize]) -> Result<QVReport> {
    let n = path.len().saturating_sub(1);
    if n == 0 || !n.is_power_of_two() {
        return invalid(format!("path needs 2^L + 1 samples, got {}", path.len()));
    }
    let top = n.trailing_zeros() as usize;
    if levels.len() < 2 {
        return invalid("need at least two levels");
    }
    if levels.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("levels must strictly refine");
    }
    if let Some(&l) = levels.iter().find(|&&l| l > top) {
        return invalid(format!("level {l} exceeds the sampling level {top}"));
    }
    let mut qv = Vec::with_capacity(levels.len());
    let mut mesh = Vec::with_capacity(levels.len());
    for &l in levels {
        let step = 1usize << (top - l);
        let s: f64 = (0..(1usize << l))
            .map(|i| (path[(i + 1) * step] - path[i * step]).powi(2))
            .sum();
        qv.push(s);
        mesh.push(horizon / (1u64 << l) as f64);
    }
    if qv.iter().any(|&q| !(q > 0.0)) {
        return invalid("quadratic variation vanished on some level");
    }
    let x: Vec<f64> = mesh.iter().map(|m| m.ln()).collect();
    let y: Vec<f64> = qv.iter().map(|q| q.ln()).collect();
    let w = vec![1.0; x.len()];
    let (slope, _, sxx, chi2) = least_squares(&x, &y, &w);
    let dof = (x.len() as f64 - 2.0).max(1.0);
    Ok(QVReport {
        levels: levels.to_vec(),
        mesh,
        qv,
        exponent: slope,
        exponent_se: (chi2 / dof / sxx).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpMoment {
    pub lambda: f64,
    pub mean: f64,
    /// The top 1% of samples carry more than half of the sum.
    pub unreliable: bool,
}

pub const MIN_EXP_SAMPLES: usize = 256;

/// Empirical `E exp(lambda Q)` for each `lambda`.
pub fn exp_moment_probe(samples: &[f64], lambdas: &[f64]) -> Result<Vec<ExpMoment>> {
    if samples.len() < MIN_EXP_SAMPLES {
        return Err(Error::TooFewSamples { needed: MIN_EXP_SAMPLES, got: samples.len() });
    }
    let top = (samples.len() / 100).max(1);
    Ok(lambdas
        .iter()
        .map(|&lambda| {
            let mut e: Vec<f64> = samples.iter().map(|q| (lambda * q).exp()).collect();
            let total: f64 = e.iter().sum();
            e.sort_by(|a, b| b.total_cmp(a));
            let head: f64 = e[..top].iter().sum();
            ExpMoment {
                lambda,
                mean: total / samples.len() as f64,
                unreliable: head > 0.5 * total,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_ensemble_has_zero_error() {
        let (m, se) = lp_norm(&vec![-2.5; 32], 2.0).unwrap();
        assert!((m - 2.5).abs() < 1e-15 && se == 0.0);
        assert!(matches!(lp_norm(&[1.0; 15], 2.0), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn exact_power_law() {
        let pts: Vec<_> = (1..=8).map(|i| (i as f64, 3.0 * (i as f64).powf(-0.75), 0.0)).collect();
        let f = scaling_regression("x", &pts).unwrap();
        assert!((f.slope + 0.75).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        let flat: Vec<_> = (1..=6).map(|i| (i as f64, 2.0, 0.1)).collect();
        assert!(scaling_regression("c", &flat).unwrap().slope.abs() < 1e-14);
        assert!(scaling_regression("few", &pts[..4]).is_err());
        let mut bad = pts.clone();
        bad[2].1 = -1.0;
        assert!(scaling_regression("neg", &bad).is_err());
    }

    #[test]
    fn short_ladder_slope() {
        let s = log_log_slope(&[(1e-3, 2e-2), (1e-4, 2e-2 * 10f64.powf(-0.5))]).unwrap();
        assert!((s - 0.5).abs() < 1e-12);
        assert!(log_log_slope(&[(1.0, 1.0)]).is_err());
        assert!(log_log_slope(&[(1.0, 1.0), (2.0, 0.0)]).is_err());
    }

    #[test]
    fn linear_path_qv() {
        let l = 10;
        let c = 1.7;
        let path: Vec<f64> = (0..=(1 << l)).map(|i| c * i as f64 / (1 << l) as f64).collect();
        let r = quadratic_variation(&path, 1.0, &[2, 4, 6, 8]).unwrap();
        for (q, &lv) in r.qv.iter().zip(&r.levels) {
            assert!((q - c * c / (1u64 << lv) as f64).abs() < 1e-12);
        }
        assert!((r.exponent - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exp_probe_trivial() {
        let r = exp_moment_probe(&vec![0.0; 300], &[0.1, 1.0, 5.0]).unwrap();
        assert!(r.iter().all(|e| e.mean == 1.0 && !e.unreliable));
    }
}

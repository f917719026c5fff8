//! Invariant Gaussian measures, their samplers, and exact Gaussian moments.
//!
//! Random numbers come from ChaCha8 with one independent stream per
//! `(seed, experiment, path, purpose, mode)`. Keying by mode, and not by
//! position in a lattice, makes two resolutions of the same path see the same
//! draws on their shared modes.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::spectral::{Disk, Lattice, Line, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    Initial,
    Noise,
    Synthetic(u32),
}

impl Purpose {
    fn code(self) -> u64 {
        match self {
            Purpose::Initial => 1,
            Purpose::Noise => 2,
            Purpose::Synthetic(j) => 3 + j as u64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StreamId {
    pub experiment: String,
    pub path: u64,
    pub purpose: Purpose,
}

impl StreamId {
    pub fn new(experiment: impl Into<String>, path: u64, purpose: Purpose) -> Self {
        StreamId {
            experiment: experiment.into(),
            path,
            purpose,
        }
    }
}

/// Seed plus stream id. Cheap to clone; generators are built on demand.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub id: StreamId,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

impl RngStream {
    pub fn new(seed: u64, id: StreamId) -> Self {
        RngStream { seed, id }
    }

    /// Same seed and experiment, different path or purpose.
    pub fn with(&self, path: u64, purpose: Purpose) -> Self {
        RngStream {
            seed: self.seed,
            id: StreamId {
                experiment: self.id.experiment.clone(),
                path,
                purpose,
            },
        }
    }

    /// Generator for one mode key (or any other sub-stream label).
    pub fn rng_for(&self, key: u64) -> ChaCha8Rng {
        let mut s = self.seed ^ fnv1a(self.id.experiment.as_bytes());
        let mut bytes = [0u8; 32];
        for chunk in bytes.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut s).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(bytes);
        let mut t = self.id.path;
        let a = splitmix64(&mut t);
        let mut u = a ^ self.id.purpose.code().wrapping_mul(0xD6E8_FEB8_6659_FD93);
        let b = splitmix64(&mut u);
        let mut v = b ^ key.wrapping_mul(0xA076_1D64_78BD_642F);
        rng.set_stream(splitmix64(&mut v));
        rng
    }

    pub fn rng(&self) -> ChaCha8Rng {
        self.rng_for(0)
    }
}

/// Unit-variance circular complex Gaussian: real and imaginary parts each
/// carry variance 1/2.
pub fn circular_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    Complex64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
}

/// Increment of a unit-rate complex Brownian motion over a step `delta`:
/// `E|dB|^2 = delta`.
pub fn complex_bm_increment<R: Rng + ?Sized>(delta: f64, rng: &mut R) -> Result<Complex64> {
    if !(delta > 0.0) {
        return invalid(format!("time step must be positive, got {delta}"));
    }
    Ok(circular_normal(rng) * delta.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureKind {
    /// Unit variance on every mode.
    WhiteNoise1d,
    /// Variance `1/|k|^2`, density proportional to `exp(-|k|^2 |x_k|^2)`.
    NsGibbs2d,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpec<L: Lattice> {
    pub kind: MeasureKind,
    pub lattice: L,
}

impl MeasureSpec<Line> {
    pub fn white_noise(n: usize) -> Self {
        MeasureSpec {
            kind: MeasureKind::WhiteNoise1d,
            lattice: Line::new(n),
        }
    }
}

impl MeasureSpec<Disk> {
    pub fn ns_gibbs(n: usize) -> Self {
        MeasureSpec {
            kind: MeasureKind::NsGibbs2d,
            lattice: Disk::new(n),
        }
    }
}

impl<L: Lattice> MeasureSpec<L> {
    pub fn cutoff(&self) -> usize {
        self.lattice.cutoff()
    }

    /// `E|x_k|^2` for a mode.
    pub fn variance_of(&self, k: L::Mode) -> f64 {
        match self.kind {
            MeasureKind::WhiteNoise1d => 1.0,
            MeasureKind::NsGibbs2d => 1.0 / L::mode_norm_sq(k),
        }
    }

    pub fn variance(&self, index: usize) -> f64 {
        self.variance_of(self.lattice.mode(index))
    }

    /// One draw. Each mode uses its own generator from `stream`, keyed by
    /// [`Lattice::mode_key`].
    pub fn sample(&self, stream: &RngStream) -> SpectralField<L> {
        let coeffs = (0..self.lattice.len())
            .map(|i| {
                let mut rng = stream.rng_for(self.lattice.mode_key(i));
                circular_normal(&mut rng) * self.variance(i).sqrt()
            })
            .collect();
        SpectralField::from_coeffs(self.lattice.clone(), coeffs)
    }

    /// Exact `E[prod x_{k_j}]` (or `conj(x_{k_j})` when flagged) by summing over
    /// perfect matchings. Only pairs with `k + k' = 0` contribute, with weight
    /// `v(k)`. Odd degree gives 0; degree above 8 is rejected.
    pub fn wick_moment(&self, monomial: &[(L::Mode, bool)]) -> Result<f64> {
        if monomial.len() > 8 {
            return invalid(format!("Wick oracle supports degree <= 8, got {}", monomial.len()));
        }
        if monomial.len() % 2 == 1 {
            return Ok(0.0);
        }
        let modes: Vec<L::Mode> = monomial
            .iter()
            .map(|&(k, conj)| if conj { L::neg_mode(k) } else { k })
            .collect();
        Ok(self.matchings(&modes))
    }

    fn matchings(&self, modes: &[L::Mode]) -> f64 {
        let Some((&first, rest)) = modes.split_first() else {
            return 1.0;
        };
        let zero = L::add_modes(first, L::neg_mode(first));
        if self.lattice.locate(first).is_none() {
            return 0.0;
        }
        let mut total = 0.0;
        for j in 0..rest.len() {
            if L::add_modes(first, rest[j]) == zero {
                let remaining: Vec<L::Mode> = rest
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != j)
                    .map(|(_, &m)| m)
                    .collect();
                total += self.variance_of(first) * self.matchings(&remaining);
            }
        }
        total
    }
}

/// Free-standing form of [`MeasureSpec::wick_moment`].
pub fn wick_moment_oracle<L: Lattice>(spec: &MeasureSpec<L>, monomial: &[(L::Mode, bool)]) -> Result<f64> {
    spec.wick_moment(monomial)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wick_small_cases() {
        let mu = MeasureSpec::white_noise(4);
        assert_eq!(mu.wick_moment(&[(1, false), (1, true)]).unwrap(), 1.0);
        assert_eq!(mu.wick_moment(&[(1, false), (2, false)]).unwrap(), 0.0);
        assert_eq!(mu.wick_moment(&[(1, false), (1, true), (1, false), (1, true)]).unwrap(), 2.0);
        assert_eq!(mu.wick_moment(&[(1, false)]).unwrap(), 0.0);
        // E|x|^8 = 4! for a circular Gaussian
        let m8: Vec<_> = (0..4).flat_map(|_| [(3, false), (3, true)]).collect();
        assert_eq!(mu.wick_moment(&m8).unwrap(), 24.0);
        let too_long = vec![(1, false); 10];
        assert!(mu.wick_moment(&too_long).is_err());
        // outside the band the variable is zero
        assert_eq!(mu.wick_moment(&[(7, false), (7, true)]).unwrap(), 0.0);
    }

    #[test]
    fn gibbs_variance() {
        let g = MeasureSpec::ns_gibbs(3);
        assert_eq!(g.wick_moment(&[([1, 1], false), ([1, 1], true)]).unwrap(), 0.5);
    }

    #[test]
    fn streams_reproduce_and_separate() {
        let s = RngStream::new(7, StreamId::new("t", 0, Purpose::Initial));
        let mu = MeasureSpec::white_noise(8);
        assert_eq!(mu.sample(&s), mu.sample(&s));
        assert_ne!(mu.sample(&s), mu.sample(&s.with(1, Purpose::Initial)));
        assert_ne!(mu.sample(&s), mu.sample(&s.with(0, Purpose::Noise)));
        // shared modes agree across cutoffs
        let small = MeasureSpec::white_noise(4).sample(&s);
        assert_eq!(&mu.sample(&s).coeffs()[..4], small.coeffs());
    }
}

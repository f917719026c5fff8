//! Index sets for mean-zero Fourier modes.
//!
//! Every lattice stores one representative per Hermitian pair `{k, -k}`. The
//! coefficient of the partner mode is the complex conjugate, so real-valued
//! fields are symmetric by construction rather than by bookkeeping.

use std::fmt;
use std::sync::Arc;

/// Storage position of a mode: the representative's index and whether the
/// mode is the conjugate partner of that representative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot {
    pub index: usize,
    pub conjugate: bool,
}

pub trait Lattice: Clone + fmt::Debug + PartialEq + Send + Sync {
    type Mode: Copy + fmt::Debug + PartialEq + Send + Sync;

    /// Truncation radius `N` (modes with `0 < |k| <= N` are stored).
    fn cutoff(&self) -> usize;

    /// Number of stored representatives.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn mode(&self, index: usize) -> Self::Mode;

    /// `None` for the zero mode and for modes outside the cutoff.
    fn locate(&self, k: Self::Mode) -> Option<Slot>;

    /// `|k|^2` of the representative at `index`.
    fn norm_sq(&self, index: usize) -> f64;

    /// Stable identifier of the mode, independent of the cutoff. Random
    /// streams are keyed by it so that two resolutions share noise.
    fn mode_key(&self, index: usize) -> u64;

    fn with_cutoff(&self, cutoff: usize) -> Self;

    fn neg_mode(k: Self::Mode) -> Self::Mode;

    fn add_modes(a: Self::Mode, b: Self::Mode) -> Self::Mode;

    fn mode_norm_sq(k: Self::Mode) -> f64;
}

/// One-dimensional modes `k = 1..=N` (representatives of `±k`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Line {
    cutoff: usize,
}

impl Line {
    pub fn new(cutoff: usize) -> Self {
        Line { cutoff }
    }
}

impl Lattice for Line {
    type Mode = i64;

    fn cutoff(&self) -> usize {
        self.cutoff
    }

    fn len(&self) -> usize {
        self.cutoff
    }

    fn mode(&self, index: usize) -> i64 {
        index as i64 + 1
    }

    fn locate(&self, k: i64) -> Option<Slot> {
        let a = k.unsigned_abs() as usize;
        if k == 0 || a > self.cutoff {
            return None;
        }
        Some(Slot {
            index: a - 1,
            conjugate: k < 0,
        })
    }

    fn norm_sq(&self, index: usize) -> f64 {
        let k = (index + 1) as f64;
        k * k
    }

    fn mode_key(&self, index: usize) -> u64 {
        index as u64 + 1
    }

    fn with_cutoff(&self, cutoff: usize) -> Self {
        Line { cutoff }
    }

    fn neg_mode(k: i64) -> i64 {
        -k
    }

    fn add_modes(a: i64, b: i64) -> i64 {
        a + b
    }

    fn mode_norm_sq(k: i64) -> f64 {
        (k * k) as f64
    }
}

/// Two-dimensional modes in the Euclidean ball `0 < |k| <= N`.
///
/// Representatives are the upper half plane `kx > 0 || (kx == 0 && ky > 0)`,
/// ordered by `(|k|^2, kx, ky)`.
#[derive(Clone)]
pub struct Disk {
    radius: usize,
    modes: Arc<[[i32; 2]]>,
    // (2R+1)^2 table; 0 = absent, +(i+1) = representative i, -(i+1) = its conjugate.
    table: Arc<[i32]>,
}

impl Disk {
    pub fn new(radius: usize) -> Self {
        let r = radius as i32;
        let r2 = (radius * radius) as i64;
        let mut modes = Vec::new();
        for kx in 0..=r {
            for ky in -r..=r {
                let upper = kx > 0 || (kx == 0 && ky > 0);
                let n2 = (kx as i64).pow(2) + (ky as i64).pow(2);
                if upper && n2 <= r2 {
                    modes.push([kx, ky]);
                }
            }
        }
        modes.sort_by_key(|&[kx, ky]| ((kx as i64).pow(2) + (ky as i64).pow(2), kx, ky));
        let side = 2 * radius + 1;
        let mut table = vec![0i32; side * side];
        for (i, &[kx, ky]) in modes.iter().enumerate() {
            let code = i as i32 + 1;
            table[Self::cell(radius, kx, ky)] = code;
            table[Self::cell(radius, -kx, -ky)] = -code;
        }
        Disk {
            radius,
            modes: modes.into(),
            table: table.into(),
        }
    }

    fn cell(radius: usize, kx: i32, ky: i32) -> usize {
        let side = 2 * radius + 1;
        (kx + radius as i32) as usize * side + (ky + radius as i32) as usize
    }

    pub fn modes(&self) -> &[[i32; 2]] {
        &self.modes
    }
}

impl fmt::Debug for Disk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Disk")
            .field("radius", &self.radius)
            .field("modes", &self.modes.len())
            .finish()
    }
}

impl PartialEq for Disk {
    fn eq(&self, other: &Self) -> bool {
        self.radius == other.radius
    }
}

impl Lattice for Disk {
    type Mode = [i32; 2];

    fn cutoff(&self) -> usize {
        self.radius
    }

    fn len(&self) -> usize {
        self.modes.len()
    }

    fn mode(&self, index: usize) -> [i32; 2] {
        self.modes[index]
    }

    fn locate(&self, [kx, ky]: [i32; 2]) -> Option<Slot> {
        let r = self.radius as i32;
        if kx.abs() > r || ky.abs() > r {
            return None;
        }
        let code = self.table[Self::cell(self.radius, kx, ky)];
        match code {
            0 => None,
            c if c > 0 => Some(Slot {
                index: (c - 1) as usize,
                conjugate: false,
            }),
            c => Some(Slot {
                index: (-c - 1) as usize,
                conjugate: true,
            }),
        }
    }

    fn norm_sq(&self, index: usize) -> f64 {
        let [kx, ky] = self.modes[index];
        (kx as f64).powi(2) + (ky as f64).powi(2)
    }

    fn mode_key(&self, index: usize) -> u64 {
        let [kx, ky] = self.modes[index];
        ((kx as u32 as u64) << 32) | (ky as u32 as u64)
    }

    fn with_cutoff(&self, cutoff: usize) -> Self {
        Disk::new(cutoff)
    }

    fn neg_mode([kx, ky]: [i32; 2]) -> [i32; 2] {
        [-kx, -ky]
    }

    fn add_modes(a: [i32; 2], b: [i32; 2]) -> [i32; 2] {
        [a[0] + b[0], a[1] + b[1]]
    }

    fn mode_norm_sq([kx, ky]: [i32; 2]) -> f64 {
        (kx as f64).powi(2) + (ky as f64).powi(2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_locates_both_signs() {
        let l = Line::new(4);
        assert_eq!(l.locate(3), Some(Slot { index: 2, conjugate: false }));
        assert_eq!(l.locate(-3), Some(Slot { index: 2, conjugate: true }));
        assert_eq!(l.locate(0), None);
        assert_eq!(l.locate(5), None);
    }

    #[test]
    fn disk_covers_ball_once_per_pair() {
        let d = Disk::new(8);
        let mut count = 0;
        for kx in -8i32..=8 {
            for ky in -8i32..=8 {
                let inside = kx * kx + ky * ky <= 64 && (kx, ky) != (0, 0);
                assert_eq!(d.locate([kx, ky]).is_some(), inside, "{kx},{ky}");
                if inside {
                    count += 1;
                    let a = d.locate([kx, ky]).unwrap();
                    let b = d.locate([-kx, -ky]).unwrap();
                    assert_eq!(a.index, b.index);
                    assert_ne!(a.conjugate, b.conjugate);
                }
            }
        }
        assert_eq!(count, 2 * d.len());
        // sorted by |k|^2
        assert!(d.modes().windows(2).all(|w| {
            let n = |m: [i32; 2]| m[0] * m[0] + m[1] * m[1];
            n(w[0]) <= n(w[1])
        }));
    }
}

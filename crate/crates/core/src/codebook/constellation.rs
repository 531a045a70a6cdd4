use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result, C64};

/// Square M-QAM with odd-integer coordinates `{±1, ±3, ...}²`.
///
/// Point `k` has in-phase index `k / side` and quadrature index `k % side`,
/// so lexicographic order on point indices is lexicographic order on
/// `(in-phase, quadrature)` pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct Constellation {
    side: usize,
    points: Vec<C64>,
    e_s: f64,
}

impl Constellation {
    /// `m` must be a square of an even side length (4, 16, 64, 256, ...).
    pub fn qam(m: usize) -> Result<Self> {
        let side = (1..=m).take_while(|s| s * s <= m).last().unwrap_or(0);
        if side < 2 || side * side != m || side % 2 != 0 {
            return Err(Error::UnsupportedConstellation(m));
        }
        let levels = pam_levels(side);
        let points: Vec<C64> =
            levels.iter().flat_map(|&re| levels.iter().map(move |&im| C64::new(re, im))).collect();
        let e_s = points.iter().map(|p| p.norm_sqr()).sum::<f64>() / m as f64;
        Ok(Constellation { side, points, e_s })
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.points.len()
    }

    /// `sqrt(M)`, the number of levels per real dimension.
    #[inline]
    pub fn side(&self) -> usize {
        self.side
    }

    #[inline]
    pub fn points(&self) -> &[C64] {
        &self.points
    }

    #[inline]
    pub fn point(&self, index: usize) -> C64 {
        self.points[index]
    }

    /// Average energy, the mean of `|p|²` (2, 10, 42 for 4-, 16-, 64-QAM).
    #[inline]
    pub fn e_s(&self) -> f64 {
        self.e_s
    }

    /// Per-dimension PAM levels `-(side-1), ..., side-1`.
    pub fn pam(&self) -> Vec<f64> {
        pam_levels(self.side)
    }

    #[inline]
    pub fn split_index(&self, index: usize) -> (usize, usize) {
        (index / self.side, index % self.side)
    }

    #[inline]
    pub fn join_index(&self, re: usize, im: usize) -> usize {
        re * self.side + im
    }

    /// Index of a point given exactly (odd-integer coordinates).
    pub fn index_of(&self, p: C64) -> Option<usize> {
        self.points.iter().position(|q| (q - p).norm_sqr() < 1e-18)
    }

    /// Number of ordered point pairs `(p, q)` with `p - q = d`.
    pub fn pair_multiplicity(&self, d: C64) -> u64 {
        let per_dim = |x: f64| -> u64 {
            let half = x / 2.0;
            if (half - half.round()).abs() > 1e-9 {
                return 0;
            }
            (self.side as u64).saturating_sub(half.round().abs() as u64)
        };
        per_dim(d.re) * per_dim(d.im)
    }
}

fn pam_levels(side: usize) -> Vec<f64> {
    (0..side).map(|i| (2 * i) as f64 - (side - 1) as f64).collect()
}

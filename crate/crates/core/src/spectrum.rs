//! Distance spectrum of a linear code over a QAM alphabet.
//!
//! For a linear code `X − X̂ = X(Δs)`, so pairwise error events are indexed
//! by nonzero difference vectors `Δs ∈ D^κ`, where `D` is the set of
//! differences of two constellation points. For each one the codeword
//! distance matrix `E = ΔX ΔX†` gives a rank `r` and a product distance `δ`
//! (product of the nonzero eigenvalues).
//!
//! Enumeration is split into chunks by the values of the leading symbols so
//! a caller can process chunks in parallel and merge the partial
//! [`Spectrum`]s; merging is order-independent.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::codebook::{Constellation, LinearCode};
use crate::numerics::{determinant, hermitian_eigenvalues, CMat};
use crate::par::{Executor, Sequential};
use crate::{Error, Result, C64};

/// Eigenvalues of `E` above `RANK_REL_TOL · λ_max` count as nonzero.
pub const RANK_REL_TOL: f64 = 1e-9;

/// Significant digits kept when binning product distances.
pub const DELTA_DIGITS: i32 = 9;

/// Default cap on the number of difference vectors enumerated.
pub const DEFAULT_SPECTRUM_BUDGET: u128 = 100_000_000;

/// All differences `p − q` of constellation points, zero first, the rest in
/// increasing `(re, im)` order.
pub fn difference_set(cons: &Constellation) -> Vec<C64> {
    let side = cons.side() as i64;
    let steps: Vec<i64> = (-(side - 1)..side).collect();
    let mut out = alloc::vec![C64::new(0.0, 0.0)];
    for &a in &steps {
        for &b in &steps {
            if a != 0 || b != 0 {
                out.push(C64::new(2.0 * a as f64, 2.0 * b as f64));
            }
        }
    }
    out
}

/// Rank and product distance of one difference.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Distance {
    pub rank: usize,
    /// Product of the nonzero eigenvalues of `E` (0 when `ΔX = 0`).
    pub delta: f64,
    /// `det(E)`, zero unless `rank = n_t`.
    pub det: f64,
}

/// `(rank, δ, det)` of `E = X(Δs) X(Δs)†`.
pub fn codeword_distance(code: &LinearCode, ds: &[C64]) -> Result<Distance> {
    if ds.iter().all(|d| *d == C64::new(0.0, 0.0)) {
        return Err(Error::ZeroDifference);
    }
    let dx = code.encode(ds)?;
    let mut scratch = Scratch::new(code.n_t(), code.t());
    Ok(scratch.distance(dx.as_slice()))
}

/// Reusable buffers for evaluating `E` of an `n_t × T` difference.
struct Scratch {
    n_t: usize,
    t: usize,
    k: usize,
    gram: Vec<C64>,
    lu: Vec<C64>,
}

impl Scratch {
    fn new(n_t: usize, t: usize) -> Self {
        let k = n_t.min(t);
        Scratch { n_t, t, k, gram: alloc::vec![C64::new(0.0, 0.0); k * k], lu: alloc::vec![C64::new(0.0, 0.0); k * k] }
    }

    /// `dx` is row-major `n_t × T`. Works on the smaller of `ΔX ΔX†` and
    /// `ΔX† ΔX`, which share their nonzero eigenvalues.
    fn distance(&mut self, dx: &[C64]) -> Distance {
        let (n_t, t, k) = (self.n_t, self.t, self.k);
        let wide = n_t <= t;
        for i in 0..k {
            for j in i..k {
                let mut acc = C64::new(0.0, 0.0);
                if wide {
                    for c in 0..t {
                        acc += dx[i * t + c] * dx[j * t + c].conj();
                    }
                } else {
                    for r in 0..n_t {
                        acc += dx[r * t + i].conj() * dx[r * t + j];
                    }
                }
                self.gram[i * k + j] = acc;
                self.gram[j * k + i] = acc.conj();
            }
        }
        let trace: f64 = (0..k).map(|i| self.gram[i * k + i].re).sum();
        if trace <= 0.0 {
            return Distance { rank: 0, delta: 0.0, det: 0.0 };
        }
        let (rank, delta) = if k == 1 {
            (1, trace)
        } else if k == 2 {
            let (a, d, b) = (self.gram[0].re, self.gram[3].re, self.gram[1]);
            let det = a * d - b.norm_sqr();
            let disc = ((a - d) * (a - d) + 4.0 * b.norm_sqr()).sqrt();
            let l_max = 0.5 * (trace + disc);
            if det > RANK_REL_TOL * l_max * l_max {
                (2, det)
            } else {
                (1, l_max)
            }
        } else {
            // det > tol·tr^k forces λ_min > tol·tr ≥ tol·λ_max
            self.lu.copy_from_slice(&self.gram);
            let det = lu_det(&mut self.lu, k);
            if det > RANK_REL_TOL * trace.powi(k as i32) {
                (k, det)
            } else {
                let ev = hermitian_eigenvalues(&CMat::from_fn(k, k, |i, j| self.gram[i * k + j]));
                let l_max = ev[k - 1];
                let nz: Vec<f64> = ev.into_iter().filter(|&l| l > RANK_REL_TOL * l_max).collect();
                (nz.len(), nz.iter().product())
            }
        };
        let det = if rank == n_t { delta } else { 0.0 };
        Distance { rank, delta, det }
    }
}

/// Real part of the determinant of the `k × k` matrix in `a` (destroyed).
fn lu_det(a: &mut [C64], k: usize) -> f64 {
    let mut det = C64::new(1.0, 0.0);
    for c in 0..k {
        let mut p = c;
        for r in c + 1..k {
            if a[r * k + c].norm_sqr() > a[p * k + c].norm_sqr() {
                p = r;
            }
        }
        let pivot = a[p * k + c];
        if pivot.norm_sqr() == 0.0 {
            return 0.0;
        }
        if p != c {
            for j in 0..k {
                a.swap(p * k + j, c * k + j);
            }
            det = -det;
        }
        det *= pivot;
        for r in c + 1..k {
            let f = a[r * k + c] / pivot;
            for j in c + 1..k {
                let v = a[c * k + j];
                a[r * k + j] -= f * v;
            }
        }
    }
    det.re
}

/// Bin key of a product distance: `(rank, exponent, 9-digit mantissa)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DeltaKey {
    pub rank: u32,
    exponent: i32,
    mantissa: u64,
}

impl DeltaKey {
    pub fn new(rank: usize, delta: f64) -> Self {
        if !(delta > 0.0) {
            return DeltaKey { rank: rank as u32, exponent: i32::MIN, mantissa: 0 };
        }
        let mut exponent = delta.log10().floor() as i32;
        let mut mantissa = (delta / 10f64.powi(exponent - (DELTA_DIGITS - 1))).round() as u64;
        let top = 10u64.pow(DELTA_DIGITS as u32);
        if mantissa >= top {
            mantissa /= 10;
            exponent += 1;
        } else if mantissa < top / 10 {
            mantissa *= 10;
            exponent -= 1;
        }
        DeltaKey { rank: rank as u32, exponent, mantissa }
    }

    /// The rounded product distance.
    pub fn delta(&self) -> f64 {
        if self.mantissa == 0 {
            0.0
        } else {
            self.mantissa as f64 * 10f64.powi(self.exponent - (DELTA_DIGITS - 1))
        }
    }
}

/// Multiplicities of one bin under both counting conventions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BinCount {
    /// Distinct nonzero difference vectors.
    pub vectors: u64,
    /// Ordered codeword pairs `(X, X̂)`.
    pub pairs: u128,
}

/// One row of the spectrum table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumEntry {
    pub r: usize,
    pub delta: f64,
    pub count: u64,
    pub pairs: u128,
}

/// Partial or complete distance spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub n_t: usize,
    /// Nonzero difference vectors seen.
    pub vectors: u64,
    /// Bins for ranks up to the `max_rank` the enumeration was asked for.
    pub bins: BTreeMap<DeltaKey, BinCount>,
    /// Minimum of `det(E)` over everything seen (`+∞` when empty).
    pub min_det: f64,
    /// Lexicographically smallest difference-index vector attaining
    /// `min_det`.
    pub min_det_witness: Vec<usize>,
}

impl Spectrum {
    pub fn empty(n_t: usize) -> Self {
        Spectrum { n_t, vectors: 0, bins: BTreeMap::new(), min_det: f64::INFINITY, min_det_witness: Vec::new() }
    }

    fn record(&mut self, idx: &[usize], d: &Distance, pairs: u128, max_rank: usize) {
        self.vectors += 1;
        if d.rank <= max_rank {
            let bin = self.bins.entry(DeltaKey::new(d.rank, d.delta)).or_default();
            bin.vectors += 1;
            bin.pairs += pairs;
        }
        if d.det < self.min_det || (d.det == self.min_det && idx < &self.min_det_witness[..]) {
            self.min_det = d.det;
            self.min_det_witness = idx.to_vec();
        }
    }

    /// Folds another partial spectrum into this one.
    pub fn merge(&mut self, other: &Spectrum) {
        self.vectors += other.vectors;
        for (k, c) in &other.bins {
            let bin = self.bins.entry(*k).or_default();
            bin.vectors += c.vectors;
            bin.pairs += c.pairs;
        }
        if other.min_det < self.min_det
            || (other.min_det == self.min_det && other.min_det_witness < self.min_det_witness)
        {
            self.min_det = other.min_det;
            self.min_det_witness.clone_from(&other.min_det_witness);
        }
    }

    /// Difference vectors of rank `r` (within the binned ranks).
    pub fn count_rank(&self, r: usize) -> BinCount {
        let mut out = BinCount::default();
        for (k, c) in &self.bins {
            if k.rank as usize == r {
                out.vectors += c.vectors;
                out.pairs += c.pairs;
            }
        }
        out
    }

    /// Rows of rank `r`, ascending in `δ`.
    pub fn entries_of_rank(&self, r: usize) -> Vec<SpectrumEntry> {
        self.bins
            .iter()
            .filter(|(k, _)| k.rank as usize == r)
            .map(|(k, c)| SpectrumEntry { r, delta: k.delta(), count: c.vectors, pairs: c.pairs })
            .collect()
    }

    /// Whether some nonzero difference loses rank.
    pub fn has_rank_deficiency(&self) -> bool {
        self.min_det <= 0.0
    }
}

/// Precomputed per-symbol contributions `X_ℓ(Δ)` for every difference value.
pub struct DiffEnumerator {
    n_t: usize,
    t: usize,
    kappa: usize,
    diffs: Vec<C64>,
    pair_mult: Vec<u128>,
    /// `[ℓ][d][entry]`, entries row-major `n_t × T`.
    contrib: Vec<C64>,
}

impl DiffEnumerator {
    pub fn new(code: &LinearCode, cons: &Constellation) -> Self {
        let diffs = difference_set(cons);
        let pair_mult = diffs.iter().map(|&d| cons.pair_multiplicity(d) as u128).collect();
        let (n_t, t, kappa) = (code.n_t(), code.t(), code.kappa());
        let mut contrib = Vec::with_capacity(kappa * diffs.len() * n_t * t);
        for l in 0..kappa {
            for d in &diffs {
                let mut x = code.disp_a()[l].scale(C64::new(d.re, 0.0));
                x.add_scaled(&code.disp_b()[l], C64::new(0.0, d.im));
                contrib.extend_from_slice(x.as_slice());
            }
        }
        DiffEnumerator { n_t, t, kappa, diffs, pair_mult, contrib }
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn diffs(&self) -> &[C64] {
        &self.diffs
    }

    /// `|D|^κ`, counting the zero vector.
    pub fn total(&self) -> u128 {
        (self.diffs.len() as u128).checked_pow(self.kappa as u32).unwrap_or(u128::MAX)
    }

    /// Number of chunks when splitting on the first `prefix` symbols.
    pub fn chunk_count(&self, prefix: usize) -> usize {
        self.diffs.len().pow(prefix.min(self.kappa) as u32)
    }

    /// The difference vector for a list of difference indices.
    pub fn vector(&self, idx: &[usize]) -> Vec<C64> {
        idx.iter().map(|&i| self.diffs[i]).collect()
    }

    fn slot(&self, l: usize, d: usize) -> &[C64] {
        let n = self.n_t * self.t;
        let off = (l * self.diffs.len() + d) * n;
        &self.contrib[off..off + n]
    }

    /// Visits every nonzero difference vector whose first `prefix`
    /// components are given by `chunk` (base `|D|`, most significant
    /// first), in lexicographic order of the index vector.
    pub fn for_each_in_chunk(&self, prefix: usize, chunk: usize, mut f: impl FnMut(&[usize], &Distance)) {
        let prefix = prefix.min(self.kappa);
        let nd = self.diffs.len();
        let n = self.n_t * self.t;
        let mut idx = alloc::vec![0usize; self.kappa];
        let mut c = chunk;
        for p in (0..prefix).rev() {
            idx[p] = c % nd;
            c /= nd;
        }
        let mut partial = alloc::vec![C64::new(0.0, 0.0); (self.kappa + 1) * n];
        let mut scratch = Scratch::new(self.n_t, self.t);
        let mut depth = 0;
        loop {
            for d in depth..self.kappa {
                let (head, tail) = partial.split_at_mut((d + 1) * n);
                let src = &head[d * n..];
                let add = self.slot(d, idx[d]);
                for e in 0..n {
                    tail[e] = src[e] + add[e];
                }
            }
            if idx.iter().any(|&i| i != 0) {
                let dist = scratch.distance(&partial[self.kappa * n..]);
                f(&idx, &dist);
            }
            let mut d = self.kappa;
            loop {
                if d == prefix {
                    return;
                }
                d -= 1;
                idx[d] += 1;
                if idx[d] < nd {
                    break;
                }
                idx[d] = 0;
            }
            depth = d;
        }
    }

    /// Partial spectrum of one chunk; ranks above `max_rank` are only
    /// counted, not binned.
    pub fn spectrum_chunk(&self, prefix: usize, chunk: usize, max_rank: usize) -> Spectrum {
        let mut s = Spectrum::empty(self.n_t);
        self.for_each_in_chunk(prefix, chunk, |idx, d| {
            let pairs = idx.iter().map(|&i| self.pair_mult[i]).product();
            s.record(idx, d, pairs, max_rank);
        });
        s
    }

    /// Visits every nonzero difference vector with at most `max_weight`
    /// nonzero components, ordered by support then by values.
    pub fn for_each_low_weight(&self, max_weight: usize, mut f: impl FnMut(&[usize], &Distance)) {
        let mut scratch = Scratch::new(self.n_t, self.t);
        let n = self.n_t * self.t;
        let mut dx = alloc::vec![C64::new(0.0, 0.0); n];
        for w in 1..=max_weight.min(self.kappa) {
            let mut support: Vec<usize> = (0..w).collect();
            loop {
                let mut vals = alloc::vec![1usize; w];
                loop {
                    dx.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
                    let mut idx = alloc::vec![0usize; self.kappa];
                    for (&pos, &v) in support.iter().zip(&vals) {
                        idx[pos] = v;
                        for (a, b) in dx.iter_mut().zip(self.slot(pos, v)) {
                            *a += b;
                        }
                    }
                    f(&idx, &scratch.distance(&dx));
                    let mut k = w;
                    let done = loop {
                        if k == 0 {
                            break true;
                        }
                        k -= 1;
                        vals[k] += 1;
                        if vals[k] < self.diffs.len() {
                            break false;
                        }
                        vals[k] = 1;
                    };
                    if done {
                        break;
                    }
                }
                if !next_combination(&mut support, self.kappa) {
                    break;
                }
            }
        }
    }

    /// Evaluates `n` uniformly drawn nonzero difference vectors.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: u64, max_rank: usize) -> Spectrum {
        let mut s = Spectrum::empty(self.n_t);
        let mut scratch = Scratch::new(self.n_t, self.t);
        let len = self.n_t * self.t;
        let mut dx = alloc::vec![C64::new(0.0, 0.0); len];
        let mut idx = alloc::vec![0usize; self.kappa];
        let mut drawn = 0;
        while drawn < n {
            for i in idx.iter_mut() {
                *i = rng.random_range(0..self.diffs.len());
            }
            if idx.iter().all(|&i| i == 0) {
                continue;
            }
            drawn += 1;
            dx.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            for (l, &v) in idx.iter().enumerate() {
                for (a, b) in dx.iter_mut().zip(self.slot(l, v)) {
                    *a += b;
                }
            }
            let d = scratch.distance(&dx);
            let pairs = idx.iter().map(|&i| self.pair_mult[i]).product();
            s.record(&idx, &d, pairs, max_rank);
        }
        s
    }
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let Some(i) = (0..k).rev().find(|&i| c[i] < n - k + i) else {
        return false;
    };
    c[i] += 1;
    for j in i + 1..k {
        c[j] = c[j - 1] + 1;
    }
    true
}

fn check_budget(e: &DiffEnumerator, budget: u128) -> Result<()> {
    let required = e.total();
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    Ok(())
}

/// Chunks used by [`spectrum_with`]: one per value of the first symbol, or
/// of the first two when there are few.
pub fn default_prefix(e: &DiffEnumerator) -> usize {
    if e.chunk_count(1) >= 64 || e.kappa() < 2 {
        1
    } else {
        2
    }
}

/// Full spectrum of all `|D|^κ − 1` nonzero differences, chunks run through
/// `exec` and merged in chunk order.
pub fn spectrum_with<E: Executor>(
    exec: &E,
    code: &LinearCode,
    cons: &Constellation,
    max_rank: usize,
    budget: u128,
) -> Result<Spectrum> {
    let e = DiffEnumerator::new(code, cons);
    check_budget(&e, budget)?;
    let prefix = default_prefix(&e);
    let chunks: Vec<usize> = (0..e.chunk_count(prefix)).collect();
    let parts = exec.map(&chunks, |&c| e.spectrum_chunk(prefix, c, max_rank));
    let mut s = Spectrum::empty(code.n_t());
    for p in &parts {
        s.merge(p);
    }
    Ok(s)
}

pub fn spectrum(code: &LinearCode, cons: &Constellation, max_rank: usize, budget: u128) -> Result<Spectrum> {
    spectrum_with(&Sequential, code, cons, max_rank, budget)
}

/// Exact `min det(E)` over all nonzero differences; 0 when any is rank
/// deficient.
pub fn min_determinant(code: &LinearCode, cons: &Constellation, budget: u128) -> Result<f64> {
    Ok(spectrum(code, cons, 0, budget)?.min_det)
}

/// Rank-2 event count and its `δ` histogram.
#[derive(Clone, Debug, PartialEq)]
pub struct Rank2Multiplicity {
    /// `Σ A(2, δ)` counting difference vectors.
    pub total: u64,
    /// The same total counting ordered codeword pairs.
    pub total_pairs: u128,
    pub histogram: Vec<SpectrumEntry>,
}

impl Rank2Multiplicity {
    pub fn from_spectrum(s: &Spectrum) -> Self {
        let c = s.count_rank(2);
        Rank2Multiplicity { total: c.vectors, total_pairs: c.pairs, histogram: s.entries_of_rank(2) }
    }
}

pub fn rank2_multiplicity(code: &LinearCode, cons: &Constellation, budget: u128) -> Result<Rank2Multiplicity> {
    Ok(Rank2Multiplicity::from_spectrum(&spectrum(code, cons, 2, budget)?))
}

/// The `(r, δ, A(r, δ))` table, by rank then `δ`.
pub fn union_bound_terms(s: &Spectrum) -> Vec<SpectrumEntry> {
    s.bins
        .iter()
        .map(|(k, c)| SpectrumEntry { r: k.rank as usize, delta: k.delta(), count: c.vectors, pairs: c.pairs })
        .collect()
}

/// `det(E)` for an explicit difference matrix, through LU.
pub fn det_of_difference(dx: &CMat) -> f64 {
    determinant(&dx.mul(&dx.adjoint())).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{substream, StreamKind};
    use crate::codebook::{catalog, make_alamouti, make_alamouti_unchecked, make_quasi_orthogonal};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn difference_set_sizes() {
        for (m, n) in [(4, 9), (16, 49), (64, 225)] {
            let d = difference_set(&Constellation::qam(m).unwrap());
            assert_eq!(d.len(), n);
            assert_eq!(d[0], c(0.0, 0.0));
        }
        let d4 = difference_set(&Constellation::qam(4).unwrap());
        for want in [c(2.0, 0.0), c(-2.0, 2.0), c(0.0, -2.0)] {
            assert!(d4.contains(&want));
        }
    }

    #[test]
    fn difference_set_is_exactly_pairwise_differences() {
        let cons = Constellation::qam(16).unwrap();
        let mut brute: Vec<(i64, i64)> = Vec::new();
        for p in cons.points() {
            for q in cons.points() {
                let d = (((p - q).re) as i64, ((p - q).im) as i64);
                if !brute.contains(&d) {
                    brute.push(d);
                }
            }
        }
        let mut ours: Vec<(i64, i64)> = difference_set(&cons).iter().map(|d| (d.re as i64, d.im as i64)).collect();
        brute.sort();
        ours.sort();
        assert_eq!(brute, ours);
    }

    #[test]
    fn alamouti_distance() {
        assert!(make_alamouti(c(1.0, 0.0), c(1.0, 0.0)).is_err());
        let code = make_alamouti_unchecked(c(1.0, 0.0), c(1.0, 0.0));
        let d = codeword_distance(&code, &[c(2.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(d.rank, 2);
        assert!((d.delta - 16.0).abs() < 1e-12);
        assert!((d.det - 16.0).abs() < 1e-12);
        assert_eq!(codeword_distance(&code, &[c(0.0, 0.0); 2]).unwrap_err(), Error::ZeroDifference);
    }

    #[test]
    fn golden_min_det() {
        let golden = catalog::by_name("golden").unwrap();
        let qam4 = Constellation::qam(4).unwrap();
        let s = spectrum(&golden, &qam4, 2, DEFAULT_SPECTRUM_BUDGET).unwrap();
        assert!((s.min_det - 3.2).abs() < 1e-9);
        assert_eq!(s.vectors, 9u64.pow(4) - 1);
        assert_eq!(s.count_rank(1).vectors, 0);
        let e = DiffEnumerator::new(&golden, &qam4);
        let witness = e.vector(&s.min_det_witness);
        let d = codeword_distance(&golden, &witness).unwrap();
        assert!((d.det - 3.2).abs() < 1e-9);
        assert!((det_of_difference(&golden.encode(&witness).unwrap()) - 3.2).abs() < 1e-9);
        let table = union_bound_terms(&s);
        assert!((table[0].delta - 3.2).abs() < 1e-9);
        assert_eq!(table.iter().map(|t| t.count).sum::<u64>(), s.vectors);
    }

    #[test]
    fn quasi_orthogonal_has_rank_two_events() {
        let qo = make_quasi_orthogonal();
        let qam4 = Constellation::qam(4).unwrap();
        let s = spectrum(&qo, &qam4, 3, DEFAULT_SPECTRUM_BUDGET).unwrap();
        assert!(s.count_rank(2).vectors > 0);
        assert_eq!(s.count_rank(1).vectors, 0);
        assert_eq!(s.min_det, 0.0);
    }

    #[test]
    fn new_code_rank2_total() {
        // only the quasi-orthogonal block produces rank-2 events, so the
        // count can be checked on that block alone
        let qo = make_quasi_orthogonal();
        let qam4 = Constellation::qam(4).unwrap();
        let r = rank2_multiplicity(&qo, &qam4, DEFAULT_SPECTRUM_BUDGET).unwrap();
        assert_eq!(r.total, 160);
        let hist: Vec<(f64, u64)> = r.histogram.iter().map(|e| (e.delta, e.count)).collect();
        assert_eq!(hist, [(256.0, 16), (1024.0, 48), (2304.0, 64), (4096.0, 32)]);
    }

    #[test]
    fn chunking_is_partition() {
        let golden = catalog::by_name("golden").unwrap();
        let qam4 = Constellation::qam(4).unwrap();
        let e = DiffEnumerator::new(&golden, &qam4);
        let whole = spectrum(&golden, &qam4, 2, DEFAULT_SPECTRUM_BUDGET).unwrap();
        for prefix in [0, 2, 4] {
            let mut merged = Spectrum::empty(2);
            for chunk in (0..e.chunk_count(prefix)).rev() {
                merged.merge(&e.spectrum_chunk(prefix, chunk, 2));
            }
            assert_eq!(merged, whole, "prefix {prefix}");
        }
    }

    #[test]
    fn low_weight_enumeration_counts() {
        let code = catalog::by_name("new4x2-4qam").unwrap();
        let e = DiffEnumerator::new(&code, &Constellation::qam(4).unwrap());
        let mut n = 0u64;
        let mut first = Vec::new();
        e.for_each_low_weight(2, |idx, _| {
            n += 1;
            if first.is_empty() {
                first = idx.to_vec();
            }
        });
        assert_eq!(n, 8 * 8 + 28 * 64);
        assert_eq!(first, [1, 0, 0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn pair_convention_weights() {
        // a single 4-QAM difference of ±2 in one coordinate arises from 2 pairs per dimension
        let alamouti = catalog::by_name("alamouti").unwrap();
        let qam4 = Constellation::qam(4).unwrap();
        let s = spectrum(&alamouti, &qam4, 2, DEFAULT_SPECTRUM_BUDGET).unwrap();
        let total: u128 = s.bins.values().map(|c| c.pairs).sum();
        // every ordered pair of distinct codewords
        assert_eq!(total, 16 * 16 - 16);
    }

    #[test]
    fn delta_key_collides_on_rounding_noise() {
        let a = DeltaKey::new(2, 3.2);
        let b = DeltaKey::new(2, 3.2 * (1.0 + 1e-12));
        let c2 = DeltaKey::new(2, 3.2000001);
        assert_eq!(a, b);
        assert_ne!(a, c2);
        assert!((a.delta() - 3.2).abs() < 1e-12);
        assert_eq!(DeltaKey::new(2, 9.9999999999).delta(), 10.0);
        assert!(DeltaKey::new(2, 0.5) < DeltaKey::new(2, 4.0));
    }

    #[test]
    fn sampling_is_reproducible() {
        let golden = catalog::by_name("golden").unwrap();
        let e = DiffEnumerator::new(&golden, &Constellation::qam(64).unwrap());
        let a = e.sample(&mut substream(5, StreamKind::Sampling, 0), 1000, 1);
        let b = e.sample(&mut substream(5, StreamKind::Sampling, 0), 1000, 1);
        assert_eq!(a, b);
        assert_eq!(a.vectors, 1000);
        assert!(a.min_det >= 3.2 - 1e-9);
    }

    fn arb_diff() -> impl Strategy<Value = C64> {
        (-3i32..=3, -3i32..=3).prop_map(|(a, b)| C64::new(2.0 * a as f64, 2.0 * b as f64))
    }

    proptest! {
        #[test]
        fn distance_matrix_is_psd(ds in proptest::collection::vec(arb_diff(), 8), which in 0usize..4) {
            prop_assume!(ds.iter().any(|d| d.norm_sqr() > 0.0));
            let names = ["golden", "family1", "family2", "new4x2-4qam"];
            let code = catalog::by_name(names[which]).unwrap();
            let ds = &ds[..code.kappa()];
            prop_assume!(ds.iter().any(|d| d.norm_sqr() > 0.0));
            let dx = code.encode(ds).unwrap();
            let e = dx.mul(&dx.adjoint());
            let ev = hermitian_eigenvalues(&e);
            let l_max = ev[ev.len() - 1];
            prop_assert!(ev[0] >= -1e-9 * l_max);
            let d = codeword_distance(&code, ds).unwrap();
            prop_assert!(d.det >= 0.0);
            prop_assert!(d.rank >= 1 && d.rank <= code.n_t());
            if d.rank == code.n_t() {
                prop_assert!((d.det - determinant(&e).re).abs() <= 1e-9 * d.det.max(1.0));
            }
        }

        #[test]
        fn doubling_scales_det(ds in proptest::collection::vec(arb_diff(), 4), which in 0usize..3) {
            prop_assume!(ds.iter().any(|d| d.norm_sqr() > 0.0));
            let code = catalog::by_name(["golden", "family1", "family2"][which]).unwrap();
            let d1 = codeword_distance(&code, &ds).unwrap();
            let doubled: Vec<C64> = ds.iter().map(|d| d * 2.0).collect();
            let d2 = codeword_distance(&code, &doubled).unwrap();
            prop_assert_eq!(d1.rank, d2.rank);
            if d1.rank == 2 {
                prop_assert!((d2.det - 16.0 * d1.det).abs() <= 1e-9 * d2.det);
            }
        }

        #[test]
        fn negation_symmetry(ds in proptest::collection::vec(arb_diff(), 8), which in 0usize..4) {
            let names = ["golden", "family1", "family2", "new4x2-4qam"];
            let code = catalog::by_name(names[which]).unwrap();
            let ds = &ds[..code.kappa()];
            prop_assume!(ds.iter().any(|d| d.norm_sqr() > 0.0));
            let neg: Vec<C64> = ds.iter().map(|d| -d).collect();
            let (a, b) = (codeword_distance(&code, ds).unwrap(), codeword_distance(&code, &neg).unwrap());
            prop_assert_eq!(a.rank, b.rank);
            prop_assert_eq!(DeltaKey::new(a.rank, a.delta), DeltaKey::new(b.rank, b.delta));
        }
    }
}

//! Maximum-likelihood detection.
//!
//! All detectors return the same answer: the symbol vector minimizing
//! `m(X) = ‖Y − H X‖²_F`, with ties broken towards the lexicographically
//! smallest vector of constellation indices. They differ in how much of
//! the search space they touch, which [`DecodeResult`] records.
//!
//! The fast and sphere decoders work on the triangular system obtained from
//! the Gram–Schmidt QR of the equivalent channel `F` (see
//! [`EquivChannel`]). When the code is complex linear after conjugating some
//! time slots (every Alamouti-based and quasi-orthogonal code), `F` is the
//! `n_r T × κ` complex matrix whose rows for conjugated slots use `H*`.
//! Otherwise the `2 n_r T × 2κ` real equivalent channel is used and each
//! QAM symbol occupies two PAM levels of the tree.

mod exhaustive;
mod tree;

use alloc::vec::Vec;

pub use exhaustive::{ml_exhaustive, ml_metric, DEFAULT_EXHAUSTIVE_BUDGET};
pub use tree::{fast_decode, sphere_decode, RadiusPolicy};

#[allow(unused_imports)]
use num_traits::Float;

use crate::codebook::LinearCode;
use crate::numerics::{check_mat, gram_schmidt_qr, norm, tilde_vec, vec, CMat, QrFactors, RMat, DEFAULT_NORM_FLOOR, ZERO_REL_TOL};
use crate::{Error, Result, C64};

/// Outcome of one ML decoding.
#[derive(Clone, Debug, PartialEq)]
pub struct DecodeResult {
    /// Constellation index of each of the `κ` symbols.
    pub s_hat: Vec<usize>,
    /// `‖Y − H X̂‖²_F`, evaluated directly on the decoded codeword.
    pub metric: f64,
    /// Values of the ML metric computed: full metrics for exhaustive search,
    /// `k'M` per tail vector for the fast decoder, leaves for the sphere
    /// decoder.
    pub metric_evals: u64,
    /// Partial-metric (tree node) computations.
    pub nodes_visited: u64,
}

/// Which linearization the equivalent channel uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    /// `κ` complex columns, QAM alphabet per level.
    Complex,
    /// `2κ` real columns, PAM alphabet per level.
    Real,
}

/// Channel-dependent linear map from symbols to the received vector.
#[derive(Clone, Debug)]
pub struct EquivChannel {
    /// Complex `F` (rows of conjugated slots conjugated), or the real `𝔽`
    /// embedded with zero imaginary parts in the [`Domain::Real`] case.
    pub f: CMat,
    /// `𝔽 = diag(check H, ..., check H) · G_real`.
    pub f_real: RMat,
    pub domain: Domain,
    /// Time slots whose received samples are conjugated (complex domain).
    pub conj_slots: Vec<bool>,
    pub n_r: usize,
    pub qr: QrFactors,
    /// Number of leading tree levels that decouple (0 when none do).
    pub k_prime: usize,
}

impl EquivChannel {
    /// Tree levels: `κ` (complex) or `2κ` (real).
    pub fn levels(&self) -> usize {
        self.f.cols()
    }

    /// Received matrix rearranged so that `r = F s + noise`.
    pub fn received_vector(&self, y: &CMat) -> Vec<C64> {
        match self.domain {
            Domain::Complex => {
                let mut v = vec(y);
                for (slot, &c) in self.conj_slots.iter().enumerate() {
                    if c {
                        for z in &mut v[slot * self.n_r..(slot + 1) * self.n_r] {
                            *z = z.conj();
                        }
                    }
                }
                v
            }
            Domain::Real => tilde_vec(&vec(y)).into_iter().map(|x| C64::new(x, 0.0)).collect(),
        }
    }
}

fn real_equivalent(h: &CMat, code: &LinearCode) -> RMat {
    let hc = check_mat(h);
    let g = code.real_gen();
    let (nr2, nt2) = (hc.rows(), hc.cols());
    let mut out = RMat::zeros(nr2 * code.t(), g.cols());
    for slot in 0..code.t() {
        for i in 0..nr2 {
            for c in 0..g.cols() {
                let mut acc = 0.0;
                for k in 0..nt2 {
                    acc += hc[(i, k)] * g[(slot * nt2 + k, c)];
                }
                out[(slot * nr2 + i, c)] = acc;
            }
        }
    }
    out
}

/// Builds `F`, its QR factors and the fast-decodable level count `k'`.
pub fn equivalent_channel(h: &CMat, code: &LinearCode) -> Result<EquivChannel> {
    if h.cols() != code.n_t() {
        return Err(Error::DimensionMismatch { expected: code.n_t(), got: h.cols() });
    }
    let n_r = h.rows();
    let f_real = real_equivalent(h, code);
    let (f, domain, conj_slots) = match code.complex_form() {
        Some(form) => {
            let hc = h.conj();
            let mut f = CMat::zeros(n_r * code.t(), code.kappa());
            for slot in 0..code.t() {
                let hs = if form.conj_slots[slot] { &hc } else { h };
                for i in 0..n_r {
                    for l in 0..code.kappa() {
                        let mut acc = C64::new(0.0, 0.0);
                        for k in 0..code.n_t() {
                            acc += hs[(i, k)] * form.g[(slot * code.n_t() + k, l)];
                        }
                        f[(slot * n_r + i, l)] = acc;
                    }
                }
            }
            (f, Domain::Complex, form.conj_slots.clone())
        }
        None => (f_real.to_complex(), Domain::Real, alloc::vec![false; code.t()]),
    };
    let qr = gram_schmidt_qr(&f, DEFAULT_NORM_FLOOR)?;
    let k_prime = detect_fast_structure(&qr, ZERO_REL_TOL);
    Ok(EquivChannel { f, f_real, domain, conj_slots, n_r, qr, k_prime })
}

/// `F^(*)` of a 2×2 Alamouti-structured code: the equivalent channel after
/// conjugating the second time slot.
pub fn conjugated_equivalent(h: &CMat, code: &LinearCode) -> Result<CMat> {
    let ok = code.n_t() == 2
        && code.t() == 2
        && code.kappa() == 2
        && code.complex_form().is_some_and(|f| f.conj_slots == [false, true]);
    if !ok {
        return Err(Error::WrongStructure("expected a 2x2 Alamouti-structured code".into()));
    }
    Ok(equivalent_channel(h, code)?.f)
}

/// Largest `k'` such that `<f_j, e_i> = 0` for all `i < j ≤ k'`, judged by
/// `|R[i][j]| < rel_tol ‖f_j‖`. Returns 0 when `<f_2, e_1> ≠ 0`.
pub fn detect_fast_structure(qr: &QrFactors, rel_tol: f64) -> usize {
    let k = qr.r.cols();
    let col_norm = |j: usize| norm(&qr.r.column(j));
    let mut kp = 1;
    'outer: for j in 1..k {
        let nj = col_norm(j);
        for i in 0..j {
            if qr.r[(i, j)].norm() >= rel_tol * nj {
                break 'outer;
            }
        }
        kp = j + 1;
    }
    if kp < 2 {
        0
    } else {
        kp
    }
}

/// Symbol order maximizing `k'` for the channel `h`: exhaustive over all
/// `κ!` orders when `κ ≤ 4`, otherwise greedy pairwise swaps starting from
/// the natural order. Returns the order (a permutation of `0..κ`) and its
/// `k'`.
pub fn best_symbol_order(h: &CMat, code: &LinearCode) -> Result<(Vec<usize>, usize)> {
    let kappa = code.kappa();
    let eval = |perm: &[usize]| -> Result<usize> {
        Ok(equivalent_channel(h, &code.permuted(perm)?)?.k_prime)
    };
    let mut best: Vec<usize> = (0..kappa).collect();
    let mut best_k = eval(&best)?;
    if kappa <= 4 {
        let mut perm = best.clone();
        while next_permutation(&mut perm) {
            let k = eval(&perm)?;
            if k > best_k {
                best_k = k;
                best = perm.clone();
            }
        }
    } else {
        let mut improved = true;
        while improved {
            improved = false;
            for i in 0..kappa {
                for j in i + 1..kappa {
                    let mut cand = best.clone();
                    cand.swap(i, j);
                    let k = eval(&cand)?;
                    if k > best_k {
                        best_k = k;
                        best = cand;
                        improved = true;
                    }
                }
            }
        }
    }
    Ok((best, best_k))
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let Some(i) = (0..n - 1).rev().find(|&i| p[i] < p[i + 1]) else {
        return false;
    };
    let j = (i + 1..n).rev().find(|&j| p[j] > p[i]).unwrap();
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

/// Tolerance below which two metrics count as equal for tie-breaking.
pub(crate) fn tie_tolerance(y_energy: f64) -> f64 {
    1e-10 * (1.0 + y_energy)
}

/// `(metric, indices)` is preferred over the incumbent.
#[inline]
pub(crate) fn better(metric: f64, idx: &[usize], best_metric: f64, best_idx: &[usize], tol: f64) -> bool {
    if metric < best_metric - tol {
        true
    } else if metric <= best_metric + tol {
        best_idx.is_empty() || idx < best_idx
    } else {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_channel, substream, StreamKind};
    use crate::codebook::{catalog, make_alamouti, make_family2, LinearCode};
    use crate::numerics::inner;

    fn half() -> C64 {
        C64::new(1.0 / 2f64.sqrt(), 0.0)
    }

    #[test]
    fn identity_channel_gives_generator() {
        let golden = catalog::by_name("golden").unwrap();
        let eq = equivalent_channel(&CMat::identity(2), &golden).unwrap();
        assert_eq!(eq.domain, Domain::Complex);
        assert!(eq.f.max_abs_diff(golden.complex_gen().unwrap()) < 1e-15);
        assert!(check_mat(&eq.f).max_abs_diff(&eq.f_real) < 1e-12);
    }

    #[test]
    fn noiseless_model_holds() {
        for name in ["family1", "family2", "golden", "new4x2-4qam"] {
            let code = catalog::by_name(name).unwrap();
            for t in 0..100 {
                let h = sample_channel(2, code.n_t(), &mut substream(3, StreamKind::Channel, t));
                let eq = equivalent_channel(&h, &code).unwrap();
                let mut rng = substream(3, StreamKind::Data, t);
                let s: Vec<C64> = (0..code.kappa()).map(|_| crate::channel::complex_gaussian(&mut rng, 2.0)).collect();
                let y = h.mul(&code.encode(&s).unwrap());
                let r = eq.received_vector(&y);
                let fs = eq.f.mul_vec(&s);
                let err = r.iter().zip(&fs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                assert!(err < 1e-12, "{name}: {err}");
            }
        }
    }

    #[test]
    fn columns_are_vec_of_h_times_dispersion() {
        let code = catalog::by_name("golden").unwrap();
        let h = sample_channel(2, 2, &mut substream(4, StreamKind::Channel, 0));
        let eq = equivalent_channel(&h, &code).unwrap();
        for l in 0..4 {
            let want = vec(&h.mul(&code.disp_a()[l]));
            let got = eq.f.column(l);
            assert!(want.iter().zip(&got).all(|(a, b)| (a - b).norm() < 1e-14));
        }
    }

    #[test]
    fn alamouti_matched_filter() {
        let code = make_alamouti(half(), half()).unwrap();
        for t in 0..50 {
            let h = sample_channel(2, 2, &mut substream(5, StreamKind::Channel, t));
            let f = conjugated_equivalent(&h, &code).unwrap();
            let gain: f64 = h.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>() * 0.5;
            let want = CMat::identity(2).scale(C64::new(gain, 0.0));
            assert!(f.adjoint().mul(&f).max_abs_diff(&want) < 1e-12);
            assert!(inner(&f.column(0), &f.column(1)).norm() < 1e-12);
        }
    }

    #[test]
    fn alamouti_conjugated_matrix_entries() {
        let code = make_alamouti(half(), half()).unwrap();
        let h = CMat::from_fn(2, 2, |i, j| C64::new(1.0 + i as f64, 0.5 * j as f64 - 0.25));
        let f = conjugated_equivalent(&h, &code).unwrap();
        let (a, b) = (half(), half());
        let want = CMat::from_rows(&[
            [a * h[(0, 0)], a * h[(0, 1)]],
            [a * h[(1, 0)], a * h[(1, 1)]],
            [b.conj() * h[(0, 1)].conj(), -b.conj() * h[(0, 0)].conj()],
            [b.conj() * h[(1, 1)].conj(), -b.conj() * h[(1, 0)].conj()],
        ]);
        assert!(f.max_abs_diff(&want) < 1e-15);
        assert!(matches!(
            conjugated_equivalent(&h, &catalog::by_name("golden").unwrap()),
            Err(Error::WrongStructure(_))
        ));
    }

    #[test]
    fn fast_structure_by_code() {
        for (name, want) in [("family1", 2), ("family2", 2), ("new4x2-4qam", 2), ("golden", 0)] {
            let code = catalog::by_name(name).unwrap();
            for t in 0..100 {
                let h = sample_channel(2, code.n_t(), &mut substream(6, StreamKind::Channel, t));
                assert_eq!(equivalent_channel(&h, &code).unwrap().k_prime, want, "{name}");
            }
        }
    }

    #[test]
    fn perturbed_first_block_loses_orthogonality() {
        // X12 = [[s1, -0.8 s2*], [s2, s1*]] + generic second block: not Alamouti
        let (_, _, a34, b34) = catalog::family2_coeffs();
        let reference = make_family2(half(), half(), a34, b34).unwrap();
        let code = LinearCode::from_encoder("perturbed", 4, |s| {
            let x = reference.encode(s).unwrap();
            let mut d = x.clone();
            d[(0, 1)] += half() * 0.2 * s[1].conj();
            d
        })
        .unwrap();
        for t in 0..20 {
            let h = sample_channel(2, 2, &mut substream(7, StreamKind::Channel, t));
            let eq = equivalent_channel(&h, &code).unwrap();
            let f2 = norm(&eq.f.column(1));
            assert!(eq.qr.r[(0, 1)].norm() > 1e-6 * f2);
            assert_eq!(eq.k_prime, 0);
        }
    }

    #[test]
    fn real_domain_for_mixed_codes() {
        let code = LinearCode::from_encoder("mixed", 2, |s| {
            CMat::from_rows(&[[s[0] + s[1].conj() * 0.3, s[1]], [C64::new(s[0].re, 0.0), s[0] - s[1]]])
        })
        .unwrap();
        let h = sample_channel(2, 2, &mut substream(8, StreamKind::Channel, 0));
        let eq = equivalent_channel(&h, &code).unwrap();
        assert_eq!(eq.domain, Domain::Real);
        assert_eq!(eq.levels(), 4);
    }

    #[test]
    fn symbol_order_search() {
        let code = catalog::by_name("family1").unwrap();
        let h = sample_channel(2, 2, &mut substream(9, StreamKind::Channel, 0));
        let (perm, k) = best_symbol_order(&h, &code).unwrap();
        assert_eq!(k, 2);
        assert_eq!(perm.len(), 4);
        let mut p = [0, 1, 2];
        let mut n = 1;
        while next_permutation(&mut p) {
            n += 1;
        }
        assert_eq!(n, 6);
    }
}

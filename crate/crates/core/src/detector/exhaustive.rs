use alloc::vec::Vec;

use super::{better, tie_tolerance, DecodeResult};
use crate::codebook::{Constellation, LinearCode};
use crate::numerics::CMat;
use crate::{Error, Result, C64};

/// Default cap on `M^κ` for [`ml_exhaustive`].
pub const DEFAULT_EXHAUSTIVE_BUDGET: u128 = 1_000_000;

/// `‖Y − H X‖²_F` for the codeword of the given constellation indices.
pub fn ml_metric(y: &CMat, h: &CMat, code: &LinearCode, cons: &Constellation, s_idx: &[usize]) -> Result<f64> {
    let s: Vec<C64> = s_idx.iter().map(|&i| cons.point(i)).collect();
    let x = code.encode(&s)?;
    if h.cols() != x.rows() {
        return Err(Error::DimensionMismatch { expected: x.rows(), got: h.cols() });
    }
    Ok(y.sub(&h.mul(&x)).frobenius_norm_sqr())
}

/// Brute-force ML over all `M^κ` codewords, in lexicographic order of the
/// index vector.
pub fn ml_exhaustive(y: &CMat, h: &CMat, code: &LinearCode, cons: &Constellation, budget: u128) -> Result<DecodeResult> {
    let (kappa, m) = (code.kappa(), cons.m());
    let required = (m as u128).checked_pow(kappa as u32).unwrap_or(u128::MAX);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    if h.cols() != code.n_t() {
        return Err(Error::DimensionMismatch { expected: code.n_t(), got: h.cols() });
    }
    if y.rows() != h.rows() || y.cols() != code.t() {
        return Err(Error::DimensionMismatch { expected: h.rows() * code.t(), got: y.rows() * y.cols() });
    }
    // H X_ℓ(p) for every symbol position and constellation point
    let contrib: Vec<Vec<CMat>> = (0..kappa)
        .map(|l| {
            let (ha, hb) = (h.mul(&code.disp_a()[l]), h.mul(&code.disp_b()[l]));
            cons.points()
                .iter()
                .map(|p| {
                    let mut c = ha.scale(C64::new(p.re, 0.0));
                    c.add_scaled(&hb, C64::new(0.0, p.im));
                    c
                })
                .collect()
        })
        .collect();

    // partial[d] = Y − Σ_{ℓ<d} H X_ℓ
    let mut partial: Vec<CMat> = alloc::vec![y.clone(); kappa + 1];
    let mut idx = alloc::vec![0usize; kappa];
    let tol = tie_tolerance(y.frobenius_norm_sqr());
    let (mut best, mut best_idx) = (f64::INFINITY, Vec::new());
    let mut evals = 0u64;
    let mut depth = 0;
    loop {
        for d in depth..kappa {
            let next = partial[d].sub(&contrib[d][idx[d]]);
            partial[d + 1] = next;
        }
        let metric = partial[kappa].frobenius_norm_sqr();
        evals += 1;
        if better(metric, &idx, best, &best_idx, tol) {
            best = metric;
            best_idx.clone_from(&idx);
        }
        // odometer, last symbol fastest
        let mut d = kappa;
        loop {
            if d == 0 {
                let metric = ml_metric(y, h, code, cons, &best_idx)?;
                return Ok(DecodeResult { s_hat: best_idx, metric, metric_evals: evals, nodes_visited: evals });
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < m {
                break;
            }
            idx[d] = 0;
        }
        depth = d;
    }
}

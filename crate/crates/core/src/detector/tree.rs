//! Depth-first searches over the triangular system `‖z − R x‖²`.

use alloc::vec::Vec;

use super::{better, equivalent_channel, exhaustive::ml_metric, tie_tolerance, DecodeResult, Domain, EquivChannel};
use crate::codebook::{Constellation, LinearCode};
use crate::numerics::CMat;
use crate::{Error, Result, C64};

/// Initial sphere radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RadiusPolicy {
    /// Start unbounded; the first leaf reached sets the radius.
    Infinite,
    /// Start at the metric of the successive-interference-cancellation point.
    Babai,
    /// Start at the given value of `‖Y − HX‖²`, doubling it until a leaf is
    /// found.
    Fixed(f64),
}

struct Tree<'a> {
    r: &'a CMat,
    z: Vec<C64>,
    alphabet: Vec<C64>,
    levels: usize,
    tol: f64,
    /// `‖r‖² − ‖z‖²`, the part of the metric outside the span of `F`.
    offset: f64,
}

struct Search {
    x: Vec<usize>,
    best: f64,
    best_x: Vec<usize>,
    radius: f64,
    evals: u64,
    nodes: u64,
}

impl<'a> Tree<'a> {
    fn new(eq: &'a EquivChannel, y: &CMat, cons: &Constellation) -> Self {
        let r_vec = eq.received_vector(y);
        let z = eq.qr.q.adjoint().mul_vec(&r_vec);
        let r_energy = r_vec.iter().map(|v| v.norm_sqr()).sum::<f64>();
        let offset = (r_energy - z.iter().map(|v| v.norm_sqr()).sum::<f64>()).max(0.0);
        let alphabet = match eq.domain {
            Domain::Complex => cons.points().to_vec(),
            Domain::Real => cons.pam().into_iter().map(|v| C64::new(v, 0.0)).collect(),
        };
        Tree { r: &eq.qr.r, z, alphabet, levels: eq.levels(), tol: tie_tolerance(r_energy), offset }
    }

    /// `z_i − Σ_{j>i} R_ij x_j` for the already-fixed levels above `i`.
    fn residual(&self, i: usize, x: &[usize]) -> C64 {
        let mut b = self.z[i];
        for j in i + 1..self.levels {
            b -= self.r[(i, j)] * self.alphabet[x[j]];
        }
        b
    }

    fn increment(&self, i: usize, b: C64, p: usize) -> f64 {
        (b - self.r[(i, i)] * self.alphabet[p]).norm_sqr()
    }

    fn nearest(&self, i: usize, b: C64) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for p in 0..self.alphabet.len() {
            let inc = self.increment(i, b, p);
            if inc < best.1 {
                best = (p, inc);
            }
        }
        best
    }

    fn to_qam(&self, eq: &EquivChannel, cons: &Constellation, x: &[usize]) -> Vec<usize> {
        match eq.domain {
            Domain::Complex => x.to_vec(),
            Domain::Real => x.chunks(2).map(|c| cons.join_index(c[0], c[1])).collect(),
        }
    }

    /// Full enumeration of levels `kp..L`, closed-form slicing of `0..kp`.
    fn fast(&self, remaining: usize, kp: usize, partial: f64, st: &mut Search) {
        if remaining == kp {
            let mut metric = partial;
            for i in 0..kp {
                let b = self.residual(i, &st.x);
                let (p, inc) = self.nearest(i, b);
                st.x[i] = p;
                metric += inc;
            }
            st.evals += (kp * self.alphabet.len()) as u64;
            if better(metric, &st.x, st.best, &st.best_x, self.tol) {
                st.best = metric;
                st.best_x.clone_from(&st.x);
            }
            return;
        }
        let i = remaining - 1;
        let b = self.residual(i, &st.x);
        for p in 0..self.alphabet.len() {
            st.nodes += 1;
            st.x[i] = p;
            self.fast(i, kp, partial + self.increment(i, b, p), st);
        }
    }

    /// Schnorr–Euchner enumeration with the current radius.
    fn sphere(&self, remaining: usize, partial: f64, st: &mut Search) {
        if remaining == 0 {
            st.evals += 1;
            if better(partial, &st.x, st.best, &st.best_x, self.tol) {
                st.best = partial;
                st.best_x.clone_from(&st.x);
                st.radius = st.radius.min(partial);
            }
            return;
        }
        let i = remaining - 1;
        let b = self.residual(i, &st.x);
        let mut order: Vec<(f64, usize)> =
            (0..self.alphabet.len()).map(|p| (self.increment(i, b, p), p)).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (inc, p) in order {
            if partial + inc > st.radius + self.tol {
                break;
            }
            st.nodes += 1;
            st.x[i] = p;
            self.sphere(i, partial + inc, st);
        }
    }

    fn babai_metric(&self) -> f64 {
        let mut x = alloc::vec![0; self.levels];
        let mut metric = 0.0;
        for i in (0..self.levels).rev() {
            let b = self.residual(i, &x);
            let (p, inc) = self.nearest(i, b);
            x[i] = p;
            metric += inc;
        }
        metric
    }
}

fn new_search(levels: usize, radius: f64) -> Search {
    Search { x: alloc::vec![0; levels], best: f64::INFINITY, best_x: Vec::new(), radius, evals: 0, nodes: 0 }
}

/// ML decoding exploiting `k'`-group decodability: enumerates the
/// `M^(κ−k')` tails and slices each of the `k'` leading symbols in closed
/// form given the tail.
pub fn fast_decode(y: &CMat, h: &CMat, code: &LinearCode, cons: &Constellation) -> Result<DecodeResult> {
    let eq = equivalent_channel(h, code)?;
    if eq.k_prime == 0 {
        return Err(Error::NotFastDecodable);
    }
    let tree = Tree::new(&eq, y, cons);
    let mut st = new_search(tree.levels, f64::INFINITY);
    tree.fast(tree.levels, eq.k_prime, 0.0, &mut st);
    let s_hat = tree.to_qam(&eq, cons, &st.best_x);
    let metric = ml_metric(y, h, code, cons, &s_hat)?;
    Ok(DecodeResult { s_hat, metric, metric_evals: st.evals, nodes_visited: st.nodes })
}

/// Sphere decoding over the finite alphabet. Exact ML: pruning only removes
/// branches whose partial metric already exceeds the best complete one.
pub fn sphere_decode(
    y: &CMat,
    h: &CMat,
    code: &LinearCode,
    cons: &Constellation,
    policy: RadiusPolicy,
) -> Result<DecodeResult> {
    let eq = equivalent_channel(h, code)?;
    let tree = Tree::new(&eq, y, cons);
    let mut radius = match policy {
        RadiusPolicy::Infinite => f64::INFINITY,
        RadiusPolicy::Babai => tree.babai_metric(),
        RadiusPolicy::Fixed(r) if r > 0.0 && r.is_finite() => r - tree.offset,
        RadiusPolicy::Fixed(r) => return Err(Error::OutOfRange(alloc::format!("sphere radius {r}"))),
    };
    let (mut evals, mut nodes) = (0, 0);
    loop {
        let mut st = new_search(tree.levels, radius);
        tree.sphere(tree.levels, 0.0, &mut st);
        evals += st.evals;
        nodes += st.nodes;
        if !st.best_x.is_empty() {
            let s_hat = tree.to_qam(&eq, cons, &st.best_x);
            let metric = ml_metric(y, h, code, cons, &s_hat)?;
            return Ok(DecodeResult { s_hat, metric, metric_evals: evals, nodes_visited: nodes });
        }
        radius = 2.0 * (radius + tree.offset) - tree.offset;
        if radius <= 0.0 {
            radius = tree.offset.max(1.0);
        }
    }
}

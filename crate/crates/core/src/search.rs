//! Design searches: the DFT-phase matrix `U` of the 4×2 code, and the
//! coefficients of the two 2×2 families.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::codebook::{build_u_dft, make_family1, make_family2, make_new_4x2, Constellation, Family1Scaling, LinearCode};
use crate::par::{Executor, Sequential};
use crate::spectrum::{spectrum_with, DiffEnumerator, Rank2Multiplicity, SpectrumEntry};
use crate::{Error, Result, C64};

/// Largest `N` accepted by [`search_u`].
pub const MAX_N_CAP: u32 = 32;

/// One distinct `U`, with every exponent tuple in `{0..N}⁴` producing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UCandidate {
    pub n_exp: [u32; 4],
    pub aliases: Vec<[u32; 4]>,
}

/// All `(N+1)⁴` exponent tuples, collapsed to distinct matrices (exponents
/// `0` and `N` give the same phase). The representative of each class is
/// its smallest tuple.
pub fn u_candidates(n_cap: u32) -> Result<Vec<UCandidate>> {
    if n_cap == 0 || n_cap > MAX_N_CAP {
        return Err(Error::OutOfRange(alloc::format!("N = {n_cap} outside 1..={MAX_N_CAP}")));
    }
    let mut classes: BTreeMap<[u32; 4], Vec<[u32; 4]>> = BTreeMap::new();
    let r = n_cap + 1;
    for code in 0..r.pow(4) {
        let n = [code / (r * r * r), (code / (r * r)) % r, (code / r) % r, code % r];
        classes.entry(n.map(|x| x % n_cap)).or_default().push(n);
    }
    let mut out: Vec<UCandidate> = classes.into_values().map(|aliases| UCandidate { n_exp: aliases[0], aliases }).collect();
    out.sort_by_key(|c| c.n_exp);
    Ok(out)
}

pub fn new_4x2_for(n_cap: u32, n_exp: [u32; 4]) -> Result<LinearCode> {
    make_new_4x2(&build_u_dft(n_cap, n_exp)?)
}

/// Stage-1 score of a candidate, computed on low-weight differences.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScreenScore {
    /// Rank-2 events among the screened differences.
    pub rank2: u64,
    /// Smallest `det(E)` among the screened full-rank differences.
    pub min_full_det: f64,
}

impl ScreenScore {
    /// Fewer rank-2 events first, then larger coding gain.
    pub fn rank_cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.rank2.cmp(&other.rank2).then(other.min_full_det.total_cmp(&self.min_full_det))
    }
}

/// Scores a code on the differences with at most `max_weight` nonzero
/// symbols.
pub fn screen_objective(code: &LinearCode, cons: &Constellation, max_weight: usize) -> ScreenScore {
    let e = DiffEnumerator::new(code, cons);
    let mut score = ScreenScore { rank2: 0, min_full_det: f64::INFINITY };
    e.for_each_low_weight(max_weight, |_, d| {
        if d.rank == 2 {
            score.rank2 += 1;
        }
        if d.rank == code.n_t() {
            score.min_full_det = score.min_full_det.min(d.det);
        }
    });
    score
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScreenResult {
    pub candidate: UCandidate,
    pub score: ScreenScore,
}

/// Fully evaluated candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchRecord {
    pub n_cap: u32,
    pub n_exp: [u32; 4],
    pub aliases: Vec<[u32; 4]>,
    pub screen: ScreenScore,
    /// Evaluated because it was pinned rather than selected by the screen.
    pub pinned: bool,
    /// `Σ A(2, δ)` counting difference vectors.
    pub objective: u64,
    /// The same total counting ordered codeword pairs.
    pub objective_pairs: u128,
    pub histogram: Vec<SpectrumEntry>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub n_cap: u32,
    /// Differences with at most this many nonzero symbols are screened.
    pub screen_weight: usize,
    /// Candidates passed from the screen to the full count.
    pub screen_budget: usize,
    /// Cap on difference vectors per full count.
    pub full_budget: u128,
    /// Tuples always given the full count.
    pub pinned: Vec<[u32; 4]>,
}

impl SearchConfig {
    pub fn new(n_cap: u32) -> Self {
        SearchConfig {
            n_cap,
            screen_weight: 3,
            screen_budget: 8,
            full_budget: crate::spectrum::DEFAULT_SPECTRUM_BUDGET,
            pinned: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOutcome {
    /// Every distinct candidate, best screen score first (ties by tuple).
    pub screened: Vec<ScreenResult>,
    /// Stage-2 results, by objective then tuple.
    pub records: Vec<SearchRecord>,
}

/// Two-stage search over `U`. Stage 1 scores every distinct candidate on
/// low-weight differences; stage 2 runs the full rank-2 count on the
/// `screen_budget` best plus the pinned tuples.
pub fn search_u_with<E: Executor>(exec: &E, cfg: &SearchConfig, cons: &Constellation) -> Result<SearchOutcome> {
    let n_cap = cfg.n_cap;
    let candidates = u_candidates(n_cap)?;
    for p in &cfg.pinned {
        if p.iter().any(|&x| x > n_cap) {
            return Err(Error::OutOfRange(alloc::format!("pinned tuple {p:?} exceeds N = {n_cap}")));
        }
    }
    let scores = exec.map(&candidates, |c| {
        new_4x2_for(n_cap, c.n_exp).map(|code| screen_objective(&code, cons, cfg.screen_weight))
    });
    let mut screened = Vec::with_capacity(candidates.len());
    for (candidate, score) in candidates.into_iter().zip(scores) {
        screened.push(ScreenResult { candidate, score: score? });
    }
    screened.sort_by(|a, b| a.score.rank_cmp(&b.score).then(a.candidate.n_exp.cmp(&b.candidate.n_exp)));

    let mut records = Vec::new();
    for (i, s) in screened.iter().enumerate() {
        let pinned = cfg.pinned.iter().any(|p| s.candidate.aliases.contains(p));
        if i >= cfg.screen_budget && !pinned {
            continue;
        }
        let code = new_4x2_for(n_cap, s.candidate.n_exp)?;
        let full = spectrum_with(exec, &code, cons, 2, cfg.full_budget)?;
        let m = Rank2Multiplicity::from_spectrum(&full);
        records.push(SearchRecord {
            n_cap,
            n_exp: s.candidate.n_exp,
            aliases: s.candidate.aliases.clone(),
            screen: s.score,
            pinned: i >= cfg.screen_budget,
            objective: m.total,
            objective_pairs: m.total_pairs,
            histogram: m.histogram,
        });
    }
    records.sort_by(|a, b| a.objective.cmp(&b.objective).then(a.n_exp.cmp(&b.n_exp)));
    Ok(SearchOutcome { screened, records })
}

pub fn search_u(cfg: &SearchConfig, cons: &Constellation) -> Result<SearchOutcome> {
    search_u_with(&Sequential, cfg, cons)
}

/// Minimizes `f` with the Nelder–Mead simplex method from `x0`, with initial
/// simplex edge `step`. Stops when every vertex is within `tol` of the best
/// one in each coordinate and their values agree to `tol`, or after
/// `max_evals` evaluations.
pub fn nelder_mead(f: impl Fn(&[f64]) -> f64, x0: &[f64], step: f64, tol: f64, max_evals: usize) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = f(&x);
        simplex.push((x, v));
    }
    let mut evals = n + 1;
    let point = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect() };
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = &simplex[0];
        let spread = simplex.iter().map(|(x, _)| x.iter().zip(&best.0).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)).fold(0.0, f64::max);
        if spread < tol && (simplex[n].1 - best.1).abs() < tol {
            break;
        }
        let centroid: Vec<f64> = (0..n).map(|i| simplex[..n].iter().map(|(x, _)| x[i]).sum::<f64>() / n as f64).collect();
        let worst = simplex[n].clone();
        let xr = point(&centroid, &worst.0, -1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < simplex[0].1 {
            let xe = point(&centroid, &worst.0, -2.0);
            let fe = f(&xe);
            evals += 1;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let x = point(&centroid, &xr, 0.5);
                let v = f(&x);
                (x, v)
            } else {
                let x = point(&centroid, &worst.0, 0.5);
                let v = f(&x);
                (x, v)
            };
            evals += 1;
            if fc < worst.1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let x0 = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    v.0 = point(&x0, &v.0, 0.5);
                    v.1 = f(&v.0);
                }
                evals += n;
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

/// Exact 4-QAM minimum determinant, the search objective.
fn min_det_qam4(code: &LinearCode) -> f64 {
    let cons = Constellation::qam(4).expect("4-QAM");
    DiffEnumerator::new(code, &cons).spectrum_chunk(0, 0, 0).min_det
}

/// Maximizes `objective` over a grid then polishes the best few grid points
/// with Nelder–Mead. `grid` lists the parameter vectors to try.
fn grid_then_polish<E: Executor>(
    exec: &E,
    grid: &[Vec<f64>],
    objective: impl Fn(&[f64]) -> f64 + Sync,
    step: f64,
) -> (Vec<f64>, f64) {
    const POLISHED: usize = 8;
    let values = exec.map(grid, |x| objective(x));
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let starts: Vec<usize> = order.into_iter().take(POLISHED).collect();
    let polished = exec.map(&starts, |&i| {
        let mut x = grid[i].clone();
        let mut v = values[i];
        let mut s = step;
        for _ in 0..3 {
            let (nx, nv) = nelder_mead(|p| -objective(p), &x, s, 1e-13, 4000);
            if -nv > v {
                x = nx;
                v = -nv;
            }
            s *= 0.1;
        }
        (x, v)
    });
    let mut best = (grid[starts[0]].clone(), f64::NEG_INFINITY);
    for (x, v) in polished {
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

/// Result of [`search_family1`].
#[derive(Clone, Debug, PartialEq)]
pub struct Family1Optimum {
    pub phi1: C64,
    pub phi2: C64,
    /// `(θ, φ_a, φ_b)` with `φ1 = cos θ e^{jφ_a}`, `φ2 = sin θ e^{jφ_b}`.
    pub params: [f64; 3],
    pub delta_min: f64,
}

pub fn family1_from_params(p: &[f64]) -> (C64, C64) {
    (C64::from_polar(p[0].cos(), p[1]), C64::from_polar(p[0].sin(), p[2]))
}

fn family1_objective(p: &[f64]) -> f64 {
    let (a, b) = family1_from_params(p);
    match make_family1(a, b, Family1Scaling::Normalized) {
        Ok(code) => min_det_qam4(&code),
        Err(_) => 0.0,
    }
}

/// Maximizes the 4-QAM minimum determinant of Family I (normalized
/// scaling) over `(θ, φ_a, φ_b)`: a `grid_density³` grid followed by
/// simplex polishing.
pub fn search_family1_with<E: Executor>(exec: &E, grid_density: usize) -> Family1Optimum {
    let g = grid_density.max(2);
    let tau = 2.0 * core::f64::consts::PI;
    let mut grid = Vec::with_capacity(g * g * g);
    for i in 0..g {
        let theta = (i as f64 + 0.5) / g as f64 * core::f64::consts::FRAC_PI_2;
        for j in 0..g {
            for k in 0..g {
                grid.push(alloc::vec![theta, j as f64 / g as f64 * tau, k as f64 / g as f64 * tau]);
            }
        }
    }
    let (p, delta_min) = grid_then_polish(exec, &grid, family1_objective, tau / g as f64 / 2.0);
    let (phi1, phi2) = family1_from_params(&p);
    Family1Optimum { phi1, phi2, params: [p[0], p[1], p[2]], delta_min }
}

pub fn search_family1(grid_density: usize) -> Family1Optimum {
    search_family1_with(&Sequential, grid_density)
}

/// Result of [`search_family2`].
#[derive(Clone, Debug, PartialEq)]
pub struct Family2Optimum {
    /// `(α12, β12, α34, β34)`.
    pub coeffs: [C64; 4],
    /// Phases of `α34` and `β34`.
    pub params: [f64; 2],
    pub delta_min: f64,
}

pub fn family2_from_params(p: &[f64]) -> [C64; 4] {
    let h = 1.0 / 2f64.sqrt();
    [C64::new(h, 0.0), C64::new(h, 0.0), C64::from_polar(h, p[0]), C64::from_polar(h, p[1])]
}

fn family2_objective(p: &[f64]) -> f64 {
    let [a, b, c, d] = family2_from_params(p);
    match make_family2(a, b, c, d) {
        Ok(code) => min_det_qam4(&code),
        Err(_) => 0.0,
    }
}

/// Maximizes the 4-QAM minimum determinant of Family II. A common phase of
/// all four coefficients and a phase applied to the second column leave the
/// spectrum unchanged, so `α12 = β12 = 1/√2` and only the phases of `α34`
/// and `β34` are searched (`grid_density²` grid, then simplex polishing).
pub fn search_family2_with<E: Executor>(exec: &E, grid_density: usize) -> Family2Optimum {
    let g = grid_density.max(2);
    let tau = 2.0 * core::f64::consts::PI;
    let mut grid = Vec::with_capacity(g * g);
    for j in 0..g {
        for k in 0..g {
            grid.push(alloc::vec![j as f64 / g as f64 * tau, k as f64 / g as f64 * tau]);
        }
    }
    let (p, delta_min) = grid_then_polish(exec, &grid, family2_objective, tau / g as f64 / 2.0);
    Family2Optimum { coeffs: family2_from_params(&p), params: [p[0], p[1]], delta_min }
}

pub fn search_family2(grid_density: usize) -> Family2Optimum {
    search_family2_with(&Sequential, grid_density)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::catalog;
    use crate::spectrum::{min_determinant, DEFAULT_SPECTRUM_BUDGET};

    #[test]
    fn n1_collapses_to_one_matrix() {
        let c = u_candidates(1).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].aliases.len(), 16);
        let cfg = SearchConfig { screen_budget: 0, ..SearchConfig::new(1) };
        let out = search_u(&cfg, &Constellation::qam(4).unwrap()).unwrap();
        let covered: usize = out.screened.iter().map(|s| s.candidate.aliases.len()).sum();
        assert_eq!(covered, 16);
        assert!(out.records.is_empty());
    }

    #[test]
    fn n7_candidates() {
        let c = u_candidates(7).unwrap();
        assert_eq!(c.len(), 7usize.pow(4));
        assert_eq!(c.iter().map(|c| c.aliases.len()).sum::<usize>(), 4096);
        assert!(c.iter().any(|c| c.n_exp == [1, 2, 5, 6]));
        assert!(u_candidates(0).is_err());
        assert!(u_candidates(33).is_err());
    }

    #[test]
    fn screen_is_phase_invariant() {
        let cons = Constellation::qam(4).unwrap();
        for (n, shift) in [([1, 2, 5, 6], 3), ([0, 4, 4, 1], 1), ([2, 3, 6, 0], 5)] {
            let base = screen_objective(&new_4x2_for(7, n).unwrap(), &cons, 2);
            let shifted = n.map(|x| (x + shift) % 7);
            assert_eq!(screen_objective(&new_4x2_for(7, shifted).unwrap(), &cons, 2).rank2, base.rank2);
        }
    }

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let (x, v) = nelder_mead(|p| (p[0] - 1.0).powi(2) + 3.0 * (p[1] + 2.0).powi(2), &[0.0, 0.0], 0.5, 1e-12, 5000);
        assert!((x[0] - 1.0).abs() < 1e-5 && (x[1] + 2.0).abs() < 1e-5, "{x:?}");
        assert!(v < 1e-10);
    }

    #[test]
    fn family1_degenerate_and_catalog_points() {
        assert_eq!(family1_objective(&[0.0, 0.3, 1.2]), 0.0);
        let (p1, p2) = catalog::family1_phi();
        let code = make_family1(p1, p2, Family1Scaling::Normalized).unwrap();
        assert!((min_det_qam4(&code) - 16.0 / 7.0).abs() < 1e-9);
    }

    #[test]
    fn family2_reference_point_evaluates() {
        let v = family2_objective(&[0.0, 0.0]);
        assert!(v.is_finite() && v >= 0.0);
        let code = catalog::by_name("family2").unwrap();
        assert!((min_det_qam4(&code) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn family2_search_reaches_target() {
        let opt = search_family2(16);
        assert!(opt.delta_min >= 1.99, "{opt:?}");
        let [a, b, c, d] = opt.coeffs;
        let code = make_family2(a, b, c, d).unwrap();
        let qam16 = Constellation::qam(16).unwrap();
        let d16 = min_determinant(&code, &qam16, DEFAULT_SPECTRUM_BUDGET).unwrap();
        assert!(d16 <= opt.delta_min + 1e-9);
    }
}

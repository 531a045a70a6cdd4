//! Monte Carlo codeword-error-rate sweeps and decoder audits.
//!
//! Trial `t` draws its channel, data and noise from the substreams
//! `(seed, kind, t)`. The same trial index is used at every SNR point and by
//! every decoder and code with matching dimensions, so comparisons are
//! paired. Trials run in fixed-size batches and the stopping rule is only
//! checked between batches, which keeps the trial count independent of the
//! thread count.

use std::time::Instant;

use rand::Rng;
use stbc_core::channel::{sample_channel, snr_to_n0, substream, transmit, ChannelRealization, StreamKind};
use stbc_core::codebook::{catalog, Constellation, LinearCode};
use stbc_core::detector::{
    equivalent_channel, fast_decode, ml_exhaustive, sphere_decode, DecodeResult, RadiusPolicy,
    DEFAULT_EXHAUSTIVE_BUDGET,
};
use stbc_core::numerics::CMat;
use stbc_core::par::Executor;
use stbc_core::C64;

use crate::config::{parse_list, KvConfig};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecoderKind {
    Exhaustive,
    Sphere,
    Fast,
}

impl std::str::FromStr for DecoderKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(DecoderKind::Exhaustive),
            "sphere" => Ok(DecoderKind::Sphere),
            "fast" => Ok(DecoderKind::Fast),
            _ => Err(Error::ConfigInvalid(format!("unknown decoder `{s}`"))),
        }
    }
}

impl DecoderKind {
    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::Exhaustive => "exhaustive",
            DecoderKind::Sphere => "sphere",
            DecoderKind::Fast => "fast",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub code: String,
    pub modulation: usize,
    pub snr_db: Vec<f64>,
    pub min_errors: u64,
    pub max_trials: u64,
    pub seed: u64,
    pub decoder: DecoderKind,
    pub n_r: usize,
    pub batch: u64,
}

impl SimConfig {
    pub fn new(code: &str, modulation: usize, snr_db: Vec<f64>) -> Self {
        SimConfig {
            code: code.to_string(),
            modulation,
            snr_db,
            min_errors: 100,
            max_trials: 1_000_000,
            seed: 1,
            decoder: DecoderKind::Sphere,
            n_r: 2,
            batch: 1000,
        }
    }

    pub fn from_kv(kv: &KvConfig) -> Result<Self> {
        let code = kv.get("code").ok_or_else(|| Error::ConfigInvalid("`code` is required".into()))?;
        let snr = kv.get("snr").ok_or_else(|| Error::ConfigInvalid("`snr` is required".into()))?;
        let mut c = SimConfig::new(code, kv.parsed_or("mod", 4)?, parse_list(snr, "snr")?);
        c.min_errors = kv.parsed_or("min_errors", c.min_errors)?;
        c.max_trials = kv.parsed_or("max_trials", c.max_trials)?;
        c.seed = kv.parsed_or("seed", c.seed)?;
        c.decoder = kv.parsed_or("decoder", c.decoder)?;
        c.n_r = kv.parsed_or("n_r", c.n_r)?;
        c.batch = kv.parsed_or("batch", c.batch)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::ConfigInvalid(m.to_string()));
        if self.snr_db.is_empty() {
            return bad("empty SNR grid");
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) || self.snr_db.windows(2).any(|w| w[0] >= w[1]) {
            return bad("SNR grid must be finite and strictly increasing");
        }
        if self.min_errors == 0 || self.max_trials == 0 || self.batch == 0 {
            return bad("min_errors, max_trials and batch must be positive");
        }
        if self.n_r == 0 {
            return bad("n_r must be positive");
        }
        Ok(())
    }
}

/// One point of a CER curve.
#[derive(Clone, Debug, PartialEq)]
pub struct CerPoint {
    pub snr_db: f64,
    pub trials: u64,
    pub codeword_errors: u64,
    pub cer: f64,
    pub mean_metric_evals: f64,
    /// Not written to result files.
    pub wall_time: f64,
}

/// The code as simulated: catalog code scaled to `E‖X‖² = T E_s`.
pub fn simulation_code(name: &str) -> Result<LinearCode> {
    Ok(catalog::by_name(name)?.energy_normalized())
}

/// Channel, transmitted indices and received matrix of trial `t`.
pub fn draw_trial(code: &LinearCode, cons: &Constellation, n_r: usize, n0: f64, seed: u64, t: u64) -> Result<(CMat, Vec<usize>, CMat)> {
    let h = sample_channel(n_r, code.n_t(), &mut substream(seed, StreamKind::Channel, t));
    let mut data = substream(seed, StreamKind::Data, t);
    let idx: Vec<usize> = (0..code.kappa()).map(|_| data.random_range(0..cons.m())).collect();
    let s: Vec<C64> = idx.iter().map(|&i| cons.point(i)).collect();
    let x = code.encode(&s)?;
    let ch = ChannelRealization { h, n0 };
    let y = transmit(&x, &ch, &mut substream(seed, StreamKind::Noise, t))?;
    Ok((ch.h, idx, y))
}

pub fn decode(kind: DecoderKind, y: &CMat, h: &CMat, code: &LinearCode, cons: &Constellation) -> Result<DecodeResult> {
    Ok(match kind {
        DecoderKind::Exhaustive => ml_exhaustive(y, h, code, cons, DEFAULT_EXHAUSTIVE_BUDGET)?,
        DecoderKind::Sphere => sphere_decode(y, h, code, cons, RadiusPolicy::Babai)?,
        DecoderKind::Fast => fast_decode(y, h, code, cons)?,
    })
}

fn check_decoder(cfg: &SimConfig, code: &LinearCode, cons: &Constellation) -> Result<()> {
    match cfg.decoder {
        DecoderKind::Fast => {
            let h = sample_channel(cfg.n_r, code.n_t(), &mut substream(cfg.seed, StreamKind::Channel, 0));
            if equivalent_channel(&h, code)?.k_prime == 0 {
                return Err(stbc_core::Error::NotFastDecodable.into());
            }
        }
        DecoderKind::Exhaustive => {
            let required = (cons.m() as u128).pow(code.kappa() as u32);
            if required > DEFAULT_EXHAUSTIVE_BUDGET {
                return Err(stbc_core::Error::BudgetExceeded { required, budget: DEFAULT_EXHAUSTIVE_BUDGET }.into());
            }
        }
        DecoderKind::Sphere => {}
    }
    Ok(())
}

/// Simulates every SNR point until `min_errors` codeword errors or
/// `max_trials` trials.
pub fn run_cer<E: Executor>(exec: &E, cfg: &SimConfig) -> Result<Vec<CerPoint>> {
    cfg.validate()?;
    let code = simulation_code(&cfg.code)?;
    let cons = Constellation::qam(cfg.modulation)?;
    check_decoder(cfg, &code, &cons)?;
    let mut out = Vec::with_capacity(cfg.snr_db.len());
    for &snr in &cfg.snr_db {
        let start = Instant::now();
        let n0 = snr_to_n0(snr, code.n_t(), cons.e_s());
        let (mut trials, mut errors, mut evals) = (0u64, 0u64, 0u128);
        while errors < cfg.min_errors && trials < cfg.max_trials {
            let n = cfg.batch.min(cfg.max_trials - trials);
            let ids: Vec<u64> = (trials..trials + n).collect();
            let results = exec.map(&ids, |&t| -> Result<(bool, u64)> {
                let (h, idx, y) = draw_trial(&code, &cons, cfg.n_r, n0, cfg.seed, t)?;
                let r = decode(cfg.decoder, &y, &h, &code, &cons)?;
                Ok((r.s_hat != idx, r.metric_evals))
            });
            for r in results {
                let (err, ev) = r?;
                errors += err as u64;
                evals += ev as u128;
            }
            trials += n;
        }
        out.push(CerPoint {
            snr_db: snr,
            trials,
            codeword_errors: errors,
            cer: errors as f64 / trials as f64,
            mean_metric_evals: evals as f64 / trials as f64,
            wall_time: start.elapsed().as_secs_f64(),
        });
    }
    Ok(out)
}

/// Two-sided Wilson score interval for `errors / trials` at `z` standard
/// deviations.
pub fn wilson_interval(errors: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// SNR points where the CER rises above the previous point by more than the
/// two intervals allow.
pub fn monotonicity_violations(points: &[CerPoint]) -> Vec<f64> {
    points
        .windows(2)
        .filter(|w| {
            let (_, hi) = wilson_interval(w[0].codeword_errors, w[0].trials, 1.96);
            let (lo, _) = wilson_interval(w[1].codeword_errors, w[1].trials, 1.96);
            lo > hi
        })
        .map(|w| w[1].snr_db)
        .collect()
}

/// Outcome of running all three detectors on the same received matrices.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AuditReport {
    pub code: String,
    pub modulation: usize,
    pub snr_db: f64,
    pub trials: u64,
    /// `None` when the code is not fast decodable.
    pub k_prime: Option<usize>,
    pub fast_disagreements: u64,
    pub sphere_disagreements: u64,
    pub max_fast_evals: u64,
    pub mean_fast_evals: f64,
    /// `k' M^(κ−k'+1)`.
    pub fast_bound: Option<u64>,
    pub exhaustive_evals: u64,
    pub max_sphere_evals: u64,
    pub mean_sphere_nodes: f64,
}

impl AuditReport {
    pub fn within_bound(&self) -> bool {
        self.fast_bound.is_none_or(|b| self.max_fast_evals <= b)
    }
}

/// Per-trial audit outcome.
struct AuditRow {
    /// `(disagrees, metric_evals, k')`, absent when fast decoding declined.
    fast: Option<(bool, u64, usize)>,
    sphere_wrong: bool,
    sphere_evals: u64,
    sphere_nodes: u64,
    exhaustive_evals: u64,
}

pub fn audit_equivalence<E: Executor>(
    exec: &E,
    code_name: &str,
    modulation: usize,
    trials: u64,
    seed: u64,
    snr_db: f64,
) -> Result<AuditReport> {
    let code = simulation_code(code_name)?;
    let cons = Constellation::qam(modulation)?;
    let required = (cons.m() as u128).pow(code.kappa() as u32);
    if required > DEFAULT_EXHAUSTIVE_BUDGET {
        return Err(stbc_core::Error::BudgetExceeded { required, budget: DEFAULT_EXHAUSTIVE_BUDGET }.into());
    }
    let n_r = 2;
    let n0 = snr_to_n0(snr_db, code.n_t(), cons.e_s());
    let ids: Vec<u64> = (0..trials).collect();
    let rows = exec.map(&ids, |&t| -> Result<AuditRow> {
        let (h, _, y) = draw_trial(&code, &cons, n_r, n0, seed, t)?;
        let ex = ml_exhaustive(&y, &h, &code, &cons, DEFAULT_EXHAUSTIVE_BUDGET)?;
        let sd = sphere_decode(&y, &h, &code, &cons, RadiusPolicy::Babai)?;
        let fast = match fast_decode(&y, &h, &code, &cons) {
            Ok(r) => Some((r.s_hat != ex.s_hat, r.metric_evals, equivalent_channel(&h, &code)?.k_prime)),
            Err(stbc_core::Error::NotFastDecodable) => None,
            Err(e) => return Err(e.into()),
        };
        Ok(AuditRow {
            fast,
            sphere_wrong: sd.s_hat != ex.s_hat,
            sphere_evals: sd.metric_evals,
            sphere_nodes: sd.nodes_visited,
            exhaustive_evals: ex.metric_evals,
        })
    });
    let mut rep = AuditReport {
        code: code_name.to_string(),
        modulation,
        snr_db,
        trials,
        k_prime: None,
        fast_disagreements: 0,
        sphere_disagreements: 0,
        max_fast_evals: 0,
        mean_fast_evals: 0.0,
        fast_bound: None,
        exhaustive_evals: 0,
        max_sphere_evals: 0,
        mean_sphere_nodes: 0.0,
    };
    let (mut fast_sum, mut nodes_sum, mut fast_n) = (0u128, 0u128, 0u64);
    for row in rows {
        let row = row?;
        if let Some((wrong, evals, kp)) = row.fast {
            rep.fast_disagreements += wrong as u64;
            rep.max_fast_evals = rep.max_fast_evals.max(evals);
            fast_sum += evals as u128;
            fast_n += 1;
            rep.k_prime = Some(rep.k_prime.map_or(kp, |k| k.min(kp)));
        }
        rep.sphere_disagreements += row.sphere_wrong as u64;
        rep.max_sphere_evals = rep.max_sphere_evals.max(row.sphere_evals);
        nodes_sum += row.sphere_nodes as u128;
        rep.exhaustive_evals = row.exhaustive_evals;
    }
    if fast_n > 0 {
        rep.mean_fast_evals = fast_sum as f64 / fast_n as f64;
        // a channel where the fast decoder declined would count as a disagreement
        rep.fast_disagreements += trials - fast_n;
    }
    if let Some(kp) = rep.k_prime {
        rep.fast_bound = Some(kp as u64 * (cons.m() as u64).pow((code.kappa() - kp + 1) as u32));
    }
    rep.mean_sphere_nodes = nodes_sum as f64 / trials.max(1) as f64;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Pool;
    use stbc_core::par::Sequential;

    #[test]
    fn config_validation() {
        let mut c = SimConfig::new("golden", 4, vec![6.0, 8.0]);
        assert!(c.validate().is_ok());
        c.max_trials = 0;
        assert!(matches!(run_cer(&Sequential, &c), Err(Error::ConfigInvalid(_))));
        let mut c = SimConfig::new("golden", 4, vec![8.0, 6.0]);
        assert!(c.validate().is_err());
        c.snr_db = vec![];
        assert!(c.validate().is_err());
    }

    #[test]
    fn fast_decoder_refused_for_golden() {
        let mut c = SimConfig::new("golden", 4, vec![10.0]);
        c.decoder = DecoderKind::Fast;
        assert!(matches!(run_cer(&Sequential, &c), Err(Error::Core(stbc_core::Error::NotFastDecodable))));
    }

    #[test]
    fn paired_decoders_give_identical_counts() {
        let mut c = SimConfig::new("family1", 4, vec![4.0, 8.0]);
        c.max_trials = 600;
        c.min_errors = 50;
        c.batch = 200;
        c.decoder = DecoderKind::Fast;
        let fast = run_cer(&Sequential, &c).unwrap();
        c.decoder = DecoderKind::Exhaustive;
        let ex = run_cer(&Sequential, &c).unwrap();
        for (a, b) in fast.iter().zip(&ex) {
            assert_eq!((a.trials, a.codeword_errors), (b.trials, b.codeword_errors));
        }
        assert!(fast[0].codeword_errors > 0);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let mut c = SimConfig::new("golden", 4, vec![6.0, 10.0]);
        c.min_errors = 20;
        c.batch = 64;
        let one = run_cer(&Pool::new(1).unwrap(), &c).unwrap();
        let four = run_cer(&Pool::new(4).unwrap(), &c).unwrap();
        for (a, b) in one.iter().zip(&four) {
            assert_eq!((a.trials, a.codeword_errors, a.mean_metric_evals), (b.trials, b.codeword_errors, b.mean_metric_evals));
        }
    }

    #[test]
    fn high_snr_sanity() {
        let mut c = SimConfig::new("family1", 4, vec![40.0]);
        c.min_errors = 1_000_000;
        c.max_trials = 10_000;
        let p = &run_cer(&Pool::new(0).unwrap(), &c).unwrap()[0];
        assert_eq!(p.trials, 10_000);
        assert!(p.cer < 1e-3, "{p:?}");
    }

    #[test]
    fn cer_decreases_over_grid() {
        let mut c = SimConfig::new("golden", 4, vec![0.0, 4.0, 8.0, 12.0]);
        c.min_errors = 200;
        let pts = run_cer(&Sequential, &c).unwrap();
        assert!(monotonicity_violations(&pts).is_empty());
        assert!(pts.windows(2).all(|w| w[1].cer < w[0].cer));
        assert!(pts.iter().all(|p| (0.0..=1.0).contains(&p.cer) && p.codeword_errors >= 200));
    }

    #[test]
    fn wilson_bounds() {
        let (lo, hi) = wilson_interval(50, 100, 1.96);
        assert!(lo < 0.5 && hi > 0.5 && lo > 0.39 && hi < 0.61);
        assert_eq!(wilson_interval(0, 10, 1.96).0, 0.0);
    }

    #[test]
    fn audit_golden() {
        let r = audit_equivalence(&Sequential, "golden", 4, 30, 5, 8.0).unwrap();
        assert_eq!(r.k_prime, None);
        assert_eq!(r.sphere_disagreements, 0);
        assert_eq!(r.exhaustive_evals, 256);
    }
}

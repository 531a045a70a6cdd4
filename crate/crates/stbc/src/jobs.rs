//! Spectrum, minimum-determinant and `U`-search jobs, producing records.

use stbc_core::channel::{substream, StreamKind};
use stbc_core::codebook::{catalog, Constellation, LinearCode};
use stbc_core::par::Executor;
use stbc_core::search::{search_u_with, SearchConfig, SearchOutcome};
use stbc_core::spectrum::{spectrum_with, union_bound_terms, DiffEnumerator, Rank2Multiplicity, Spectrum};

use crate::records::{histogram_digest, search_record, MinDetMode, Record};
use crate::Result;

/// Default number of random differences scanned in consistency mode.
pub const DEFAULT_SAMPLES: u64 = 10_000_000;
/// Differences drawn per sampling chunk; chunk `c` uses substream `c`.
pub const SAMPLE_CHUNK: u64 = 100_000;

/// The code as enumerated: catalog scaling, unnormalized integer QAM.
pub fn spectrum_code(name: &str) -> Result<LinearCode> {
    Ok(catalog::by_name(name)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinDetResult {
    pub code: String,
    pub modulation: usize,
    pub mode: MinDetMode,
    /// Exact minimum, or in consistency mode the smallest value seen.
    pub min_det: f64,
    pub witness: Vec<[f64; 2]>,
    pub rank_deficient: bool,
    /// Differences enumerated exactly.
    pub vectors: u64,
    pub samples: u64,
    pub sample_min_det: Option<f64>,
}

impl MinDetResult {
    pub fn record(&self) -> Record {
        Record::Mindet {
            code: self.code.clone(),
            modulation: self.modulation,
            mode: self.mode,
            min_det: self.min_det,
            witness: self.witness.clone(),
            rank_deficient: self.rank_deficient,
            vectors: self.vectors,
            samples: self.samples,
            sample_min_det: self.sample_min_det,
        }
    }
}

fn witness_of(e: &DiffEnumerator, idx: &[usize]) -> Vec<[f64; 2]> {
    e.vector(idx).iter().map(|z| [z.re, z.im]).collect()
}

/// Minimum determinant of a catalog code.
///
/// When the full enumeration fits in `budget` the result is exact.
/// Otherwise the minimum over the 4-QAM differences (a subset of every
/// larger QAM difference set) supplies a witness, and `samples` uniformly
/// drawn differences of the full set are checked for rank loss and for a
/// smaller determinant.
pub fn mindet_job<E: Executor>(
    exec: &E,
    code_name: &str,
    modulation: usize,
    budget: u128,
    samples: u64,
    seed: u64,
) -> Result<MinDetResult> {
    let code = spectrum_code(code_name)?;
    let cons = Constellation::qam(modulation)?;
    let e = DiffEnumerator::new(&code, &cons);
    if e.total() <= budget {
        let s = spectrum_with(exec, &code, &cons, 0, budget)?;
        return Ok(MinDetResult {
            code: code_name.to_string(),
            modulation,
            mode: MinDetMode::Exact,
            min_det: s.min_det,
            witness: witness_of(&e, &s.min_det_witness),
            rank_deficient: s.has_rank_deficiency(),
            vectors: s.vectors,
            samples: 0,
            sample_min_det: None,
        });
    }
    let small = Constellation::qam(4)?;
    let base = spectrum_with(exec, &code, &small, 0, budget)?;
    let small_e = DiffEnumerator::new(&code, &small);
    let chunks: Vec<u64> = (0..samples.div_ceil(SAMPLE_CHUNK)).collect();
    let parts = exec.map(&chunks, |&c| {
        let n = SAMPLE_CHUNK.min(samples - c * SAMPLE_CHUNK);
        e.sample(&mut substream(seed, StreamKind::Sampling, c), n, 0)
    });
    let mut sampled = Spectrum::empty(code.n_t());
    for p in &parts {
        sampled.merge(p);
    }
    let (min_det, witness) = if sampled.min_det < base.min_det {
        (sampled.min_det, witness_of(&e, &sampled.min_det_witness))
    } else {
        (base.min_det, witness_of(&small_e, &base.min_det_witness))
    };
    Ok(MinDetResult {
        code: code_name.to_string(),
        modulation,
        mode: MinDetMode::Consistency,
        min_det,
        witness,
        rank_deficient: base.has_rank_deficiency() || sampled.has_rank_deficiency(),
        vectors: base.vectors,
        samples: sampled.vectors,
        sample_min_det: Some(sampled.min_det),
    })
}

/// Full spectrum with ranks up to `max_rank` binned.
pub fn spectrum_job<E: Executor>(
    exec: &E,
    code_name: &str,
    modulation: usize,
    max_rank: usize,
    budget: u128,
) -> Result<(Spectrum, Vec<Record>)> {
    let code = spectrum_code(code_name)?;
    let cons = Constellation::qam(modulation)?;
    let s = spectrum_with(exec, &code, &cons, max_rank, budget)?;
    let mut out: Vec<Record> = union_bound_terms(&s)
        .into_iter()
        .map(|t| Record::SpectrumEntry {
            code: code_name.to_string(),
            modulation,
            r: t.r,
            delta: t.delta,
            count: t.count,
            pairs: t.pairs,
        })
        .collect();
    let m = Rank2Multiplicity::from_spectrum(&s);
    out.push(Record::SpectrumSummary {
        code: code_name.to_string(),
        modulation,
        vectors: s.vectors,
        min_det: s.min_det,
        rank2_vectors: m.total,
        rank2_pairs: m.total_pairs,
        histogram_digest: histogram_digest(&m.histogram),
    });
    Ok((s, out))
}

pub fn search_job<E: Executor>(exec: &E, cfg: &SearchConfig, modulation: usize) -> Result<(SearchOutcome, Vec<Record>)> {
    let cons = Constellation::qam(modulation)?;
    let outcome = search_u_with(exec, cfg, &cons)?;
    let records = outcome.records.iter().map(|r| search_record(r, modulation, cfg)).collect();
    Ok((outcome, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Pool;
    use stbc_core::par::Sequential;
    use stbc_core::spectrum::DEFAULT_SPECTRUM_BUDGET;

    #[test]
    fn golden_exact_at_4qam() {
        let r = mindet_job(&Sequential, "golden", 4, DEFAULT_SPECTRUM_BUDGET, 0, 1).unwrap();
        assert_eq!(r.mode, MinDetMode::Exact);
        assert!((r.min_det - 3.2).abs() < 1e-9 * 3.2);
        assert_eq!(r.vectors, 9u64.pow(4) - 1);
        assert!(!r.rank_deficient);
    }

    #[test]
    fn consistency_mode_when_over_budget() {
        let pool = Pool::new(2).unwrap();
        let r = mindet_job(&pool, "golden", 16, 10_000, 250_000, 3).unwrap();
        assert_eq!(r.mode, MinDetMode::Consistency);
        assert_eq!(r.samples, 250_000);
        assert!((r.min_det - 3.2).abs() < 1e-9 * 3.2);
        assert!(r.sample_min_det.unwrap() >= 3.2 - 1e-9);
        let again = mindet_job(&Sequential, "golden", 16, 10_000, 250_000, 3).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn qo_block_spectrum_records() {
        let (s, recs) = spectrum_job(&Sequential, "qo4", 4, 4, DEFAULT_SPECTRUM_BUDGET).unwrap();
        assert!(s.has_rank_deficiency());
        let Some(Record::SpectrumSummary { rank2_vectors, .. }) = recs.last() else { panic!() };
        assert_eq!(*rank2_vectors, 160);
        let entries = recs.iter().filter(|r| matches!(r, Record::SpectrumEntry { r: 2, .. })).count();
        assert_eq!(entries, 4);
    }
}

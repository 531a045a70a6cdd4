//! Result files.
//!
//! CER curves are CSV: a few `# key: value` header lines, then
//! `snr_db,trials,errors,cer,mean_metric_evals`. Everything else is JSON
//! Lines: the first line is a [`Header`], each following line one
//! [`Record`] tagged by `"type"`. No file contains timings, so reruns with
//! the same configuration are byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use stbc_core::search::SearchRecord;
use stbc_core::spectrum::SpectrumEntry;

use crate::harness::{AuditReport, CerPoint};
use crate::{Error, Result, SOURCE_HASH, TOOL_VERSION};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub tool: String,
    pub source_hash: String,
    pub command: String,
    pub seed: u64,
    pub config_digest: String,
}

impl Header {
    pub fn new(command: &str, seed: u64, config_digest: &str) -> Self {
        Header {
            tool: TOOL_VERSION.to_string(),
            source_hash: SOURCE_HASH.to_string(),
            command: command.to_string(),
            seed,
            config_digest: config_digest.to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinDetMode {
    /// Every nonzero difference was enumerated.
    Exact,
    /// A witness from the 4-QAM differences plus a random full-rank scan;
    /// the value is an upper bound.
    Consistency,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Record {
    SpectrumEntry {
        code: String,
        modulation: usize,
        r: usize,
        delta: f64,
        count: u64,
        #[serde(with = "u128_text")]
        pairs: u128,
    },
    SpectrumSummary {
        code: String,
        modulation: usize,
        vectors: u64,
        min_det: f64,
        rank2_vectors: u64,
        #[serde(with = "u128_text")]
        rank2_pairs: u128,
        histogram_digest: String,
    },
    Mindet {
        code: String,
        modulation: usize,
        mode: MinDetMode,
        min_det: f64,
        /// Difference vector attaining `min_det`, as `[re, im]` pairs.
        witness: Vec<[f64; 2]>,
        rank_deficient: bool,
        vectors: u64,
        samples: u64,
        sample_min_det: Option<f64>,
    },
    SearchRecord {
        n_cap: u32,
        n_exp: [u32; 4],
        aliases: usize,
        pinned: bool,
        screen_rank2: u64,
        screen_min_det: f64,
        objective: u64,
        #[serde(with = "u128_text")]
        objective_pairs: u128,
        histogram_digest: String,
        modulation: usize,
        screen_weight: usize,
        screen_budget: usize,
        #[serde(with = "u128_text")]
        full_budget: u128,
    },
    CoefficientSearch {
        family: String,
        grid_density: usize,
        params: Vec<f64>,
        /// Optimized coefficients as `[re, im]` pairs.
        coeffs: Vec<[f64; 2]>,
        delta_min: f64,
        delta_min_16qam: f64,
    },
    Audit(AuditReport),
}

/// Wide counters as decimal strings; tagged-enum records cannot carry
/// 128-bit JSON numbers.
mod u128_text {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u128, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u128, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// SHA-256 over the `(r, δ, count)` rows, hex.
pub fn histogram_digest(h: &[SpectrumEntry]) -> String {
    let mut s = String::new();
    for e in h {
        writeln!(s, "{} {:.9e} {}", e.r, e.delta, e.count).unwrap();
    }
    hex::encode(Sha256::digest(s.as_bytes()))
}

pub fn search_record(rec: &SearchRecord, modulation: usize, cfg: &stbc_core::search::SearchConfig) -> Record {
    Record::SearchRecord {
        n_cap: rec.n_cap,
        n_exp: rec.n_exp,
        aliases: rec.aliases.len(),
        pinned: rec.pinned,
        screen_rank2: rec.screen.rank2,
        screen_min_det: rec.screen.min_full_det,
        objective: rec.objective,
        objective_pairs: rec.objective_pairs,
        histogram_digest: histogram_digest(&rec.histogram),
        modulation,
        screen_weight: cfg.screen_weight,
        screen_budget: cfg.screen_budget,
        full_budget: cfg.full_budget,
    }
}

fn json_line<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string(v).map_err(|e| Error::Record(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn render_jsonl(header: &Header, records: &[Record]) -> Result<String> {
    let mut out = json_line(header)?;
    for r in records {
        out.push_str(&json_line(r)?);
    }
    Ok(out)
}

/// Parses a JSON Lines file written by [`render_jsonl`].
pub fn parse_jsonl(text: &str) -> Result<(Header, Vec<Record>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let first = lines.next().ok_or_else(|| Error::Record("empty file".into()))?;
    let header: Header = serde_json::from_str(first).map_err(|e| Error::Record(format!("header: {e}")))?;
    let records = lines
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::Record(format!("line {}: {e}", i + 2))))
        .collect::<Result<_>>()?;
    Ok((header, records))
}

pub fn render_cer_csv(header: &Header, code: &str, modulation: usize, decoder: &str, points: &[CerPoint]) -> String {
    let mut s = String::new();
    writeln!(s, "# tool: {}", header.tool).unwrap();
    writeln!(s, "# source_hash: {}", header.source_hash).unwrap();
    writeln!(s, "# seed: {}", header.seed).unwrap();
    writeln!(s, "# config_digest: {}", header.config_digest).unwrap();
    writeln!(s, "# code: {code}, mod: {modulation}, decoder: {decoder}").unwrap();
    s.push_str("snr_db,trials,errors,cer,mean_metric_evals\n");
    for p in points {
        writeln!(s, "{},{},{},{:e},{}", p.snr_db, p.trials, p.codeword_errors, p.cer, p.mean_metric_evals).unwrap();
    }
    s
}

/// Rows of a CER CSV as `(snr_db, trials, errors)`.
pub fn parse_cer_csv(text: &str) -> Result<Vec<(f64, u64, u64)>> {
    let bad = |l: &str| Error::Record(format!("CER row `{l}`"));
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("snr_db") && !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 5 {
                return Err(bad(l));
            }
            Ok((f[0].parse().map_err(|_| bad(l))?, f[1].parse().map_err(|_| bad(l))?, f[2].parse().map_err(|_| bad(l))?))
        })
        .collect()
}

/// Writes `contents` to `path`, creating parent directories.
pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut f = fs::File::create(path)?;
    f.write_all(contents.as_bytes())?;
    Ok(())
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stbc::config::{parse_list, parse_tuples, KvConfig};
use stbc::exec::Pool;
use stbc::harness::{audit_equivalence, monotonicity_violations, run_cer, SimConfig};
use stbc::jobs::{mindet_job, search_job, spectrum_job, DEFAULT_SAMPLES};
use stbc::records::{render_cer_csv, render_jsonl, write_file, Header, Record};
use stbc::tables::report_tables;
use stbc::{Error, Result};
use stbc_core::search::SearchConfig;
use stbc_core::spectrum::DEFAULT_SPECTRUM_BUDGET;

/// Space-time block code analysis and simulation.
#[derive(Parser)]
#[command(name = "stbc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Distance spectrum of a code (binned up to `max_rank`, default 2).
    Spectrum(Common),
    /// Minimum determinant, exact or in consistency mode when over budget.
    Mindet(Common),
    /// Search over the DFT-based unitary U of the 4x2 code.
    SearchU(Common),
    /// Monte Carlo codeword error rate over an SNR grid.
    Cer(Common),
    /// Runs fast, sphere and exhaustive decoding on the same trials.
    Audit(Common),
    /// Rebuilds the reference tables from a results directory.
    Tables(Common),
}

/// Every configuration key as a flag; flags override `--config`.
#[derive(Args, Default)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    code: Option<String>,
    /// QAM size.
    #[arg(long = "mod")]
    modulation: Option<String>,
    /// Comma-separated SNR values in dB.
    #[arg(long, allow_hyphen_values = true)]
    snr: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Worker threads, 0 for all cores.
    #[arg(long)]
    threads: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// exhaustive, sphere or fast.
    #[arg(long)]
    decoder: Option<String>,
    #[arg(long = "n-r", alias = "n_r")]
    n_r: Option<String>,
    #[arg(long = "min-errors", alias = "min_errors")]
    min_errors: Option<String>,
    #[arg(long = "max-trials", alias = "max_trials")]
    max_trials: Option<String>,
    #[arg(long)]
    batch: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    budget: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long = "max-rank", alias = "max_rank")]
    max_rank: Option<String>,
    #[arg(long = "n-cap", alias = "n_cap")]
    n_cap: Option<String>,
    #[arg(long = "screen-weight", alias = "screen_weight")]
    screen_weight: Option<String>,
    #[arg(long = "screen-budget", alias = "screen_budget")]
    screen_budget: Option<String>,
    /// `;`-separated exponent tuples always fully counted.
    #[arg(long)]
    pinned: Option<String>,
    /// Results directory read by `tables`.
    #[arg(long)]
    results: Option<String>,
}

impl Common {
    fn into_config(self) -> Result<KvConfig> {
        let mut kv = match &self.config {
            Some(p) => KvConfig::load(p)?,
            None => KvConfig::default(),
        };
        let flags = [
            ("code", self.code),
            ("mod", self.modulation),
            ("snr", self.snr),
            ("seed", self.seed),
            ("threads", self.threads),
            ("out", self.out),
            ("decoder", self.decoder),
            ("n_r", self.n_r),
            ("min_errors", self.min_errors),
            ("max_trials", self.max_trials),
            ("batch", self.batch),
            ("trials", self.trials),
            ("budget", self.budget),
            ("samples", self.samples),
            ("max_rank", self.max_rank),
            ("n_cap", self.n_cap),
            ("screen_weight", self.screen_weight),
            ("screen_budget", self.screen_budget),
            ("pinned", self.pinned),
            ("results", self.results),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                kv.set(k, v);
            }
        }
        Ok(kv)
    }
}

fn required<'a>(kv: &'a KvConfig, key: &str) -> Result<&'a str> {
    kv.get(key).ok_or_else(|| Error::ConfigInvalid(format!("`{key}` is required")))
}

fn emit(kv: &KvConfig, text: &str) -> Result<()> {
    match kv.get("out") {
        Some(p) => write_file(Path::new(p), text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(command: Command) -> Result<()> {
    let (name, common) = match command {
        Command::Spectrum(c) => ("spectrum", c),
        Command::Mindet(c) => ("mindet", c),
        Command::SearchU(c) => ("search-u", c),
        Command::Cer(c) => ("cer", c),
        Command::Audit(c) => ("audit", c),
        Command::Tables(c) => ("tables", c),
    };
    let kv = common.into_config()?;
    let pool = Pool::new(kv.parsed_or("threads", 0)?)?;
    let seed: u64 = kv.parsed_or("seed", 1)?;
    let header = Header::new(name, seed, &kv.digest());
    let modulation: usize = kv.parsed_or("mod", 4)?;
    let budget: u128 = kv.parsed_or("budget", DEFAULT_SPECTRUM_BUDGET)?;
    match name {
        "spectrum" => {
            let code = required(&kv, "code")?;
            let (_, records) = spectrum_job(&pool, code, modulation, kv.parsed_or("max_rank", 2)?, budget)?;
            emit(&kv, &render_jsonl(&header, &records)?)
        }
        "mindet" => {
            let code = required(&kv, "code")?;
            let r = mindet_job(&pool, code, modulation, budget, kv.parsed_or("samples", DEFAULT_SAMPLES)?, seed)?;
            emit(&kv, &render_jsonl(&header, &[r.record()])?)
        }
        "search-u" => {
            let mut cfg = SearchConfig::new(kv.parsed_or("n_cap", 7)?);
            cfg.screen_weight = kv.parsed_or("screen_weight", cfg.screen_weight)?;
            cfg.screen_budget = kv.parsed_or("screen_budget", cfg.screen_budget)?;
            cfg.full_budget = budget;
            if let Some(p) = kv.get("pinned") {
                cfg.pinned = parse_tuples(p)?;
            }
            let (_, records) = search_job(&pool, &cfg, modulation)?;
            emit(&kv, &render_jsonl(&header, &records)?)
        }
        "cer" => {
            let cfg = SimConfig::from_kv(&kv)?;
            let points = run_cer(&pool, &cfg)?;
            for snr in monotonicity_violations(&points) {
                eprintln!("warning: CER rises significantly at {snr} dB");
            }
            emit(&kv, &render_cer_csv(&header, &cfg.code, cfg.modulation, cfg.decoder.name(), &points))
        }
        "audit" => {
            let code = required(&kv, "code")?;
            let snr: Vec<f64> = parse_list(kv.get("snr").unwrap_or("10"), "snr")?;
            let [snr] = snr[..] else {
                return Err(Error::ConfigInvalid("audit takes a single SNR value".into()));
            };
            let trials: u64 = kv.parsed_or("trials", 1000)?;
            if trials == 0 {
                return Err(Error::ConfigInvalid("trials must be positive".into()));
            }
            let report = audit_equivalence(&pool, code, modulation, trials, seed, snr)?;
            emit(&kv, &render_jsonl(&header, &[Record::Audit(report)])?)
        }
        _ => emit(&kv, &report_tables(Path::new(kv.get("results").unwrap_or("results")))?),
    }
}

fn fail(e: &Error) -> ExitCode {
    let msg = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
    eprintln!("{msg}");
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let msg = serde_json::json!({ "error": "ConfigInvalid", "message": e.to_string() });
            eprintln!("{msg}");
            return ExitCode::from(2);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}

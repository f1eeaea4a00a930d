use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use gridforge::config::{RunConfig, SEED_ENV};
use gridforge::dataset_io::{dataset_stats, read_dataset, verify_dataset, Dataset, SuiteKind, FORMAT_VERSION};
use gridforge::eval::{read_predictions, score};
use gridforge::generate::with_jobs;
use gridforge::pipeline::{build_suite, config_hash, enabled_suites, encode_suite, Manifest};
use gridforge::splits::SplitName;

mod replay;

#[derive(Parser)]
#[command(name = "gridforge", version, about = "Grounded command-following benchmark generator and scorer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the compositional and length dataset files plus a manifest.
    Generate(GenerateArgs),
    /// Re-check every example and split invariant of a dataset file.
    Verify {
        dataset: PathBuf,
        #[arg(long)]
        report_json: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Print dataset statistics.
    Stats {
        dataset: PathBuf,
        #[arg(long)]
        report_json: Option<PathBuf>,
    },
    /// Score a JSON-lines predictions file against a dataset.
    Score {
        dataset: PathBuf,
        predictions: PathBuf,
        #[arg(long)]
        report_json: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Print the world and the gold trajectory of one example.
    Replay {
        dataset: PathBuf,
        id: u64,
        /// Which gold sequence to replay.
        #[arg(long, default_value_t = 0)]
        gold: usize,
    },
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Grid size of the compositional suite.
    #[arg(long)]
    grid_size: Option<usize>,
    /// Grid size of the length suite.
    #[arg(long)]
    length_grid_size: Option<usize>,
    /// Worlds sampled per target and situation slot (both suites).
    #[arg(long)]
    samples_per_slot: Option<usize>,
    /// Comma-separated split names or letters A-I.
    #[arg(long, value_delimiter = ',')]
    splits: Option<Vec<String>>,
    /// Few-shot count for the held-out adverb.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    jobs: Option<usize>,
}

/// An error caused by how the tool was invoked rather than by the data.
#[derive(Debug)]
struct UsageError(anyhow::Error);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(e: impl Into<anyhow::Error>) -> anyhow::Error {
    UsageError(e.into()).into()
}

fn resolve_config(args: &GenerateArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path).map_err(usage)?,
        None => RunConfig::default(),
    };
    cfg.apply_env(std::env::var(SEED_ENV).ok()).map_err(usage)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out = out.clone();
    }
    if let Some(d) = args.grid_size {
        cfg.compositional.grid_size = d;
    }
    if let Some(d) = args.length_grid_size {
        cfg.length.grid_size = d;
    }
    if let Some(s) = args.samples_per_slot {
        cfg.compositional.samples_per_slot = s;
        cfg.length.samples_per_slot = s;
    }
    if let Some(names) = &args.splits {
        cfg.splits.enabled = names
            .iter()
            .filter(|n| !n.trim().is_empty())
            .map(|n| n.parse::<SplitName>())
            .collect::<Result<_, _>>()
            .map_err(usage)?;
    }
    if let Some(k) = args.k {
        cfg.splits.kshot = k;
    }
    if let Some(j) = args.jobs {
        cfg.jobs = Some(j);
    }
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn load(path: &Path) -> Result<Dataset> {
    read_dataset(path).with_context(|| format!("reading {}", path.display()))
}

fn cmd_generate(args: &GenerateArgs) -> Result<ExitCode> {
    let cfg = resolve_config(args)?;
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let mut suites = BTreeMap::new();
    for kind in enabled_suites(&cfg) {
        let built = build_suite(&cfg, kind).with_context(|| format!("building the {} suite", kind.as_str()))?;
        let (bytes, entry) = encode_suite(&built);
        drop(built);
        let path = cfg.out.join(&entry.file);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        println!("{}: {} examples, sha256 {}", path.display(), entry.examples, entry.sha256);
        for (label, n) in &entry.splits {
            println!("  {:<22} {n}", label.as_str());
        }
        suites.insert(kind.as_str().to_string(), entry);
    }
    let manifest =
        Manifest { format_version: FORMAT_VERSION, master_seed: cfg.seed, config_hash: config_hash(&cfg), suites };
    write_json(&cfg.out.join("manifest.json"), &manifest)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(dataset: &Path, report_json: Option<&Path>, jobs: Option<usize>) -> Result<ExitCode> {
    let ds = load(dataset)?;
    let report = with_jobs(jobs, || verify_dataset(&ds));
    if let Some(path) = report_json {
        write_json(path, &report)?;
    }
    for v in &report.violations {
        println!("{v}");
    }
    println!("{} examples checked, {} violations", report.examples_checked, report.violations.len());
    Ok(if report.is_clean() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_stats(dataset: &Path, report_json: Option<&Path>) -> Result<ExitCode> {
    let ds = load(dataset)?;
    let report = dataset_stats(&ds);
    if let Some(path) = report_json {
        write_json(path, &report)?;
    }
    let suite = match ds.header.suite {
        SuiteKind::Compositional => "compositional",
        SuiteKind::Length => "length",
    };
    println!("{suite} suite, grid {0}x{0}, seed {1}", ds.header.grid_size, ds.header.master_seed);
    print!("{report}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_score(dataset: &Path, predictions: &Path, report_json: Option<&Path>, jobs: Option<usize>) -> Result<ExitCode> {
    let ds = load(dataset)?;
    let file = fs::File::open(predictions).with_context(|| format!("opening {}", predictions.display()))?;
    let preds = read_predictions(BufReader::new(file)).with_context(|| format!("reading {}", predictions.display()))?;
    let report = with_jobs(jobs, || score(&ds, &preds))?;
    if let Some(path) = report_json {
        write_json(path, &report)?;
    }
    print!("{report}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_replay(dataset: &Path, id: u64, gold: usize) -> Result<ExitCode> {
    let ds = load(dataset)?;
    let Some(example) = ds.find(id) else { bail!("no example with id {id}") };
    let Some(seq) = example.gold.get(gold) else {
        bail!("example {id} has {} gold sequences", example.gold.len());
    };
    print!("{}", replay::render(example, seq));
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate(args) => cmd_generate(&args),
        Command::Verify { dataset, report_json, jobs } => cmd_verify(&dataset, report_json.as_deref(), jobs),
        Command::Stats { dataset, report_json } => cmd_stats(&dataset, report_json.as_deref()),
        Command::Score { dataset, predictions, report_json, jobs } => {
            cmd_score(&dataset, &predictions, report_json.as_deref(), jobs)
        }
        Command::Replay { dataset, id, gold } => cmd_replay(&dataset, id, gold),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

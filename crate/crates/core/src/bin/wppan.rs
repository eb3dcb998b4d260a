//! Command-line front end: Monte Carlo runs, sweeps, histograms, self-test.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use wppan_core::experiments::{
    antenna_histogram, emit, parse_strategies, run_trials, sweep_results, write_trials_csv, HistogramWeighting, Link,
    OutputFormat, Strategy, SweepAxis, SweepTable, TrialResult,
};
use wppan_core::{selftest, Error, SystemConfig};

const EXIT_CONFIG: u8 = 1;
const EXIT_SOLVER: u8 = 2;
const EXIT_IO: u8 = 3;

/// Search-mode problems with more variables than this get a size warning.
const LARGE_PROBLEM: usize = 1000;

#[derive(Parser)]
#[command(
    name = "wppan",
    version,
    about = "Wireless powered pinching-antenna network simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Dat,
}

#[derive(Clone, Copy, ValueEnum)]
enum Weighting {
    PerSlot,
    Duration,
}

#[derive(clap::Args)]
struct Common {
    /// JSON configuration; defaults to the reference scenario.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of Monte Carlo trials.
    #[arg(long, default_value_t = 50)]
    trials: u64,
    /// Overrides the configuration's RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Largest tolerated fraction of failed trials before exiting with 2.
    #[arg(long, default_value_t = 0.0)]
    max_failure_rate: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Run one strategy and print one CSV row per trial.
    Run {
        #[command(flatten)]
        common: Common,
        /// search, greedy, naive or miso.
        #[arg(long, visible_alias = "system")]
        mode: String,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep one parameter and tabulate the mean min-rate per mode.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// p0_dbm, users or kappa.
        #[arg(long)]
        axis: String,
        /// Comma-separated grid values.
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<f64>,
        /// Comma-separated strategies.
        #[arg(long, default_value = "search,greedy,naive,miso")]
        modes: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Distribution of active-antenna counts in search mode.
    Hist {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Weighting::PerSlot)]
        weighting: Weighting,
    },
    /// Oracle, concavity, nesting and harvester checks.
    Selftest,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io { .. } => EXIT_IO,
            Error::NonConvergence { .. } => EXIT_SOLVER,
            _ => EXIT_CONFIG,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
    .into()
}

fn load(common: &Common) -> Result<SystemConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => SystemConfig::from_json_file(path)?,
        None => SystemConfig::reference_scenario(),
    };
    if let Some(seed) = common.seed {
        cfg.rng_seed = seed;
    }
    cfg.validate()?;
    if !(0.0..=1.0).contains(&common.max_failure_rate) {
        return Err(
            Error::InvalidConfig(format!("--max-failure-rate {} not in [0, 1]", common.max_failure_rate)).into(),
        );
    }
    Ok(cfg)
}

fn warn_size(cfg: &SystemConfig, modes: &[Strategy]) {
    if modes.contains(&Strategy::Search) && cfg.num_antennas < usize::BITS as usize {
        let vars = (1usize << cfg.num_antennas) - 1 + cfg.num_users;
        if vars > LARGE_PROBLEM {
            eprintln!("warning: search mode has {vars} duration variables per trial (2^N - 1 + M)");
        }
    }
}

fn check_failures<'a>(results: impl IntoIterator<Item = &'a TrialResult>, max_rate: f64) -> Result<(), Failure> {
    let (mut total, mut failed) = (0usize, 0usize);
    for r in results {
        total += 1;
        if let Some(msg) = &r.failure {
            failed += 1;
            eprintln!("trial {} ({}): {msg}", r.trial, r.mode);
        }
    }
    if total > 0 && failed as f64 > max_rate * total as f64 {
        return Err(Failure {
            code: EXIT_SOLVER,
            message: format!("{failed} of {total} trials failed to converge"),
        });
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| io_failure(path, e))
}

fn run(common: Common, mode: String, out: Option<PathBuf>) -> Result<(), Failure> {
    let cfg = load(&common)?;
    let mode: Strategy = mode.parse()?;
    warn_size(&cfg, &[mode]);
    let results: Vec<TrialResult> = run_trials(&cfg, &[mode], common.trials)?
        .into_iter()
        .flatten()
        .collect();
    match &out {
        Some(path) => {
            let mut f = create(path)?;
            write_trials_csv(&results, &mut f)
                .and_then(|_| f.flush())
                .map_err(|e| io_failure(path, e))?;
        }
        None => write_trials_csv(&results, io::stdout().lock()).map_err(|e| io_failure(Path::new("<stdout>"), e))?,
    }
    check_failures(&results, common.max_failure_rate)
}

fn sweep(
    common: Common,
    axis: String,
    grid: Vec<f64>,
    modes: String,
    out: PathBuf,
    format: Format,
) -> Result<(), Failure> {
    let cfg = load(&common)?;
    let axis: SweepAxis = axis.parse()?;
    let modes = parse_strategies(&modes)?;
    for &v in &grid {
        warn_size(&axis.apply(&cfg, v)?, &modes);
    }
    let results = sweep_results(&cfg, axis, &grid, &modes, common.trials)?;
    let table = SweepTable::from_results(axis, &grid, &modes, &results);
    let format = match format {
        Format::Csv => OutputFormat::Csv,
        Format::Dat => OutputFormat::Dat,
    };
    for path in emit(&table, format, &out)? {
        eprintln!("wrote {}", path.display());
    }
    check_failures(results.iter().flatten().flatten(), common.max_failure_rate)
}

fn hist(common: Common, out: PathBuf, weighting: Weighting) -> Result<(), Failure> {
    let cfg = load(&common)?;
    warn_size(&cfg, &[Strategy::Search]);
    let results: Vec<TrialResult> = run_trials(&cfg, &[Strategy::Search], common.trials)?
        .into_iter()
        .flatten()
        .collect();
    let weighting = match weighting {
        Weighting::PerSlot => HistogramWeighting::PerSlot,
        Weighting::Duration => HistogramWeighting::DurationWeighted,
    };
    let ok: Vec<TrialResult> = results.iter().filter(|r| !r.failed()).cloned().collect();
    let down = antenna_histogram(&ok, Link::Downlink, weighting)?;
    let up = antenna_histogram(&ok, Link::Uplink, weighting)?;
    let mut f = create(&out)?;
    let write = |f: &mut BufWriter<File>| -> io::Result<()> {
        writeln!(f, "active,downlink,uplink")?;
        for (k, (d, u)) in down.probabilities.iter().zip(&up.probabilities).enumerate() {
            writeln!(f, "{},{d:.8e},{u:.8e}", k + 1)?;
        }
        f.flush()
    };
    write(&mut f).map_err(|e| io_failure(&out, e))?;
    eprintln!(
        "mean active antennas: downlink {:.3}, uplink {:.3}",
        down.mean(),
        up.mean()
    );
    check_failures(&results, common.max_failure_rate)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Run { common, mode, out } => run(common, mode, out),
        Command::Sweep {
            common,
            axis,
            grid,
            modes,
            out,
            format,
        } => sweep(common, axis, grid, modes, out, format),
        Command::Hist { common, out, weighting } => hist(common, out, weighting),
        Command::Selftest => match selftest::run(&mut io::stdout().lock()) {
            Ok(true) => Ok(()),
            Ok(false) => Err(Failure {
                code: EXIT_SOLVER,
                message: "self-test failed".into(),
            }),
            Err(e) => Err(io_failure(Path::new("<stdout>"), e)),
        },
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

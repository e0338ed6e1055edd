//! rtslab: steady-state EAs with restricted tournament selection on TwoMax.
//!
//! Subcommands: `run` (one run), `grid` (experiment grids to CSV/JSON),
//! `oracle` (exact chain queries on tiny instances), `validate` (check
//! suites). Exit status: 0 completed, 1 configuration error, 2 runtime
//! invariant violation, 3 validation failure.

mod config;
mod output;

use std::fs;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use rtslab_core::engine::{self, AlgorithmConfig, AlgorithmKind, EngineError, SelectionPolicy, StopCriteria};
use rtslab_core::experiments::run_grid;
use rtslab_core::oracle::{Absorption, MarkovModel, OracleLimits};
use rtslab_core::validate::{run_suite, SuiteLevel};
use rtslab_core::{DistanceKind, FitnessKind};

const EXIT_CONFIG: u8 = 1;
const EXIT_INVARIANT: u8 = 2;
const EXIT_VALIDATION: u8 = 3;

#[derive(Parser)]
#[command(name = "rtslab", version, about = "Restricted tournament selection laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one run from a config file and print its summary.
    Run {
        /// TOML run document ([algorithm] and [stop] tables).
        #[arg(long)]
        config: PathBuf,
        /// Seed for the run (reproducibility is mandatory, not opt-in).
        #[arg(long)]
        seed: u64,
        /// Write a per-generation trace (generation, branch counts, branch
        /// bests) to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Execute an experiment grid and write runs.csv, cells.csv, report.json.
    Grid {
        /// TOML grid document ([experiment] table).
        #[arg(long)]
        config: PathBuf,
        /// Master seed; per-run seeds are derived from it.
        #[arg(long)]
        seed: u64,
        /// Output directory for the three artifacts.
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (default: available cores). The RTSLAB_PARALLEL
        /// environment variable overrides this flag.
        #[arg(long)]
        parallel: Option<usize>,
    },
    /// Query the exact chain for a tiny instance.
    Oracle {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        mu: usize,
        #[arg(long)]
        w: usize,
        #[arg(long, value_enum, default_value_t = PolicyArg::WithReplacement)]
        policy: PolicyArg,
        #[arg(long, value_enum, default_value_t = KindArg::Rts)]
        kind: KindArg,
        #[arg(long, value_enum, default_value_t = DistanceArg::Genotypic)]
        distance: DistanceArg,
        /// Print the probability of containing both optima within this many
        /// generations.
        #[arg(long, conflicts_with = "expected")]
        within: Option<u64>,
        /// Print the expected number of generations until both optima are
        /// contained.
        #[arg(long)]
        expected: bool,
        /// Tighten the state-count guardrail.
        #[arg(long)]
        max_states: Option<u128>,
        /// Accepted for interface uniformity; oracle queries are exact and
        /// seed-free.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the validation suites and print one line per check.
    Validate {
        #[arg(long, value_enum, default_value_t = LevelArg::Fast)]
        level: LevelArg,
        /// Worker threads (default: available cores). The RTSLAB_PARALLEL
        /// environment variable overrides this flag.
        #[arg(long)]
        parallel: Option<usize>,
        /// Accepted for interface uniformity; the suites run fixed seeds so
        /// that thresholds stay calibrated.
        #[arg(long)]
        seed: Option<u64>,
        /// Tighten one named check's tolerance to an impossible value to
        /// exercise the failure path.
        #[arg(long, hide = true)]
        break_check: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    WithReplacement,
    WithoutReplacement,
}

impl From<PolicyArg> for SelectionPolicy {
    fn from(value: PolicyArg) -> Self {
        match value {
            PolicyArg::WithReplacement => SelectionPolicy::WithReplacement,
            PolicyArg::WithoutReplacement => SelectionPolicy::WithoutReplacement,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Rts,
    PlainMuPlusOne,
}

impl From<KindArg> for AlgorithmKind {
    fn from(value: KindArg) -> Self {
        match value {
            KindArg::Rts => AlgorithmKind::Rts,
            KindArg::PlainMuPlusOne => AlgorithmKind::PlainMuPlusOne,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DistanceArg {
    Genotypic,
    Phenotypic,
}

impl From<DistanceArg> for DistanceKind {
    fn from(value: DistanceArg) -> Self {
        match value {
            DistanceArg::Genotypic => DistanceKind::Genotypic,
            DistanceArg::Phenotypic => DistanceKind::Phenotypic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Fast,
    Full,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    fn invariant(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVARIANT,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err)
            if matches!(
                err.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) =>
        {
            let _ = err.print();
            return ExitCode::SUCCESS;
        }
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Run { config, seed, trace } => cmd_run(&config, seed, trace.as_deref()),
        Command::Grid {
            config,
            seed,
            out,
            parallel,
        } => cmd_grid(&config, seed, &out, parallel),
        Command::Oracle {
            n,
            mu,
            w,
            policy,
            kind,
            distance,
            within,
            expected,
            max_states,
            seed: _,
        } => cmd_oracle(n, mu, w, policy, kind, distance, within, expected, max_states),
        Command::Validate {
            level,
            parallel,
            seed: _,
            break_check,
        } => cmd_validate(level, parallel, break_check.as_deref()),
    }
}

fn engine_failure(err: EngineError) -> Failure {
    match err {
        EngineError::InvalidConfig(_) => Failure::config(err.to_string()),
        EngineError::ExtinctionGuard { .. } => Failure::invariant(err.to_string()),
    }
}

fn read_to_string(path: &std::path::Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))
}

fn cmd_run(config: &std::path::Path, seed: u64, trace: Option<&std::path::Path>) -> Result<u8, Failure> {
    let cfg: AlgorithmConfig =
        config::parse_run_document(&read_to_string(config)?).map_err(Failure::config)?;
    cfg.validate().map_err(engine_failure)?;
    let result = match trace {
        Some(path) => {
            let file = fs::File::create(path)
                .map_err(|e| Failure::config(format!("cannot create {}: {e}", path.display())))?;
            let mut writer = BufWriter::new(file);
            let mut io_error = None;
            writeln!(writer, "generation,count0,count1,best0,best1")
                .map_err(|e| Failure::config(format!("trace write failed: {e}")))?;
            let result = engine::run_with_observer(&cfg, seed, |generation, stats| {
                if io_error.is_none() {
                    if let Err(e) = writeln!(
                        writer,
                        "{generation},{},{},{},{}",
                        stats.count0, stats.count1, stats.best0, stats.best1
                    ) {
                        io_error = Some(e);
                    }
                }
            })
            .map_err(engine_failure)?;
            if let Some(e) = io_error {
                return Err(Failure::config(format!("trace write failed: {e}")));
            }
            writer
                .flush()
                .map_err(|e| Failure::config(format!("trace write failed: {e}")))?;
            result
        }
        None => engine::run(&cfg, seed).map_err(engine_failure)?,
    };
    println!("status: {}", result.status.token());
    println!("generations: {}", result.generations);
    println!("lone_individual: {}", result.lone_occurred);
    println!("best_branch0: {}", result.best_branch0);
    println!("best_branch1: {}", result.best_branch1);
    println!("min_branch_best: {}", result.min_branch_best());
    Ok(0)
}

fn resolve_parallel(flag: Option<usize>) -> Result<Option<usize>, Failure> {
    match std::env::var("RTSLAB_PARALLEL") {
        Ok(value) => value
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| Failure::config(format!("RTSLAB_PARALLEL must be an integer, got {value:?}"))),
        Err(_) => Ok(flag),
    }
}

fn with_pool<R: Send>(parallel: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, Failure> {
    match parallel {
        None => Ok(f()),
        Some(threads) => {
            if threads == 0 {
                return Err(Failure::config("parallelism must be at least 1"));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Failure::config(format!("cannot build thread pool: {e}")))
                .map(|pool| pool.install(f))
        }
    }
}

fn cmd_grid(
    config: &std::path::Path,
    seed: u64,
    out: &std::path::Path,
    parallel: Option<usize>,
) -> Result<u8, Failure> {
    let spec = config::parse_grid_document(&read_to_string(config)?, seed)
        .map_err(Failure::config)?;
    let parallel = resolve_parallel(parallel)?;
    let report = with_pool(parallel, || run_grid(&spec))?.map_err(engine_failure)?;
    let paths = output::write_outputs(out, &report)
        .map_err(|e| Failure::config(format!("cannot write outputs: {e}")))?;
    for path in &paths {
        println!("wrote {}", path.display());
    }
    if report.any_failed() {
        for cell in &report.cells {
            if let rtslab_core::experiments::CellOutcome::Failed {
                key,
                run_index,
                seed,
                error,
            } = cell
            {
                eprintln!(
                    "cell mu={} w={} failed at run {run_index} (seed {seed}): {error}",
                    key.mu, key.w
                );
            }
        }
        return Ok(EXIT_INVARIANT);
    }
    Ok(0)
}

/// Round to 12 significant digits and print the shortest representation.
fn significant_12(value: f64) -> String {
    if value == 0.0 {
        return "0".into();
    }
    format!("{value:.11e}").parse::<f64>().unwrap().to_string()
}

#[allow(clippy::too_many_arguments)]
fn cmd_oracle(
    n: usize,
    mu: usize,
    w: usize,
    policy: PolicyArg,
    kind: KindArg,
    distance: DistanceArg,
    within: Option<u64>,
    expected: bool,
    max_states: Option<u128>,
) -> Result<u8, Failure> {
    if within.is_none() && !expected {
        return Err(Failure::config("pass --within <T> or --expected"));
    }
    let mut limits = OracleLimits::default();
    if let Some(max) = max_states {
        limits.max_states = max;
    }
    let cfg = AlgorithmConfig {
        n,
        mu,
        w,
        kind: kind.into(),
        policy: policy.into(),
        distance: distance.into(),
        fitness: FitnessKind::TwoMax,
        stop: StopCriteria::both_optima(),
    };
    cfg.validate().map_err(engine_failure)?;
    let model = MarkovModel::build(&cfg, &limits).map_err(|e| Failure::config(e.to_string()))?;
    let init = model.uniform_init();
    if let Some(horizon) = within {
        println!("{}", significant_12(model.success_probability_within(&init, horizon)));
    } else {
        match model.expected_absorption_time(&init) {
            Absorption::Finite(t) => println!("{}", significant_12(t)),
            Absorption::Infinite { closed_class } => {
                println!("inf");
                eprintln!("absorption unreachable; closed class:");
                for state in closed_class {
                    eprintln!("  {state}");
                }
            }
        }
    }
    Ok(0)
}

fn cmd_validate(
    level: LevelArg,
    parallel: Option<usize>,
    break_check: Option<&str>,
) -> Result<u8, Failure> {
    let level = match level {
        LevelArg::Fast => SuiteLevel::Fast,
        LevelArg::Full => SuiteLevel::Full,
    };
    let parallel = resolve_parallel(parallel)?;
    let outcomes = with_pool(parallel, || run_suite(level, break_check))?;
    let mut failed = 0usize;
    for outcome in &outcomes {
        println!(
            "{} {} — {}",
            if outcome.passed { "PASS" } else { "FAIL" },
            outcome.id,
            outcome.summary
        );
        if !outcome.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        eprintln!("{failed} of {} checks failed", outcomes.len());
        return Ok(EXIT_VALIDATION);
    }
    println!("all {} checks passed", outcomes.len());
    Ok(0)
}

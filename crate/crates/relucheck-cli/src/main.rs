//! Command-line front end for the relucheck verifier.
//!
//! Three subcommands share one output contract: the first stdout line is
//! exactly one of `sat`, `unsat`, `unknown`, or `timeout`. A `sat` line
//! is followed by one `X_i = value` line per input coordinate, and every
//! witness is re-validated against the parsed problem before printing.
//! Exit status: 0 for a definitive answer (`sat`/`unsat`), 1 for
//! `unknown`/`timeout`, 2 for usage, file, or parse errors.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};

use relucheck::attack::{attack, AttackConfig};
use relucheck::io::VerificationProblem;
use relucheck::oracle::enumerate_verify;
use relucheck::sat::RestartPolicy;
use relucheck::solver::{verify, Outcome, SearchMode, SearchStats, SolverConfig, Verdict};
use relucheck::theory::bounds::Abstraction;
use relucheck::theory::lp::LpRelaxation;
use relucheck::theory::TheoryConfig;

#[derive(Parser)]
#[command(
    name = "relucheck",
    version,
    about = "Complete verification of ReLU feedforward networks",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide the property: attacks first, then the complete search.
    Verify(VerifyArgs),
    /// Only run the falsification attacks (never proves a property).
    Falsify(FalsifyArgs),
    /// Run every search mode on one problem and tabulate statistics.
    Ablate(AblateArgs),
}

/// Flags every subcommand needs to pose the problem.
#[derive(Args)]
struct ProblemArgs {
    /// Network description (JSON).
    #[arg(long, value_name = "FILE")]
    net: PathBuf,
    /// Property file (VNN-LIB subset).
    #[arg(long, value_name = "FILE")]
    prop: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Seed for branching noise, phase choice, and attack sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Wall-clock budget in seconds.
    #[arg(long, default_value_t = 60.0, value_name = "SECS")]
    timeout: f64,
    /// Search variant (restarts and clause learning toggles).
    #[arg(long, value_enum, default_value_t = ModeArg::Full)]
    mode: ModeArg,
    /// Bound propagation domain for the theory solver.
    #[arg(long, value_enum, default_value_t = AbstractionArg::Both)]
    abstraction: AbstractionArg,
    /// Linear relaxation of unfixed activations in theory LPs.
    #[arg(long, value_enum, default_value_t = RelaxationArg::Triangle)]
    lp_relaxation: RelaxationArg,
    /// Decide by exact activation-pattern enumeration instead of search
    /// (refused above 20 hidden neurons).
    #[arg(long)]
    oracle: bool,
    /// Sub-boxes per input dimension (1 disables splitting).
    #[arg(long, default_value_t = 1, value_name = "N")]
    split: usize,
    /// Worker threads for independent subproblems (1 = sequential).
    #[arg(long, default_value_t = 1, value_name = "N")]
    jobs: usize,
    /// Write search statistics to FILE: key=value lines, or a CSV
    /// header+row when FILE ends in .csv.
    #[arg(long, value_name = "FILE")]
    stats: Option<PathBuf>,
}

#[derive(Args)]
struct FalsifyArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Seed for sampling and ascent start points.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Uniform samples drawn from the input box.
    #[arg(long, default_value_t = 1000, value_name = "N")]
    samples: usize,
    /// Gradient ascent steps per start point.
    #[arg(long, default_value_t = 50, value_name = "N")]
    pgd_steps: usize,
    /// Independent ascent start points.
    #[arg(long, default_value_t = 5, value_name = "N")]
    pgd_restarts: usize,
    /// Write wall-time statistics to FILE (key=value, or CSV for .csv).
    #[arg(long, value_name = "FILE")]
    stats: Option<PathBuf>,
}

#[derive(Args)]
struct AblateArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Wall-clock budget in seconds, applied to each mode separately.
    #[arg(long, default_value_t = 60.0, value_name = "SECS")]
    timeout: f64,
    #[arg(long, value_enum, default_value_t = AbstractionArg::Both)]
    abstraction: AbstractionArg,
    #[arg(long, default_value_t = 1, value_name = "N")]
    jobs: usize,
    /// Also write the per-mode CSV table to FILE.
    #[arg(long, value_name = "FILE")]
    stats: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Full,
    NoRestart,
    NoLearning,
}

impl From<ModeArg> for SearchMode {
    fn from(m: ModeArg) -> SearchMode {
        match m {
            ModeArg::Full => SearchMode::Full,
            ModeArg::NoRestart => SearchMode::NoRestart,
            ModeArg::NoLearning => SearchMode::NoLearning,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AbstractionArg {
    Interval,
    Polytope,
    Both,
}

impl From<AbstractionArg> for Abstraction {
    fn from(a: AbstractionArg) -> Abstraction {
        match a {
            AbstractionArg::Interval => Abstraction::Interval,
            AbstractionArg::Polytope => Abstraction::Polytope,
            AbstractionArg::Both => Abstraction::Both,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RelaxationArg {
    Triangle,
    Loose,
}

impl From<RelaxationArg> for LpRelaxation {
    fn from(r: RelaxationArg) -> LpRelaxation {
        match r {
            RelaxationArg::Triangle => LpRelaxation::Triangle,
            RelaxationArg::Loose => LpRelaxation::Loose,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(args) => run_verify(&args),
        Command::Falsify(args) => run_falsify(&args),
        Command::Ablate(args) => run_ablate(&args),
    };
    match result {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

/// Read and parse the network and property files.
fn load_problem(args: &ProblemArgs) -> Result<VerificationProblem, String> {
    let net_text = std::fs::read_to_string(&args.net)
        .map_err(|e| format!("{}: {e}", args.net.display()))?;
    let net = relucheck::io::parse_network(&net_text)
        .map_err(|e| format!("{}: {e}", args.net.display()))?;
    let prop_text = std::fs::read_to_string(&args.prop)
        .map_err(|e| format!("{}: {e}", args.prop.display()))?;
    relucheck::io::parse_vnnlib(&prop_text, &net)
        .map_err(|e| format!("{}: {e}", args.prop.display()))
}

fn parse_timeout(secs: f64) -> Result<Duration, String> {
    if secs.is_finite() && secs >= 0.0 {
        Ok(Duration::from_secs_f64(secs))
    } else {
        Err(format!("--timeout must be a non-negative number of seconds, got {secs}"))
    }
}

/// Print the verdict in the machine-parseable format and map it to an
/// exit code. The witness of a `sat` answer is re-validated here; a
/// candidate that fails validation is reported as `unknown`, never as a
/// false `sat`.
fn print_outcome(problem: &VerificationProblem, outcome: &Outcome) -> ExitCode {
    match outcome {
        Outcome::Sat(x) if problem.validate_witness(x) => {
            println!("sat");
            for (i, v) in x.iter().enumerate() {
                println!("X_{i} = {v}");
            }
            ExitCode::SUCCESS
        }
        Outcome::Sat(_) => {
            println!("unknown");
            eprintln!("error: counterexample candidate failed validation");
            ExitCode::from(1)
        }
        Outcome::Unsat => {
            println!("unsat");
            ExitCode::SUCCESS
        }
        Outcome::Unknown(reason) => {
            println!("unknown");
            eprintln!("unknown: {reason}");
            ExitCode::from(1)
        }
        Outcome::Timeout => {
            println!("timeout");
            ExitCode::from(1)
        }
    }
}

/// Write statistics to `path`: CSV when the extension is `.csv`,
/// otherwise `key=value` lines.
fn write_stats(path: &PathBuf, stats: &SearchStats) -> Result<(), String> {
    let text = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        format!("{}\n{}\n", SearchStats::CSV_HEADER, stats.csv_row())
    } else {
        stats.report()
    };
    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn run_verify(args: &VerifyArgs) -> Result<ExitCode, String> {
    if args.split == 0 {
        return Err("--split must be at least 1".to_string());
    }
    if args.jobs == 0 {
        return Err("--jobs must be at least 1".to_string());
    }
    let problem = load_problem(&args.problem)?;
    let config = SolverConfig {
        seed: args.seed,
        timeout: parse_timeout(args.timeout)?,
        mode: args.mode.into(),
        theory: TheoryConfig {
            abstraction: args.abstraction.into(),
            relaxation: args.lp_relaxation.into(),
            ..TheoryConfig::default()
        },
        restarts: RestartPolicy::default(),
        attack: AttackConfig { seed: args.seed, ..AttackConfig::default() },
        split: args.split,
        split_threshold: SolverConfig::default().split_threshold,
        jobs: args.jobs,
    };
    let verdict: Verdict =
        if args.oracle { enumerate_verify(&problem).map_err(|e| e.to_string())? } else { verify(&problem, &config) };
    let code = print_outcome(&problem, &verdict.outcome);
    if let Some(path) = &args.stats {
        write_stats(path, &verdict.stats)?;
    }
    Ok(code)
}

fn run_falsify(args: &FalsifyArgs) -> Result<ExitCode, String> {
    let problem = load_problem(&args.problem)?;
    let config = AttackConfig {
        seed: args.seed,
        samples: args.samples,
        pgd_steps: args.pgd_steps,
        pgd_restarts: args.pgd_restarts,
        ..AttackConfig::default()
    };
    let start = Instant::now();
    let outcome = match attack(&problem, &config) {
        Some(x) => Outcome::Sat(x),
        None => Outcome::Unknown("attacks found no counterexample".to_string()),
    };
    let code = print_outcome(&problem, &outcome);
    if let Some(path) = &args.stats {
        let stats = SearchStats { wall_time: start.elapsed().as_secs_f64(), ..SearchStats::default() };
        write_stats(path, &stats)?;
    }
    Ok(code)
}

/// One row of the ablation table.
fn ablation_row(mode_name: &str, verdict: &Verdict) -> String {
    format!("{mode_name},{},{}", verdict.outcome.label(), verdict.stats.csv_row())
}

fn run_ablate(args: &AblateArgs) -> Result<ExitCode, String> {
    if args.jobs == 0 {
        return Err("--jobs must be at least 1".to_string());
    }
    let problem = load_problem(&args.problem)?;
    let base = SolverConfig {
        seed: args.seed,
        timeout: parse_timeout(args.timeout)?,
        theory: TheoryConfig {
            abstraction: args.abstraction.into(),
            ..TheoryConfig::default()
        },
        attack: AttackConfig { seed: args.seed, ..AttackConfig::default() },
        jobs: args.jobs,
        ..SolverConfig::default()
    };
    let modes =
        [("full", SearchMode::Full), ("no-restart", SearchMode::NoRestart), ("no-learning", SearchMode::NoLearning)];
    let verdicts: Vec<(&str, Verdict)> = modes
        .iter()
        .map(|&(name, mode)| (name, verify(&problem, &SolverConfig { mode, ..base.clone() })))
        .collect();

    // Report under the same first-line contract as `verify`: the full
    // search's verdict speaks for the run, then one CSV row per mode.
    let (_, full) = &verdicts[0];
    let code = print_outcome(&problem, &full.outcome);
    let mut table = format!("mode,verdict,{}\n", SearchStats::CSV_HEADER);
    for (name, verdict) in &verdicts {
        table.push_str(&ablation_row(name, verdict));
        table.push('\n');
    }
    print!("{table}");
    for (name, verdict) in &verdicts[1..] {
        if verdict.outcome.is_definitive() && full.outcome.is_definitive() && verdict.outcome.label() != full.outcome.label()
        {
            return Err(format!("mode {name} disagrees with the full search: {} vs {}", verdict.outcome.label(), full.outcome.label()));
        }
    }
    if let Some(path) = &args.stats {
        std::fs::write(path, &table).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(code)
}

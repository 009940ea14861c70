//! `hk`: simulate, verify, sweep and generate scalar HK instances.
//!
//! Exit codes: 0 ok, 1 invariant violation, 2 input error, 3 truncation,
//! 4 dynamics mismatch.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context as _;
use clap::{Parser, Subcommand, ValueEnum};

use hk_core::dynamics::default_max_steps;
use hk_core::float::simulate_f64;
use hk_core::generators::{generate, InstanceKind, InstanceSpec, DEFAULT_MAX_DENOM};
use hk_core::invariants::CheckSuiteResult;
use hk_core::io::{decomposition_to_json, ingest, read_trajectory, write_annotated, write_profile, write_trajectory};
use hk_core::pipeline::{run, verify_records, RunReport};
use hk_core::rational::{parse_rational, to_f64, Rational};
use hk_core::sweep::{run_sweep, write_csv, SweepConfig};

const EXIT_VIOLATION: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_TRUNCATED: u8 = 3;
const EXIT_MISMATCH: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "hk", version, about = "Exact scalar Hegselmann-Krause simulator and proof checker")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one profile until termination
    Simulate(SimulateArgs),
    /// Re-verify a stored trajectory
    Verify(VerifyArgs),
    /// Run a parameter sweep and write CSV
    Sweep(SweepArgs),
    /// Write a generated profile as JSON
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    UniformRandom,
    Equidistant,
    TwoCluster,
    Dumbbell,
}

#[derive(clap::Args, Debug)]
struct SimulateArgs {
    /// Profile JSON: {"epsilon": "...", "opinions": [...]}
    #[arg(long)]
    input: PathBuf,
    /// Override the confidence bound from the input
    #[arg(long, value_parser = rational_arg)]
    epsilon: Option<Rational>,
    /// Step budget (default 3n^3 + n)
    #[arg(long)]
    max_steps: Option<usize>,
    /// Trajectory JSON Lines output
    #[arg(long)]
    emit: Option<PathBuf>,
    /// Annotated trajectory JSON Lines output
    #[arg(long)]
    annotated: Option<PathBuf>,
    /// Phase decomposition JSON output
    #[arg(long)]
    phases: Option<PathBuf>,
    /// Run the invariant suite; nonzero exit on any violation
    #[arg(long)]
    check: bool,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    mode: Mode,
    /// Equality tolerance in float mode
    #[arg(long, default_value_t = 1e-12)]
    tolerance: f64,
}

#[derive(clap::Args, Debug)]
struct VerifyArgs {
    /// Trajectory JSON Lines written by `simulate --emit`
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = rational_arg)]
    epsilon: Rational,
    /// Phase decomposition JSON output
    #[arg(long)]
    phases: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
struct InstanceArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long, value_parser = rational_arg, default_value = "1")]
    epsilon: Rational,
    #[arg(long, value_parser = rational_arg)]
    spacing: Option<Rational>,
    #[arg(long, value_parser = rational_arg)]
    gap: Option<Rational>,
    /// Cluster sizes as "a,b"
    #[arg(long, value_parser = sizes_arg)]
    sizes: Option<(usize, usize)>,
    #[arg(long, value_parser = rational_arg, default_value = "0")]
    base: Rational,
}

impl InstanceArgs {
    fn spec(&self, n: usize, seed: u64) -> anyhow::Result<InstanceSpec> {
        let kind = match self.kind {
            Kind::UniformRandom => InstanceKind::UniformRandom,
            Kind::Equidistant => InstanceKind::Equidistant,
            Kind::TwoCluster => InstanceKind::TwoCluster,
            Kind::Dumbbell => InstanceKind::Dumbbell,
        };
        let mut spec = InstanceSpec::new(kind, n, self.epsilon.clone()).with_seed(seed);
        spec.spacing = self.spacing.clone();
        spec.gap = self.gap.clone();
        spec.sizes = self.sizes;
        spec.base = self.base.clone();
        spec.max_denom = max_denom_from_env()?;
        Ok(spec)
    }
}

#[derive(clap::Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long)]
    n_min: usize,
    #[arg(long)]
    n_max: usize,
    #[arg(long, default_value_t = 1)]
    n_step: usize,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    /// Seed of the first repetition; repetition r uses seed + r
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    max_steps: Option<usize>,
    /// CSV output (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write all rows even if some instance fails its checks
    #[arg(long)]
    keep_going: bool,
    /// Write 0 in the ms column so runs compare byte for byte
    #[arg(long)]
    no_timing: bool,
}

#[derive(clap::Args, Debug)]
struct GenerateArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Profile JSON output (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn sizes_arg(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected \"a,b\", got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| e.to_string());
    Ok((parse(a)?, parse(b)?))
}

fn max_denom_from_env() -> anyhow::Result<u64> {
    match std::env::var("HK_MAX_DENOM") {
        Ok(v) => v
            .parse()
            .with_context(|| format!("HK_MAX_DENOM must be a positive integer, got {v:?}")),
        Err(_) => Ok(DEFAULT_MAX_DENOM),
    }
}

/// Failure carrying the exit code it maps to.
#[derive(Debug)]
struct Exit(u8, anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Exit {
    fn from(e: E) -> Self {
        let e = e.into();
        let code = match e.downcast_ref::<hk_core::Error>() {
            Some(hk_core::Error::DynamicsMismatch { .. }) => EXIT_MISMATCH,
            Some(hk_core::Error::Truncated(_)) => EXIT_TRUNCATED,
            _ => EXIT_INPUT,
        };
        Exit(code, e)
    }
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn print_suite(suite: &CheckSuiteResult) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string(suite)?);
    for v in &suite.violations {
        eprintln!("violation [{}] {}", v.check_id, v.message);
    }
    Ok(())
}

fn write_phases(path: Option<&PathBuf>, report: &RunReport) -> anyhow::Result<()> {
    if let (Some(path), Some(d)) = (path, &report.decomposition) {
        let mut w = create(path)?;
        writeln!(w, "{}", decomposition_to_json(d))?;
        w.flush()?;
    }
    Ok(())
}

fn simulate_cmd(args: SimulateArgs) -> Result<u8, Exit> {
    if args.mode == Mode::Float && args.check {
        return Err(Exit(
            EXIT_INPUT,
            anyhow::anyhow!("--check needs exact mode; float runs are not verifiable"),
        ));
    }
    let mut profile = ingest(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    if let Some(eps) = args.epsilon {
        profile = profile.with_epsilon(eps)?;
    }
    let budget = args.max_steps.unwrap_or_else(|| default_max_steps(profile.len()));

    if args.mode == Mode::Float {
        let xs: Vec<f64> = profile.opinions().iter().map(to_f64).collect();
        let result = simulate_f64(&xs, to_f64(profile.epsilon()), args.tolerance, budget);
        if let Some(path) = &args.emit {
            let mut w = create(path)?;
            for (t, x) in result.profiles.iter().enumerate() {
                let xs: Vec<String> = x.iter().map(|v| v.to_string()).collect();
                writeln!(w, "{}", serde_json::json!({"t": t, "x": xs}))?;
            }
            w.flush()?;
        }
        println!(
            "mode=float n={} T={} truncated={}",
            profile.len(),
            result.t,
            result.truncated
        );
        return Ok(if result.truncated { EXIT_TRUNCATED } else { 0 });
    }

    let report = run(&profile, budget, args.check);
    if let Some(path) = &args.emit {
        let mut w = create(path)?;
        write_trajectory(&mut w, &report.annotated.trajectory)?;
        w.flush()?;
    }
    if let Some(path) = &args.annotated {
        let mut w = create(path)?;
        write_annotated(&mut w, &report.annotated)?;
        w.flush()?;
    }
    write_phases(args.phases.as_ref(), &report)?;

    let splits = report
        .decomposition
        .as_ref()
        .map_or(0, |d| d.splits.len());
    println!(
        "n={} T={} I={} D={} S={} phases={} truncated={}",
        profile.len(),
        report.termination.t,
        report.increase_count(),
        report.decrease_count(),
        report.split_count(),
        splits + 1,
        report.termination.truncated
    );
    if report.termination.truncated {
        eprintln!("no termination within {budget} steps");
        return Ok(EXIT_TRUNCATED);
    }
    if let Some(suite) = &report.suite {
        print_suite(suite)?;
        if !suite.passed() {
            return Ok(EXIT_VIOLATION);
        }
    }
    Ok(0)
}

fn verify_cmd(args: VerifyArgs) -> Result<u8, Exit> {
    let file = File::open(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let records = read_trajectory(file)?;
    let report = verify_records(&records, &args.epsilon)?;
    write_phases(args.phases.as_ref(), &report)?;
    let suite = report.suite.as_ref().expect("verified runs carry a suite");
    print_suite(suite)?;
    Ok(if suite.passed() { 0 } else { EXIT_VIOLATION })
}

fn sweep_cmd(args: SweepArgs) -> Result<u8, Exit> {
    let config = SweepConfig {
        template: args.instance.spec(args.n_min, args.seed)?,
        n_min: args.n_min,
        n_max: args.n_max,
        n_step: args.n_step,
        repetitions: args.reps,
        seed_base: args.seed,
        max_steps: args.max_steps,
    };
    let outcome = run_sweep(&config)?;
    for f in &outcome.failures {
        eprintln!("instance n={} seed={} failed: {}", f.n, f.seed, f.reason);
        for v in &f.violations {
            eprintln!("  [{}] {}", v.check_id, v.message);
        }
    }
    if !outcome.failures.is_empty() && !args.keep_going {
        eprintln!("sweep aborted; rerun with --keep-going to write all rows");
        return Ok(EXIT_VIOLATION);
    }
    let mut w = output(args.out.as_deref())?;
    write_csv(&mut w, &outcome.rows, !args.no_timing)?;
    w.flush()?;
    Ok(if outcome.failures.is_empty() { 0 } else { EXIT_VIOLATION })
}

fn generate_cmd(args: GenerateArgs) -> Result<u8, Exit> {
    let profile = generate(&args.instance.spec(args.n, args.seed)?)?;
    let mut w = output(args.out.as_deref())?;
    write_profile(&mut w, &profile)?;
    w.flush()?;
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate_cmd(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Sweep(a) => sweep_cmd(a),
        Command::Generate(a) => generate_cmd(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Exit(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}

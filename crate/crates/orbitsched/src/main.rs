//! Command-line front end. All logic lives in the library; this binary only
//! parses flags, wires files to the library calls, and maps outcomes to exit
//! codes: 0 success, 1 usage/input error, 2 validation found violations,
//! 3 solver failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use orbitsched::bench::{self, ExperimentSpec, ResourceMode};
use orbitsched::scenario::{self, GroundStation, Scenario};
use orbitsched::solvers::{self, SolverError, SolverSettings};
use orbitsched::validate;
use orbitsched::{Error, PlanDocument};

const SEED_ENV: &str = "ORBITSCHED_SEED";

#[derive(Parser)]
#[command(name = "orbitsched", version, about = "Agile Earth-observation task scheduling toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a scenario file from randomly sampled image locations.
    Gen(GenArgs),
    /// Compute opportunity windows for a scenario.
    Access(AccessArgs),
    /// Plan a schedule with one of the solvers.
    Plan(PlanArgs),
    /// Replay a plan against its scenario and report violations.
    Validate(ValidateArgs),
    /// Run a benchmark experiment from a spec file.
    Bench(BenchArgs),
    /// Brute-force hyperparameter grid search on one scenario.
    Grid(GridArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Number of image locations to sample.
    #[arg(long)]
    locations: usize,
    /// PRNG seed; defaults to $ORBITSCHED_SEED or 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Planning horizon in seconds.
    #[arg(long = "horizon-s", default_value_t = 86_400.0)]
    horizon_s: f64,
    /// Output scenario file.
    #[arg(long)]
    out: PathBuf,
    /// JSON file with a ground-station array; replaces the built-in network.
    #[arg(long)]
    stations: Option<PathBuf>,
    /// Imaging cone half-angle applied to every request, degrees.
    #[arg(long = "max-off-nadir", default_value_t = scenario::DEFAULT_MAX_OFF_NADIR_DEG)]
    max_off_nadir: f64,
}

#[derive(Args)]
struct AccessArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Output scenario file including the computed opportunities.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Solver name: forward, mcts, rule, graph, or bnb.
    #[arg(long)]
    solver: String,
    /// Output plan file.
    #[arg(long)]
    out: PathBuf,
    /// Discount per second.
    #[arg(long)]
    gamma: Option<f64>,
    /// Lookahead depth in decision steps.
    #[arg(long = "d-solve")]
    d_solve: Option<usize>,
    /// Exploration weight (mcts).
    #[arg(long)]
    c: Option<f64>,
    /// Simulations per planning step (mcts).
    #[arg(long = "n-sim")]
    n_sim: Option<usize>,
    /// Cap on feasible actions enumerated per state.
    #[arg(long = "n-a-max")]
    n_a_max: Option<usize>,
    /// Resource handling: on or off.
    #[arg(long, default_value = "off")]
    resources: String,
    /// PRNG seed (mcts); defaults to $ORBITSCHED_SEED or 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Branch-and-bound time limit in seconds.
    #[arg(long = "time-limit-s")]
    time_limit_s: Option<f64>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    plan: PathBuf,
    /// Write the replayed resource trace as CSV (columns t_s,p,d).
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Experiment spec (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Output directory for results.csv, summary.txt, and charts.
    #[arg(long = "out-dir")]
    out_dir: PathBuf,
    /// Worker pool width.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    solver: String,
    /// JSON object mapping parameter names to value arrays.
    #[arg(long)]
    grid: PathBuf,
    /// Output CSV of ranked grid points.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "off")]
    resources: String,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's own exit code conventions differ; everything
            // usage-shaped maps to 1 here, while --help/--version stay 0.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Solver(msg)) => {
            eprintln!("solver error: {msg}");
            ExitCode::from(3)
        }
    }
}

enum CliError {
    Usage(String),
    Solver(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            // Asking for an unsupported mode or a nonexistent solver is a
            // usage problem; failures inside a solver are not.
            SolverError::UnknownSolver { .. } | SolverError::ResourcesUnsupported { .. } => {
                CliError::Usage(e.to_string())
            }
            SolverError::MissingSunpointTwin { .. } => CliError::Solver(e.to_string()),
        }
    }
}

fn env_seed() -> u64 {
    std::env::var(SEED_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0)
}

fn parse_resources(value: &str) -> Result<bool, CliError> {
    match value {
        "on" => Ok(true),
        "off" => Ok(false),
        other => Err(CliError::Usage(format!(
            "--resources must be 'on' or 'off', got '{other}'"
        ))),
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Gen(args) => gen(args),
        Command::Access(args) => access(args),
        Command::Plan(args) => plan(args),
        Command::Validate(args) => validate_cmd(args),
        Command::Bench(args) => bench_cmd(args),
        Command::Grid(args) => grid_cmd(args),
    }
}

fn gen(args: GenArgs) -> Result<ExitCode, CliError> {
    if args.locations == 0 {
        return Err(CliError::Usage("--locations must be at least 1".into()));
    }
    if !(args.max_off_nadir > 0.0 && args.max_off_nadir < 90.0) {
        return Err(CliError::Usage("--max-off-nadir must be in (0, 90)".into()));
    }
    let seed = args.seed.unwrap_or_else(env_seed);
    let stations = match &args.stations {
        None => scenario::default_stations(),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let stations: Vec<GroundStation> =
                serde_json::from_str(&text).map_err(|e| Error::Parse {
                    path: path.display().to_string(),
                    source: e,
                })?;
            stations
        }
    };
    let mut s = scenario::generate(args.locations, seed, args.horizon_s, stations);
    for r in &mut s.requests {
        r.max_off_nadir_deg = args.max_off_nadir;
    }
    s.validate()?;
    s.save(&args.out)?;
    println!(
        "wrote {} ({} requests, {} stations, horizon {} s, seed {seed})",
        args.out.display(),
        s.requests.len(),
        s.stations.len(),
        s.horizon_s
    );
    Ok(ExitCode::SUCCESS)
}

fn access(args: AccessArgs) -> Result<ExitCode, CliError> {
    let mut s = Scenario::load(&args.scenario)?;
    s.opportunities = s.compute_opportunities();
    s.save(&args.out)?;
    let collects = s
        .opportunities
        .iter()
        .filter(|o| o.mode == scenario::Mode::Collect)
        .count();
    let contacts = s
        .opportunities
        .iter()
        .filter(|o| o.mode == scenario::Mode::Contact)
        .count();
    println!(
        "wrote {} ({} opportunities: {collects} collect, {contacts} contact, {} sunpoint)",
        args.out.display(),
        s.opportunities.len(),
        s.opportunities.len() - collects - contacts
    );
    Ok(ExitCode::SUCCESS)
}

fn plan(args: PlanArgs) -> Result<ExitCode, CliError> {
    let resources = parse_resources(&args.resources)?;
    let mut s = Scenario::load(&args.scenario)?;
    if s.opportunities.is_empty() {
        s.opportunities = s.compute_opportunities();
    }

    let mut settings = SolverSettings::named(&args.solver);
    if !solvers::SOLVER_NAMES.contains(&args.solver.as_str()) {
        return Err(SolverError::UnknownSolver { name: args.solver }.into());
    }
    if let Some(v) = args.gamma {
        settings.gamma = v;
    }
    if let Some(v) = args.d_solve {
        settings.d_solve = v;
    }
    if let Some(v) = args.c {
        settings.c = v;
    }
    if let Some(v) = args.n_sim {
        settings.n_sim = v;
    }
    if let Some(v) = args.n_a_max {
        settings.n_a_max = v;
    }
    if let Some(v) = args.time_limit_s {
        settings.time_limit_s = v;
    }
    settings.seed = args.seed.unwrap_or_else(env_seed);

    let plan = solvers::run_solver(&settings, &s, resources)?;
    plan.to_document().save(&args.out)?;
    println!(
        "solver={} reward={:.6} images={} runtime={:.3}s",
        plan.solver_name, plan.total_reward, plan.images_collected, plan.wall_time_s
    );
    Ok(ExitCode::SUCCESS)
}

fn validate_cmd(args: ValidateArgs) -> Result<ExitCode, CliError> {
    let s = Scenario::load(&args.scenario)?;
    let doc = PlanDocument::load(&args.plan)?;
    // Replay under the plan's own recorded model configuration.
    let config = doc
        .config_snapshot
        .get("smdp")
        .and_then(|v| serde_json::from_value(v.clone()).ok())
        .unwrap_or_default();
    let report = validate::validate(&doc, &s, &config);
    print!("{}", report.render_text());
    let claimed = doc.totals.total_reward;
    println!(
        "claimed_reward: {claimed}\nreward_delta: {:.3e}",
        (claimed - report.recomputed_reward).abs()
    );
    if let Some(path) = &args.trace {
        std::fs::write(path, report.trace_csv()).map_err(|e| Error::io(path, e))?;
        println!("trace: {}", path.display());
    }
    if report.feasible {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(2))
    }
}

fn bench_cmd(args: BenchArgs) -> Result<ExitCode, CliError> {
    let mut spec = ExperimentSpec::load(&args.spec)?;
    if spec.base_seed.is_none() {
        spec.base_seed = Some(env_seed());
    }
    let jobs = args.jobs.unwrap_or_else(|| {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    });
    let rows = bench::run_experiment(&spec, jobs)?;
    bench::write_outputs(&rows, &args.out_dir)?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    println!(
        "{} runs ({} failed) -> {}",
        rows.len(),
        failed,
        args.out_dir.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn grid_cmd(args: GridArgs) -> Result<ExitCode, CliError> {
    let resources = if parse_resources(&args.resources)? {
        ResourceMode::With
    } else {
        ResourceMode::Without
    };
    let mut s = Scenario::load(&args.scenario)?;
    if s.opportunities.is_empty() {
        s.opportunities = s.compute_opportunities();
    }
    if !solvers::SOLVER_NAMES.contains(&args.solver.as_str()) {
        return Err(SolverError::UnknownSolver { name: args.solver }.into());
    }
    let text = std::fs::read_to_string(&args.grid).map_err(|e| Error::io(&args.grid, e))?;
    let axes: bench::GridAxes = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: args.grid.display().to_string(),
        source: e,
    })?;

    let mut base = SolverSettings::named(&args.solver);
    base.seed = args.seed.unwrap_or_else(env_seed);
    let rows = bench::grid_search(&s, &base, &axes, resources)?;
    std::fs::write(&args.out, bench::grid_to_csv(&rows)).map_err(|e| Error::io(&args.out, e))?;

    println!("{} grid points -> {}", rows.len(), args.out.display());
    for row in bench::best_per_n_a_max(&rows) {
        println!("best {:?}: mean_reward={:.6} over {} runs", row.params, row.mean_reward, row.runs);
    }
    Ok(ExitCode::SUCCESS)
}

//! `homodyne`: simulate adaptive homodyne detection of coherent-state
//! ensembles and export the derived data products.
//!
//! Subcommands map one-to-one onto reproducible artifacts: `simulate` for a
//! single (ensemble, policy) mutual-information estimate, `table1` for the
//! full policy-comparison table, `bounds` for the capacity-bound curves,
//! `holevo` for ensemble Holevo information, and `povm` for sampled
//! measurement-projector ellipses.
//!
//! Every artifact embeds the fully resolved configuration, including the
//! master seed, so re-running with the embedded config reproduces the data
//! byte for byte; timestamps live in a separate `meta` field.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use homodyne_core::information::{
    capacity_heterodyne, capacity_holevo_bound, capacity_homodyne_squeezed, holevo_information,
    DEFAULT_FOCK_NMAX,
};
use homodyne_core::montecarlo::{compare_policies, run_batch, CompareOptions, PolicyComparison};
use homodyne_core::povm::sample_povm;
use homodyne_core::trajectory::{bayes_update, run_trajectory, GaussianNoise};
use homodyne_core::{Ensemble, Error as CoreError, PolicySpec, SimConfig};

use output::{csv_artifact, json_artifact, render_table1, OUT_DIR_ENV};

#[derive(Parser)]
#[command(name = "homodyne", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate mutual information for one ensemble and policy.
    Simulate(SimulateArgs),
    /// Run the three policies on the three builtin ensembles and emit the
    /// combined comparison table.
    Table1(Table1Args),
    /// Emit the capacity-bound curves I1, I2, I3 over a photon-number grid.
    Bounds(BoundsArgs),
    /// Compute the Holevo information of an ensemble.
    Holevo(HolevoArgs),
    /// Sample measurement projectors and export their Wigner ellipses.
    Povm(PovmArgs),
}

#[derive(Args, Clone)]
struct SimArgs {
    /// Time step, in cavity-lifetime units.
    #[arg(long, default_value_t = 5e-3)]
    dt: f64,
    /// Final time; tmax/dt must be a whole number of steps.
    #[arg(long, default_value_t = 10.0)]
    tmax: f64,
    /// Master seed; per-trajectory streams derive from it.
    #[arg(long, default_value_t = 2001)]
    seed: u64,
    /// Worker threads (default: one per CPU).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args, Clone)]
struct PolicyArgs {
    /// LO phase policy.
    #[arg(long, value_enum)]
    policy: PolicyKind,
    /// Heterodyne phase increment per step, radians.
    #[arg(long, default_value_t = 0.1)]
    het_step: f64,
    /// Phase for the fixed policy, radians.
    #[arg(long, default_value_t = 0.0)]
    fixed_phase: f64,
}

#[derive(Args, Clone)]
struct OutArgs {
    /// Output directory (default: $HOMODYNE_OUT_DIR, then the working
    /// directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Artifact format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct SimulateArgs {
    /// Builtin ensemble name (8psk, 16qam, star) or a definition file path.
    #[arg(long)]
    ensemble: String,
    #[command(flatten)]
    policy: PolicyArgs,
    /// Number of trajectories.
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[command(flatten)]
    sim: SimArgs,
    #[command(flatten)]
    out: OutArgs,
    /// Also dump trajectory 0's full record (t, phi, dQ, posterior) to this
    /// CSV path.
    #[arg(long)]
    dump_record: Option<PathBuf>,
}

#[derive(Args)]
struct Table1Args {
    /// Trajectories per (ensemble, policy) cell.
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[command(flatten)]
    sim: SimArgs,
    #[command(flatten)]
    out: OutArgs,
    /// Share symbol and noise streams across policies (common random
    /// numbers) instead of salting the seed per policy.
    #[arg(long)]
    crn: bool,
    /// Photon-number cutoff for the Holevo reference row.
    #[arg(long, default_value_t = DEFAULT_FOCK_NMAX)]
    fock_nmax: usize,
}

#[derive(Args)]
struct BoundsArgs {
    /// Largest mean photon number on the grid.
    #[arg(long, default_value_t = 10.0)]
    nmax: f64,
    /// Number of grid rows (inclusive of 0 and nmax).
    #[arg(long, default_value_t = 100)]
    steps: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct HolevoArgs {
    /// Builtin ensemble name or definition file path.
    #[arg(long)]
    ensemble: String,
    /// Photon-number cutoff of the Fock expansion.
    #[arg(long, default_value_t = DEFAULT_FOCK_NMAX)]
    fock_nmax: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct PovmArgs {
    /// Builtin ensemble name or definition file path.
    #[arg(long)]
    ensemble: String,
    #[command(flatten)]
    policy: PolicyArgs,
    /// Number of sampled projectors.
    #[arg(long, default_value_t = 50)]
    samples: usize,
    #[command(flatten)]
    sim: SimArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyKind {
    Heterodyne,
    Wiseman,
    Lmmi,
    Fixed,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Failures carry the exit code: 2 for configuration problems (caught
/// before or while setting up a run), 1 for invariant violations.
enum CliError {
    Config(String),
    Invariant(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Invariant(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Invariant(m) => m,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::StatisticsInvariant(_)
            | CoreError::SqueezingDiverged(_)
            | CoreError::NegativeEigenvalue(_) => CliError::Invariant(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Table1(args) => cmd_table1(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Holevo(args) => cmd_holevo(args),
        Command::Povm(args) => cmd_povm(args),
    }
}

/// Resolves the ensemble source: a builtin name, else a definition file.
fn resolve_ensemble(source: &str) -> Result<Ensemble, CliError> {
    if let Some(e) = Ensemble::by_name(source) {
        return Ok(e);
    }
    let path = Path::new(source);
    if !path.is_file() {
        return Err(CliError::Config(format!(
            "ensemble '{source}' is neither a builtin (8psk, 16qam, star) nor a readable file"
        )));
    }
    Ok(Ensemble::from_path(path)?)
}

fn resolve_policy(args: &PolicyArgs) -> Result<PolicySpec, CliError> {
    let spec = match args.policy {
        PolicyKind::Heterodyne => PolicySpec::Heterodyne {
            step_rad: args.het_step,
        },
        PolicyKind::Wiseman => PolicySpec::wiseman(),
        PolicyKind::Lmmi => PolicySpec::Lmmi,
        PolicyKind::Fixed => PolicySpec::Fixed {
            phase: args.fixed_phase,
        },
    };
    spec.validate()?;
    Ok(spec)
}

fn resolve_out_dir(out: &OutArgs) -> Result<PathBuf, CliError> {
    let dir = out
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Config(format!("output dir {}: {e}", dir.display())))?;
    Ok(dir)
}

fn resolve_sim(args: &SimArgs) -> Result<SimConfig, CliError> {
    install_workers(args.workers)?;
    Ok(SimConfig::new(args.dt, args.tmax)?.with_seed(args.seed))
}

fn install_workers(workers: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = workers {
        if n == 0 {
            return Err(CliError::Config("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SimulateConfig {
    ensemble: String,
    ensemble_source: String,
    policy: PolicySpec,
    n_trajectories: usize,
    sim: SimConfig,
    workers: Option<usize>,
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    // Fail fast: every referenced path resolves before any simulation runs.
    let ensemble = resolve_ensemble(&args.ensemble)?;
    let policy = resolve_policy(&args.policy)?;
    let out_dir = resolve_out_dir(&args.out)?;
    let cfg = resolve_sim(&args.sim)?;

    if args.n < 2 {
        eprintln!("warning: n < 2 leaves the standard deviation undefined; reported as null");
    }
    let stats = run_batch(&ensemble, &policy, &cfg, args.n)?;

    let config = SimulateConfig {
        ensemble: ensemble.label().to_string(),
        ensemble_source: args.ensemble.clone(),
        policy,
        n_trajectories: args.n,
        sim: cfg,
        workers: args.sim.workers,
    };
    let path = out_dir.join(format!(
        "simulate_{}_{}.{}",
        ensemble.label(),
        policy.name(),
        extension(args.out.format)
    ));
    match args.out.format {
        Format::Json => json_artifact(&path, &config, &stats)?,
        Format::Csv => {
            let mut rows = vec![output::batch_csv_header()];
            rows.push(output::batch_csv_row(&stats));
            csv_artifact(&path, &config, &rows)?;
        }
    }

    if let Some(record_path) = &args.dump_record {
        dump_record(record_path, &ensemble, &policy, &cfg)?;
    }

    let spread = if stats.ci_half_width.is_nan() {
        "n/a".to_string()
    } else {
        format!("{:.4}", stats.ci_half_width)
    };
    println!(
        "{} {} n={}: I = {:.4} ± {spread} bits -> {}",
        ensemble.label(),
        policy.name(),
        args.n,
        stats.mean_gain,
        path.display()
    );
    Ok(())
}

/// Re-runs trajectory 0 of the batch with record retention and writes
/// `t, phi, dQ, p_1..p_K` per step, reconstructing the posterior trail from
/// the record.
fn dump_record(
    path: &Path,
    ensemble: &Ensemble,
    policy: &PolicySpec,
    cfg: &SimConfig,
) -> Result<(), CliError> {
    use homodyne_core::montecarlo::{batch_symbol, derive_stream_seed, StreamPurpose};

    let logged = SimConfig {
        log_record: true,
        ..*cfg
    };
    let true_index = batch_symbol(cfg.seed, 0, &ensemble.priors());
    let mut noise =
        GaussianNoise::from_seed(derive_stream_seed(cfg.seed, 0, StreamPurpose::Noise));
    let result = run_trajectory(ensemble, true_index, policy, &logged, &mut noise)?;
    let record = result.record.expect("record retention requested");

    let mut lines = Vec::with_capacity(record.len() + 1);
    let posterior_cols: String = (1..=ensemble.len())
        .map(|k| format!(",p_{k}"))
        .collect();
    lines.push(format!("t,phi,dQ{posterior_cols}"));
    let mut posterior = ensemble.priors();
    for step in &record {
        posterior = bayes_update(&posterior, step.charge, ensemble, step.phase, step.t, cfg.dt);
        let ps: String = posterior.iter().map(|p| format!(",{p}")).collect();
        lines.push(format!("{},{},{}{ps}", step.t, step.phase, step.charge));
    }
    std::fs::write(path, lines.join("\n") + "\n")?;
    Ok(())
}

#[derive(Serialize)]
struct Table1Config {
    ensembles: Vec<String>,
    n_trajectories: usize,
    sim: SimConfig,
    crn: bool,
    fock_nmax: usize,
    workers: Option<usize>,
}

fn cmd_table1(args: Table1Args) -> Result<(), CliError> {
    let out_dir = resolve_out_dir(&args.out)?;
    let cfg = resolve_sim(&args.sim)?;
    let options = CompareOptions {
        crn: args.crn,
        fock_nmax: args.fock_nmax,
    };

    let reports: Vec<PolicyComparison> = ["8psk", "16qam", "star"]
        .iter()
        .map(|name| {
            let ensemble = Ensemble::by_name(name).expect("builtin ensemble");
            compare_policies(&ensemble, &cfg, args.n, &options)
        })
        .collect::<Result<_, _>>()?;

    let config = Table1Config {
        ensembles: reports.iter().map(|r| r.ensemble.clone()).collect(),
        n_trajectories: args.n,
        sim: cfg,
        crn: args.crn,
        fock_nmax: args.fock_nmax,
        workers: args.sim.workers,
    };
    let path = out_dir.join(format!("table1.{}", extension(args.out.format)));
    match args.out.format {
        Format::Json => json_artifact(&path, &config, &reports)?,
        Format::Csv => {
            let mut rows = vec![output::table1_csv_header()];
            for report in &reports {
                rows.extend(output::table1_csv_rows(report));
            }
            csv_artifact(&path, &config, &rows)?;
        }
    }

    print!("{}", render_table1(&reports));
    println!("written to {}", path.display());
    Ok(())
}

#[derive(Serialize)]
struct BoundsConfig {
    nmax: f64,
    steps: usize,
}

fn cmd_bounds(args: BoundsArgs) -> Result<(), CliError> {
    if args.steps < 2 || !args.nmax.is_finite() || args.nmax <= 0.0 {
        return Err(CliError::Config(
            "bounds needs --steps >= 2 and --nmax > 0".into(),
        ));
    }
    let out_dir = resolve_out_dir(&args.out)?;
    let mut rows = vec!["n,I1,I2,I3".to_string()];
    for i in 0..args.steps {
        let n = args.nmax * i as f64 / (args.steps - 1) as f64;
        rows.push(format!(
            "{n},{},{},{}",
            capacity_heterodyne(n)?,
            capacity_homodyne_squeezed(n)?,
            capacity_holevo_bound(n)?
        ));
    }
    let config = BoundsConfig {
        nmax: args.nmax,
        steps: args.steps,
    };
    let path = out_dir.join("bounds.csv");
    csv_artifact(&path, &config, &rows)?;
    println!(
        "{} capacity rows over <n> in [0, {}] -> {}",
        args.steps,
        args.nmax,
        path.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct HolevoConfig {
    ensemble: String,
    ensemble_source: String,
    fock_nmax: usize,
}

#[derive(Serialize)]
struct HolevoResult {
    holevo_bits: f64,
    mean_photon_number: f64,
    prior_entropy_bits: f64,
}

fn cmd_holevo(args: HolevoArgs) -> Result<(), CliError> {
    let ensemble = resolve_ensemble(&args.ensemble)?;
    let out_dir = resolve_out_dir(&args.out)?;
    let chi = holevo_information(&ensemble, args.fock_nmax)?;
    let result = HolevoResult {
        holevo_bits: chi,
        mean_photon_number: ensemble.mean_photon_number(),
        prior_entropy_bits: homodyne_core::information::shannon_entropy(&ensemble.priors()),
    };
    let config = HolevoConfig {
        ensemble: ensemble.label().to_string(),
        ensemble_source: args.ensemble.clone(),
        fock_nmax: args.fock_nmax,
    };
    let path = out_dir.join(format!(
        "holevo_{}.{}",
        ensemble.label(),
        extension(args.out.format)
    ));
    match args.out.format {
        Format::Json => json_artifact(&path, &config, &result)?,
        Format::Csv => {
            let rows = vec![
                "ensemble,fock_nmax,holevo_bits,mean_photon_number".to_string(),
                format!(
                    "{},{},{chi},{}",
                    ensemble.label(),
                    args.fock_nmax,
                    result.mean_photon_number
                ),
            ];
            csv_artifact(&path, &config, &rows)?;
        }
    }
    println!(
        "chi({}) = {chi:.6} bits (n_max = {}) -> {}",
        ensemble.label(),
        args.fock_nmax,
        path.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct PovmConfig {
    ensemble: String,
    ensemble_source: String,
    policy: PolicySpec,
    n_samples: usize,
    sim: SimConfig,
    workers: Option<usize>,
}

fn cmd_povm(args: PovmArgs) -> Result<(), CliError> {
    let ensemble = resolve_ensemble(&args.ensemble)?;
    let policy = resolve_policy(&args.policy)?;
    let out_dir = resolve_out_dir(&args.out)?;
    let cfg = resolve_sim(&args.sim)?;

    let samples = sample_povm(&ensemble, &policy, &cfg, args.samples)?;

    let mut rows =
        vec!["x,y,semi_major,semi_minor,orientation_rad,xi_abs,xi_arg,true_index".to_string()];
    for s in &samples {
        rows.push(format!(
            "{},{},{},{},{},{},{},{}",
            s.ellipse.center_x,
            s.ellipse.center_y,
            s.ellipse.semi_major,
            s.ellipse.semi_minor,
            s.ellipse.orientation,
            s.projector.xi.norm(),
            s.projector.xi.arg(),
            s.true_index
        ));
    }
    let config = PovmConfig {
        ensemble: ensemble.label().to_string(),
        ensemble_source: args.ensemble.clone(),
        policy,
        n_samples: args.samples,
        sim: cfg,
        workers: args.sim.workers,
    };
    let path = out_dir.join(format!(
        "povm_{}_{}.csv",
        ensemble.label(),
        policy.name()
    ));
    csv_artifact(&path, &config, &rows)?;
    println!(
        "{} projector samples ({} / {}) -> {}",
        args.samples,
        ensemble.label(),
        policy.name(),
        path.display()
    );
    Ok(())
}

fn extension(format: Format) -> &'static str {
    match format {
        Format::Json => "json",
        Format::Csv => "csv",
    }
}

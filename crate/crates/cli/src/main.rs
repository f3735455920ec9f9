use std::env;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mgsize_core::dispatch::PolicyMode;
use mgsize_core::economics::assess;
use mgsize_core::io::{self, IoError, RunConfig};
use mgsize_core::optimizer::optimize;
use mgsize_core::profiles::write_profiles;
use mgsize_core::{simulate_year, Profiles, ScenarioPolicy, SizingVector};

const EXIT_USAGE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

/// Sizing and simulation of a hydrogen-coupled microgrid.
#[derive(Parser)]
#[command(name = "mgsize", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one year for given sizes and write ledger, costs and summary.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// CSV of component,size rows.
        #[arg(long)]
        sizes: PathBuf,
    },
    /// Search the cheapest feasible sizing.
    Optimize {
        #[command(flatten)]
        common: Common,
        /// 1: all loads fixed; 2: managed demand.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        scenario: u8,
        /// Swarm seed, overriding the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write the synthetic profiles as CSV files.
    Synth {
        #[command(flatten)]
        common: Common,
        /// Synthesis seed, overriding the config.
        #[arg(long)]
        seed: Option<u64>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

/// Config plus the directory its relative paths are resolved against.
fn load_config(common: &Common) -> Result<(RunConfig, PathBuf), Failure> {
    let (mut cfg, base) = match &common.config {
        Some(path) => {
            let cfg = RunConfig::load(path)?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            (cfg, base)
        }
        None => (RunConfig::default(), PathBuf::new()),
    };
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    Ok((cfg, base))
}

fn load_profiles(cfg: &RunConfig, base: &Path) -> Result<Profiles, Failure> {
    cfg.profiles.resolve(base).map_err(|e| usage(e.to_string()))
}

fn report_year(
    cfg: &RunConfig,
    profiles: &Profiles,
    sizes: &SizingVector,
) -> Result<bool, Failure> {
    let sim = simulate_year(
        profiles,
        sizes,
        &cfg.policy,
        &cfg.catalog,
        cfg.initial_tank_fraction,
    );
    let (costs, feas) = assess(&sim.summary, sizes, &cfg.catalog, &cfg.finance);
    io::write_year_reports(&cfg.output_dir, &sim.ledger, &sim.summary, &feas, &costs)?;
    Ok(feas.is_feasible())
}

fn simulate(common: &Common, sizes: &Path) -> Result<(), Failure> {
    let (cfg, base) = load_config(common)?;
    let sizes = io::read_sizes(sizes)?;
    let profiles = load_profiles(&cfg, &base)?;
    let feasible = report_year(&cfg, &profiles, &sizes)?;
    println!(
        "wrote {} ({})",
        cfg.output_dir.display(),
        if feasible { "feasible" } else { "infeasible" }
    );
    Ok(())
}

fn scenario_policy(base: &ScenarioPolicy, scenario: u8) -> ScenarioPolicy {
    let defaults = if scenario == 1 {
        ScenarioPolicy::fixed()
    } else {
        ScenarioPolicy::managed()
    };
    ScenarioPolicy {
        mode: if scenario == 1 {
            PolicyMode::Fixed
        } else {
            PolicyMode::Managed
        },
        interruptible_fraction: defaults.interruptible_fraction,
        ..base.clone()
    }
}

fn run_optimize(common: &Common, scenario: u8, seed: Option<u64>) -> Result<(), Failure> {
    let (mut cfg, base) = load_config(common)?;
    cfg.policy = scenario_policy(&cfg.policy, scenario);
    if let Some(seed) = seed {
        cfg.pso.rng_seed = seed;
    }
    let profiles = load_profiles(&cfg, &base)?;
    let opt = optimize(
        &profiles,
        &cfg.policy,
        &cfg.catalog,
        &cfg.finance,
        &cfg.pso,
        cfg.initial_tank_fraction,
    )
    .map_err(|e| usage(e.to_string()))?;
    let dir = &cfg.output_dir;
    io::write_sizes(&dir.join(io::SIZES_FILE), &opt.best.sizes)?;
    io::write_convergence(&dir.join(io::CONVERGENCE_FILE), &opt.history)?;
    report_year(&cfg, &profiles, &opt.best.sizes)?;
    println!(
        "scenario {scenario}: total NPC {:.2} after {} evaluations, wrote {}",
        opt.best.costs.total,
        opt.evaluations,
        dir.display()
    );
    if opt.feasible_found {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_INFEASIBLE,
            message: "no feasible sizing found; best penalized point written".into(),
        })
    }
}

fn synth(common: &Common, seed: Option<u64>) -> Result<(), Failure> {
    let (cfg, _) = load_config(common)?;
    let mut spec = cfg.profiles.synthesis_spec();
    if let Some(seed) = seed {
        spec.rng_seed = seed;
    }
    let profiles = mgsize_core::profiles::synthesize(&spec).map_err(|e| usage(e.to_string()))?;
    let paths = write_profiles(&cfg.output_dir, &profiles).map_err(|e| Failure {
        code: 1,
        message: e.to_string(),
    })?;
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = env::var("MGSIZE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        usage(format!(
            "MGSIZE_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = configure_threads().and_then(|()| match &cli.command {
        Command::Simulate { common, sizes } => simulate(common, sizes),
        Command::Optimize {
            common,
            scenario,
            seed,
        } => run_optimize(common, *scenario, *seed),
        Command::Synth { common, seed } => synth(common, *seed),
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("mgsize: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fracflow::error::Error;
use fracflow::io::{load_config, resolve_scenario, run_scenario, ScenarioKind};

/// Spectral and particle laboratory for nonlocal transport-diffusion equations.
///
/// Exit codes: 0 success (failed verdicts are recorded, not fatal), 1 runtime
/// failure, 2 invalid configuration.
#[derive(Parser, Debug)]
#[command(name = "fracflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; created if missing.
    #[arg(long, env = "FRACFLOW_OUT")]
    out: PathBuf,
    /// Overrides the seed of the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Linear transport-diffusion solve.
    SolvePde(RunArgs),
    /// Surface quasi-geostrophic solve, with additive noise when configured.
    SolveSqg(RunArgs),
    /// Fractional vorticity equation.
    SolveNs2d(RunArgs),
    /// Interacting particle system with density estimates.
    RunParticles(RunArgs),
    /// Stable sampler law checks.
    SampleStable(RunArgs),
    /// SQG maximum principle and divergence gate.
    VerifyMaxprinciple(RunArgs),
    /// Harnack and oscillation-decay ensemble.
    VerifyHarnack(RunArgs),
    /// Hölder exponent fits at probe points.
    VerifyHolder(RunArgs),
    /// Scaling covariance of the solvers.
    VerifyScaling(RunArgs),
    /// De Giorgi truncation profile and L-infinity ratio ensemble.
    VerifyDegiorgi(RunArgs),
    /// Krylov functionals against the backward equation.
    VerifyKrylov(RunArgs),
    /// Martingale residual with its negative control.
    VerifyMartingale(RunArgs),
}

impl Command {
    fn split(&self) -> (ScenarioKind, &RunArgs) {
        match self {
            Command::SolvePde(a) => (ScenarioKind::SolvePde, a),
            Command::SolveSqg(a) => (ScenarioKind::SolveSqg, a),
            Command::SolveNs2d(a) => (ScenarioKind::SolveNs2d, a),
            Command::RunParticles(a) => (ScenarioKind::RunParticles, a),
            Command::SampleStable(a) => (ScenarioKind::SampleStable, a),
            Command::VerifyMaxprinciple(a) => (ScenarioKind::VerifyMaxprinciple, a),
            Command::VerifyHarnack(a) => (ScenarioKind::VerifyHarnack, a),
            Command::VerifyHolder(a) => (ScenarioKind::VerifyHolder, a),
            Command::VerifyScaling(a) => (ScenarioKind::VerifyScaling, a),
            Command::VerifyDegiorgi(a) => (ScenarioKind::VerifyDegiorgi, a),
            Command::VerifyKrylov(a) => (ScenarioKind::VerifyKrylov, a),
            Command::VerifyMartingale(a) => (ScenarioKind::VerifyMartingale, a),
        }
    }
}

fn run(cli: &Cli) -> Result<(), Error> {
    let (kind, args) = cli.command.split();
    let mut cfg = load_config(&args.config)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let kind = resolve_scenario(&cfg, Some(kind))?;
    let summary = run_scenario(&cfg, kind, &args.out)?;
    for v in summary.verdicts() {
        let mark = if v.pass { "PASS" } else { "FAIL" };
        println!("{mark} {} value={:e} {} {:e}", v.check, v.value, v.relation, v.threshold);
    }
    println!("wrote {} files to {}", summary.checksums.len() + 1, summary.out_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fracflow: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

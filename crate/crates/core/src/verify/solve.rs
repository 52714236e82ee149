//! Plain solver runs with their conservation checks.

use super::{metrics_table, to_json, ScenarioOutput, Verdict};
use crate::error::Result;
use crate::io::config::{RunConfig, ScenarioKind};
use crate::solver::{
    simulate_stochastic_sqg, solve_ns_vorticity, solve_sqg, solve_transport_diffusion, NsOptions, StochasticOptions,
    Trajectory,
};

/// Tolerance on the divergence of solver-built velocities.
pub const DIV_TOL: f64 = 1e-10;
/// Allowed growth of the sup norm for unforced SQG.
pub const MAX_PRINCIPLE_TOL: f64 = 1e-6;
/// Allowed drift of the total mass.
pub const MASS_TOL: f64 = 1e-10;

fn finish(kind: ScenarioKind, tr: Trajectory, name: &str) -> ScenarioOutput {
    let mut out = ScenarioOutput::new(kind, metrics_table(&tr));
    out.verdicts.push(Verdict::at_most("velocity-divergence", tr.max_div, DIV_TOL));
    out.report = serde_json::json!({
        "stages": tr.stages,
        "max_div": tr.max_div,
        "events": to_json(&tr.events),
    });
    out.dumps.push((name.to_string(), tr.field));
    out
}

pub fn pde_scenario(cfg: &RunConfig) -> Result<ScenarioOutput> {
    let grid = cfg.grid()?;
    let u0 = cfg.initial.build(&grid, cfg.seed)?;
    let drift = cfg.drift.build(&grid, cfg.seed, 0)?;
    let forcing = cfg.forcing.build(&grid);
    let tr = solve_transport_diffusion(&u0, &drift, &forcing, &cfg.solver())?;
    Ok(finish(ScenarioKind::SolvePde, tr, "u"))
}

/// Runs SQG; the noise-driven equation when noise modes are configured.
pub(crate) fn run_sqg(cfg: &RunConfig) -> Result<(Trajectory, f64, bool)> {
    let grid = cfg.grid()?;
    let theta0 = cfg.initial.build(&grid, cfg.seed)?;
    let forcing = cfg.forcing.build(&grid);
    let noise = cfg.noise.build(cfg.seed);
    let unforced = forcing.is_zero() && noise.is_silent();
    let tr = if noise.is_silent() {
        solve_sqg(&theta0, &forcing, &cfg.solver())?
    } else {
        let opts = StochasticOptions {
            nonlinear: true,
            forcing,
        };
        simulate_stochastic_sqg(&theta0, &noise, &opts, &cfg.solver())?
    };
    Ok((tr, theta0.max_abs(), unforced))
}

pub fn sqg_scenario(cfg: &RunConfig) -> Result<ScenarioOutput> {
    let (tr, sup0, unforced) = run_sqg(cfg)?;
    let growth = tr.max_linf() - sup0;
    let mut out = finish(ScenarioKind::SolveSqg, tr, "theta");
    if unforced {
        out.verdicts.push(Verdict::at_most("max-principle", growth, MAX_PRINCIPLE_TOL));
    }
    Ok(out)
}

pub fn ns2d_scenario(cfg: &RunConfig) -> Result<ScenarioOutput> {
    let grid = cfg.grid()?;
    let rho0 = cfg.initial.build(&grid, cfg.seed)?;
    let m0 = rho0.integral();
    let tr = solve_ns_vorticity(&rho0, &cfg.solver(), &NsOptions::default())?;
    let drift = tr.metrics.iter().map(|m| (m.mass - m0).abs()).fold(0.0, f64::max);
    let mut out = finish(ScenarioKind::SolveNs2d, tr, "rho");
    out.verdicts.push(Verdict::at_most("mass-conservation", drift, MASS_TOL).with_detail(format!("initial mass {m0:e}")));
    Ok(out)
}

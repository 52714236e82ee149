//! Single-run checks: maximum principle, Hölder decay and scaling covariance.

use super::solve::{run_sqg, DIV_TOL, MAX_PRINCIPLE_TOL};
use super::{metrics_table, to_json, ScenarioOutput, Table, Verdict};
use crate::error::{Error, Result};
use crate::field::{PeriodicGrid, SampledField, ScalarField};
use crate::io::config::{ForcingSpec, RunConfig, ScenarioKind};
use crate::norms::{space_time_norm, MultiIndex};
use crate::regularity::{holder_fit, scaling_transform, ScaledKind};
use crate::solver::{solve_sqg, solve_transport_diffusion, Drift, Forcing, SolverConfig, Trajectory};

/// Minimum coefficient of determination of a Hölder fit.
pub const HOLDER_R2: f64 = 0.9;
/// Tolerance of the synthetic square-root control.
pub const HOLDER_CONTROL_TOL: f64 = 0.05;
/// Relative sup-norm tolerance of the scaled solve.
pub const SCALING_TOL: f64 = 1e-3;
pub const NORM_IDENTITY_TOL: f64 = 1e-6;

fn final_only(tr: &Trajectory) -> SampledField {
    let k = tr.field.len_times() - 1;
    SampledField::single(&tr.field.snapshot(k), tr.field.times()[k])
}

pub fn maxprinciple_scenario(cfg: &RunConfig) -> Result<ScenarioOutput> {
    if cfg.forcing != ForcingSpec::Zero || !cfg.noise.build(cfg.seed).is_silent() {
        return Err(Error::config("forcing", "the maximum-principle check needs an unforced, noise-free run"));
    }
    let grid = cfg.grid()?;
    let theta0 = cfg.initial.build(&grid, cfg.seed)?;
    let tr = solve_sqg(&theta0, &Forcing::Zero, &cfg.solver())?;
    let f = &tr.field;
    let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
    for k in 0..f.len_times() {
        let s = f.snapshot(k);
        hi = hi.max(s.max());
        lo = lo.min(s.min());
    }
    let mut out = ScenarioOutput::new(ScenarioKind::VerifyMaxprinciple, metrics_table(&tr));
    out.verdicts.push(Verdict::at_most("max-principle", tr.max_linf() - theta0.max_abs(), MAX_PRINCIPLE_TOL));
    out.verdicts.push(Verdict::at_most("upper-bound", hi - theta0.max(), MAX_PRINCIPLE_TOL));
    out.verdicts.push(Verdict::at_most("lower-bound", theta0.min() - lo, MAX_PRINCIPLE_TOL));
    out.verdicts.push(Verdict::at_most("velocity-divergence", tr.max_div, DIV_TOL));
    out.report = serde_json::json!({ "sup0": theta0.max_abs(), "stages": tr.stages, "events": to_json(&tr.events) });
    out.dumps.push(("theta_final".into(), final_only(&tr)));
    Ok(out)
}

/// Steady `|x|^{1/2}` on a fine lattice: the fit must return one half.
pub fn holder_control() -> Result<f64> {
    let g = PeriodicGrid::new(2, 512, 4.0)?;
    let s = ScalarField::from_fn(&g, |x| (x[0] * x[0] + x[1] * x[1]).sqrt().sqrt());
    let u = SampledField::from_scalar_snapshots(vec![-2.0, 0.0, 2.0], &[s.clone(), s.clone(), s])?;
    let radii: Vec<f64> = (0..=7).map(|j| 2f64.powi(-j)).collect();
    Ok(holder_fit(&u, 0.0, [0.0, 0.0], &radii)?.gamma)
}

pub fn holder_scenario(cfg: &RunConfig) -> Result<ScenarioOutput> {
    let (tr, _, _) = run_sqg(cfg)?;
    let v = &cfg.verify;
    let mut table = Table::new(&["probe", "x1", "x2", "gamma", "r_squared", "scales"]);
    let mut out_verdicts = Vec::new();
    let mut fits = Vec::new();
    for (k, &p) in v.probes.iter().enumerate() {
        let fit = holder_fit(&tr.field, v.t0, p, &v.radii)?;
        table.push(vec![k as f64, p[0], p[1], fit.gamma, fit.r_squared, fit.radii.len() as f64]);
        out_verdicts.push(Verdict::at_least(&format!("holder-r2-{k}"), fit.r_squared, HOLDER_R2));
        out_verdicts.push(
            Verdict::flag(&format!("holder-positive-{k}"), fit.gamma > 0.0).with_detail(format!("gamma = {}", fit.gamma)),
        );
        fits.push(fit);
    }
    let control = holder_control()?;
    let mut out = ScenarioOutput::new(ScenarioKind::VerifyHolder, table);
    out.verdicts = out_verdicts;
    out.verdicts.push(Verdict::at_most("holder-control", (control - 0.5).abs(), HOLDER_CONTROL_TOL));
    out.report = serde_json::json!({ "fits": to_json(&fits), "control_gamma": control });
    out.dumps.push(("theta_final".into(), final_only(&tr)));
    Ok(out)
}

fn relabel_scalar(f: &ScalarField, kind: ScaledKind, lambda: f64, alpha: f64) -> Result<ScalarField> {
    Ok(scaling_transform(&SampledField::single(f, 0.0), kind, lambda, alpha)?.snapshot(0))
}

/// Solver on the rescaled window with the step scaled along (`matched`) or
/// with the original step size rounded to a whole number of steps.
fn scaled_solver(cfg: &SolverConfig, lambda: f64, matched: bool) -> SolverConfig {
    let s = lambda.powf(cfg.alpha);
    let mut c = cfg.clone();
    c.t_start = cfg.t_start / s;
    c.t_end = cfg.t_end / s;
    if matched {
        c.dt = cfg.dt / s;
    } else {
        let steps = ((c.t_end - c.t_start) / cfg.dt).round().max(1.0);
        c.dt = (c.t_end - c.t_start) / steps;
        c.output_stride = steps as usize;
    }
    c
}

fn final_gap(solved: &SampledField, expected: &SampledField) -> f64 {
    let (a, b) = (solved.len_times() - 1, expected.len_times() - 1);
    let e = expected.snapshot(b);
    solved.snapshot(a).max_abs_diff(&e) / e.max_abs().max(f64::MIN_POSITIVE)
}

/// `max |u_scaled - T_λ u| / max |T_λ u|` over all snapshots.
fn relative_gap(solved: &SampledField, expected: &SampledField) -> Result<f64> {
    if solved.len_times() != expected.len_times() {
        return Err(Error::data("scaled and original runs stored different snapshot counts"));
    }
    Ok(solved.max_abs_diff(expected) / expected.max_abs().max(f64::MIN_POSITIVE))
}

pub fn scaling_scenario(cfg: &RunConfig) -> Result<ScenarioOutput> {
    let grid = cfg.grid()?;
    let (lambda, alpha) = (cfg.verify.lambda, cfg.alpha);
    let solver = cfg.solver();
    let solver_l = scaled_solver(&solver, lambda, true);
    let solver_free = scaled_solver(&solver, lambda, false);
    let u0 = cfg.initial.build(&grid, cfg.seed)?;

    // Linear equation with steady drift and forcing.
    let drift = cfg.drift.build(&grid, cfg.seed, 0)?;
    let forcing = cfg.forcing.build(&grid);
    let tr = solve_transport_diffusion(&u0, &drift, &forcing, &solver)?;
    let drift_l = match &drift {
        Drift::Steady(b) => {
            let s = SampledField::from_vector_snapshots(vec![0.0], std::slice::from_ref(b))?;
            Drift::Steady(scaling_transform(&s, ScaledKind::Drift, lambda, alpha)?.vector_snapshot(0))
        }
        Drift::Zero => Drift::Zero,
        _ => return Err(Error::config("drift.kind", "scaling needs a steady drift")),
    };
    let forcing_l = match cfg.forcing.field(&grid) {
        Some(f) => Forcing::Steady(relabel_scalar(&f, ScaledKind::Forcing, lambda, alpha)?),
        None => Forcing::Zero,
    };
    let u0_l = relabel_scalar(&u0, ScaledKind::Solution, lambda, alpha)?;
    let tr_l = solve_transport_diffusion(&u0_l, &drift_l, &forcing_l, &solver_l)?;
    let expected = scaling_transform(&tr.field, ScaledKind::Solution, lambda, alpha)?;
    let linear_exact = relative_gap(&tr_l.field, &expected)?;
    let linear_gap = final_gap(&solve_transport_diffusion(&u0_l, &drift_l, &forcing_l, &solver_free)?.field, &expected);

    // SQG: the state is its own drift and scales like one.
    let sq = solve_sqg(&u0, &Forcing::Zero, &solver)?;
    let th0_l = relabel_scalar(&u0, ScaledKind::Drift, lambda, alpha)?;
    let sq_l = solve_sqg(&th0_l, &Forcing::Zero, &solver_l)?;
    let sqg_expected = scaling_transform(&sq.field, ScaledKind::Drift, lambda, alpha)?;
    let sqg_exact = relative_gap(&sq_l.field, &sqg_expected)?;
    let sqg_gap = final_gap(&solve_sqg(&th0_l, &Forcing::Zero, &solver_free)?.field, &sqg_expected);

    // Norm identity of the drift on the sampled times.
    let norm_gap = match &drift {
        Drift::Steady(b) => {
            let times = tr.field.times().to_vec();
            let snaps = vec![b.clone(); times.len()];
            let bs = SampledField::from_vector_snapshots(times, &snaps)?;
            let bl = scaling_transform(&bs, ScaledKind::Drift, lambda, alpha)?;
            let (q, p) = (cfg.verify.q, MultiIndex::new(cfg.verify.p.clone())?);
            let expo = alpha - 1.0 - p.reciprocal_sum() - alpha / q;
            let lhs = space_time_norm(&bl, q, &p)?;
            let rhs = lambda.powf(expo) * space_time_norm(&bs, q, &p)?;
            (lhs / rhs - 1.0).abs()
        }
        _ => 0.0,
    };

    let mut table = Table::new(&["t_scaled", "linear_gap", "sqg_gap"]);
    for k in 0..expected.len_times() {
        let a = tr_l.field.snapshot(k).max_abs_diff(&expected.snapshot(k));
        let b = sq_l.field.snapshot(k).max_abs_diff(&sqg_expected.snapshot(k));
        table.push(vec![expected.times()[k], a, b]);
    }
    let mut out = ScenarioOutput::new(ScenarioKind::VerifyScaling, table);
    out.verdicts.push(Verdict::at_most("scaling-linear", linear_gap, SCALING_TOL));
    out.verdicts.push(Verdict::at_most("scaling-sqg", sqg_gap, SCALING_TOL));
    out.verdicts.push(Verdict::at_most("scaling-linear-matched", linear_exact, SCALING_TOL));
    out.verdicts.push(Verdict::at_most("scaling-sqg-matched", sqg_exact, SCALING_TOL));
    out.verdicts.push(Verdict::at_most("norm-identity", norm_gap, NORM_IDENTITY_TOL));
    out.report = serde_json::json!({
        "lambda": lambda,
        "alpha": alpha,
        "linear_gap": linear_gap,
        "sqg_gap": sqg_gap,
        "linear_matched_gap": linear_exact,
        "sqg_matched_gap": sqg_exact,
        "free_steps": ((solver_free.t_end - solver_free.t_start) / solver_free.dt).round(),
        "norm_gap": norm_gap,
    });
    out.dumps.push(("u_scaled_final".into(), final_only(&tr_l)));
    Ok(out)
}

//! Ensemble checks over seeded drifts: Harnack diagnostics, oscillation decay,
//! De Giorgi truncation profiles and the L-infinity ratio.

use super::{to_json, ScenarioOutput, Table, Verdict};
use crate::error::{Error, Result};
use crate::field::{PeriodicGrid, SampledField, ScalarField};
use crate::io::config::{RunConfig, ScenarioKind};
use crate::norms::{LocalizationSpec, MultiIndex};
use crate::regularity::{
    degiorgi_profile, harnack_report, linfty_ratio, oscillation_decay, sample_forcing, DeGiorgiSpec, HarnackConfig,
};
use crate::rng::derive_seed;
use crate::solver::{solve_transport_diffusion, Forcing};

/// Required share of cases with adjusted oscillation ratio below one.
pub const OSC_DECAY_SHARE: f64 = 0.9;
/// Allowed relative spread of the L-infinity ratio around its ensemble mean.
pub const LINFTY_SPREAD: f64 = 0.5;
pub const HOMOGENEITY_TOL: f64 = 1e-9;
/// Forcing multiplier of the homogeneity check.
const HOMOGENEITY_FACTOR: f64 = 3.0;

fn sampled_forcing(f: &Forcing, grid: &PeriodicGrid, times: &[f64]) -> Result<Option<SampledField>> {
    if f.is_zero() {
        Ok(None)
    } else {
        sample_forcing(f, grid, times).map(Some)
    }
}

fn index(cfg: &RunConfig) -> Result<MultiIndex> {
    MultiIndex::new(cfg.verify.p.clone()).map_err(|e| Error::config("verify.p", e.to_string()))
}

pub fn harnack_scenario(cfg: &RunConfig) -> Result<ScenarioOutput> {
    let grid = cfg.grid()?;
    let v = &cfg.verify;
    let solver = cfg.solver();
    let mut hc = HarnackConfig::new(cfg.alpha, v.q, index(cfg)?);
    hc.t0 = v.t0;
    hc.x0 = v.x0;
    hc.p_weak = v.p_weak;
    let mut table = Table::new(&[
        "case",
        "forced",
        "sup",
        "inf",
        "forcing",
        "tail",
        "constant",
        "weak_constant",
        "osc_small",
        "osc_large",
        "osc_ratio",
        "max_div",
    ]);
    let mut reports = Vec::new();
    let (mut finite, mut decaying) = (0usize, 0usize);
    for k in 0..v.cases {
        let drift = cfg.drift.build(&grid, cfg.seed, k as u64)?;
        let u0 = cfg.initial.build(&grid, derive_seed(cfg.seed, k as u64))?;
        let forced = k % 2 == 1;
        let forcing = if forced { cfg.forcing.build(&grid) } else { Forcing::Zero };
        let tr = solve_transport_diffusion(&u0, &drift, &forcing, &solver)?;
        let f = sampled_forcing(&forcing, &grid, tr.field.times())?;
        let h = harnack_report(&tr.field, f.as_ref(), &hc)?;
        let o = oscillation_decay(&tr.field, f.as_ref(), &hc)?;
        if h.constant.is_finite() && h.weak_constant.is_finite() {
            finite += 1;
        }
        if o.ratio < 1.0 {
            decaying += 1;
        }
        table.push(vec![
            k as f64,
            if forced { 1.0 } else { 0.0 },
            h.sup,
            h.inf,
            h.forcing,
            h.tail,
            h.constant,
            h.weak_constant,
            o.osc_small,
            o.osc_large,
            o.ratio,
            tr.max_div,
        ]);
        reports.push(serde_json::json!({ "case": k, "harnack": to_json(&h), "oscillation": to_json(&o) }));
    }
    let n = v.cases as f64;
    let mut out = ScenarioOutput::new(ScenarioKind::VerifyHarnack, table);
    out.verdicts.push(Verdict::at_least("harnack-finite", finite as f64 / n, 1.0));
    out.verdicts.push(
        Verdict::at_least("osc-decay-share", decaying as f64 / n, OSC_DECAY_SHARE)
            .with_detail(format!("{decaying} of {} cases below one", v.cases)),
    );
    out.report = serde_json::json!({ "cases": reports, "tail_surrogate": true });
    Ok(out)
}

pub fn degiorgi_scenario(cfg: &RunConfig) -> Result<ScenarioOutput> {
    let grid = cfg.grid()?;
    let v = &cfg.verify;
    let solver = cfg.solver();
    let forcing = cfg.forcing.build(&grid);
    if forcing.is_zero() {
        return Err(Error::config("forcing.kind", "the L-infinity ratio needs a nonzero forcing"));
    }
    let p0 = index(cfg)?;
    let loc = LocalizationSpec::lattice(&grid, v.loc_radius, v.loc_stride)
        .map_err(|e| Error::config("verify.loc_radius", e.to_string()))?;

    // Truncation profile of one run from the configured data.
    let u0 = cfg.initial.build(&grid, cfg.seed)?;
    let drift0 = cfg.drift.build(&grid, cfg.seed, 0)?;
    let tr = solve_transport_diffusion(&u0, &drift0, &forcing, &solver)?;
    let mut spec = DeGiorgiSpec::new(v.base_radius, v.kappas.clone(), v.taus.clone());
    spec.t0 = v.t0;
    spec.x0 = v.x0;
    let profile = degiorgi_profile(&tr.field, &spec)?;

    // L-infinity ratio from zero data across the drift ensemble.
    let zero = ScalarField::zeros(&grid);
    let mut table = Table::new(&["case", "sup", "forcing_norm", "ratio", "max_div"]);
    let mut ratios = Vec::with_capacity(v.cases);
    let mut first = None;
    for k in 0..v.cases {
        let drift = cfg.drift.build(&grid, cfg.seed, k as u64)?;
        let tr = solve_transport_diffusion(&zero, &drift, &forcing, &solver)?;
        let f = sample_forcing(&forcing, &grid, tr.field.times())?;
        let r = linfty_ratio(&tr.field, &f, v.q, &p0, v.beta, &loc)?;
        table.push(vec![k as f64, r.sup, r.forcing_norm, r.ratio, tr.max_div]);
        ratios.push(r.ratio);
        if k == 0 {
            first = Some((drift, r));
        }
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let spread = ratios.iter().map(|r| (r / mean - 1.0).abs()).fold(0.0, f64::max);
    let (drift, r0) = first.expect("at least one case");
    let scaled = forcing.scaled(&grid, HOMOGENEITY_FACTOR);
    let tr = solve_transport_diffusion(&zero, &drift, &scaled, &solver)?;
    let f = sample_forcing(&scaled, &grid, tr.field.times())?;
    let r1 = linfty_ratio(&tr.field, &f, v.q, &p0, v.beta, &loc)?;
    let homogeneity = (r1.ratio / r0.ratio - 1.0).abs();

    let mut out = ScenarioOutput::new(ScenarioKind::VerifyDegiorgi, table);
    out.verdicts.push(
        Verdict::flag("degiorgi-constant-finite", profile.best_constant.is_finite() && profile.best_constant > 0.0)
            .with_detail(format!("best constant {}", profile.best_constant)),
    );
    out.verdicts.push(Verdict::at_most("linfty-spread", spread, LINFTY_SPREAD));
    out.verdicts.push(Verdict::at_most("linfty-homogeneity", homogeneity, HOMOGENEITY_TOL));
    out.report = serde_json::json!({
        "profile": to_json(&profile),
        "ratios": ratios,
        "mean_ratio": mean,
        "homogeneity_gap": homogeneity,
    });
    Ok(out)
}

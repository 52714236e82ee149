//! Truncation profiles `‖1_{Q_τ}(u - κ)⁺‖_{L^p}` and empirical De Giorgi constants.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::SampledField;
use crate::norms::{trapezoid_weights, Cylinder};

/// Cylinders `Q_τ = [t0 - τR, t0 + τR] × B_{τR}(x0)` and the exponents of the
/// inequality `(σ-τ)^γ ‖1_{Q_τ}(u-κ)⁺‖_{p} <= C (Σ_i ‖1_{Q_σ}(u-κ)⁺‖_{p_i}
/// + A Σ_i ‖1_{{u>κ} ∩ Q_σ}‖_{p'_i})`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeGiorgiSpec {
    pub t0: f64,
    pub x0: [f64; 2],
    pub base_radius: f64,
    pub kappas: Vec<f64>,
    pub taus: Vec<f64>,
    /// Exponents tabulated in the profile.
    pub ps: Vec<f64>,
    pub lhs_p: f64,
    pub trunc_ps: Vec<f64>,
    pub level_ps: Vec<f64>,
    pub gamma: f64,
    pub a: f64,
}

impl DeGiorgiSpec {
    pub fn new(base_radius: f64, kappas: Vec<f64>, taus: Vec<f64>) -> Self {
        Self {
            t0: 0.0,
            x0: [0.0, 0.0],
            base_radius,
            kappas,
            taus,
            ps: vec![1.0, 2.0],
            lhs_p: 2.0,
            trunc_ps: vec![2.0],
            level_ps: vec![2.0],
            gamma: 1.0,
            a: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DxConstant {
    pub kappa: f64,
    pub tau: f64,
    pub sigma: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncationProfile {
    pub kappas: Vec<f64>,
    pub taus: Vec<f64>,
    pub ps: Vec<f64>,
    /// `[κ][τ][p]` truncation norms.
    pub truncation: Vec<Vec<Vec<f64>>>,
    /// `[κ][τ][p]` level-set measures `|{u>κ} ∩ Q_τ|^{1/p}`.
    pub level_sets: Vec<Vec<Vec<f64>>>,
    pub constants: Vec<DxConstant>,
    /// Largest finite ratio over all pairs; 0 when no pair is informative.
    pub best_constant: f64,
}

/// Space-time lattice weights `w_t h^d` and values inside a cylinder.
fn cylinder_samples(u: &SampledField, q: &Cylinder, wt: &[f64]) -> Vec<(f64, f64)> {
    let grid = u.grid();
    let dv = grid.cell_volume();
    let idx = q.ball_indices(grid);
    let mut out = Vec::new();
    for j in q.time_indices(u.times()) {
        let s = u.snapshot(j);
        out.extend(idx.iter().map(|&i| (wt[j] * dv, s.data()[i])));
    }
    out
}

fn trunc_norm(samples: &[(f64, f64)], kappa: f64, p: f64) -> f64 {
    samples
        .iter()
        .map(|&(w, v)| w * (v - kappa).max(0.0).powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

fn level_norm(samples: &[(f64, f64)], kappa: f64, p: f64) -> f64 {
    samples
        .iter()
        .filter(|s| s.1 > kappa)
        .map(|s| s.0)
        .sum::<f64>()
        .powf(1.0 / p)
}

pub fn degiorgi_profile(u: &SampledField, spec: &DeGiorgiSpec) -> Result<TruncationProfile> {
    if spec.taus.is_empty() || spec.kappas.is_empty() {
        return Err(Error::usage("empty level or radius grid"));
    }
    let all_p = spec.ps.iter().chain(&spec.trunc_ps).chain(&spec.level_ps).chain(std::iter::once(&spec.lhs_p));
    for &p in all_p {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::usage(format!("exponent {p} must be finite and positive")));
        }
    }
    let wt = trapezoid_weights(u.times());
    let samples: Vec<Vec<(f64, f64)>> = spec
        .taus
        .iter()
        .map(|&tau| {
            let q = Cylinder::two_sided(spec.t0, tau * spec.base_radius)?.centered_at(spec.x0);
            q.check_inside(u)?;
            Ok(cylinder_samples(u, &q, &wt))
        })
        .collect::<Result<_>>()?;
    let table = |f: fn(&[(f64, f64)], f64, f64) -> f64| -> Vec<Vec<Vec<f64>>> {
        spec.kappas
            .iter()
            .map(|&k| {
                samples
                    .iter()
                    .map(|s| spec.ps.iter().map(|&p| f(s, k, p)).collect())
                    .collect()
            })
            .collect()
    };
    let truncation = table(trunc_norm);
    let level_sets = table(level_norm);
    let mut constants = Vec::new();
    let mut best = 0.0_f64;
    for &k in &spec.kappas {
        for (a, &tau) in spec.taus.iter().enumerate() {
            for (b, &sigma) in spec.taus.iter().enumerate() {
                if !(sigma > tau) {
                    continue;
                }
                let lhs = (sigma - tau).powf(spec.gamma) * trunc_norm(&samples[a], k, spec.lhs_p);
                let rhs: f64 = spec.trunc_ps.iter().map(|&p| trunc_norm(&samples[b], k, p)).sum::<f64>()
                    + spec.a * spec.level_ps.iter().map(|&p| level_norm(&samples[b], k, p)).sum::<f64>();
                if lhs == 0.0 {
                    continue;
                }
                let value = if rhs > 0.0 { lhs / rhs } else { f64::INFINITY };
                best = best.max(value);
                constants.push(DxConstant {
                    kappa: k,
                    tau,
                    sigma,
                    value,
                });
            }
        }
    }
    Ok(TruncationProfile {
        kappas: spec.kappas.clone(),
        taus: spec.taus.clone(),
        ps: spec.ps.clone(),
        truncation,
        level_sets,
        constants,
        best_constant: best,
    })
}

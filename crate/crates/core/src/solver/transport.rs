//! Linear transport-diffusion `∂_t u = Δ^{α/2} u + b·∇u + f` with a prescribed drift.

use num_complex::Complex64;

use super::drift::{Drift, Forcing};
use super::{Engine, Pseudo, Rhs, SolverConfig, SolverEvent, Stage, Trajectory};
use crate::error::Result;
use crate::field::{ScalarField, VectorField};

struct DriftCache {
    t: f64,
    b: Vec<Vec<f64>>,
    div: Vec<f64>,
    speed: f64,
    max_div: f64,
    zero_div: bool,
}

pub(crate) struct TransportRhs {
    ps: Pseudo,
    drift: Drift,
    forcing: Forcing,
    cached_drift: Option<DriftCache>,
    cached_forcing: Option<(f64, Vec<Complex64>)>,
}

impl TransportRhs {
    pub fn new(ps: Pseudo, drift: Drift, forcing: Forcing) -> Self {
        Self {
            ps,
            drift,
            forcing,
            cached_drift: None,
            cached_forcing: None,
        }
    }

    fn refresh_drift(&mut self, t: f64) {
        let steady = self.drift.is_steady();
        if let Some(c) = &self.cached_drift {
            if steady || c.t == t {
                return;
            }
        }
        let v = self.drift.at(&self.ps.grid, t);
        let mut b = Vec::with_capacity(v.components.len());
        let mut div_modes = vec![Complex64::new(0.0, 0.0); self.ps.grid.len()];
        for (axis, c) in v.components.iter().enumerate() {
            let m = self.ps.truncate(&self.ps.to_modes(c.data()));
            let ks = if axis == 0 { &self.ps.wn.k1 } else { &self.ps.wn.k2 };
            for i in 0..m.len() {
                if !self.ps.wn.nyquist[i] {
                    div_modes[i] += Complex64::new(0.0, ks[i]) * m[i];
                }
            }
            b.push(self.ps.to_phys(m));
        }
        let div = self.ps.to_phys(div_modes);
        let max_div = div.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let speed = Pseudo::max_speed(&b);
        self.cached_drift = Some(DriftCache {
            t,
            b,
            zero_div: max_div == 0.0,
            div,
            speed,
            max_div,
        });
    }

    fn forcing_modes(&mut self, t: f64) -> Option<&[Complex64]> {
        if self.forcing.is_zero() {
            return None;
        }
        let steady = matches!(self.forcing, Forcing::Steady(_));
        let stale = match &self.cached_forcing {
            Some((tc, _)) => !steady && *tc != t,
            None => true,
        };
        if stale {
            let f = self.forcing.at(&self.ps.grid, t);
            self.cached_forcing = Some((t, self.ps.to_modes(f.data())));
        }
        self.cached_forcing.as_ref().map(|(_, m)| m.as_slice())
    }
}

impl Rhs for TransportRhs {
    fn eval(&mut self, t: f64, u: &[Complex64], out: &mut [Complex64]) -> Result<Stage> {
        out.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        let mut stage = Stage::default();
        if !self.drift.is_zero() {
            self.refresh_drift(t);
            let uphys = self.ps.to_phys(self.ps.truncate(u));
            let cache = self.cached_drift.as_ref().expect("drift cache");
            let flux: Vec<Vec<f64>> = cache
                .b
                .iter()
                .map(|bi| bi.iter().zip(&uphys).map(|(b, u)| b * u).collect())
                .collect();
            self.ps.add_divergence(&flux, out, 1.0);
            if !cache.zero_div {
                let p: Vec<f64> = uphys.iter().zip(&cache.div).map(|(u, d)| u * d).collect();
                let pm = self.ps.to_modes(&p);
                for (o, m) in out.iter_mut().zip(pm) {
                    *o -= m;
                }
            }
            self.ps.truncate_in_place(out);
            stage.max_speed = cache.speed;
            stage.max_div = cache.max_div;
        }
        if let Some(f) = self.forcing_modes(t) {
            for (o, m) in out.iter_mut().zip(f) {
                *o += m;
            }
        }
        Ok(stage)
    }
}

/// Trajectory of the linear equation on `[t_start, t_end]`.
pub fn solve_transport_diffusion(
    u0: &ScalarField,
    drift: &Drift,
    forcing: &Forcing,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    let grid = u0.grid();
    drift.check(grid)?;
    let mut rhs = TransportRhs::new(Pseudo::new(grid, cfg.dealias), drift.clone(), forcing.clone());
    Engine::new(grid, cfg).run(u0, &mut rhs)
}

/// Result of a single nominal step.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub field: ScalarField,
    pub events: Vec<SolverEvent>,
    pub max_div: f64,
}

/// One ETD step of length `cfg.dt` with a frozen drift and forcing.
pub fn step_linear(u: &ScalarField, b: &VectorField, f: &ScalarField, cfg: &SolverConfig) -> Result<StepOutcome> {
    let mut c = cfg.clone();
    c.t_end = c.t_start + c.dt;
    c.output_stride = 1;
    let tr = solve_transport_diffusion(u, &Drift::Steady(b.clone()), &Forcing::Steady(f.clone()), &c)?;
    Ok(StepOutcome {
        field: tr.final_state(),
        events: tr.events,
        max_div: tr.max_div,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PeriodicGrid;
    use crate::solver::Scheme;

    #[test]
    fn pure_diffusion_is_exact() {
        let g = PeriodicGrid::standard(2, 32).unwrap();
        let u0 = ScalarField::from_fn(&g, |x| (2.0 * x[0] - x[1]).cos());
        let cfg = SolverConfig::new(1.3, 0.1, 0.1);
        let out = step_linear(&u0, &VectorField::zeros(&g), &ScalarField::zeros(&g), &cfg).unwrap();
        let decay = (-0.1 * 5f64.powf(0.65)).exp();
        assert!(out.field.max_abs_diff(&u0.scaled(decay)) < 1e-13);
    }

    #[test]
    fn constant_drift_translates_and_diffuses() {
        let g = PeriodicGrid::standard(1, 32).unwrap();
        let k = 3.0;
        let c = 0.7;
        let dt = 1e-4;
        let u0 = ScalarField::from_fn(&g, |x| (k * x[0]).cos());
        let b = VectorField::constant(&g, [c, 0.0]);
        let cfg = SolverConfig::new(2.0, dt, dt).with_scheme(Scheme::EtdRk2);
        let out = step_linear(&u0, &b, &ScalarField::zeros(&g), &cfg).unwrap();
        let exact = ScalarField::from_fn(&g, |x| (-k * k * dt).exp() * (k * (x[0] + c * dt)).cos());
        let err = out.field.max_abs_diff(&exact);
        assert!(err < 1e-10, "err {err}");
    }

    #[test]
    fn constants_are_steady() {
        let g = PeriodicGrid::standard(2, 32).unwrap();
        let b = VectorField::new(vec![
            ScalarField::from_fn(&g, |x| x[1].sin()),
            ScalarField::from_fn(&g, |x| x[0].cos()),
        ])
        .unwrap();
        let u0 = ScalarField::constant(&g, 1.0);
        let cfg = SolverConfig::new(1.0, 0.05, 0.05);
        let out = step_linear(&u0, &b, &ScalarField::zeros(&g), &cfg).unwrap();
        assert!(out.field.max_abs_diff(&u0) < 1e-13);
    }

    #[test]
    fn cfl_violation_splits_the_step() {
        let g = PeriodicGrid::standard(1, 64).unwrap();
        let b = VectorField::constant(&g, [50.0, 0.0]);
        let u0 = ScalarField::from_fn(&g, |x| x[0].cos());
        let cfg = SolverConfig::new(1.0, 0.01, 0.01);
        let out = step_linear(&u0, &b, &ScalarField::zeros(&g), &cfg).unwrap();
        assert!(!out.events.is_empty());
        assert!(out.events.iter().all(|e| e.kind == "cfl-halving"));
    }
}

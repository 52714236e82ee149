//! Exponential time differencing for `∂_t u = Δ^{α/2} u + N(t, u)`.
//!
//! The state lives in mode space. The stiff part `-|k|^α` is propagated
//! exactly; `N` is evaluated pseudo-spectrally by the problem-specific
//! right-hand sides in the submodules.

mod backward;
mod drift;
mod noise;
mod ns;
mod sqg;
mod transport;

pub use backward::solve_backward_kolmogorov;
pub use drift::{mollify_gaussian, random_divfree_drift, Drift, Forcing};
pub use noise::{NoiseMode, NoiseSpec};
pub use ns::{solve_ns_vorticity, NsOptions};
pub use sqg::{simulate_stochastic_sqg, solve_sqg, StochasticOptions};
pub use transport::{solve_transport_diffusion, step_linear};

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{PeriodicGrid, SampledField, ScalarField};
use crate::spectral::{self, Wavenumbers};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    EtdEuler,
    EtdRk2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub alpha: f64,
    pub dt: f64,
    pub t_start: f64,
    pub t_end: f64,
    /// Nominal steps between stored snapshots; the final time is always stored.
    pub output_stride: usize,
    pub dealias: bool,
    pub scheme: Scheme,
    pub cfl_safety: f64,
    /// Abort once `‖u‖_∞` exceeds this multiple of `max(‖u0‖_∞, 1)`.
    pub blowup_factor: f64,
    /// Upper bound on CFL halvings of one nominal step.
    pub max_halvings: u32,
}

impl SolverConfig {
    pub fn new(alpha: f64, dt: f64, t_end: f64) -> Self {
        Self {
            alpha,
            dt,
            t_start: 0.0,
            t_end,
            output_stride: 1,
            dealias: true,
            scheme: Scheme::EtdRk2,
            cfl_safety: 0.5,
            blowup_factor: 1e6,
            max_halvings: 12,
        }
    }

    pub fn with_scheme(mut self, s: Scheme) -> Self {
        self.scheme = s;
        self
    }

    pub fn with_stride(mut self, k: usize) -> Self {
        self.output_stride = k;
        self
    }

    pub fn with_dealias(mut self, on: bool) -> Self {
        self.dealias = on;
        self
    }

    pub fn with_start(mut self, t0: f64) -> Self {
        let span = self.t_end - self.t_start;
        self.t_start = t0;
        self.t_end = t0 + span;
        self
    }

    pub fn validate(&self) -> Result<usize> {
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(Error::usage(format!("alpha must lie in (0, 2], got {}", self.alpha)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::usage(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::usage(format!("cfl_safety must lie in (0, 1], got {}", self.cfl_safety)));
        }
        if self.output_stride == 0 {
            return Err(Error::usage("output_stride must be positive"));
        }
        let span = self.t_end - self.t_start;
        if !(span > 0.0) {
            return Err(Error::usage("t_end must exceed t_start"));
        }
        let steps = (span / self.dt).round();
        if (steps * self.dt - span).abs() > 1e-9 * span.max(1.0) {
            return Err(Error::usage(format!(
                "time span {span} is not a whole number of steps dt = {}",
                self.dt
            )));
        }
        Ok(steps as usize)
    }

    /// Sample times produced by a run.
    pub fn output_times(&self) -> Result<Vec<f64>> {
        let steps = self.validate()?;
        let mut out: Vec<f64> = (0..=steps)
            .step_by(self.output_stride)
            .map(|j| self.t_start + j as f64 * self.dt)
            .collect();
        if steps % self.output_stride != 0 {
            out.push(self.t_start + steps as f64 * self.dt);
        }
        Ok(out)
    }
}

/// One row of the metrics time series.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricRow {
    pub t: f64,
    pub linf: f64,
    pub l2: f64,
    pub mass: f64,
    /// Largest `|div b|` over the stages since the previous row.
    pub max_div: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverEvent {
    pub t: f64,
    pub kind: String,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub field: SampledField,
    pub metrics: Vec<MetricRow>,
    pub events: Vec<SolverEvent>,
    pub stages: usize,
    /// Largest `|div b|` over every stage.
    pub max_div: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> ScalarField {
        self.field.snapshot(self.field.len_times() - 1)
    }

    pub fn max_linf(&self) -> f64 {
        self.metrics.iter().map(|m| m.linf).fold(0.0, f64::max)
    }
}

/// Diagnostics of one right-hand-side evaluation.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Stage {
    pub max_speed: f64,
    pub max_div: f64,
}

pub(crate) trait Rhs {
    /// Writes `N̂(t, û)` into `out`.
    fn eval(&mut self, t: f64, u: &[Complex64], out: &mut [Complex64]) -> Result<Stage>;

    /// Whether a divergence above the gate aborts the run.
    fn gates_divergence(&self) -> bool {
        false
    }

    /// Hook after each accepted (sub)step, e.g. additive noise.
    fn after_step(&mut self, _t: f64, _h: f64, _u: &mut [Complex64]) -> Result<()> {
        Ok(())
    }
}

pub(crate) const DIV_GATE: f64 = 1e-10;

pub(crate) fn phi1(z: f64) -> f64 {
    if z.abs() < 1e-2 {
        1.0 + z / 2.0 + z * z / 6.0 + z.powi(3) / 24.0 + z.powi(4) / 120.0 + z.powi(5) / 720.0
    } else {
        z.exp_m1() / z
    }
}

pub(crate) fn phi2(z: f64) -> f64 {
    if z.abs() < 1e-2 {
        0.5 + z / 6.0 + z * z / 24.0 + z.powi(3) / 120.0 + z.powi(4) / 720.0 + z.powi(5) / 5040.0
    } else {
        (z.exp_m1() - z) / (z * z)
    }
}

struct Coeffs {
    e: Vec<f64>,
    p1: Vec<f64>,
    p2: Vec<f64>,
}

pub(crate) struct Engine {
    pub grid: PeriodicGrid,
    symbol: Vec<f64>,
    cache: HashMap<u64, Coeffs>,
    cfg: SolverConfig,
    pub events: Vec<SolverEvent>,
    pub stages: usize,
    pub max_div: f64,
    window_div: f64,
}

impl Engine {
    pub fn new(grid: &PeriodicGrid, cfg: &SolverConfig) -> Self {
        let wn = Wavenumbers::new(grid);
        Self {
            grid: grid.clone(),
            symbol: wn.frac_symbol(cfg.alpha),
            cache: HashMap::new(),
            cfg: cfg.clone(),
            events: Vec::new(),
            stages: 0,
            max_div: 0.0,
            window_div: 0.0,
        }
    }

    fn coeffs(&mut self, h: f64) -> &Coeffs {
        let symbol = &self.symbol;
        self.cache.entry(h.to_bits()).or_insert_with(|| {
            let mut c = Coeffs {
                e: Vec::with_capacity(symbol.len()),
                p1: Vec::with_capacity(symbol.len()),
                p2: Vec::with_capacity(symbol.len()),
            };
            for &l in symbol {
                let z = l * h;
                c.e.push(z.exp());
                c.p1.push(h * phi1(z));
                c.p2.push(h * phi2(z));
            }
            c
        })
    }

    fn stage<R: Rhs>(&mut self, rhs: &mut R, t: f64, u: &[Complex64], out: &mut [Complex64]) -> Result<Stage> {
        let s = rhs.eval(t, u, out)?;
        self.stages += 1;
        self.max_div = self.max_div.max(s.max_div);
        self.window_div = self.window_div.max(s.max_div);
        if rhs.gates_divergence() && s.max_div > DIV_GATE {
            return Err(Error::Divergence {
                time: t,
                value: s.max_div,
            });
        }
        Ok(s)
    }

    fn cfl_limit(&self, speed: f64) -> f64 {
        if speed > 0.0 {
            self.cfg.cfl_safety * self.grid.spacing() / speed
        } else {
            f64::INFINITY
        }
    }

    /// Advances `u` from `t` by `h`, halving while the CFL condition fails.
    fn advance<R: Rhs>(&mut self, rhs: &mut R, t: f64, h: f64, u: &mut Vec<Complex64>, depth: u32) -> Result<()> {
        let len = u.len();
        let mut n0 = vec![Complex64::new(0.0, 0.0); len];
        let s0 = self.stage(rhs, t, u, &mut n0)?;
        if h > self.cfl_limit(s0.max_speed) * (1.0 + 1e-12) {
            if depth >= self.cfg.max_halvings {
                return Err(Error::Precondition(format!(
                    "CFL condition still violated after {depth} halvings at t = {t}"
                )));
            }
            self.events.push(SolverEvent {
                t,
                kind: "cfl-halving".into(),
                detail: format!(
                    "step {h:.3e} exceeds limit {:.3e} (max|b| = {:.3e}); split in two",
                    self.cfl_limit(s0.max_speed),
                    s0.max_speed
                ),
            });
            self.advance(rhs, t, 0.5 * h, u, depth + 1)?;
            return self.advance(rhs, t + 0.5 * h, 0.5 * h, u, depth + 1);
        }
        let scheme = self.cfg.scheme;
        let c = self.coeffs(h);
        let mut a: Vec<Complex64> = (0..len).map(|i| c.e[i] * u[i] + c.p1[i] * n0[i]).collect();
        if scheme == Scheme::EtdRk2 {
            let p2 = c.p2.clone();
            let mut n1 = vec![Complex64::new(0.0, 0.0); len];
            self.stage(rhs, t + h, &a, &mut n1)?;
            for i in 0..len {
                a[i] += p2[i] * (n1[i] - n0[i]);
            }
        }
        *u = a;
        rhs.after_step(t + h, h, u)
    }

    fn row(&mut self, t: f64, phys: &ScalarField) -> MetricRow {
        let r = MetricRow {
            t,
            linf: phys.max_abs(),
            l2: phys.l2_norm(),
            mass: phys.integral(),
            max_div: self.window_div,
        };
        self.window_div = 0.0;
        r
    }

    pub fn run<R: Rhs>(mut self, u0: &ScalarField, rhs: &mut R) -> Result<Trajectory> {
        let steps = self.cfg.validate()?;
        self.grid.ensure_same(u0.grid())?;
        u0.check_finite()?;
        let ceiling = self.cfg.blowup_factor * u0.max_abs().max(1.0);
        let (t0, dt, stride) = (self.cfg.t_start, self.cfg.dt, self.cfg.output_stride);
        let mut u = spectral::forward_real(&self.grid, u0.data());
        let mut times = vec![t0];
        let mut snaps = vec![u0.clone()];
        let mut metrics = vec![self.row(t0, u0)];
        for j in 1..=steps {
            let t = t0 + (j - 1) as f64 * dt;
            self.advance(rhs, t, dt, &mut u, 0)?;
            let tn = t0 + j as f64 * dt;
            let phys = ScalarField::new(self.grid.clone(), spectral::inverse_real(&self.grid, u.clone()))?;
            let sup = phys.max_abs();
            if !sup.is_finite() || sup > ceiling {
                return Err(Error::BlowUp {
                    time: tn,
                    norm: sup,
                    ceiling,
                });
            }
            if j % stride == 0 || j == steps {
                metrics.push(self.row(tn, &phys));
                times.push(tn);
                snaps.push(phys);
            }
        }
        Ok(Trajectory {
            field: SampledField::from_scalar_snapshots(times, &snaps)?,
            metrics,
            events: self.events,
            stages: self.stages,
            max_div: self.max_div,
        })
    }
}

/// Shared pseudo-spectral helpers for the right-hand sides.
pub(crate) struct Pseudo {
    pub grid: PeriodicGrid,
    pub wn: Wavenumbers,
    pub mask: Option<Vec<bool>>,
}

impl Pseudo {
    pub fn new(grid: &PeriodicGrid, dealias: bool) -> Self {
        Self {
            grid: grid.clone(),
            wn: Wavenumbers::new(grid),
            mask: if dealias {
                Some(spectral::dealias_mask(grid))
            } else {
                None
            },
        }
    }

    /// Copy of `m` with modes outside the 2/3 band removed.
    pub fn truncate(&self, m: &[Complex64]) -> Vec<Complex64> {
        match &self.mask {
            Some(mask) => m
                .iter()
                .zip(mask)
                .map(|(&c, &keep)| if keep { c } else { Complex64::new(0.0, 0.0) })
                .collect(),
            None => m.to_vec(),
        }
    }

    pub fn truncate_in_place(&self, m: &mut [Complex64]) {
        if let Some(mask) = &self.mask {
            for (c, &keep) in m.iter_mut().zip(mask) {
                if !keep {
                    *c = Complex64::new(0.0, 0.0);
                }
            }
        }
    }

    pub fn to_phys(&self, m: Vec<Complex64>) -> Vec<f64> {
        spectral::inverse_real(&self.grid, m)
    }

    pub fn to_modes(&self, v: &[f64]) -> Vec<Complex64> {
        spectral::forward_real(&self.grid, v)
    }

    /// Adds `Σ_i i k_i F(q_i)` to `out` (Nyquist modes skipped).
    pub fn add_divergence(&self, flux: &[Vec<f64>], out: &mut [Complex64], scale: f64) {
        for (axis, q) in flux.iter().enumerate() {
            let m = self.to_modes(q);
            let ks = if axis == 0 { &self.wn.k1 } else { &self.wn.k2 };
            for i in 0..out.len() {
                if !self.wn.nyquist[i] {
                    out[i] += Complex64::new(0.0, scale * ks[i]) * m[i];
                }
            }
        }
    }

    /// `max |div v|` of a physical vector field, measured spectrally.
    pub fn max_div_phys(&self, comps: &[Vec<f64>]) -> f64 {
        let mut acc = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        self.add_divergence(comps, &mut acc, 1.0);
        self.to_phys(acc).iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_speed(comps: &[Vec<f64>]) -> f64 {
        let n = comps[0].len();
        (0..n)
            .map(|i| comps.iter().map(|c| c[i] * c[i]).sum::<f64>())
            .fold(0.0, f64::max)
            .sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_functions_are_continuous_at_threshold() {
        for &z in &[-1e-2 - 1e-12, -1e-2 + 1e-12, 1e-2 - 1e-12, 1e-2 + 1e-12] {
            let a = phi1(z);
            let b = z.exp_m1() / z;
            assert!((a - b).abs() < 1e-13);
            let c = phi2(z);
            let d = (z.exp_m1() - z) / (z * z);
            assert!((c - d).abs() < 1e-11);
        }
        assert_eq!(phi1(0.0), 1.0);
        assert_eq!(phi2(0.0), 0.5);
    }

    #[test]
    fn config_rejects_ragged_spans() {
        assert!(SolverConfig::new(1.0, 0.3, 1.0).validate().is_err());
        assert_eq!(SolverConfig::new(1.0, 0.25, 1.0).validate().unwrap(), 4);
        let t = SolverConfig::new(1.0, 0.25, 1.0).with_stride(3).output_times().unwrap();
        assert_eq!(t, vec![0.0, 0.75, 1.0]);
    }
}

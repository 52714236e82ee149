//! Interacting α-stable particle systems on the torus.
//!
//! `X^i ← X^i + dt (1/N) Σ_j b(t, X^i, X^j) + ΔL^i`, wrapped into the cell.
//! Particle `i` draws its initial position and its noise from its own stream,
//! so results do not depend on evaluation order.

mod density;
mod diagnostics;
mod kernel;
mod ns;

pub use density::{empirical_density, gaussian_smooth, l1_distance, silverman_bandwidth};
pub use diagnostics::{
    circle_w1, krylov_functional, martingale_residual, sliced_w1, KrylovEstimate, MartingaleReport,
    MartingaleTerm,
};
pub use kernel::{mollify_kernel, InteractionKernel, KernelKind, KernelTable, MollifierSpec};
pub use ns::{simulate_ns_particles, NsParticleConfig, NsParticleRun};

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{PeriodicGrid, ScalarField};
use crate::rng::{derive_seed, RngStream};
use crate::stable::{draw_isotropic, StableParams};

/// Wraps `x` into `[-L/2, L/2)`, leaving in-cell values bit-identical.
#[inline]
pub fn wrap_coord(x: f64, period: f64) -> f64 {
    let h = 0.5 * period;
    if (-h..h).contains(&x) {
        return x;
    }
    let w = (x + h).rem_euclid(period) - h;
    if w >= h {
        -h
    } else {
        w
    }
}

/// `N` equally weighted particles in the cell `[-L/2, L/2)^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleEnsemble {
    dim: usize,
    period: f64,
    positions: Vec<[f64; 2]>,
    pub time: f64,
}

impl ParticleEnsemble {
    pub fn new(dim: usize, period: f64, positions: Vec<[f64; 2]>, time: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::usage(format!("dimension must be 1 or 2, got {dim}")));
        }
        if positions.len() < 2 {
            return Err(Error::usage("an ensemble needs at least two particles"));
        }
        if let Some(i) = positions.iter().position(|p| !(p[0].is_finite() && p[1].is_finite())) {
            return Err(Error::NonFinite { time, index: i });
        }
        let positions = positions
            .into_iter()
            .map(|p| {
                if dim == 1 {
                    [wrap_coord(p[0], period), 0.0]
                } else {
                    [wrap_coord(p[0], period), wrap_coord(p[1], period)]
                }
            })
            .collect();
        Ok(Self {
            dim,
            period,
            positions,
            time,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.len() as f64
    }

    /// Plain coordinate mean (meaningful while no particle crosses the cell edge).
    pub fn center_of_mass(&self) -> [f64; 2] {
        let n = self.len() as f64;
        let mut s = [0.0, 0.0];
        for p in &self.positions {
            s[0] += p[0];
            s[1] += p[1];
        }
        [s[0] / n, s[1] / n]
    }

    pub fn second_moment(&self) -> f64 {
        self.positions.iter().map(|p| p[0] * p[0] + p[1] * p[1]).sum::<f64>() / self.len() as f64
    }
}

/// One Euler–Maruyama step with supplied noise increments.
pub fn em_step(
    ens: &ParticleEnsemble,
    kernel: &InteractionKernel,
    dt: f64,
    increments: &[[f64; 2]],
) -> Result<ParticleEnsemble> {
    if increments.len() != ens.len() {
        return Err(Error::usage(format!(
            "{} increments for {} particles",
            increments.len(),
            ens.len()
        )));
    }
    if kernel.dim != ens.dim || (kernel.period - ens.period).abs() > 1e-12 * ens.period {
        return Err(Error::usage("kernel cell does not match the ensemble"));
    }
    let t = ens.time;
    let v = if kernel.is_zero() {
        None
    } else {
        Some(kernel.mean_field(t, &ens.positions))
    };
    let mut next = Vec::with_capacity(ens.len());
    for (i, p) in ens.positions.iter().enumerate() {
        let d = increments[i];
        let (mut x, mut y) = (p[0], p[1]);
        if let Some(v) = &v {
            x += dt * v[i][0];
            y += dt * v[i][1];
        }
        x += d[0];
        y += d[1];
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::NonFinite { time: t + dt, index: i });
        }
        next.push(if ens.dim == 1 {
            [wrap_coord(x, ens.period), 0.0]
        } else {
            [wrap_coord(x, ens.period), wrap_coord(y, ens.period)]
        });
    }
    Ok(ParticleEnsemble {
        dim: ens.dim,
        period: ens.period,
        positions: next,
        time: t + dt,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussComponent {
    pub weight: f64,
    pub center: [f64; 2],
    pub sigma: f64,
}

type Sampler = Arc<dyn Fn(&mut RngStream) -> [f64; 2] + Send + Sync>;

/// Law of the initial positions.
#[derive(Clone)]
pub enum InitialLaw {
    Uniform,
    Point([f64; 2]),
    /// Mixture of isotropic Gaussians, periodized by the wrap.
    Gaussians(Vec<GaussComponent>),
    /// Piecewise-constant law of a nonnegative lattice density.
    Density(ScalarField),
    Custom { tag: String, sampler: Sampler },
}

impl fmt::Debug for InitialLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "InitialLaw({})", self.tag())
    }
}

impl InitialLaw {
    pub fn gaussian(center: [f64; 2], sigma: f64) -> Self {
        InitialLaw::Gaussians(vec![GaussComponent {
            weight: 1.0,
            center,
            sigma,
        }])
    }

    pub fn tag(&self) -> String {
        match self {
            InitialLaw::Uniform => "uniform".into(),
            InitialLaw::Point(p) => format!("point {p:?}"),
            InitialLaw::Gaussians(c) => format!("gaussian mixture ({} components)", c.len()),
            InitialLaw::Density(_) => "lattice density".into(),
            InitialLaw::Custom { tag, .. } => tag.clone(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            InitialLaw::Gaussians(c) => {
                if c.is_empty() || c.iter().any(|g| !(g.weight > 0.0 && g.sigma > 0.0)) {
                    return Err(Error::usage("mixture components need positive weights and widths"));
                }
            }
            InitialLaw::Density(f) => {
                if f.min() < 0.0 || f.integral() <= 0.0 {
                    return Err(Error::usage("initial density must be nonnegative with positive mass"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Draws `N` positions, particle `i` from stream `i`.
    pub fn sample(&self, dim: usize, period: f64, n: usize, seed: u64) -> Result<Vec<[f64; 2]>> {
        self.validate()?;
        let cdf = match self {
            InitialLaw::Density(f) => {
                let mut acc = 0.0;
                let c: Vec<f64> = f
                    .data()
                    .iter()
                    .map(|v| {
                        acc += v;
                        acc
                    })
                    .collect();
                Some(c)
            }
            _ => None,
        };
        let base = derive_seed(seed, 0x1a11);
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut rng = RngStream::new(base, i as u64);
            let mut p = match self {
                InitialLaw::Uniform => [
                    (rng.random::<f64>() - 0.5) * period,
                    (rng.random::<f64>() - 0.5) * period,
                ],
                InitialLaw::Point(p) => *p,
                InitialLaw::Gaussians(cs) => {
                    let total: f64 = cs.iter().map(|c| c.weight).sum();
                    let mut u = rng.random::<f64>() * total;
                    let mut pick = &cs[cs.len() - 1];
                    for c in cs {
                        if u < c.weight {
                            pick = c;
                            break;
                        }
                        u -= c.weight;
                    }
                    let g1: f64 = rng.sample(StandardNormal);
                    let g2: f64 = rng.sample(StandardNormal);
                    [pick.center[0] + pick.sigma * g1, pick.center[1] + pick.sigma * g2]
                }
                InitialLaw::Density(f) => {
                    let c = cdf.as_ref().expect("cdf");
                    let u = rng.random::<f64>() * c[c.len() - 1];
                    let idx = c.partition_point(|&v| v <= u).min(c.len() - 1);
                    let x = f.grid().point(idx);
                    let h = f.grid().spacing();
                    [
                        x[0] + (rng.random::<f64>() - 0.5) * h,
                        x[1] + (rng.random::<f64>() - 0.5) * h,
                    ]
                }
                InitialLaw::Custom { sampler, .. } => sampler(&mut rng),
            };
            if dim == 1 {
                p[1] = 0.0;
            }
            out.push(p);
        }
        Ok(out)
    }

    /// Periodized density of the law on `grid`, when it has a closed form.
    pub fn density(&self, grid: &PeriodicGrid) -> Option<ScalarField> {
        match self {
            InitialLaw::Uniform => Some(ScalarField::constant(grid, 1.0 / grid.volume())),
            InitialLaw::Gaussians(cs) => {
                let total: f64 = cs.iter().map(|c| c.weight).sum();
                let l = grid.period();
                let d = grid.dim();
                Some(ScalarField::from_fn(grid, |x| {
                    let mut s = 0.0;
                    for c in cs {
                        let images = (6.0 * c.sigma / l).ceil() as i64 + 1;
                        let axis = |ax: usize| -> f64 {
                            (-images..=images)
                                .map(|m| {
                                    let u = x[ax] - c.center[ax] + m as f64 * l;
                                    (-0.5 * u * u / (c.sigma * c.sigma)).exp()
                                })
                                .sum::<f64>()
                                / ((2.0 * std::f64::consts::PI).sqrt() * c.sigma)
                        };
                        let v = if d == 1 { axis(0) } else { axis(0) * axis(1) };
                        s += c.weight / total * v;
                    }
                    s
                }))
            }
            InitialLaw::Density(f) if f.grid().same_lattice(grid) => Some(f.scaled(1.0 / f.integral())),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DdsdeConfig {
    pub dim: usize,
    pub period: f64,
    pub alpha: f64,
    pub t_end: f64,
    pub dt: f64,
    pub n_particles: usize,
    pub seed: u64,
    /// Steps between stored snapshots; the final time is always stored.
    pub snapshot_stride: usize,
    /// Switch the stable noise off (deterministic interacting flow).
    pub noise: bool,
}

impl DdsdeConfig {
    pub fn new(dim: usize, period: f64, alpha: f64, t_end: f64, dt: f64, n_particles: usize, seed: u64) -> Self {
        Self {
            dim,
            period,
            alpha,
            t_end,
            dt,
            n_particles,
            seed,
            snapshot_stride: 1,
            noise: true,
        }
    }

    pub fn steps(&self) -> Result<usize> {
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(Error::usage(format!("alpha must lie in (0, 2], got {}", self.alpha)));
        }
        if !(self.dt > 0.0 && self.t_end > 0.0) {
            return Err(Error::usage("dt and t_end must be positive"));
        }
        if self.n_particles < 2 {
            return Err(Error::usage("need at least two particles"));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::usage("snapshot_stride must be positive"));
        }
        let s = (self.t_end / self.dt).round();
        if (s * self.dt - self.t_end).abs() > 1e-9 * self.t_end.max(1.0) {
            return Err(Error::usage("t_end is not a whole number of steps"));
        }
        Ok(s as usize)
    }
}

/// Snapshots of an ensemble path.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleTrajectory {
    pub dim: usize,
    pub period: f64,
    pub times: Vec<f64>,
    pub snapshots: Vec<Vec<[f64; 2]>>,
    pub dt: f64,
    pub seed: u64,
}

impl ParticleTrajectory {
    pub fn ensemble(&self, ti: usize) -> ParticleEnsemble {
        ParticleEnsemble {
            dim: self.dim,
            period: self.period,
            positions: self.snapshots[ti].clone(),
            time: self.times[ti],
        }
    }

    pub fn final_ensemble(&self) -> ParticleEnsemble {
        self.ensemble(self.times.len() - 1)
    }

    pub fn n_particles(&self) -> usize {
        self.snapshots[0].len()
    }
}

/// Runs the particle system from a given ensemble; particle `i` uses noise
/// stream `streams[i]`.
pub fn simulate_from(
    init: &ParticleEnsemble,
    kernel: &InteractionKernel,
    cfg: &DdsdeConfig,
    streams: &[u64],
) -> Result<ParticleTrajectory> {
    let steps = cfg.steps()?;
    if streams.len() != init.len() {
        return Err(Error::usage("one noise stream per particle is required"));
    }
    let params = StableParams::new(cfg.alpha, init.dim, cfg.dt)?;
    let mut rngs: Vec<RngStream> = streams.iter().map(|&s| RngStream::new(cfg.seed, s)).collect();
    let mut ens = init.clone();
    let mut times = vec![ens.time];
    let mut snaps = vec![ens.positions.clone()];
    let mut inc = vec![[0.0, 0.0]; ens.len()];
    for j in 1..=steps {
        if cfg.noise {
            for (d, r) in inc.iter_mut().zip(rngs.iter_mut()) {
                *d = draw_isotropic(&params, r);
            }
        }
        ens = em_step(&ens, kernel, cfg.dt, &inc)?;
        ens.time = init.time + j as f64 * cfg.dt;
        if j % cfg.snapshot_stride == 0 || j == steps {
            times.push(ens.time);
            snaps.push(ens.positions.clone());
        }
    }
    Ok(ParticleTrajectory {
        dim: init.dim,
        period: init.period,
        times,
        snapshots: snaps,
        dt: cfg.dt,
        seed: cfg.seed,
    })
}

/// Seeded particle approximation of the distribution-dependent SDE.
pub fn simulate_ddsde(law: &InitialLaw, kernel: &InteractionKernel, cfg: &DdsdeConfig) -> Result<ParticleTrajectory> {
    cfg.steps()?;
    let pos = law.sample(cfg.dim, cfg.period, cfg.n_particles, cfg.seed)?;
    let init = ParticleEnsemble::new(cfg.dim, cfg.period, pos, 0.0)?;
    let streams: Vec<u64> = (0..cfg.n_particles as u64).collect();
    simulate_from(&init, kernel, cfg, &streams)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn wrap_keeps_cell_values_bitwise() {
        let l = 2.0 * PI;
        assert_eq!(wrap_coord(1.234, l), 1.234);
        assert!((wrap_coord(PI + 0.5, l) - (0.5 - PI)).abs() < 1e-14);
        assert_eq!(wrap_coord(PI, l), -PI);
    }

    #[test]
    fn constant_kernel_moves_two_particles_exactly() {
        let ens = ParticleEnsemble::new(2, 10.0, vec![[0.0, 0.0], [1.0, -1.0]], 0.0).unwrap();
        let k = InteractionKernel::constant(2, 10.0, [0.5, 0.25]).unwrap();
        let out = em_step(&ens, &k, 0.1, &[[0.0, 0.0]; 2]).unwrap();
        assert_eq!(out.positions()[0], [0.1 * 0.5, 0.1 * 0.25]);
        assert_eq!(out.positions()[1], [1.0 + 0.1 * 0.5, -1.0 + 0.1 * 0.25]);
    }

    #[test]
    fn antisymmetric_kernel_fixes_the_center_of_mass() {
        let k = InteractionKernel::mollified_biot_savart(2.0 * PI, 4.0).unwrap();
        let law = InitialLaw::gaussian([0.0, 0.0], 0.4);
        let mut cfg = DdsdeConfig::new(2, 2.0 * PI, 1.5, 0.5, 0.05, 50, 9);
        cfg.noise = false;
        let tr = simulate_ddsde(&law, &k, &cfg).unwrap();
        let c0 = tr.ensemble(0).center_of_mass();
        let c1 = tr.final_ensemble().center_of_mass();
        assert!((c0[0] - c1[0]).abs() < 1e-12 && (c0[1] - c1[1]).abs() < 1e-12);
    }

    #[test]
    fn permuting_particles_and_streams_permutes_the_trajectory() {
        let l = 2.0 * PI;
        let k = InteractionKernel::periodic_mollified_biot_savart(l, 8.0, 64).unwrap();
        let cfg = DdsdeConfig::new(2, l, 1.5, 0.2, 0.05, 8, 3);
        let init = InitialLaw::gaussian([0.0, 0.0], 0.8).sample(2, l, 8, 11).unwrap();
        let streams: Vec<u64> = (0..8).collect();
        let perm = [3usize, 7, 0, 5, 1, 6, 2, 4];
        let a = simulate_from(&ParticleEnsemble::new(2, l, init.clone(), 0.0).unwrap(), &k, &cfg, &streams).unwrap();
        let pinit: Vec<[f64; 2]> = perm.iter().map(|&i| init[i]).collect();
        let pstreams: Vec<u64> = perm.iter().map(|&i| streams[i]).collect();
        let b = simulate_from(&ParticleEnsemble::new(2, l, pinit, 0.0).unwrap(), &k, &cfg, &pstreams).unwrap();
        let (ea, eb) = (a.final_ensemble(), b.final_ensemble());
        for (j, &i) in perm.iter().enumerate() {
            assert_eq!(ea.positions()[i], eb.positions()[j]);
        }
    }

    #[test]
    fn zero_noise_zero_drift_is_frozen() {
        let law = InitialLaw::Uniform;
        let k = InteractionKernel::zero(2, 2.0 * PI).unwrap();
        let mut cfg = DdsdeConfig::new(2, 2.0 * PI, 1.0, 1.0, 0.1, 64, 1);
        cfg.noise = false;
        let tr = simulate_ddsde(&law, &k, &cfg).unwrap();
        assert_eq!(tr.snapshots[0], tr.snapshots[tr.snapshots.len() - 1]);
    }

    #[test]
    fn gaussian_law_density_has_unit_mass() {
        let g = PeriodicGrid::standard(2, 64).unwrap();
        let law = InitialLaw::Gaussians(vec![
            GaussComponent { weight: 1.0, center: [0.5, 0.0], sigma: 0.4 },
            GaussComponent { weight: 2.0, center: [-1.0, 3.0], sigma: 0.7 },
        ]);
        let rho = law.density(&g).unwrap();
        assert!((rho.integral() - 1.0).abs() < 1e-12);
        assert!(rho.min() > 0.0);
    }
}

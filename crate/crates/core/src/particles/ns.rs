//! Particle approximation of the fractional vorticity equation.

use serde::Serialize;

use super::density::{empirical_density, silverman_bandwidth};
use super::kernel::InteractionKernel;
use super::{simulate_ddsde, DdsdeConfig, InitialLaw, ParticleTrajectory};
use crate::error::{Error, Result};
use crate::field::{PeriodicGrid, ScalarField};

#[derive(Clone, Debug)]
pub struct NsParticleConfig {
    pub law: InitialLaw,
    pub alpha: f64,
    pub t_end: f64,
    pub dt: f64,
    pub n_particles: usize,
    /// Mollification level of the Biot–Savart kernel.
    pub level: f64,
    pub seed: u64,
    /// Grid for the density estimates; its period is the particle cell.
    pub grid: PeriodicGrid,
    /// KDE bandwidth; Silverman's rule when absent.
    pub bandwidth: Option<f64>,
    pub snapshot_stride: usize,
    /// Lattice size of the tabulated kernel.
    pub table_n: usize,
}

impl NsParticleConfig {
    pub fn new(law: InitialLaw, alpha: f64, t_end: f64, dt: f64, n_particles: usize, level: f64, seed: u64, grid: PeriodicGrid) -> Self {
        Self {
            law,
            alpha,
            t_end,
            dt,
            n_particles,
            level,
            seed,
            grid,
            bandwidth: None,
            snapshot_stride: 1,
            table_n: 512,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NsParticleRun {
    #[serde(skip)]
    pub trajectory: ParticleTrajectory,
    #[serde(skip)]
    pub densities: Vec<ScalarField>,
    pub bandwidths: Vec<f64>,
    /// `α` outside `(1, 2)`: the run is allowed but outside the analysed regime.
    pub experimental: bool,
    pub kernel_bound: f64,
}

/// Particles driven by the mollified torus Biot–Savart kernel, with a density
/// estimate at every snapshot.
pub fn simulate_ns_particles(cfg: &NsParticleConfig) -> Result<NsParticleRun> {
    if cfg.grid.dim() != 2 {
        return Err(Error::usage("the vorticity particle system needs d = 2"));
    }
    let experimental = !(cfg.alpha > 1.0 && cfg.alpha < 2.0);
    let kernel = InteractionKernel::periodic_mollified_biot_savart(cfg.grid.period(), cfg.level, cfg.table_n)?;
    let mut dc = DdsdeConfig::new(2, cfg.grid.period(), cfg.alpha, cfg.t_end, cfg.dt, cfg.n_particles, cfg.seed);
    dc.snapshot_stride = cfg.snapshot_stride;
    let trajectory = simulate_ddsde(&cfg.law, &kernel, &dc)?;
    let mut densities = Vec::with_capacity(trajectory.times.len());
    let mut bandwidths = Vec::with_capacity(trajectory.times.len());
    for k in 0..trajectory.times.len() {
        let ens = trajectory.ensemble(k);
        let bw = cfg.bandwidth.unwrap_or_else(|| silverman_bandwidth(&ens, &cfg.grid));
        densities.push(empirical_density(&ens, &cfg.grid, bw)?);
        bandwidths.push(bw);
    }
    Ok(NsParticleRun {
        trajectory,
        densities,
        bandwidths,
        experimental,
        kernel_bound: kernel.bound().unwrap_or(f64::INFINITY),
    })
}

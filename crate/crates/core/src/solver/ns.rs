//! Fractional vorticity equation `∂_t ρ = Δ^{α/2} ρ + s ∇·(ρ u)`, `u = K₂ * ρ`.

use num_complex::Complex64;

use super::{Engine, Pseudo, Rhs, SolverConfig, Stage, Trajectory};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::mollifier;
use crate::spectral;

#[derive(Clone, Debug, PartialEq)]
pub struct NsOptions {
    /// Sign `s` of the transport term. `+1` is the vorticity equation as
    /// derived from the velocity form; `-1` is the Fokker–Planck equation of
    /// particles driven by `+K₂ * ρ`.
    pub sign: f64,
    /// Mollify the Biot–Savart kernel at this level (`ψ̂(k/n)²` multiplier).
    pub kernel_level: Option<f64>,
}

impl Default for NsOptions {
    fn default() -> Self {
        Self {
            sign: 1.0,
            kernel_level: None,
        }
    }
}

struct NsRhs {
    ps: Pseudo,
    sign: f64,
    kernel: Option<Vec<f64>>,
}

impl Rhs for NsRhs {
    fn eval(&mut self, _t: f64, u: &[Complex64], out: &mut [Complex64]) -> Result<Stage> {
        out.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        let m = self.ps.truncate(u);
        let (mut a, mut b) = spectral::biot_savart_modes(&self.ps.wn, &m);
        if let Some(k) = &self.kernel {
            for i in 0..a.len() {
                a[i] *= k[i];
                b[i] *= k[i];
            }
        }
        let v = vec![self.ps.to_phys(a), self.ps.to_phys(b)];
        let rho = self.ps.to_phys(m);
        let flux: Vec<Vec<f64>> = v
            .iter()
            .map(|vi| vi.iter().zip(&rho).map(|(x, y)| x * y).collect())
            .collect();
        self.ps.add_divergence(&flux, out, self.sign);
        self.ps.truncate_in_place(out);
        // The divergence form never touches the mean mode.
        out[0] = Complex64::new(0.0, 0.0);
        Ok(Stage {
            max_speed: Pseudo::max_speed(&v),
            max_div: self.ps.max_div_phys(&v),
        })
    }

    fn gates_divergence(&self) -> bool {
        true
    }
}

/// Vorticity trajectory; the mass `∫ρ` is carried by the untouched mean mode.
pub fn solve_ns_vorticity(rho0: &ScalarField, cfg: &SolverConfig, opts: &NsOptions) -> Result<Trajectory> {
    let grid = rho0.grid();
    if grid.dim() != 2 {
        return Err(Error::usage("the vorticity equation needs a two-dimensional grid"));
    }
    if !(opts.sign == 1.0 || opts.sign == -1.0) {
        return Err(Error::usage("transport sign must be +1 or -1"));
    }
    let kernel = match opts.kernel_level {
        None => None,
        Some(n) if n > 0.0 => {
            let wn = spectral::Wavenumbers::new(grid);
            let mut cache = std::collections::HashMap::new();
            Some(
                wn.kabs
                    .iter()
                    .map(|&k| {
                        *cache
                            .entry(k.to_bits())
                            .or_insert_with(|| mollifier::bump_fourier(k / n).powi(2))
                    })
                    .collect(),
            )
        }
        Some(n) => return Err(Error::usage(format!("mollification level must be positive, got {n}"))),
    };
    let mut rhs = NsRhs {
        ps: Pseudo::new(grid, cfg.dealias),
        sign: opts.sign,
        kernel,
    };
    Engine::new(grid, cfg).run(rho0, &mut rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PeriodicGrid;

    #[test]
    fn single_mode_evolves_linearly() {
        let g = PeriodicGrid::standard(2, 32).unwrap();
        let r0 = ScalarField::from_fn(&g, |x| 1.0 + 0.3 * (x[0] + 2.0 * x[1]).cos());
        let cfg = SolverConfig::new(1.5, 1e-2, 1e-2);
        let tr = solve_ns_vorticity(&r0, &cfg, &NsOptions::default()).unwrap();
        let lin = spectral::semigroup_apply(&r0, 1e-2, 1.5).unwrap();
        assert!(tr.final_state().max_abs_diff(&lin) < 1e-10);
    }

    #[test]
    fn mass_is_conserved() {
        let g = PeriodicGrid::standard(2, 32).unwrap();
        let r0 = ScalarField::from_fn(&g, |x| (-(x[0] * x[0] + 2.0 * (x[1] - 0.5).powi(2))).exp());
        let m0 = r0.integral();
        let cfg = SolverConfig::new(1.5, 1e-2, 0.2);
        for sign in [1.0, -1.0] {
            let tr = solve_ns_vorticity(&r0, &cfg, &NsOptions { sign, kernel_level: Some(8.0) }).unwrap();
            for row in &tr.metrics {
                assert!((row.mass - m0).abs() < 1e-12);
            }
            assert!(tr.max_div < 1e-12);
        }
    }
}

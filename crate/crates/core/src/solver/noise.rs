//! Additive Fourier-mode noise advanced by exact Ornstein–Uhlenbeck updates.
//!
//! The forcing is `Σ_k g_k e^{ik·x} dW_k` with complex Brownian motions,
//! `W_{-k} = conj W_k`, `E|W_k(t)|² = t`, and `g_{-k} = conj g_k`. Over a step
//! of length `h` the physical mode coefficient receives an independent
//! Gaussian kick of variance `|g_k|² (1 - e^{-2h|k|^α}) / (2|k|^α)` on top of
//! the deterministic update (`h|g_0|²` for the mean mode).

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::PeriodicGrid;
use crate::rng::RngStream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseMode {
    /// Signed mode numbers `(m1, m2)`; wavevector `(2π/L) m`.
    pub mode: [i64; 2],
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub modes: Vec<NoiseMode>,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn is_silent(&self) -> bool {
        self.modes.iter().all(|m| m.re == 0.0 && m.im == 0.0)
    }
}

struct Forced {
    idx: usize,
    conj: usize,
    amp: f64,
    kalpha: f64,
}

pub(crate) struct PreparedNoise {
    forced: Vec<Forced>,
    scale: f64,
    rng: RngStream,
}

impl PreparedNoise {
    pub fn new(spec: &NoiseSpec, grid: &PeriodicGrid, alpha: f64) -> Result<Self> {
        use std::collections::BTreeMap;
        let mut amps: BTreeMap<usize, Complex64> = BTreeMap::new();
        for m in &spec.modes {
            let idx = grid.mode_index(m.mode).ok_or_else(|| {
                Error::usage(format!("noise mode {:?} lies outside the grid", m.mode))
            })?;
            if grid.is_nyquist(idx) {
                return Err(Error::usage(format!(
                    "noise mode {:?} sits on the Nyquist line",
                    m.mode
                )));
            }
            if !(m.re.is_finite() && m.im.is_finite()) {
                return Err(Error::data("non-finite noise amplitude"));
            }
            let g = Complex64::new(m.re, m.im);
            if amps.insert(idx, g).is_some() {
                return Err(Error::usage(format!("noise mode {:?} listed twice", m.mode)));
            }
        }
        let mut forced = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for (&idx, &g) in &amps {
            if seen.contains(&idx) {
                continue;
            }
            let conj = grid.conjugate_index(idx);
            if conj == idx && g.im != 0.0 {
                return Err(Error::usage("the mean-mode amplitude must be real"));
            }
            if let Some(&gc) = amps.get(&conj) {
                if conj != idx && (gc - g.conj()).norm() > 1e-14 * g.norm().max(1.0) {
                    return Err(Error::usage(format!(
                        "noise amplitudes at modes {idx} and {conj} are not conjugate"
                    )));
                }
            }
            seen.insert(idx);
            seen.insert(conj);
            if g.norm() == 0.0 {
                continue;
            }
            forced.push(Forced {
                idx,
                conj,
                amp: g.norm(),
                kalpha: grid.k_abs(idx).powf(alpha),
            });
        }
        Ok(Self {
            forced,
            scale: grid.len() as f64,
            rng: RngStream::new(spec.seed, 0),
        })
    }

    pub fn is_active(&self) -> bool {
        !self.forced.is_empty()
    }

    /// Variance of the physical coefficient kick over a step `h`.
    pub fn kick_variance(amp: f64, kalpha: f64, h: f64) -> f64 {
        if kalpha == 0.0 {
            h * amp * amp
        } else {
            amp * amp * (-(-2.0 * h * kalpha).exp_m1()) / (2.0 * kalpha)
        }
    }

    pub fn apply(&mut self, h: f64, u: &mut [Complex64]) {
        for f in &self.forced {
            let var = Self::kick_variance(f.amp, f.kalpha, h);
            if f.conj == f.idx {
                let z: f64 = self.rng.sample(StandardNormal);
                u[f.idx] += self.scale * var.sqrt() * z;
            } else {
                let a: f64 = self.rng.sample(StandardNormal);
                let b: f64 = self.rng.sample(StandardNormal);
                let s = (0.5 * var).sqrt() * self.scale;
                let xi = Complex64::new(s * a, s * b);
                u[f.idx] += xi;
                u[f.conj] += xi.conj();
            }
        }
    }
}

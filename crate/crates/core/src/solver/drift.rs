//! Prescribed drifts and forcings, optionally time dependent.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::field::{PeriodicGrid, SampledField, ScalarField, VectorField};
use crate::spectral;

type VecFn = Arc<dyn Fn(f64) -> VectorField + Send + Sync>;
type ScalFn = Arc<dyn Fn(f64) -> ScalarField + Send + Sync>;

/// Fixed drift `b(t, x)`. Sampled drifts are interpolated linearly in time.
#[derive(Clone, Default)]
pub enum Drift {
    #[default]
    Zero,
    Steady(VectorField),
    Sampled(SampledField),
    Func(VecFn),
}

impl fmt::Debug for Drift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Drift::Zero => write!(f, "Drift::Zero"),
            Drift::Steady(_) => write!(f, "Drift::Steady(..)"),
            Drift::Sampled(s) => write!(f, "Drift::Sampled({} times)", s.len_times()),
            Drift::Func(_) => write!(f, "Drift::Func(..)"),
        }
    }
}

impl Drift {
    pub fn func(f: impl Fn(f64) -> VectorField + Send + Sync + 'static) -> Self {
        Drift::Func(Arc::new(f))
    }

    pub fn at(&self, grid: &PeriodicGrid, t: f64) -> VectorField {
        match self {
            Drift::Zero => VectorField::zeros(grid),
            Drift::Steady(v) => v.clone(),
            Drift::Sampled(s) => s.vector_at(t),
            Drift::Func(f) => f(t),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Drift::Zero)
    }

    pub fn is_steady(&self) -> bool {
        matches!(self, Drift::Zero | Drift::Steady(_))
    }

    pub fn check(&self, grid: &PeriodicGrid) -> Result<()> {
        let v = self.at(grid, 0.0);
        grid.ensure_same(v.grid())?;
        if v.components.len() != grid.dim() {
            return Err(Error::usage(format!(
                "drift has {} components on a {}-dimensional grid",
                v.components.len(),
                grid.dim()
            )));
        }
        Ok(())
    }

    /// Drift evaluated at `t_ref - t`.
    pub fn reversed(&self, grid: &PeriodicGrid, t_ref: f64) -> Drift {
        match self {
            Drift::Zero | Drift::Steady(_) => self.clone(),
            other => {
                let inner = other.clone();
                let g = grid.clone();
                Drift::func(move |s| inner.at(&g, t_ref - s))
            }
        }
    }
}

/// Forcing `f(t, x)`.
#[derive(Clone, Default)]
pub enum Forcing {
    #[default]
    Zero,
    Steady(ScalarField),
    Sampled(SampledField),
    Func(ScalFn),
}

impl fmt::Debug for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Forcing::Zero => write!(f, "Forcing::Zero"),
            Forcing::Steady(_) => write!(f, "Forcing::Steady(..)"),
            Forcing::Sampled(s) => write!(f, "Forcing::Sampled({} times)", s.len_times()),
            Forcing::Func(_) => write!(f, "Forcing::Func(..)"),
        }
    }
}

impl Forcing {
    pub fn func(f: impl Fn(f64) -> ScalarField + Send + Sync + 'static) -> Self {
        Forcing::Func(Arc::new(f))
    }

    pub fn at(&self, grid: &PeriodicGrid, t: f64) -> ScalarField {
        match self {
            Forcing::Zero => ScalarField::zeros(grid),
            Forcing::Steady(v) => v.clone(),
            Forcing::Sampled(s) => s.scalar_at(t),
            Forcing::Func(f) => f(t),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Forcing::Zero)
    }

    /// `-f(t_ref - s)`.
    pub fn reversed_negated(&self, grid: &PeriodicGrid, t_ref: f64) -> Forcing {
        match self {
            Forcing::Zero => Forcing::Zero,
            Forcing::Steady(v) => Forcing::Steady(v.scaled(-1.0)),
            other => {
                let inner = other.clone();
                let g = grid.clone();
                Forcing::func(move |s| inner.at(&g, t_ref - s).scaled(-1.0))
            }
        }
    }

    pub fn scaled(&self, grid: &PeriodicGrid, c: f64) -> Forcing {
        match self {
            Forcing::Zero => Forcing::Zero,
            Forcing::Steady(v) => Forcing::Steady(v.scaled(c)),
            Forcing::Sampled(s) => Forcing::Sampled(s.map_values(|v| c * v)),
            other => {
                let inner = other.clone();
                let g = grid.clone();
                Forcing::func(move |t| inner.at(&g, t).scaled(c))
            }
        }
    }
}

/// Gaussian smoothing `exp(-ε²|k|²/2)` of each component.
pub fn mollify_gaussian(v: &VectorField, eps: f64) -> VectorField {
    VectorField {
        components: v
            .components
            .iter()
            .map(|c| {
                let g = c.grid().clone();
                spectral::apply_real_multiplier(c, |i| {
                    let k = g.k_abs(i);
                    (-0.5 * eps * eps * k * k).exp()
                })
            })
            .collect(),
    }
}

/// Divergence-free planar drift `∇^⊥ψ` from a random stream function with
/// modes `1 <= |m|_∞ <= kmax` and amplitudes decaying like `|m|^{-decay}`,
/// rescaled so that `max |b| = speed`.
pub fn random_divfree_drift<R: Rng + ?Sized>(
    grid: &PeriodicGrid,
    kmax: i64,
    decay: f64,
    speed: f64,
    rng: &mut R,
) -> Result<VectorField> {
    if grid.dim() != 2 {
        return Err(Error::usage("random divergence-free drifts need d = 2"));
    }
    if kmax < 1 || 2 * kmax >= grid.n() as i64 {
        return Err(Error::usage(format!("kmax {kmax} does not fit the grid")));
    }
    let w = 2.0 * PI / grid.period();
    let mut terms = Vec::new();
    for m1 in -kmax..=kmax {
        for m2 in 0..=kmax {
            if m2 == 0 && m1 <= 0 {
                continue;
            }
            let mag = ((m1 * m1 + m2 * m2) as f64).sqrt();
            let a: f64 = rng.sample::<f64, _>(StandardNormal) * mag.powf(-decay);
            let ph: f64 = rng.random::<f64>() * 2.0 * PI;
            terms.push((m1 as f64 * w, m2 as f64 * w, a, ph));
        }
    }
    // b = (∂₂ψ, -∂₁ψ) for ψ = Σ a cos(k·x + φ).
    let b1 = ScalarField::from_fn(grid, |x| {
        terms
            .iter()
            .map(|&(k1, k2, a, ph)| -a * k2 * (k1 * x[0] + k2 * x[1] + ph).sin())
            .sum()
    });
    let b2 = ScalarField::from_fn(grid, |x| {
        terms
            .iter()
            .map(|&(k1, k2, a, ph)| a * k1 * (k1 * x[0] + k2 * x[1] + ph).sin())
            .sum()
    });
    let v = VectorField::new(vec![b1, b2])?;
    let m = v.max_magnitude();
    Ok(v.scaled(speed / m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn random_drift_is_divergence_free() {
        let g = PeriodicGrid::standard(2, 32).unwrap();
        let mut rng = RngStream::new(5, 0);
        let b = random_divfree_drift(&g, 4, 1.5, 2.0, &mut rng).unwrap();
        assert!((b.max_magnitude() - 2.0).abs() < 1e-12);
        assert!(spectral::divergence(&b).max_abs() < 1e-12);
    }

    #[test]
    fn sampled_drift_interpolates_linearly() {
        let g = PeriodicGrid::standard(2, 8).unwrap();
        let a = VectorField::constant(&g, [1.0, 0.0]);
        let b = VectorField::constant(&g, [3.0, 2.0]);
        let s = SampledField::from_vector_snapshots(vec![0.0, 1.0], &[a, b]).unwrap();
        let d = Drift::Sampled(s);
        let m = d.at(&g, 0.25);
        assert!((m.components[0].data()[5] - 1.5).abs() < 1e-15);
        assert!((m.components[1].data()[5] - 0.5).abs() < 1e-15);
        let r = d.reversed(&g, 1.0).at(&g, 0.25);
        assert!((r.components[0].data()[0] - 2.5).abs() < 1e-15);
    }
}

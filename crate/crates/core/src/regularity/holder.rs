//! Hölder exponent from the decay of oscillations over shrinking cylinders.

use serde::Serialize;

use super::oscillation;
use crate::error::{Error, Result};
use crate::field::SampledField;
use crate::norms::Cylinder;

/// Scales closer than this many lattice spacings to the floor are dropped.
const FLOOR_SPACINGS: f64 = 4.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolderFit {
    /// Least-squares slope; `+∞` when every oscillation vanishes.
    pub gamma: f64,
    pub r_squared: f64,
    pub radii: Vec<f64>,
    pub oscillations: Vec<f64>,
    /// Radii dropped at the lattice floor or outside the sampled box.
    pub discarded: Vec<f64>,
    pub zero_oscillation: bool,
}

/// Fits `log osc(Q_r(t0, x0))` against `log r`.
pub fn holder_fit(u: &SampledField, t0: f64, x0: [f64; 2], radii: &[f64]) -> Result<HolderFit> {
    let floor = FLOOR_SPACINGS * u.grid().spacing();
    let mut used = Vec::new();
    let mut oscs = Vec::new();
    let mut discarded = Vec::new();
    for &r in radii {
        let q = Cylinder::two_sided(t0, r)?.centered_at(x0);
        if r < floor || q.check_inside(u).is_err() {
            discarded.push(r);
            continue;
        }
        used.push(r);
        oscs.push(oscillation(u, &q)?.osc);
    }
    if used.len() < 3 {
        return Err(Error::usage(format!(
            "only {} usable scales above the lattice floor {floor}",
            used.len()
        )));
    }
    if oscs.iter().all(|&o| o == 0.0) {
        return Ok(HolderFit {
            gamma: f64::INFINITY,
            r_squared: 1.0,
            radii: used,
            oscillations: oscs,
            discarded,
            zero_oscillation: true,
        });
    }
    let pts: Vec<(f64, f64)> = used
        .iter()
        .zip(&oscs)
        .filter(|(_, &o)| o > 0.0)
        .map(|(&r, &o)| (r.ln(), o.ln()))
        .collect();
    let zero_oscillation = pts.len() < used.len();
    if pts.len() < 3 {
        return Err(Error::usage("fewer than three scales with positive oscillation"));
    }
    let (gamma, r_squared) = least_squares(&pts);
    Ok(HolderFit {
        gamma,
        r_squared,
        radii: used,
        oscillations: oscs,
        discarded,
        zero_oscillation,
    })
}

/// Slope and coefficient of determination.
fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{PeriodicGrid, ScalarField};

    fn steady(grid: &PeriodicGrid, f: impl Fn([f64; 2]) -> f64) -> SampledField {
        let s = ScalarField::from_fn(grid, f);
        SampledField::from_scalar_snapshots(vec![-2.0, 0.0, 2.0], &[s.clone(), s.clone(), s]).unwrap()
    }

    fn dyadic(j0: i32, j1: i32) -> Vec<f64> {
        (j0..=j1).map(|j| 2f64.powi(-j)).collect()
    }

    #[test]
    fn smooth_function_is_lipschitz() {
        let g = PeriodicGrid::standard(2, 256).unwrap();
        let u = steady(&g, |x| (x[0] + 0.5 * x[1]).sin());
        let fit = holder_fit(&u, 0.0, [0.0, 0.0], &dyadic(0, 6)).unwrap();
        assert!(fit.gamma >= 0.9 && fit.r_squared >= 0.99, "{fit:?}");
        assert!(!fit.discarded.is_empty());
    }

    #[test]
    fn square_root_cusp_is_recovered() {
        let g = PeriodicGrid::new(2, 512, 4.0).unwrap();
        let u = steady(&g, |x| (x[0] * x[0] + x[1] * x[1]).sqrt().sqrt());
        let fit = holder_fit(&u, 0.0, [0.0, 0.0], &dyadic(0, 7)).unwrap();
        assert!((fit.gamma - 0.5).abs() < 0.05, "{fit:?}");
    }

    #[test]
    fn constant_gives_the_sentinel() {
        let g = PeriodicGrid::standard(2, 128).unwrap();
        let u = steady(&g, |_| 1.0);
        let fit = holder_fit(&u, 0.0, [0.0, 0.0], &dyadic(0, 3)).unwrap();
        assert!(fit.gamma.is_infinite() && fit.zero_oscillation);
    }

    #[test]
    fn too_few_scales_is_an_error() {
        let g = PeriodicGrid::standard(2, 32).unwrap();
        let u = steady(&g, |x| x[0].sin());
        assert!(holder_fit(&u, 0.0, [0.0, 0.0], &dyadic(1, 6)).is_err());
    }
}

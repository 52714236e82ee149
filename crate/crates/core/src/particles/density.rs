//! Periodic Gaussian kernel density estimates.

use std::f64::consts::PI;

use super::kernel::min_image;
use super::ParticleEnsemble;
use crate::error::{Error, Result};
use crate::field::{PeriodicGrid, ScalarField};
use crate::spectral;

/// Lattice weights of the periodized 1D Gaussian centred at `x`, normalized
/// so that `Σ w h = 1`. Returns `(first index, weights)` over a window.
fn axis_weights(grid: &PeriodicGrid, x: f64, sigma: f64) -> (i64, Vec<f64>) {
    let n = grid.n() as i64;
    let h = grid.spacing();
    let half = ((7.0 * sigma / h).ceil() as i64).min(n / 2);
    let s = (x + 0.5 * grid.period()) / h;
    let centre = s.round() as i64;
    let (lo, hi) = if 2 * half + 1 >= n { (centre - n / 2, centre - n / 2 + n - 1) } else { (centre - half, centre + half) };
    let mut w = Vec::with_capacity((hi - lo + 1) as usize);
    for i in lo..=hi {
        let xi = grid.coord(i.rem_euclid(n) as usize);
        let u = min_image(xi - x, grid.period());
        // Images beyond the nearest only matter for wide kernels.
        let mut v = 0.0;
        let images = (7.0 * sigma / grid.period()).ceil() as i64;
        for m in -images..=images {
            let z = u + m as f64 * grid.period();
            v += (-0.5 * z * z / (sigma * sigma)).exp();
        }
        w.push(v);
    }
    let total: f64 = w.iter().sum::<f64>() * h;
    for v in &mut w {
        *v /= total;
    }
    (lo, w)
}

/// Kernel density estimate of the empirical law on `grid`; mass 1 by construction.
pub fn empirical_density(ens: &ParticleEnsemble, grid: &PeriodicGrid, bandwidth: f64) -> Result<ScalarField> {
    if grid.dim() != ens.dim() || (grid.period() - ens.period()).abs() > 1e-12 * grid.period() {
        return Err(Error::usage("density grid does not match the particle cell"));
    }
    if !(bandwidth >= grid.spacing()) {
        return Err(Error::usage(format!(
            "bandwidth {bandwidth} is below the lattice spacing {}",
            grid.spacing()
        )));
    }
    let n = grid.n() as i64;
    let wgt = 1.0 / ens.len() as f64;
    let mut out = vec![0.0; grid.len()];
    for p in ens.positions() {
        let (lo1, w1) = axis_weights(grid, p[0], bandwidth);
        if grid.dim() == 1 {
            for (a, &wa) in w1.iter().enumerate() {
                out[(lo1 + a as i64).rem_euclid(n) as usize] += wgt * wa;
            }
            continue;
        }
        let (lo2, w2) = axis_weights(grid, p[1], bandwidth);
        for (a, &wa) in w1.iter().enumerate() {
            let row = (lo1 + a as i64).rem_euclid(n) as usize * grid.n();
            let c = wgt * wa;
            for (b, &wb) in w2.iter().enumerate() {
                out[row + (lo2 + b as i64).rem_euclid(n) as usize] += c * wb;
            }
        }
    }
    ScalarField::new(grid.clone(), out)
}

/// Silverman-type bandwidth `σ̂ N^{-1/(d+4)}`, with `σ̂` the spread about the
/// circular mean, never below one lattice spacing.
pub fn silverman_bandwidth(ens: &ParticleEnsemble, grid: &PeriodicGrid) -> f64 {
    let d = ens.dim();
    let l = ens.period();
    let mut var = 0.0;
    for ax in 0..d {
        let (mut c, mut s) = (0.0, 0.0);
        for p in ens.positions() {
            let th = 2.0 * PI * p[ax] / l;
            c += th.cos();
            s += th.sin();
        }
        let mean = s.atan2(c) * l / (2.0 * PI);
        var += ens
            .positions()
            .iter()
            .map(|p| min_image(p[ax] - mean, l).powi(2))
            .sum::<f64>()
            / ens.len() as f64;
    }
    let sd = (var / d as f64).sqrt();
    (sd * (ens.len() as f64).powf(-1.0 / (d as f64 + 4.0))).max(grid.spacing())
}

/// Gaussian smoothing `exp(-σ²|k|²/2)` of a lattice field.
pub fn gaussian_smooth(f: &ScalarField, sigma: f64) -> ScalarField {
    let g = f.grid().clone();
    spectral::apply_real_multiplier(f, |i| {
        let k = g.k_abs(i);
        (-0.5 * sigma * sigma * k * k).exp()
    })
}

/// `∫ |a - b|` by the lattice rule.
pub fn l1_distance(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    a.grid().ensure_same(b.grid())?;
    Ok(a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).sum::<f64>() * a.grid().cell_volume())
}

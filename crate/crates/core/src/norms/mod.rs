//! Lattice versions of the mixed Lebesgue, Bessel and localized norms.
//!
//! Integrals are lattice sums weighted by the spacing (trapezoidal on the
//! periodic cell). Time integrals use the trapezoid on the sample times.

mod energy;
mod geometry;
mod index;
mod tail;

pub use energy::{energy_form, energy_form_with_images, KernelSpec};
pub(crate) use energy::{default_images, periodized_kernel};
pub use geometry::{Cylinder, CylinderKind, LocalizationSpec};
pub use index::{index_classify, IndexPair, IndexVerdict, Regime};
pub use tail::{tail, TailValue};

use crate::error::{Error, Result};
use crate::field::{PeriodicGrid, SampledField, ScalarField};
use crate::spectral;

/// Exponent vector with entries in `(0, ∞]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiIndex {
    exponents: Vec<f64>,
}

impl MultiIndex {
    pub fn new(exponents: Vec<f64>) -> Result<Self> {
        if exponents.is_empty() {
            return Err(Error::usage("multi-index must be nonempty"));
        }
        if let Some(p) = exponents.iter().find(|p| !(**p > 0.0) || p.is_nan()) {
            return Err(Error::usage(format!("exponent {p} is not in (0, inf]")));
        }
        Ok(Self { exponents })
    }

    pub fn uniform(p: f64, d: usize) -> Result<Self> {
        Self::new(vec![p; d])
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    /// `|1/p| = Σ 1/p_i`, with `1/∞ = 0`.
    pub fn reciprocal_sum(&self) -> f64 {
        self.exponents.iter().map(|p| 1.0 / p).sum()
    }

    /// True when every entry exceeds `lo`.
    pub fn all_above(&self, lo: f64) -> bool {
        self.exponents.iter().all(|&p| p > lo)
    }
}

fn reduce_axis(values: &[f64], p: f64, h: f64) -> f64 {
    if p.is_infinite() {
        values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    } else {
        let s: f64 = values.iter().map(|v| v.abs().powf(p)).sum();
        (s * h).powf(1.0 / p)
    }
}

/// Mixed norm of raw lattice values; the last axis is integrated first.
pub fn mixed_norm_values(grid: &PeriodicGrid, values: &[f64], p: &MultiIndex) -> Result<f64> {
    if p.len() != grid.dim() {
        return Err(Error::usage(format!(
            "multi-index has {} entries for a {}-dimensional field",
            p.len(),
            grid.dim()
        )));
    }
    if values.len() != grid.len() {
        return Err(Error::usage("value count does not match grid"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::data("non-finite value in mixed norm"));
    }
    let h = grid.spacing();
    let e = p.exponents();
    if grid.dim() == 1 {
        return Ok(reduce_axis(values, e[0], h));
    }
    let n = grid.n();
    let inner: Vec<f64> = values.chunks(n).map(|row| reduce_axis(row, e[1], h)).collect();
    Ok(reduce_axis(&inner, e[0], h))
}

/// `‖f‖_{L^p}` for a scalar field with `p` a multi-index.
pub fn mixed_norm(f: &ScalarField, p: &MultiIndex) -> Result<f64> {
    mixed_norm_values(f.grid(), f.data(), p)
}

/// Spatial mixed norm of one time slice; vector fields use the Euclidean magnitude.
pub fn mixed_norm_at(f: &SampledField, ti: usize, p: &MultiIndex) -> Result<f64> {
    mixed_norm(&f.magnitude_snapshot(ti), p)
}

/// Trapezoid weights on increasing sample times.
pub fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let m = times.len();
    let mut w = vec![0.0; m];
    for j in 0..m.saturating_sub(1) {
        let dt = times[j + 1] - times[j];
        w[j] += 0.5 * dt;
        w[j + 1] += 0.5 * dt;
    }
    w
}

/// `L^q` reduction in time of per-slice values.
pub fn time_reduce(times: &[f64], values: &[f64], q: f64) -> Result<f64> {
    if !(q > 0.0) {
        return Err(Error::usage(format!("time exponent must be > 0, got {q}")));
    }
    if values.is_empty() {
        return Err(Error::usage("no time samples"));
    }
    if q.is_infinite() {
        return Ok(values.iter().fold(0.0_f64, |m, v| m.max(v.abs())));
    }
    if times.len() < 2 {
        return Err(Error::usage(
            "a finite time exponent needs at least two time samples",
        ));
    }
    let w = trapezoid_weights(times);
    let s: f64 = values.iter().zip(&w).map(|(v, w)| v.abs().powf(q) * w).sum();
    Ok(s.powf(1.0 / q))
}

/// Periodic lattice convolution `(f * g)(x) = Σ_y f(y) g(x - y) h^d`, summed directly.
pub fn periodic_convolution(f: &ScalarField, g: &ScalarField) -> Result<ScalarField> {
    let grid = f.grid();
    grid.ensure_same(g.grid())?;
    let n = grid.n();
    let w = grid.cell_volume();
    let (a, b) = (f.data(), g.data());
    let out: Vec<f64> = (0..grid.len())
        .map(|i| {
            let [i1, i2] = grid.axis_indices(i);
            let mut s = 0.0;
            for (j, &fj) in a.iter().enumerate() {
                let [j1, j2] = grid.axis_indices(j);
                s += fj * b[grid.flat_index((i1 + n - j1) % n, (i2 + n - j2) % n)];
            }
            s * w
        })
        .collect();
    ScalarField::new(grid.clone(), out)
}

/// `‖f‖_{L^q_t L^p_x}`.
pub fn space_time_norm(f: &SampledField, q: f64, p: &MultiIndex) -> Result<f64> {
    let per: Vec<f64> = (0..f.len_times())
        .map(|ti| mixed_norm_at(f, ti, p))
        .collect::<Result<_>>()?;
    time_reduce(f.times(), &per, q)
}

fn check_bessel_exponents(p: &MultiIndex) -> Result<()> {
    if p.all_above(1.0) {
        Ok(())
    } else {
        Err(Error::usage(format!(
            "Bessel norms need exponents > 1, got {:?}",
            p.exponents()
        )))
    }
}

/// Bessel-potential norm of order `beta`.
///
/// For `beta >= 0` this is `‖f‖_p + ‖Δ^{β/2} f‖_p`; for `beta < 0` it is
/// `‖(I - Δ)^{β/2} f‖_p`.
pub fn bessel_norm(f: &ScalarField, beta: f64, p: &MultiIndex) -> Result<f64> {
    check_bessel_exponents(p)?;
    if !beta.is_finite() {
        return Err(Error::usage("Bessel order must be finite"));
    }
    f.check_finite()?;
    if beta >= 0.0 {
        let grid = f.grid();
        let lf = spectral::apply_real_multiplier(f, |i| -grid.k_abs(i).powf(beta));
        Ok(mixed_norm(f, p)? + mixed_norm(&lf, p)?)
    } else {
        mixed_norm(&spectral::bessel_potential(f, beta), p)
    }
}

/// `L^q` in time of the Bessel norm of each slice.
pub fn space_time_bessel_norm(f: &SampledField, beta: f64, p: &MultiIndex, q: f64) -> Result<f64> {
    if f.components() != 1 {
        return Err(Error::usage("Bessel norms are defined for scalar fields"));
    }
    let per: Vec<f64> = (0..f.len_times())
        .map(|ti| bessel_norm(&f.snapshot(ti), beta, p))
        .collect::<Result<_>>()?;
    time_reduce(f.times(), &per, q)
}

/// Energy-space norm `‖f‖_{L^∞_t L^2_x} + ‖Δ^{α/4} f‖_{L^2_{t,x}}`.
pub fn valpha_norm(f: &SampledField, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::usage(format!("alpha must lie in (0, 2], got {alpha}")));
    }
    let grid = f.grid();
    let d = grid.dim();
    let l2 = MultiIndex::uniform(2.0, d)?;
    let sup_l2 = space_time_norm(f, f64::INFINITY, &l2)?;
    let mut sq = Vec::with_capacity(f.len_times());
    for ti in 0..f.len_times() {
        let mut s = 0.0;
        for c in 0..f.components() {
            let g = spectral::abs_k_power(&f.component(ti, c), 0.5 * alpha);
            s += g.l2_norm().powi(2);
        }
        sq.push(s.sqrt());
    }
    let grad = if f.len_times() == 1 {
        0.0
    } else {
        time_reduce(f.times(), &sq, 2.0)?
    };
    Ok(sup_l2 + grad)
}

/// `sup_z ‖f χ^z_r‖_{L^q_t H^β_p}` over the shift lattice of `loc`.
pub fn localized_norm(
    f: &SampledField,
    beta: f64,
    p: &MultiIndex,
    q: f64,
    loc: &LocalizationSpec,
) -> Result<f64> {
    if loc.shifts().is_empty() {
        return Err(Error::usage("localization needs at least one shift"));
    }
    let grid = f.grid();
    let mut best = 0.0_f64;
    for &z in loc.shifts() {
        let chi = loc.cutoff_field(grid, z)?;
        let mut per = Vec::with_capacity(f.len_times());
        for ti in 0..f.len_times() {
            let g = f.snapshot(ti).zip_map(&chi, |a, b| a * b);
            per.push(bessel_norm(&g, beta, p)?);
        }
        best = best.max(time_reduce(f.times(), &per, q)?);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit_grid(d: usize, n: usize) -> PeriodicGrid {
        PeriodicGrid::new(d, n, 1.0).unwrap()
    }

    #[test]
    fn indicator_of_cell_has_unit_norm() {
        let g = unit_grid(2, 16);
        let f = ScalarField::constant(&g, 1.0);
        let p = MultiIndex::new(vec![2.0, 2.0]).unwrap();
        assert!((mixed_norm(&f, &p).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn tensor_products_factorize() {
        let g = PeriodicGrid::standard(2, 32).unwrap();
        let g1 = PeriodicGrid::standard(1, 32).unwrap();
        let a = |x: f64| 1.0 + 0.5 * x.sin();
        let b = |y: f64| (y.cos()).exp();
        let f = ScalarField::from_fn(&g, |p| a(p[0]) * b(p[1]));
        let fa = ScalarField::from_fn(&g1, |p| a(p[0]));
        let fb = ScalarField::from_fn(&g1, |p| b(p[0]));
        for (p1, p2) in [(2.0, 3.0), (1.5, f64::INFINITY), (4.0, 1.0)] {
            let p = MultiIndex::new(vec![p1, p2]).unwrap();
            let lhs = mixed_norm(&f, &p).unwrap();
            let rhs = mixed_norm(&fa, &MultiIndex::new(vec![p1]).unwrap()).unwrap()
                * mixed_norm(&fb, &MultiIndex::new(vec![p2]).unwrap()).unwrap();
            assert!((lhs - rhs).abs() < 1e-10 * rhs);
        }
    }

    #[test]
    fn dimension_mismatch_is_usage_error() {
        let g = unit_grid(2, 8);
        let f = ScalarField::zeros(&g);
        let p = MultiIndex::new(vec![2.0]).unwrap();
        assert!(matches!(mixed_norm(&f, &p), Err(Error::Usage(_))));
    }

    #[test]
    fn space_time_constant_and_sup() {
        let g = unit_grid(2, 8);
        let times: Vec<f64> = (0..=10).map(|j| j as f64 / 10.0).collect();
        let snaps: Vec<ScalarField> = times.iter().map(|_| ScalarField::constant(&g, -3.0)).collect();
        let sf = SampledField::from_scalar_snapshots(times.clone(), &snaps).unwrap();
        let p = MultiIndex::uniform(2.0, 2).unwrap();
        assert!((space_time_norm(&sf, 4.0, &p).unwrap() - 3.0).abs() < 1e-13);
        let peaked: Vec<ScalarField> = times
            .iter()
            .map(|t| ScalarField::constant(&g, 1.0 - (t - 0.5f64).abs()))
            .collect();
        let sf = SampledField::from_scalar_snapshots(times, &peaked).unwrap();
        assert!((space_time_norm(&sf, f64::INFINITY, &p).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_time_with_finite_q_is_rejected() {
        let g = unit_grid(1, 8);
        let sf = SampledField::single(&ScalarField::constant(&g, 1.0), 0.0);
        let p = MultiIndex::uniform(2.0, 1).unwrap();
        assert!(space_time_norm(&sf, 2.0, &p).is_err());
        assert!(space_time_norm(&sf, f64::INFINITY, &p).is_ok());
    }

    #[test]
    fn bessel_identity_and_eigenfunction() {
        let g = PeriodicGrid::standard(2, 32).unwrap();
        let f = ScalarField::from_fn(&g, |p| (2.0 * p[0] + p[1]).cos());
        let p2 = MultiIndex::uniform(2.0, 2).unwrap();
        let base = mixed_norm(&f, &p2).unwrap();
        assert!((bessel_norm(&f, 0.0, &p2).unwrap() - 2.0 * base).abs() < 1e-12);
        let beta = 0.7;
        let k = 5f64.sqrt();
        let expect = (1.0 + k.powf(beta)) * base;
        assert!((bessel_norm(&f, beta, &p2).unwrap() - expect).abs() < 1e-12 * expect);
        let p1 = MultiIndex::uniform(1.0, 2).unwrap();
        assert!(bessel_norm(&f, 0.5, &p1).is_err());
    }

    #[test]
    fn negative_bessel_order_matches_direct_multiplier() {
        let g = PeriodicGrid::new(2, 64, 16.0).unwrap();
        let f = ScalarField::from_fn(&g, |p| (-(p[0] * p[0] + p[1] * p[1]) / 2.0).exp());
        let p = MultiIndex::uniform(3.0, 2).unwrap();
        // Oracle: direct DFT-side multiplication with an independent loop.
        let modes = spectral::forward_real(&g, f.data());
        let n = g.n();
        let mut out = modes.clone();
        for i1 in 0..n {
            for i2 in 0..n {
                let k1 = 2.0 * PI / 16.0 * g.signed_mode(i1) as f64;
                let k2 = 2.0 * PI / 16.0 * g.signed_mode(i2) as f64;
                out[i1 * n + i2] *= (1.0 + k1 * k1 + k2 * k2).powf(-0.5);
            }
        }
        let direct = ScalarField::new(g.clone(), spectral::inverse_real(&g, out)).unwrap();
        let oracle = mixed_norm(&direct, &p).unwrap();
        assert!((bessel_norm(&f, -1.0, &p).unwrap() - oracle).abs() < 1e-8 * oracle);
    }

    #[test]
    fn valpha_of_time_constant_mode() {
        let g = PeriodicGrid::standard(1, 32).unwrap();
        let f = ScalarField::from_fn(&g, |p| (3.0 * p[0]).cos());
        let times: Vec<f64> = (0..=8).map(|j| j as f64 * 0.25).collect();
        let snaps = vec![f.clone(); times.len()];
        let sf = SampledField::from_scalar_snapshots(times, &snaps).unwrap();
        let alpha = 1.2;
        let l2 = f.l2_norm();
        let expect = l2 + 2f64.sqrt() * 3f64.powf(alpha / 2.0) * l2;
        assert!((valpha_norm(&sf, alpha).unwrap() - expect).abs() < 1e-12 * expect);
    }
}

//! Computable checks of the local regularity theory on sampled solutions.

mod degiorgi;
mod holder;
mod moser;
mod scaling;
mod weak;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{PeriodicGrid, SampledField, ScalarField};
use crate::norms::{localized_norm, mixed_norm_values, tail, time_reduce, Cylinder, LocalizationSpec, MultiIndex};

pub use degiorgi::{degiorgi_profile, DeGiorgiSpec, DxConstant, TruncationProfile};
pub use holder::{holder_fit, HolderFit};
pub use moser::{moser_iteration_constant, moser_log_constant, moser_partial_log, moser_partial_product, MoserParams};
pub use scaling::{resample_scaled, scaling_transform, ScaledKind};
pub use weak::{weak_residual, Operator, TestBank, TestFunction, WeakResidual};

/// Tolerated negativity of a "nonnegative" input.
pub const NEGATIVITY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OscReport {
    #[serde(skip)]
    pub cylinder: Cylinder,
    pub osc: f64,
    pub sup: f64,
    pub inf: f64,
}

/// Lattice supremum and infimum over the cylinder.
pub fn oscillation(u: &SampledField, q: &Cylinder) -> Result<OscReport> {
    q.check_inside(u)?;
    let vals = q.lattice_values(u);
    if vals.is_empty() {
        return Err(Error::usage("cylinder contains no lattice samples"));
    }
    let sup = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let inf = vals.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(OscReport {
        cylinder: q.clone(),
        osc: sup - inf,
        sup,
        inf,
    })
}

/// Geometry and exponents of the Harnack diagnostics, centred at `(t0, x0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HarnackConfig {
    pub t0: f64,
    /// Must be a lattice point so that the tail is an exact re-centring.
    pub x0: [f64; 2],
    pub alpha: f64,
    pub q0: f64,
    pub p0: MultiIndex,
    /// Exponent of the average in the weak form.
    pub p_weak: f64,
}

impl HarnackConfig {
    pub fn new(alpha: f64, q0: f64, p0: MultiIndex) -> Self {
        Self {
            t0: 0.0,
            x0: [0.0, 0.0],
            alpha,
            q0,
            p0,
            p_weak: 0.5,
        }
    }

    fn cyl(&self, q: Result<Cylinder>) -> Result<Cylinder> {
        Ok(q?.shifted(0.0, self.x0))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarnackReport {
    /// `sup` over `Q⁺₁(t0 - 2)`.
    pub sup: f64,
    /// `inf` over `Q⁻₁(t0 + 2)`.
    pub inf: f64,
    /// `‖f 1_{Q₂}‖_{L^{q0}_t L^{p0}_x}`.
    pub forcing: f64,
    /// `‖Tail(u⁻; 1) 1_{[t0-2, t0+2]}‖_{L¹_t}` on the torus cell.
    pub tail: f64,
    /// `sup / (inf + forcing + tail)`, infinite when the denominator vanishes.
    pub constant: f64,
    /// `L^{p_weak}` average over `Q⁺_{3/2}(t0 - 2)`.
    pub weak_average: f64,
    /// `inf` over `Q⁻_{3/2}(t0 + 2)`.
    pub weak_inf: f64,
    pub weak_constant: f64,
    /// The tail is truncated to the periodic cell.
    pub tail_surrogate: bool,
}

fn lattice_shift(grid: &PeriodicGrid, x0: [f64; 2]) -> Result<[i64; 2]> {
    let h = grid.spacing();
    let mut s = [0i64; 2];
    for i in 0..grid.dim() {
        let v = x0[i] / h;
        if (v - v.round()).abs() > 1e-9 {
            return Err(Error::usage(format!(
                "centre coordinate {} is not a lattice point",
                x0[i]
            )));
        }
        s[i] = v.round() as i64;
    }
    Ok(s)
}

/// `g(· + x0)` for a lattice offset.
fn recentre(f: &ScalarField, s: [i64; 2]) -> ScalarField {
    let grid = f.grid();
    let n = grid.n() as i64;
    let src = f.data();
    let data = (0..grid.len())
        .map(|i| {
            let [a, b] = grid.axis_indices(i);
            let a = (a as i64 + s[0]).rem_euclid(n) as usize;
            let b = if grid.dim() == 1 { 0 } else { (b as i64 + s[1]).rem_euclid(n) as usize };
            src[grid.flat_index(a, b)]
        })
        .collect();
    ScalarField::new(grid.clone(), data).expect("length")
}

fn time_window(times: &[f64], lo: f64, hi: f64) -> Vec<usize> {
    (0..times.len())
        .filter(|&j| times[j] >= lo - 1e-12 && times[j] <= hi + 1e-12)
        .collect()
}

/// `‖f 1_{[t0-r, t0+r] × B_r(x0)}‖_{L^q_t L^p_x}`; a single-time `f` is held constant.
fn forcing_term(
    u: &SampledField,
    f: Option<&SampledField>,
    t0: f64,
    x0: [f64; 2],
    r: f64,
    q: f64,
    p: &MultiIndex,
) -> Result<f64> {
    let f = match f {
        None => return Ok(0.0),
        Some(f) => f,
    };
    let grid = u.grid();
    grid.ensure_same(f.grid())?;
    let steady = f.len_times() == 1;
    if !steady && f.len_times() != u.len_times() {
        return Err(Error::usage("forcing must be single-time or sampled on the solution times"));
    }
    let ball = Cylinder::two_sided(t0, r)?.centered_at(x0).ball_indices(grid);
    let idx = time_window(u.times(), t0 - r, t0 + r);
    if idx.is_empty() {
        return Err(Error::usage("forcing window contains no sample times"));
    }
    let mut per = Vec::with_capacity(idx.len());
    for &j in &idx {
        let s = f.snapshot(if steady { 0 } else { j });
        let mut masked = vec![0.0; grid.len()];
        for &i in &ball {
            masked[i] = s.data()[i];
        }
        per.push(mixed_norm_values(grid, &masked, p)?);
    }
    let ts: Vec<f64> = idx.iter().map(|&j| u.times()[j]).collect();
    time_reduce(&ts, &per, q)
}

/// `∫_{t0-r}^{t0+r} Tail(g(t, · + x0); 1) dt` for `g = map(u)`.
fn tail_term(u: &SampledField, t0: f64, r: f64, shift: [i64; 2], alpha: f64, map: impl Fn(f64) -> f64) -> Result<f64> {
    let idx = time_window(u.times(), t0 - r, t0 + r);
    let mut per = Vec::with_capacity(idx.len());
    for &j in &idx {
        let g = recentre(&u.snapshot(j), shift).map(&map);
        per.push(tail(&g, 1.0, alpha)?.value);
    }
    let ts: Vec<f64> = idx.iter().map(|&j| u.times()[j]).collect();
    time_reduce(&ts, &per, 1.0)
}

fn check_nonnegative(u: &SampledField, q: &Cylinder) -> Result<()> {
    q.check_inside(u)?;
    let m = q.lattice_values(u).into_iter().fold(f64::INFINITY, f64::min);
    if m < -NEGATIVITY_TOL {
        return Err(Error::Precondition(format!(
            "u takes the value {m:.3e} < 0 on the cylinder of radius {}",
            q.r
        )));
    }
    Ok(())
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Harnack quantities of a solution, nonnegative on `Q₄(t0, x0)`.
pub fn harnack_report(u: &SampledField, f: Option<&SampledField>, cfg: &HarnackConfig) -> Result<HarnackReport> {
    let grid = u.grid();
    let shift = lattice_shift(grid, cfg.x0)?;
    if !(cfg.p_weak > 0.0) {
        return Err(Error::usage("the weak-form exponent must be positive"));
    }
    check_nonnegative(u, &cfg.cyl(Cylinder::two_sided(cfg.t0, 4.0))?)?;
    let up = oscillation(u, &cfg.cyl(Cylinder::plus(cfg.t0 - 2.0, 1.0))?)?;
    let dn = oscillation(u, &cfg.cyl(Cylinder::minus(cfg.t0 + 2.0, 1.0))?)?;
    let forcing = forcing_term(u, f, cfg.t0, cfg.x0, 2.0, cfg.q0, &cfg.p0)?;
    let tail = tail_term(u, cfg.t0, 2.0, shift, cfg.alpha, |v| (-v).max(0.0))?;
    let wq = cfg.cyl(Cylinder::plus(cfg.t0 - 2.0, 1.5))?;
    wq.check_inside(u)?;
    let wv = wq.lattice_values(u);
    let weak_average = (wv.iter().map(|v| v.max(0.0).powf(cfg.p_weak)).sum::<f64>() / wv.len() as f64).powf(1.0 / cfg.p_weak);
    let weak_inf = oscillation(u, &cfg.cyl(Cylinder::minus(cfg.t0 + 2.0, 1.5))?)?.inf;
    Ok(HarnackReport {
        sup: up.sup,
        inf: dn.inf,
        forcing,
        tail,
        constant: ratio(up.sup, dn.inf.max(0.0) + forcing + tail),
        weak_average,
        weak_inf,
        weak_constant: ratio(weak_average, weak_inf.max(0.0) + forcing + tail),
        tail_surrogate: true,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OscDecayReport {
    /// `osc` over `Q_{1/2}(t0, x0)`.
    pub osc_small: f64,
    /// `osc` over `Q_6(t0, x0)`.
    pub osc_large: f64,
    /// `‖f 1_{Q₄}‖_{L^{q0}_t L^{p0}_x}`.
    pub forcing: f64,
    /// `∫_{t0-4}^{t0+4} Tail((u-M)⁺; 1) + Tail((m-u)⁺; 1) dt` with `M, m` the
    /// extrema on `Q_6`: the negative parts of `M - u` and `u - m`.
    pub tail: f64,
    /// `(osc_small - forcing - tail) / osc_large`.
    pub ratio: f64,
}

/// Oscillation decay between `Q_6` and `Q_{1/2}` with the forcing and tail
/// terms subtracted from the small-cylinder oscillation.
pub fn oscillation_decay(u: &SampledField, f: Option<&SampledField>, cfg: &HarnackConfig) -> Result<OscDecayReport> {
    let shift = lattice_shift(u.grid(), cfg.x0)?;
    check_nonnegative(u, &cfg.cyl(Cylinder::two_sided(cfg.t0, 4.0))?)?;
    let small = oscillation(u, &cfg.cyl(Cylinder::two_sided(cfg.t0, 0.5))?)?;
    let large = oscillation(u, &cfg.cyl(Cylinder::two_sided(cfg.t0, 6.0))?)?;
    let forcing = forcing_term(u, f, cfg.t0, cfg.x0, 4.0, cfg.q0, &cfg.p0)?;
    let (hi, lo) = (large.sup, large.inf);
    let tail = tail_term(u, cfg.t0, 4.0, shift, cfg.alpha, |v| (v - hi).max(0.0) + (lo - v).max(0.0))?;
    let ratio = if large.osc > 0.0 {
        (small.osc - forcing - tail) / large.osc
    } else {
        0.0
    };
    Ok(OscDecayReport {
        osc_small: small.osc,
        osc_large: large.osc,
        forcing,
        tail,
        ratio,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinftyReport {
    pub sup: f64,
    pub forcing_norm: f64,
    pub ratio: f64,
}

/// `‖u‖_{L^∞_T L^∞_x}` over the localized `L^{q0}_T H^{-β}_{p0}` norm of `f`,
/// for a run started from zero data.
pub fn linfty_ratio(
    u: &SampledField,
    f: &SampledField,
    q0: f64,
    p0: &MultiIndex,
    beta: f64,
    loc: &LocalizationSpec,
) -> Result<LinftyReport> {
    if !(beta >= 0.0) {
        return Err(Error::usage(format!("beta must be >= 0, got {beta}")));
    }
    if u.snapshot(0).max_abs() > 1e-12 * u.max_abs().max(1.0) {
        return Err(Error::usage("the L-infinity ratio needs a run from zero initial data"));
    }
    let forcing_norm = localized_norm(f, -beta, p0, q0, loc)?;
    if !(forcing_norm > 0.0) {
        return Err(Error::usage("zero forcing: the L-infinity ratio is undefined"));
    }
    let sup = u.max_abs();
    Ok(LinftyReport {
        sup,
        forcing_norm,
        ratio: sup / forcing_norm,
    })
}

/// Samples `f` at the given times.
pub fn sample_forcing(f: &crate::solver::Forcing, grid: &PeriodicGrid, times: &[f64]) -> Result<SampledField> {
    let snaps: Vec<ScalarField> = times.iter().map(|&t| f.at(grid, t)).collect();
    SampledField::from_scalar_snapshots(times.to_vec(), &snaps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sampled(grid: &PeriodicGrid, times: &[f64], f: impl Fn(f64, [f64; 2]) -> f64) -> SampledField {
        let snaps: Vec<ScalarField> = times.iter().map(|&t| ScalarField::from_fn(grid, |x| f(t, x))).collect();
        SampledField::from_scalar_snapshots(times.to_vec(), &snaps).unwrap()
    }

    fn window(n: usize) -> Vec<f64> {
        (0..=n).map(|j| -6.0 + 12.0 * j as f64 / n as f64).collect()
    }

    fn harnack_grid() -> PeriodicGrid {
        PeriodicGrid::new(2, 64, 16.0).unwrap()
    }

    #[test]
    fn constant_has_zero_oscillation() {
        let g = PeriodicGrid::standard(2, 32).unwrap();
        let u = sampled(&g, &[-1.0, 0.0, 1.0, 2.0], |_, _| 2.5);
        let r = oscillation(&u, &Cylinder::two_sided(0.5, 1.0).unwrap()).unwrap();
        assert_eq!(r.osc, 0.0);
    }

    #[test]
    fn cosine_oscillation_over_a_wide_ball() {
        let g = PeriodicGrid::new(2, 64, 4.0 * PI).unwrap();
        let u = sampled(&g, &[-4.0, 0.0, 4.0], |_, x| x[0].cos());
        let r = oscillation(&u, &Cylinder::two_sided(0.0, PI + 1e-9).unwrap()).unwrap();
        assert!((r.osc - 2.0).abs() < 1e-12, "{}", r.osc);
    }

    #[test]
    fn oscillation_is_monotone_in_the_cylinder() {
        let g = PeriodicGrid::standard(2, 32).unwrap();
        let ts = [0.0, 0.5, 1.0, 1.5, 2.0];
        let u = sampled(&g, &ts, |t, x| (x[0] * t).sin() + x[1].cos());
        let mut last = 0.0;
        for &r in &[0.1, 0.3, 0.6, 0.9] {
            let o = oscillation(&u, &Cylinder::two_sided(1.0, r).unwrap()).unwrap().osc;
            assert!(o >= last);
            last = o;
        }
    }

    #[test]
    fn cylinder_outside_samples_is_rejected() {
        let g = PeriodicGrid::standard(2, 16).unwrap();
        let u = sampled(&g, &[0.0, 1.0], |_, _| 1.0);
        assert!(oscillation(&u, &Cylinder::two_sided(0.5, 2.0).unwrap()).is_err());
    }

    #[test]
    fn positive_constant_has_unit_harnack_constant() {
        let g = harnack_grid();
        let u = sampled(&g, &window(24), |_, _| 3.0);
        let cfg = HarnackConfig::new(1.0, 4.0, MultiIndex::uniform(4.0, 2).unwrap());
        let r = harnack_report(&u, None, &cfg).unwrap();
        assert_eq!(r.constant, 1.0);
        assert!((r.weak_constant - 1.0).abs() < 1e-14);
        assert_eq!(r.tail, 0.0);
    }

    #[test]
    fn harnack_constant_is_scale_and_translation_invariant() {
        let g = harnack_grid();
        let bump = |t: f64, x: [f64; 2]| 1.0 + (-(x[0] - 0.5).powi(2) - x[1].powi(2) - 0.1 * t).exp();
        let u = sampled(&g, &window(24), bump);
        let cfg = HarnackConfig::new(1.0, 4.0, MultiIndex::uniform(4.0, 2).unwrap());
        let r = harnack_report(&u, None, &cfg).unwrap();
        let u3 = u.map_values(|v| 3.0 * v);
        let r3 = harnack_report(&u3, None, &cfg).unwrap();
        assert!((r.constant - r3.constant).abs() < 1e-14 * r.constant);
        // Shift by (1, two lattice cells).
        let h = g.spacing();
        let ts: Vec<f64> = window(24).iter().map(|t| t + 1.0).collect();
        let us = sampled(&g, &ts, |t, x| bump(t - 1.0, [x[0] - 2.0 * h, x[1] + h]));
        let mut cs = cfg.clone();
        cs.t0 = 1.0;
        cs.x0 = [2.0 * h, -h];
        let rs = harnack_report(&us, None, &cs).unwrap();
        assert!((r.constant - rs.constant).abs() < 1e-12 * r.constant);
        assert!((r.weak_constant - rs.weak_constant).abs() < 1e-12 * r.weak_constant);
    }

    #[test]
    fn negativity_on_q4_is_a_precondition_failure() {
        let g = harnack_grid();
        let u = sampled(&g, &window(24), |_, x| x[0]);
        let cfg = HarnackConfig::new(1.0, 4.0, MultiIndex::uniform(4.0, 2).unwrap());
        assert!(matches!(harnack_report(&u, None, &cfg), Err(Error::Precondition(_))));
    }

    #[test]
    fn tail_term_sees_negative_mass_outside_the_ball() {
        let g = harnack_grid();
        let u = sampled(&g, &window(24), |_, x| if x[0] > 6.0 { -1.0 } else { 1.0 });
        let cfg = HarnackConfig::new(1.0, 4.0, MultiIndex::uniform(4.0, 2).unwrap());
        let r = harnack_report(&u, None, &cfg).unwrap();
        assert!(r.tail > 0.0);
        assert!(r.constant < 1.0);
    }

    #[test]
    fn forcing_term_of_a_constant() {
        let g = harnack_grid();
        let u = sampled(&g, &window(24), |_, _| 1.0);
        let f = SampledField::single(&ScalarField::constant(&g, 1.0), 0.0);
        let mut cfg = HarnackConfig::new(1.0, 1.0, MultiIndex::uniform(1.0, 2).unwrap());
        cfg.p_weak = 1.0;
        let r = harnack_report(&u, Some(&f), &cfg).unwrap();
        // Lattice area of B_2 times the length 4 of the window.
        let area = Cylinder::two_sided(0.0, 2.0).unwrap().ball_indices(&g).len() as f64 * g.cell_volume();
        assert!((r.forcing - 4.0 * area).abs() < 1e-12 * area);
        assert!((area - 4.0 * PI).abs() < 0.1 * 4.0 * PI);
    }

    #[test]
    fn oscillation_decay_of_a_smooth_solution() {
        let g = harnack_grid();
        let u = sampled(&g, &window(48), |t, x| 2.0 + (0.3 * x[0] + 0.1 * t).sin());
        let cfg = HarnackConfig::new(1.0, 4.0, MultiIndex::uniform(4.0, 2).unwrap());
        let r = oscillation_decay(&u, None, &cfg).unwrap();
        assert!(r.ratio < 0.5, "{r:?}");
        assert!(r.osc_small <= r.osc_large);
    }

    #[test]
    fn linfty_ratio_rejects_zero_forcing_and_nonzero_data() {
        let g = PeriodicGrid::standard(2, 16).unwrap();
        let ts = [0.0, 0.5, 1.0];
        let u = sampled(&g, &ts, |t, x| t * x[0].sin());
        let zero = sampled(&g, &ts, |_, _| 0.0);
        let loc = LocalizationSpec::new(1.0, vec![[0.0, 0.0]]).unwrap();
        let p = MultiIndex::uniform(2.0, 2).unwrap();
        assert!(linfty_ratio(&u, &zero, 2.0, &p, 0.0, &loc).is_err());
        let bad = sampled(&g, &ts, |_, x| x[0].sin());
        assert!(linfty_ratio(&bad, &u, 2.0, &p, 0.0, &loc).is_err());
    }
}

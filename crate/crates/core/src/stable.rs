//! Exact samplers for symmetric and isotropic α-stable laws.
//!
//! Normalization: `E exp(iξ·L_t) = exp(-t|ξ|^α)`, the law generated by
//! `Δ^{α/2}`. At `α = 2` this is a Gaussian with variance `2t` per coordinate.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Exp1, Open01, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StableParams {
    pub alpha: f64,
    pub dim: usize,
    pub t: f64,
}

impl StableParams {
    pub fn new(alpha: f64, dim: usize, t: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if dim != 1 && dim != 2 {
            return Err(Error::usage(format!("dimension must be 1 or 2, got {dim}")));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::usage(format!("time step must be positive, got {t}")));
        }
        Ok(Self { alpha, dim, t })
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 2.0 {
        Ok(())
    } else {
        Err(Error::usage(format!("alpha must lie in (0, 2], got {alpha}")))
    }
}

/// One Chambers–Mallows–Stuck draw with CF `exp(-|ξ|^α)`.
pub fn draw_sym_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    let v = PI * (u - 0.5);
    let w: f64 = rng.sample(Exp1);
    if alpha == 1.0 {
        return v.tan();
    }
    let a = alpha;
    (a * v).sin() / v.cos().powf(1.0 / a) * (((1.0 - a) * v).cos() / w).powf((1.0 - a) / a)
}

pub fn sample_sym_stable_1d<R: Rng + ?Sized>(alpha: f64, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    Ok((0..n).map(|_| draw_sym_stable(alpha, rng)).collect())
}

/// One Kanter draw with Laplace transform `exp(-λ^a)`.
pub fn draw_positive_stable<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.sample::<f64, _>(Open01) * PI;
    let w: f64 = rng.sample(Exp1);
    (a * u).sin() / u.sin().powf(1.0 / a) * (((1.0 - a) * u).sin() / w).powf((1.0 - a) / a)
}

pub fn sample_positive_stable<R: Rng + ?Sized>(a: f64, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::usage(format!("positive stable index must lie in (0, 1), got {a}")));
    }
    Ok((0..n).map(|_| draw_positive_stable(a, rng)).collect())
}

/// One isotropic increment `sqrt(S_t) G`, `G ~ N(0, 2I)`, `S_t` the
/// `α/2`-stable subordinator at time `t`. The second entry is 0 in 1D.
pub fn draw_isotropic<R: Rng + ?Sized>(p: &StableParams, rng: &mut R) -> [f64; 2] {
    let s = if p.alpha == 2.0 {
        p.t
    } else {
        p.t.powf(2.0 / p.alpha) * draw_positive_stable(0.5 * p.alpha, rng)
    };
    let scale = (2.0 * s).sqrt();
    let g1: f64 = rng.sample(StandardNormal);
    if p.dim == 1 {
        [scale * g1, 0.0]
    } else {
        let g2: f64 = rng.sample(StandardNormal);
        [scale * g1, scale * g2]
    }
}

pub fn sample_isotropic_increments<R: Rng + ?Sized>(
    p: &StableParams,
    n: usize,
    rng: &mut R,
) -> Vec<[f64; 2]> {
    (0..n).map(|_| draw_isotropic(p, rng)).collect()
}

/// `(1/n) Σ exp(iξ·x_j)` for planar samples.
pub fn empirical_cf(samples: &[[f64; 2]], xi: [f64; 2]) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for x in samples {
        s += Complex64::from_polar(1.0, xi[0] * x[0] + xi[1] * x[1]);
    }
    s / samples.len() as f64
}

pub fn empirical_cf_1d(samples: &[f64], xi: f64) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for &x in samples {
        s += Complex64::from_polar(1.0, xi * x);
    }
    s / samples.len() as f64
}

/// Sup over a grid of `|ξ| <= radius` of `|φ̂(ξ) - exp(-t|ξ|^α)|`.
pub fn cf_sup_error(samples: &[[f64; 2]], p: &StableParams, radius: f64, steps: usize) -> f64 {
    let mut worst = 0.0_f64;
    let h = radius / steps as f64;
    let range = steps as i64;
    for a in -range..=range {
        let second = if p.dim == 1 { 0..=0 } else { -range..=range };
        for b in second {
            let xi = [a as f64 * h, b as f64 * h];
            let m = xi[0].hypot(xi[1]);
            if m > radius + 1e-12 {
                continue;
            }
            let expect = (-p.t * m.powf(p.alpha)).exp();
            worst = worst.max((empirical_cf(samples, xi) - expect).norm());
        }
    }
    worst
}

/// Least-squares slope of `log P(|X| > r)` against `log r` using the order
/// statistics of ranks `lo..hi` from the top.
pub fn tail_slope(magnitudes: &[f64], lo: usize, hi: usize) -> Result<f64> {
    let n = magnitudes.len();
    if lo == 0 || hi <= lo + 2 || hi >= n {
        return Err(Error::usage("invalid rank window for the tail fit"));
    }
    let mut v = magnitudes.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    let pts: Vec<(f64, f64)> = (lo..hi)
        .map(|k| (v[k - 1].ln(), (k as f64 / n as f64).ln()))
        .collect();
    Ok(crate::stats::ols_slope(&pts).0)
}

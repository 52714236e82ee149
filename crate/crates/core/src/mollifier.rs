//! Radial bump mollifier on the plane and the quantities derived from it.
//!
//! The bump is `ψ(x) = (4/π)(1 - |x|²)³` on the unit disc, a probability
//! density. Mollifying a translation-invariant kernel in both arguments by
//! `ψ_n = n² ψ(n·)` amounts to a convolution with `ψ_n * ψ_n`, whose Fourier
//! multiplier is `ψ̂(k/n)²` and whose disc masses are `M(n r)` with
//! `M(r) = P(|X - Y| <= r)` for independent `X, Y ~ ψ`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const BUMP_NORM: f64 = 4.0 / PI;

/// Gauss–Legendre nodes and weights on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w));
    }
    out
}

/// Radial profile of the bump.
pub fn bump(r: f64) -> f64 {
    if r >= 1.0 {
        0.0
    } else {
        BUMP_NORM * (1.0 - r * r).powi(3)
    }
}

/// Bessel `J₀` via its periodic integral representation.
fn bessel_j0(x: f64) -> f64 {
    let m = 48 + (x.abs() as usize);
    let h = PI / m as f64;
    (0..m).map(|j| (x * ((j as f64 + 0.5) * h).sin()).cos()).sum::<f64>() / m as f64
}

/// Fourier transform `ψ̂(s) = ∫ ψ(x) e^{-iξ·x} dx` at `|ξ| = s`.
pub fn bump_fourier(s: f64) -> f64 {
    gauss_legendre(48, 0.0, 1.0)
        .iter()
        .map(|&(r, w)| 2.0 * PI * w * r * bump(r) * bessel_j0(s * r))
        .sum()
}

/// Tabulated `M(r) = P(|X - Y| <= r)`, `X, Y` independent with density `ψ`.
#[derive(Clone, Debug)]
pub struct PairMass {
    step: f64,
    table: Vec<f64>,
}

impl PairMass {
    pub fn new(points: usize) -> Result<Self> {
        if points < 8 {
            return Err(Error::usage("pair-mass table needs at least 8 points"));
        }
        let q = gauss_legendre(96, 0.0, 1.0);
        let step = 2.0 / (points - 1) as f64;
        let mut table = Vec::with_capacity(points);
        for j in 0..points {
            let r = j as f64 * step;
            let mut acc = 0.0;
            for &(a, wa) in &q {
                for &(b, wb) in &q {
                    let c = (a * a + b * b - r * r) / (2.0 * a * b);
                    let frac = c.clamp(-1.0, 1.0).acos() / PI;
                    acc += wa * wb * (2.0 * PI * a * bump(a)) * (2.0 * PI * b * bump(b)) * frac;
                }
            }
            table.push(acc);
        }
        let total = *table.last().unwrap_or(&1.0);
        for v in &mut table {
            *v /= total;
        }
        table[0] = 0.0;
        Ok(Self { step, table })
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let x = r / self.step;
        let i = x.floor() as usize;
        if i + 1 >= self.table.len() {
            return 1.0;
        }
        let w = x - i as f64;
        (1.0 - w) * self.table[i] + w * self.table[i + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_is_a_probability_density() {
        let m: f64 = gauss_legendre(32, 0.0, 1.0)
            .iter()
            .map(|&(r, w)| 2.0 * PI * r * bump(r) * w)
            .sum();
        assert!((m - 1.0).abs() < 1e-12);
        assert!((bump_fourier(0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn j0_matches_known_values() {
        assert!((bessel_j0(0.0) - 1.0).abs() < 1e-15);
        assert!((bessel_j0(1.0) - 0.765_197_686_557_966_6).abs() < 1e-13);
        assert!((bessel_j0(10.0) + 0.245_935_764_451_348_3).abs() < 1e-12);
    }

    #[test]
    fn pair_mass_is_a_distribution_function() {
        let m = PairMass::new(201).unwrap();
        assert_eq!(m.eval(0.0), 0.0);
        assert_eq!(m.eval(2.5), 1.0);
        let mut last = 0.0;
        for j in 0..=40 {
            let v = m.eval(j as f64 * 0.05);
            assert!(v >= last - 1e-12);
            last = v;
        }
        // Small-r behaviour: M(r) ≈ π r² (ψ*ψ)(0) = π r² ∫ψ².
        let int_psi2: f64 = gauss_legendre(32, 0.0, 1.0)
            .iter()
            .map(|&(r, w)| 2.0 * PI * r * bump(r).powi(2) * w)
            .sum();
        let r = 0.05;
        let approx = PI * r * r * int_psi2;
        assert!((m.eval(r) / approx - 1.0).abs() < 0.05);
    }
}

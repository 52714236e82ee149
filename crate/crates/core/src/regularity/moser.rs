//! Constant of the Moser iteration: the infinite product
//! `Π_{j>=1} (2^{γj} (σ-τ)^{-γ} 2 m C₀ θ^{βj})^{θ^{1-j}/q}` and its closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoserParams {
    pub theta: f64,
    pub gamma: f64,
    pub beta: f64,
    pub m: f64,
    pub c0: f64,
    pub q: f64,
    /// `σ - τ`.
    pub gap: f64,
}

impl MoserParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 1.0 && self.theta.is_finite()) {
            return Err(Error::usage(format!("theta must exceed 1, got {}", self.theta)));
        }
        if !(self.gamma >= 0.0 && self.beta >= 0.0) {
            return Err(Error::usage("gamma and beta must be >= 0"));
        }
        if !(self.m >= 1.0) {
            return Err(Error::usage(format!("m must be >= 1, got {}", self.m)));
        }
        if !(self.c0 > 0.0) {
            return Err(Error::usage(format!("C0 must be positive, got {}", self.c0)));
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(Error::usage(format!("q must lie in (0, 1), got {}", self.q)));
        }
        if !(self.gap > 0.0 && self.gap <= 1.0) {
            return Err(Error::usage(format!("sigma - tau must lie in (0, 1], got {}", self.gap)));
        }
        Ok(())
    }

    fn logs(&self) -> (f64, f64) {
        let a = self.gamma * 2f64.ln() + self.beta * self.theta.ln();
        let b = -self.gamma * self.gap.ln() + (2.0 * self.m * self.c0).ln();
        (a, b)
    }
}

/// `(θ/q) (θ/(θ-1)² ln(2^γ θ^β) + ln((σ-τ)^{-γ} 2 m C₀)/(θ-1))`.
pub fn moser_log_constant(p: &MoserParams) -> Result<f64> {
    p.validate()?;
    let (a, b) = p.logs();
    let th = p.theta;
    Ok(th / p.q * (th / (th - 1.0).powi(2) * a + b / (th - 1.0)))
}

pub fn moser_iteration_constant(p: &MoserParams) -> Result<f64> {
    Ok(moser_log_constant(p)?.exp())
}

/// Logarithm of the first `terms` factors.
pub fn moser_partial_log(p: &MoserParams, terms: usize) -> Result<f64> {
    p.validate()?;
    let (a, b) = p.logs();
    let mut s = 0.0;
    let mut w = 1.0 / p.q;
    for j in 1..=terms {
        s += w * (j as f64 * a + b);
        w /= p.theta;
    }
    Ok(s)
}

pub fn moser_partial_product(p: &MoserParams, terms: usize) -> Result<f64> {
    Ok(moser_partial_log(p, terms)?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> MoserParams {
        MoserParams {
            theta: 1.5,
            gamma: 1.0,
            beta: 1.0,
            m: 1.0,
            c0: 2.0,
            q: 0.5,
            gap: 1.0,
        }
    }

    #[test]
    fn unit_factors_give_one() {
        for &(theta, q) in &[(1.2, 0.3), (2.0, 0.9), (5.0, 0.01)] {
            let p = MoserParams {
                theta,
                gamma: 0.0,
                beta: 0.0,
                m: 1.0,
                c0: 0.5,
                q,
                gap: 0.4,
            };
            assert_eq!(moser_iteration_constant(&p).unwrap(), 1.0);
        }
    }

    #[test]
    fn partial_products_converge_to_the_closed_form() {
        let p = base();
        let c = moser_iteration_constant(&p).unwrap();
        let rel = |n| (moser_partial_product(&p, n).unwrap() / c - 1.0).abs();
        assert!(rel(200) < 1e-10);
        // Fifty factors leave a tail of order 1e-6 at θ = 1.5.
        assert!(rel(50) < 1e-5 && rel(50) > 1e-8);
    }

    #[test]
    fn grows_as_the_gap_shrinks() {
        let mut p = base();
        let mut last = 0.0;
        for k in 0..20 {
            p.gap = 1.0 - 0.049 * k as f64;
            let c = moser_iteration_constant(&p).unwrap();
            assert!(c > last);
            last = c;
        }
    }

    #[test]
    fn theta_at_most_one_is_rejected() {
        let mut p = base();
        p.theta = 1.0;
        assert!(moser_iteration_constant(&p).is_err());
    }
}

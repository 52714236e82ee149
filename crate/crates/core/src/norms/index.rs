//! Integrability index set and the sub/critical/supercritical trichotomy.

use serde::Serialize;

use super::MultiIndex;
use crate::error::{Error, Result};

const CRITICAL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
    OutOfRange,
}

/// Exponent pair `(q, p)` with the evaluated `α/q + |1/p|`.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexPair {
    pub q: f64,
    pub p: MultiIndex,
    pub alpha: f64,
    pub beta: f64,
    pub quantity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndexVerdict {
    pub member: bool,
    pub regime: Regime,
    /// `α - 1 - |1/p| - α/q`: `‖b_λ‖ = λ^{exponent} ‖b‖` under parabolic scaling.
    pub scaling_exponent: f64,
    /// `α/q + |1/p|`.
    pub quantity: f64,
}

impl IndexPair {
    pub fn new(q: f64, p: MultiIndex, alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::usage(format!("alpha must lie in (0, 2), got {alpha}")));
        }
        if !(beta >= 0.0 && beta < 0.5 * alpha) {
            return Err(Error::usage(format!(
                "beta must lie in [0, alpha/2) = [0, {}), got {beta}",
                0.5 * alpha
            )));
        }
        if !(q > 1.0 && q.is_finite()) {
            return Err(Error::usage(format!("q must lie in (1, inf), got {q}")));
        }
        if !p.exponents().iter().all(|&x| x > 1.0 && x.is_finite()) {
            return Err(Error::usage(format!(
                "p entries must lie in (1, inf), got {:?}",
                p.exponents()
            )));
        }
        let quantity = alpha / q + p.reciprocal_sum();
        Ok(Self {
            q,
            p,
            alpha,
            beta,
            quantity,
        })
    }

    pub fn classify(&self) -> IndexVerdict {
        let a = self.alpha;
        let member = self.quantity < a - self.beta;
        let e = a - 1.0 - self.quantity;
        let regime = if e.abs() <= CRITICAL_TOL && (1.0..2.0).contains(&a) {
            Regime::Critical
        } else if e > 0.0 && a > 1.0 {
            Regime::Subcritical
        } else if e < 0.0 && self.quantity < a {
            Regime::Supercritical
        } else {
            Regime::OutOfRange
        };
        IndexVerdict {
            member,
            regime,
            scaling_exponent: e,
            quantity: self.quantity,
        }
    }
}

pub fn index_classify(q: f64, p: &MultiIndex, alpha: f64, beta: f64) -> Result<IndexVerdict> {
    Ok(IndexPair::new(q, p.clone(), alpha, beta)?.classify())
}

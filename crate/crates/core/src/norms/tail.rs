//! Far-field weight `∫_{cell \ B_r} |g(y)| |y|^{-d-α} dy`.
//!
//! Each lattice value is treated as constant on its cell. In 1D the cell
//! weights use the exact antiderivative; in 2D they use Gauss–Legendre on
//! cells clear of the ball and dense midpoint subsampling on cells that
//! meet the ball boundary or straddle the periodic edge.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{PeriodicGrid, ScalarField};

/// Truncated tail and an upper bound for the mass beyond the cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailValue {
    pub value: f64,
    /// `sup|g| · |S^{d-1}| (L/2)^{-α} / α`.
    pub discarded_bound: f64,
}

const GL3_NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const GL3_WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
const SUBSAMPLE: usize = 32;

pub fn tail(f: &ScalarField, r: f64, alpha: f64) -> Result<TailValue> {
    let grid = f.grid();
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::usage(format!("alpha must lie in (0, 2), got {alpha}")));
    }
    if !(r > 0.0) || r >= 0.5 * grid.period() {
        return Err(Error::usage(format!(
            "tail radius {r} must lie in (0, L/2) with L = {}",
            grid.period()
        )));
    }
    f.check_finite()?;
    let w = tail_weights(grid, r, alpha);
    let value = f
        .data()
        .iter()
        .zip(&w)
        .map(|(v, w)| v.abs() * w)
        .sum::<f64>();
    let sphere = if grid.dim() == 1 { 2.0 } else { 2.0 * PI };
    let discarded_bound = f.max_abs() * sphere / alpha * (0.5 * grid.period()).powf(-alpha);
    Ok(TailValue {
        value,
        discarded_bound,
    })
}

/// Per-lattice-point weights of the tail quadrature.
pub fn tail_weights(grid: &PeriodicGrid, r: f64, alpha: f64) -> Vec<f64> {
    if grid.dim() == 1 {
        weights_1d(grid, r, alpha)
    } else {
        weights_2d(grid, r, alpha)
    }
}

/// `∫_a^b |y|^{-1-α} 1_{|y| >= r} dy` for `a <= b`.
fn segment(a: f64, b: f64, r: f64, alpha: f64) -> f64 {
    let prim = |y: f64| -> f64 { y.powf(-alpha) / alpha };
    let mut s = 0.0;
    let lo = a.max(r);
    if b > lo {
        s += prim(lo) - prim(b);
    }
    let hi = b.min(-r);
    if hi > a {
        s += prim(-hi) - prim(-a);
    }
    s
}

fn weights_1d(grid: &PeriodicGrid, r: f64, alpha: f64) -> Vec<f64> {
    let h = grid.spacing();
    let half = 0.5 * grid.period();
    (0..grid.n())
        .map(|i| {
            let x = grid.coord(i);
            let (lo, hi) = (x - 0.5 * h, x + 0.5 * h);
            if lo < -half {
                segment(-half, hi, r, alpha) + segment(lo + 2.0 * half, half, r, alpha)
            } else {
                segment(lo, hi, r, alpha)
            }
        })
        .collect()
}

fn weights_2d(grid: &PeriodicGrid, r: f64, alpha: f64) -> Vec<f64> {
    let h = grid.spacing();
    let half = 0.5 * grid.period();
    let kernel = |y1: f64, y2: f64| -> f64 {
        let rr = (y1 * y1 + y2 * y2).sqrt();
        if rr < r {
            0.0
        } else {
            rr.powf(-2.0 - alpha)
        }
    };
    let mut w = vec![0.0; grid.len()];
    for (idx, wi) in w.iter_mut().enumerate() {
        let [c1, c2] = grid.point(idx);
        let straddles = c1 - 0.5 * h < -half || c2 - 0.5 * h < -half;
        // Closest and farthest distance of the (unwrapped) cell from the origin.
        let near = |c: f64| (c.abs() - 0.5 * h).max(0.0);
        let far = |c: f64| c.abs() + 0.5 * h;
        let dmin = near(c1).hypot(near(c2));
        let dmax = far(c1).hypot(far(c2));
        if !straddles && dmax < r {
            continue;
        }
        if !straddles && dmin >= r {
            let mut s = 0.0;
            for (a, wa) in GL3_NODES.iter().zip(GL3_WEIGHTS) {
                for (b, wb) in GL3_NODES.iter().zip(GL3_WEIGHTS) {
                    s += wa * wb * kernel(c1 + 0.5 * h * a, c2 + 0.5 * h * b);
                }
            }
            *wi = s * 0.25 * h * h;
        } else {
            let sub = h / SUBSAMPLE as f64;
            let mut s = 0.0;
            for a in 0..SUBSAMPLE {
                let y1 = grid.wrap(c1 - 0.5 * h + (a as f64 + 0.5) * sub);
                for b in 0..SUBSAMPLE {
                    let y2 = grid.wrap(c2 - 0.5 * h + (b as f64 + 0.5) * sub);
                    s += kernel(y1, y2);
                }
            }
            *wi = s * sub * sub;
        }
    }
    w
}

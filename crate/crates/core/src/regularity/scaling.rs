//! Parabolic rescaling `u_λ(t,x) = u(λ^α t, λx)`,
//! `b_λ = λ^{α-1} b(λ^α t, λx)`, `f_λ = λ^α f(λ^α t, λx)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{PeriodicGrid, SampledField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScaledKind {
    Solution,
    Drift,
    Forcing,
}

impl ScaledKind {
    pub fn amplitude(self, lambda: f64, alpha: f64) -> f64 {
        match self {
            ScaledKind::Solution => 1.0,
            ScaledKind::Drift => lambda.powf(alpha - 1.0),
            ScaledKind::Forcing => lambda.powf(alpha),
        }
    }
}

fn check(lambda: f64, alpha: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::usage(format!("lambda must be positive, got {lambda}")));
    }
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::usage(format!("alpha must lie in (0, 2], got {alpha}")));
    }
    Ok(())
}

/// Exact transform: a field of period `L` becomes one of period `L/λ` on the
/// relabelled lattice `x/λ`, `t/λ^α`, with the amplitude factor of its kind.
pub fn scaling_transform(f: &SampledField, kind: ScaledKind, lambda: f64, alpha: f64) -> Result<SampledField> {
    check(lambda, alpha)?;
    let g = f.grid();
    let grid = PeriodicGrid::new(g.dim(), g.n(), g.period() / lambda)?;
    let s = lambda.powf(alpha);
    let times = f.times().iter().map(|t| t / s).collect();
    f.relabel(grid, times, kind.amplitude(lambda, alpha))
}

/// Trigonometric interpolation weights of the samples `x_j` at `y`.
fn interp_weights(grid: &PeriodicGrid, y: f64) -> Vec<f64> {
    let n = grid.n();
    let w = 2.0 * PI / grid.period();
    let half = n / 2;
    (0..n)
        .map(|j| {
            let d = y - grid.coord(j);
            let mut s = 1.0;
            for m in 1..half {
                s += 2.0 * (w * m as f64 * d).cos();
            }
            if n % 2 == 0 {
                s += (w * half as f64 * d).cos();
            } else {
                s += 2.0 * (w * half as f64 * d).cos();
            }
            s / n as f64
        })
        .collect()
}

/// Transform evaluated on `target` by spectral interpolation of `f(λ^α t, λx)`.
/// The box `λ · cell(target)` must lie inside the cell of `f`.
pub fn resample_scaled(
    f: &SampledField,
    kind: ScaledKind,
    lambda: f64,
    alpha: f64,
    target: &PeriodicGrid,
) -> Result<SampledField> {
    check(lambda, alpha)?;
    let g = f.grid();
    if target.dim() != g.dim() {
        return Err(Error::usage("target grid dimension differs"));
    }
    if lambda * target.period() > g.period() * (1.0 + 1e-12) {
        return Err(Error::usage(format!(
            "lambda = {lambda} maps the target cell of length {} outside the sampled cell of length {}",
            target.period(),
            g.period()
        )));
    }
    let rows: Vec<Vec<f64>> = (0..target.n()).map(|i| interp_weights(g, lambda * target.coord(i))).collect();
    let amp = kind.amplitude(lambda, alpha);
    let (n, m) = (g.n(), target.n());
    let nc = f.components();
    let mut values = Vec::with_capacity(f.len_times() * target.len() * nc);
    let mut comps: Vec<Vec<f64>> = Vec::with_capacity(nc);
    for ti in 0..f.len_times() {
        comps.clear();
        for c in 0..nc {
            let src = f.component(ti, c);
            let src = src.data();
            let out = if g.dim() == 1 {
                rows.iter().map(|w| amp * w.iter().zip(src).map(|(a, b)| a * b).sum::<f64>()).collect()
            } else {
                // Contract the second axis, then the first.
                let mut mid = vec![0.0; n * m];
                for i1 in 0..n {
                    let row = &src[i1 * n..(i1 + 1) * n];
                    for (k2, w) in rows.iter().enumerate() {
                        mid[i1 * m + k2] = w.iter().zip(row).map(|(a, b)| a * b).sum();
                    }
                }
                let mut out = vec![0.0; m * m];
                for (k1, w) in rows.iter().enumerate() {
                    for k2 in 0..m {
                        let mut s = 0.0;
                        for i1 in 0..n {
                            s += w[i1] * mid[i1 * m + k2];
                        }
                        out[k1 * m + k2] = amp * s;
                    }
                }
                out
            };
            comps.push(out);
        }
        for i in 0..target.len() {
            for c in comps.iter() {
                values.push(c[i]);
            }
        }
    }
    let s = lambda.powf(alpha);
    let times = f.times().iter().map(|t| t / s).collect();
    SampledField::new(target.clone(), times, nc, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{ScalarField, VectorField};
    use crate::norms::{space_time_norm, MultiIndex};

    fn smooth(grid: &PeriodicGrid) -> SampledField {
        let ts = [0.0, 0.25, 0.5, 1.0];
        let snaps: Vec<VectorField> = ts
            .iter()
            .map(|&t| {
                VectorField::new(vec![
                    ScalarField::from_fn(grid, |x| (x[0] + t).sin() * x[1].cos()),
                    ScalarField::from_fn(grid, |x| (2.0 * x[1] - t).cos() + 0.5),
                ])
                .unwrap()
            })
            .collect();
        SampledField::from_vector_snapshots(ts.to_vec(), &snaps).unwrap()
    }

    #[test]
    fn unit_lambda_is_the_identity() {
        let g = PeriodicGrid::standard(2, 16).unwrap();
        let b = smooth(&g);
        assert_eq!(scaling_transform(&b, ScaledKind::Drift, 1.0, 1.3).unwrap(), b);
        let r = resample_scaled(&b, ScaledKind::Drift, 1.0, 1.3, &g).unwrap();
        assert!(r.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn norm_scaling_identity() {
        let g = PeriodicGrid::standard(2, 32).unwrap();
        let b = smooth(&g);
        let (alpha, lambda) = (1.5, 0.5);
        let (q, p) = (3.0, MultiIndex::new(vec![4.0, 2.5]).unwrap());
        let bl = scaling_transform(&b, ScaledKind::Drift, lambda, alpha).unwrap();
        let expo = alpha - 1.0 - (1.0 / 4.0 + 1.0 / 2.5) - alpha / q;
        let lhs = space_time_norm(&bl, q, &p).unwrap();
        let rhs = lambda.powf(expo) * space_time_norm(&b, q, &p).unwrap();
        assert!((lhs / rhs - 1.0).abs() < 1e-6, "{lhs} vs {rhs}");
    }

    #[test]
    fn scaling_composes_to_the_identity() {
        let g = PeriodicGrid::standard(2, 16).unwrap();
        let b = smooth(&g);
        let there = scaling_transform(&b, ScaledKind::Forcing, 0.5, 1.2).unwrap();
        let back = scaling_transform(&there, ScaledKind::Forcing, 2.0, 1.2).unwrap();
        assert!(back.grid().same_lattice(b.grid()));
        assert!(back.max_abs_diff(&b) < 1e-8);
        for (a, c) in back.times().iter().zip(b.times()) {
            assert!((a - c).abs() < 1e-12);
        }
    }

    #[test]
    fn resampling_reproduces_trigonometric_data() {
        let src = PeriodicGrid::new(2, 32, 4.0 * PI).unwrap();
        let u = SampledField::single(&ScalarField::from_fn(&src, |x| x[0].cos() * (2.0 * x[1]).sin()), 0.0);
        let target = PeriodicGrid::new(2, 16, 2.0 * PI).unwrap();
        let lambda = 1.7;
        let r = resample_scaled(&u, ScaledKind::Solution, lambda, 1.0, &target).unwrap();
        let exact = ScalarField::from_fn(&target, |x| (lambda * x[0]).cos() * (2.0 * lambda * x[1]).sin());
        assert!(r.snapshot(0).max_abs_diff(&exact) < 1e-10);
    }

    #[test]
    fn scaled_box_outside_the_cell_is_rejected() {
        let g = PeriodicGrid::standard(1, 16).unwrap();
        let u = SampledField::single(&ScalarField::from_fn(&g, |x| x[0].sin()), 0.0);
        assert!(resample_scaled(&u, ScaledKind::Solution, 2.0, 1.0, &g).is_err());
        assert!(scaling_transform(&u, ScaledKind::Solution, -1.0, 1.0).is_err());
    }
}

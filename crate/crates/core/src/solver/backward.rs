//! Backward Kolmogorov problem `∂_t u + Δ^{α/2} u + b·∇u = f`, `u(T) = 0`.
//!
//! Solved through `v(s) = u(T - s)`, which satisfies the forward equation
//! with drift `b(T - s)` and forcing `-f(T - s)` from `v(0) = 0`.

use super::drift::{Drift, Forcing};
use super::transport::solve_transport_diffusion;
use super::{SolverConfig, Trajectory};
use crate::error::Result;
use crate::field::{PeriodicGrid, SampledField, ScalarField};

/// Trajectory of `u` on `[cfg.t_start, cfg.t_end]` in increasing time.
pub fn solve_backward_kolmogorov(
    grid: &PeriodicGrid,
    f: &Forcing,
    b: &Drift,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    let big_t = cfg.t_end;
    let mut fwd = cfg.clone();
    fwd.t_start = 0.0;
    fwd.t_end = cfg.t_end - cfg.t_start;
    let v0 = ScalarField::zeros(grid);
    let mut tr = solve_transport_diffusion(&v0, &b.reversed(grid, big_t), &f.reversed_negated(grid, big_t), &fwd)?;
    let n = tr.field.len_times();
    let times: Vec<f64> = (0..n).rev().map(|j| big_t - tr.field.times()[j]).collect();
    let snaps: Vec<ScalarField> = (0..n).rev().map(|j| tr.field.snapshot(j)).collect();
    tr.field = SampledField::from_scalar_snapshots(times, &snaps)?;
    tr.metrics.reverse();
    for row in &mut tr.metrics {
        row.t = big_t - row.t;
    }
    for e in &mut tr.events {
        e.t = big_t - e.t;
    }
    Ok(tr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_data_gives_zero() {
        let g = PeriodicGrid::standard(2, 16).unwrap();
        let cfg = SolverConfig::new(1.5, 0.05, 0.5);
        let tr = solve_backward_kolmogorov(&g, &Forcing::Zero, &Drift::Zero, &cfg).unwrap();
        assert_eq!(tr.field.max_abs(), 0.0);
        assert_eq!(tr.field.times()[0], 0.0);
    }

    #[test]
    fn constant_single_mode_matches_backward_duhamel() {
        // u(t) = -(1 - e^{-λ(T - t)})/λ · cos(k x) for f = cos(kx).
        let g = PeriodicGrid::standard(1, 32).unwrap();
        let (alpha, k, big_t) = (1.2, 2.0, 1.0);
        let f = ScalarField::from_fn(&g, |x| (k * x[0]).cos());
        let cfg = SolverConfig::new(alpha, 0.01, big_t).with_stride(10);
        let tr = solve_backward_kolmogorov(&g, &Forcing::Steady(f.clone()), &Drift::Zero, &cfg).unwrap();
        let lam = k.powf(alpha);
        for (ti, &t) in tr.field.times().iter().enumerate() {
            let c = -(1.0 - (-lam * (big_t - t)).exp()) / lam;
            let err = tr.field.snapshot(ti).max_abs_diff(&f.scaled(c));
            assert!(err < 1e-12, "t = {t}: {err}");
        }
    }
}

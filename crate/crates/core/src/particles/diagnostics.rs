//! Monte Carlo functionals of particle paths.

use serde::Serialize;

use super::ParticleTrajectory;
use crate::error::{Error, Result};
use crate::field::{SampledField, ScalarField};
use crate::stats::mean_se;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KrylovEstimate {
    pub mean: f64,
    pub se: f64,
}

fn time_index_map(traj: &ParticleTrajectory, f: &SampledField) -> Result<Vec<usize>> {
    if f.len_times() == 1 {
        return Ok(vec![0; traj.times.len()]);
    }
    if f.len_times() != traj.times.len()
        || f.times().iter().zip(&traj.times).any(|(a, b)| (a - b).abs() > 1e-9 * b.abs().max(1.0))
    {
        return Err(Error::usage("field times do not match the trajectory snapshots"));
    }
    Ok((0..traj.times.len()).collect())
}

/// Per-particle trapezoid values of `∫_{t_0}^{t_k} f(r, X_r) dr` for every snapshot `k`.
fn path_integrals(traj: &ParticleTrajectory, snaps: &[ScalarField], map: &[usize]) -> Vec<Vec<f64>> {
    let n = traj.n_particles();
    let nt = traj.times.len();
    let vals: Vec<Vec<f64>> = (0..nt)
        .map(|k| traj.snapshots[k].iter().map(|&x| snaps[map[k]].interp_cubic(x)).collect())
        .collect();
    let mut out = vec![vec![0.0; n]; nt];
    for k in 1..nt {
        let h = traj.times[k] - traj.times[k - 1];
        for i in 0..n {
            out[k][i] = out[k - 1][i] + 0.5 * h * (vals[k - 1][i] + vals[k][i]);
        }
    }
    out
}

/// Estimate of `E ∫_0^T f(r, X_r) dr` over the particles.
pub fn krylov_functional(traj: &ParticleTrajectory, f: &SampledField) -> Result<KrylovEstimate> {
    let map = time_index_map(traj, f)?;
    let snaps: Vec<ScalarField> = (0..f.len_times()).map(|i| f.snapshot(i)).collect();
    let ints = path_integrals(traj, &snaps, &map);
    let (mean, se) = mean_se(&ints[ints.len() - 1]);
    Ok(KrylovEstimate { mean, se })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MartingaleTerm {
    pub t0: f64,
    pub t1: f64,
    pub functional: String,
    pub value: f64,
    pub se: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MartingaleReport {
    pub terms: Vec<MartingaleTerm>,
    /// Term with the largest `|value|`.
    pub residual: f64,
    pub se: f64,
}

/// Tests `E[(M_{t1} - M_{t0}) G] = 0` for
/// `M_t = u_f(t, X_t) - u_f(0, X_0) - ∫_0^t f(X_r) dr` and bounded `G`
/// measurable at `t0`: `G = 1` and `G = clamp(X_{t0,1}, -1, 1)`.
pub fn martingale_residual(traj: &ParticleTrajectory, u_f: &SampledField, f: &ScalarField) -> Result<MartingaleReport> {
    let map = time_index_map(traj, u_f)?;
    if u_f.len_times() == 1 {
        return Err(Error::usage("u_f must be sampled on the trajectory times"));
    }
    let nt = traj.times.len();
    if nt < 3 {
        return Err(Error::usage("martingale residual needs at least three snapshots"));
    }
    let ints = path_integrals(traj, std::slice::from_ref(f), &vec![0; nt]);
    let n = traj.n_particles();
    let u0 = u_f.snapshot(map[0]);
    let base: Vec<f64> = traj.snapshots[0].iter().map(|&x| u0.interp_cubic(x)).collect();
    let m_at = |k: usize| -> Vec<f64> {
        let uk = u_f.snapshot(map[k]);
        (0..n)
            .map(|i| uk.interp_cubic(traj.snapshots[k][i]) - base[i] - ints[k][i])
            .collect()
    };
    let mid = nt / 2;
    let pairs = [(0, mid), (mid, nt - 1), (0, nt - 1)];
    let mut terms = Vec::new();
    for &(a, b) in &pairs {
        let (ma, mb) = (m_at(a), m_at(b));
        let gs: [(&str, Vec<f64>); 2] = [
            ("one", vec![1.0; n]),
            (
                "clamp-x1",
                traj.snapshots[a].iter().map(|p| p[0].clamp(-1.0, 1.0)).collect(),
            ),
        ];
        for (name, g) in gs {
            let d: Vec<f64> = (0..n).map(|i| (mb[i] - ma[i]) * g[i]).collect();
            let (value, se) = mean_se(&d);
            terms.push(MartingaleTerm {
                t0: traj.times[a],
                t1: traj.times[b],
                functional: name.to_string(),
                value,
                se,
            });
        }
    }
    let worst = terms
        .iter()
        .max_by(|x, y| x.value.abs().total_cmp(&y.value.abs()))
        .expect("terms");
    Ok(MartingaleReport {
        residual: worst.value.abs(),
        se: worst.se,
        terms,
    })
}

/// Wasserstein-1 distance of two empirical laws on a circle of length `c`.
pub fn circle_w1(a: &[f64], b: &[f64], c: f64) -> f64 {
    let mut ev: Vec<(f64, f64)> = Vec::with_capacity(a.len() + b.len());
    let (wa, wb) = (1.0 / a.len() as f64, 1.0 / b.len() as f64);
    ev.extend(a.iter().map(|&x| (x.rem_euclid(c), wa)));
    ev.extend(b.iter().map(|&x| (x.rem_euclid(c), -wb)));
    ev.sort_by(|x, y| x.0.total_cmp(&y.0));
    // Segments of the difference of distribution functions.
    let mut segs: Vec<(f64, f64)> = Vec::with_capacity(ev.len() + 1);
    let mut d = 0.0;
    let mut last = 0.0;
    for &(x, w) in &ev {
        if x > last {
            segs.push((d, x - last));
        }
        d += w;
        last = x;
    }
    if c > last {
        segs.push((d, c - last));
    }
    let mut sorted = segs.clone();
    sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut acc = 0.0;
    let mut med = sorted[0].0;
    for &(v, len) in &sorted {
        acc += len;
        if acc >= 0.5 * c {
            med = v;
            break;
        }
    }
    segs.iter().map(|&(v, len)| (v - med).abs() * len).sum()
}

/// Average of circle distances along the lattice directions `(1,0), (0,1), (1,1), (1,-1)`.
pub fn sliced_w1(a: &[[f64; 2]], b: &[[f64; 2]], dim: usize, period: f64) -> f64 {
    let dirs: &[[f64; 2]] = if dim == 1 {
        &[[1.0, 0.0]]
    } else {
        &[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, -1.0]]
    };
    let mut total = 0.0;
    for m in dirs {
        let pa: Vec<f64> = a.iter().map(|p| m[0] * p[0] + m[1] * p[1]).collect();
        let pb: Vec<f64> = b.iter().map(|p| m[0] * p[0] + m[1] * p[1]).collect();
        total += circle_w1(&pa, &pb, period) / m[0].hypot(m[1]);
    }
    total / dirs.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_w1_of_point_masses() {
        // Antipodal-free case: shortest arc.
        assert!((circle_w1(&[0.1], &[0.4], 1.0) - 0.3).abs() < 1e-15);
        assert!((circle_w1(&[0.05], &[0.95], 1.0) - 0.1).abs() < 1e-15);
        assert_eq!(circle_w1(&[0.2, 0.7], &[0.7, 0.2], 1.0), 0.0);
    }
}

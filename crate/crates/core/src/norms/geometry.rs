//! Parabolic cylinders and smooth localization cutoffs.

use crate::error::{Error, Result};
use crate::field::{PeriodicGrid, SampledField, ScalarField};

const TIME_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CylinderKind {
    TwoSided,
    Plus,
    Minus,
}

/// Space-time set `I × B_r(center)` with `I` one of `[t0-r, t0+r]`,
/// `[t0, t0+r]`, `[t0-r, t0]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cylinder {
    pub t0: f64,
    pub r: f64,
    pub kind: CylinderKind,
    pub center: [f64; 2],
}

impl Cylinder {
    pub fn new(t0: f64, r: f64, kind: CylinderKind) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::usage(format!("cylinder radius must be positive, got {r}")));
        }
        Ok(Self {
            t0,
            r,
            kind,
            center: [0.0, 0.0],
        })
    }

    pub fn two_sided(t0: f64, r: f64) -> Result<Self> {
        Self::new(t0, r, CylinderKind::TwoSided)
    }

    pub fn plus(t0: f64, r: f64) -> Result<Self> {
        Self::new(t0, r, CylinderKind::Plus)
    }

    pub fn minus(t0: f64, r: f64) -> Result<Self> {
        Self::new(t0, r, CylinderKind::Minus)
    }

    pub fn centered_at(mut self, x: [f64; 2]) -> Self {
        self.center = x;
        self
    }

    /// Same cylinder translated by `(dt, dx)`.
    pub fn shifted(&self, dt: f64, dx: [f64; 2]) -> Self {
        Self {
            t0: self.t0 + dt,
            center: [self.center[0] + dx[0], self.center[1] + dx[1]],
            ..self.clone()
        }
    }

    pub fn time_range(&self) -> (f64, f64) {
        match self.kind {
            CylinderKind::TwoSided => (self.t0 - self.r, self.t0 + self.r),
            CylinderKind::Plus => (self.t0, self.t0 + self.r),
            CylinderKind::Minus => (self.t0 - self.r, self.t0),
        }
    }

    pub fn contains_time(&self, t: f64) -> bool {
        let (lo, hi) = self.time_range();
        t >= lo - TIME_EPS && t <= hi + TIME_EPS
    }

    pub fn contains_point(&self, grid: &PeriodicGrid, x: [f64; 2]) -> bool {
        grid.periodic_distance(x, self.center) <= self.r + 1e-12
    }

    /// Lattice indices inside the spatial ball.
    pub fn ball_indices(&self, grid: &PeriodicGrid) -> Vec<usize> {
        (0..grid.len())
            .filter(|&i| self.contains_point(grid, grid.point(i)))
            .collect()
    }

    /// Indices of sample times inside the time interval.
    pub fn time_indices(&self, times: &[f64]) -> Vec<usize> {
        (0..times.len()).filter(|&j| self.contains_time(times[j])).collect()
    }

    /// Checks that the cylinder fits in the sampled box; a ball may not wrap.
    pub fn check_inside(&self, f: &SampledField) -> Result<()> {
        let grid = f.grid();
        if 2.0 * self.r >= grid.period() {
            return Err(Error::usage(format!(
                "ball of radius {} does not fit in a cell of period {}",
                self.r,
                grid.period()
            )));
        }
        let (lo, hi) = self.time_range();
        let ts = f.times();
        if lo < ts[0] - TIME_EPS || hi > ts[ts.len() - 1] + TIME_EPS {
            return Err(Error::usage(format!(
                "time interval [{lo}, {hi}] exits the sampled range [{}, {}]",
                ts[0],
                ts[ts.len() - 1]
            )));
        }
        Ok(())
    }

    /// Values of component 0 (or the magnitude) at lattice points inside.
    pub fn lattice_values(&self, f: &SampledField) -> Vec<f64> {
        let idx = self.ball_indices(f.grid());
        let mut out = Vec::new();
        for ti in self.time_indices(f.times()) {
            let s = f.snapshot(ti);
            out.extend(idx.iter().map(|&i| s.data()[i]));
        }
        out
    }
}

fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Radial `C^∞` cutoff: 1 on `|s| <= 1`, 0 on `|s| >= 2`, values in `[0, 1]`.
pub fn chi(s: f64) -> f64 {
    let s = s.abs();
    let a = smooth_step(2.0 - s);
    let b = smooth_step(s - 1.0);
    a / (a + b)
}

/// Cutoff radius plus the set of shift centers `z`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalizationSpec {
    r: f64,
    shifts: Vec<[f64; 2]>,
}

impl LocalizationSpec {
    pub fn new(r: f64, shifts: Vec<[f64; 2]>) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::usage(format!("cutoff radius must be positive, got {r}")));
        }
        Ok(Self { r, shifts })
    }

    /// Shifts on every `stride`-th lattice point.
    pub fn lattice(grid: &PeriodicGrid, r: f64, stride: usize) -> Result<Self> {
        let stride = stride.max(1);
        let n = grid.n();
        let mut shifts = Vec::new();
        let second = if grid.dim() == 1 { 1 } else { n };
        for i1 in (0..n).step_by(stride) {
            for i2 in (0..second).step_by(stride) {
                shifts.push(grid.point(grid.flat_index(i1, i2)));
            }
        }
        Self::new(r, shifts)
    }

    pub fn radius(&self) -> f64 {
        self.r
    }

    pub fn shifts(&self) -> &[[f64; 2]] {
        &self.shifts
    }

    /// `χ((x - z)/r)` on the lattice with periodic distance.
    pub fn cutoff_field(&self, grid: &PeriodicGrid, z: [f64; 2]) -> Result<ScalarField> {
        if 4.0 * self.r >= grid.period() {
            return Err(Error::usage(format!(
                "cutoff support 2r = {} must be below half the period {}",
                2.0 * self.r,
                grid.period()
            )));
        }
        Ok(ScalarField::from_fn(grid, |x| {
            chi(grid.periodic_distance(x, z) / self.r)
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_extents_follow_kind() {
        assert_eq!(Cylinder::two_sided(1.0, 0.5).unwrap().time_range(), (0.5, 1.5));
        assert_eq!(Cylinder::plus(1.0, 0.5).unwrap().time_range(), (1.0, 1.5));
        assert_eq!(Cylinder::minus(1.0, 0.5).unwrap().time_range(), (0.5, 1.0));
        assert!(Cylinder::plus(0.0, 0.0).is_err());
    }

    #[test]
    fn cutoff_profile_bounds() {
        for j in 0..=300 {
            let s = j as f64 / 100.0;
            let c = chi(s);
            assert!((0.0..=1.0).contains(&c));
            if s <= 1.0 {
                assert_eq!(c, 1.0);
            }
            if s >= 2.0 {
                assert_eq!(c, 0.0);
            }
        }
    }

    #[test]
    fn ball_uses_periodic_distance() {
        let g = PeriodicGrid::new(2, 16, 16.0).unwrap();
        let c = Cylinder::two_sided(0.0, 1.5).unwrap().centered_at([-7.5, 0.0]);
        let idx = c.ball_indices(&g);
        assert!(idx.iter().any(|&i| g.point(i)[0] > 6.0));
    }
}

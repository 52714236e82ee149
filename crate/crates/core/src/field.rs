//! Periodic lattices and the field containers that live on them.
//!
//! The fundamental cell is `[-L/2, L/2)^d`; lattice coordinate `i` along an
//! axis sits at `-L/2 + i·L/n`. Flat indices are row-major with `x1` slowest.

use crate::error::{Error, Result};

/// Uniform periodic lattice in one or two dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicGrid {
    dim: usize,
    n: usize,
    period: f64,
}

impl PeriodicGrid {
    pub fn new(dim: usize, n: usize, period: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::usage(format!("grid dimension must be 1 or 2, got {dim}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::usage(format!(
                "points per axis must be a power of two >= 8, got {n}"
            )));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::usage(format!("period must be positive, got {period}")));
        }
        Ok(Self { dim, n, period })
    }

    /// Default `2π`-periodic grid.
    pub fn standard(dim: usize, n: usize) -> Result<Self> {
        Self::new(dim, n, 2.0 * std::f64::consts::PI)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.n as f64
    }

    /// Quadrature weight of one lattice point, `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Volume of the fundamental cell, `L^d`.
    pub fn volume(&self) -> f64 {
        self.period.powi(self.dim as i32)
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coord(&self, i: usize) -> f64 {
        -0.5 * self.period + i as f64 * self.spacing()
    }

    pub fn axis_indices(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx / self.n, idx % self.n]
        }
    }

    pub fn flat_index(&self, i1: usize, i2: usize) -> usize {
        if self.dim == 1 {
            i1
        } else {
            i1 * self.n + i2
        }
    }

    /// Physical coordinates of a flat index; the second entry is 0 in 1D.
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let [i1, i2] = self.axis_indices(idx);
        if self.dim == 1 {
            [self.coord(i1), 0.0]
        } else {
            [self.coord(i1), self.coord(i2)]
        }
    }

    /// Signed mode number in `{-n/2, …, n/2 - 1}`.
    pub fn signed_mode(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    pub fn wavenumber(&self, i: usize) -> f64 {
        2.0 * std::f64::consts::PI / self.period * self.signed_mode(i) as f64
    }

    pub fn k_vec(&self, idx: usize) -> [f64; 2] {
        let [i1, i2] = self.axis_indices(idx);
        if self.dim == 1 {
            [self.wavenumber(i1), 0.0]
        } else {
            [self.wavenumber(i1), self.wavenumber(i2)]
        }
    }

    pub fn k_abs(&self, idx: usize) -> f64 {
        let k = self.k_vec(idx);
        (k[0] * k[0] + k[1] * k[1]).sqrt()
    }

    /// True when any axis index is the unpaired `-n/2` mode.
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let [i1, i2] = self.axis_indices(idx);
        i1 == self.n / 2 || (self.dim == 2 && i2 == self.n / 2)
    }

    /// Flat index of the mode `-k`.
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let [i1, i2] = self.axis_indices(idx);
        let neg = |i: usize| (self.n - i) % self.n;
        if self.dim == 1 {
            neg(i1)
        } else {
            self.flat_index(neg(i1), neg(i2))
        }
    }

    /// Flat index of the mode with given signed mode numbers, if on the lattice.
    pub fn mode_index(&self, m: [i64; 2]) -> Option<usize> {
        let n = self.n as i64;
        let half = n / 2;
        let to_idx = |v: i64| -> Option<usize> {
            if v < -half || v >= half {
                None
            } else {
                Some(v.rem_euclid(n) as usize)
            }
        };
        let i1 = to_idx(m[0])?;
        if self.dim == 1 {
            if m[1] != 0 {
                return None;
            }
            Some(i1)
        } else {
            Some(self.flat_index(i1, to_idx(m[1])?))
        }
    }

    /// Wraps a coordinate into `[-L/2, L/2)`.
    pub fn wrap(&self, x: f64) -> f64 {
        let l = self.period;
        let w = (x + 0.5 * l).rem_euclid(l) - 0.5 * l;
        if w >= 0.5 * l {
            w - l
        } else {
            w
        }
    }

    /// Minimum-image representative of a displacement.
    pub fn min_image(&self, dx: f64) -> f64 {
        dx - self.period * (dx / self.period).round()
    }

    /// Euclidean periodic distance between two points.
    pub fn periodic_distance(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let d0 = self.min_image(a[0] - b[0]);
        if self.dim == 1 {
            d0.abs()
        } else {
            let d1 = self.min_image(a[1] - b[1]);
            (d0 * d0 + d1 * d1).sqrt()
        }
    }

    pub fn same_lattice(&self, other: &PeriodicGrid) -> bool {
        self.dim == other.dim
            && self.n == other.n
            && (self.period - other.period).abs() <= 1e-12 * self.period
    }

    pub fn ensure_same(&self, other: &PeriodicGrid) -> Result<()> {
        if self.same_lattice(other) {
            Ok(())
        } else {
            Err(Error::usage(format!("grid mismatch: {self:?} vs {other:?}")))
        }
    }
}

/// Real scalar field at a single instant.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: PeriodicGrid,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: PeriodicGrid, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::usage(format!(
                "field has {} values, grid expects {}",
                data.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, data })
    }

    pub fn zeros(grid: &PeriodicGrid) -> Self {
        Self {
            data: vec![0.0; grid.len()],
            grid: grid.clone(),
        }
    }

    pub fn constant(grid: &PeriodicGrid, c: f64) -> Self {
        Self {
            data: vec![c; grid.len()],
            grid: grid.clone(),
        }
    }

    pub fn from_fn(grid: &PeriodicGrid, f: impl Fn([f64; 2]) -> f64) -> Self {
        let data = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self {
            grid: grid.clone(),
            data,
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.data.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(Error::data(format!("non-finite value at lattice index {i}"))),
            None => Ok(()),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Trapezoidal (= lattice sum) integral over the cell.
    pub fn integral(&self) -> f64 {
        self.data.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn l2_norm(&self) -> f64 {
        (self.data.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    pub fn inner(&self, other: &ScalarField) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.grid.cell_volume()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    pub fn add(&self, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Periodic tensor-product cubic Lagrange interpolation at `x`.
    pub fn interp_cubic(&self, x: [f64; 2]) -> f64 {
        let g = &self.grid;
        let n = g.n();
        let stencil = |c: f64| -> ([usize; 4], [f64; 4]) {
            let s = (c + 0.5 * g.period()) / g.spacing();
            let base = s.floor();
            let u = s - base;
            let b = base as i64 - 1;
            let idx = [0, 1, 2, 3].map(|j| (b + j).rem_euclid(n as i64) as usize);
            let w = [
                -u * (u - 1.0) * (u - 2.0) / 6.0,
                (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0,
                -(u + 1.0) * u * (u - 2.0) / 2.0,
                (u + 1.0) * u * (u - 1.0) / 6.0,
            ];
            (idx, w)
        };
        let (i1, w1) = stencil(x[0]);
        if g.dim() == 1 {
            return (0..4).map(|a| w1[a] * self.data[i1[a]]).sum();
        }
        let (i2, w2) = stencil(x[1]);
        let mut acc = 0.0;
        for a in 0..4 {
            let mut row = 0.0;
            for b in 0..4 {
                row += w2[b] * self.data[i1[a] * n + i2[b]];
            }
            acc += w1[a] * row;
        }
        acc
    }
}

/// Vector field with one [`ScalarField`] per component.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub components: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(components: Vec<ScalarField>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::usage("vector field needs at least one component"))?;
        for c in &components[1..] {
            first.grid().ensure_same(c.grid())?;
        }
        Ok(Self { components })
    }

    pub fn zeros(grid: &PeriodicGrid) -> Self {
        Self {
            components: (0..grid.dim()).map(|_| ScalarField::zeros(grid)).collect(),
        }
    }

    pub fn constant(grid: &PeriodicGrid, c: [f64; 2]) -> Self {
        Self {
            components: (0..grid.dim())
                .map(|i| ScalarField::constant(grid, c[i]))
                .collect(),
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.components[0].grid()
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField {
        let grid = self.grid();
        let data = (0..grid.len())
            .map(|i| {
                self.components
                    .iter()
                    .map(|c| c.data()[i] * c.data()[i])
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        ScalarField {
            grid: grid.clone(),
            data,
        }
    }

    pub fn max_magnitude(&self) -> f64 {
        self.magnitude().max_abs()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            components: self.components.iter().map(|c| c.scaled(s)).collect(),
        }
    }

    pub fn lerp(&self, other: &VectorField, w: f64) -> Self {
        Self {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.zip_map(b, |x, y| (1.0 - w) * x + w * y))
                .collect(),
        }
    }
}

/// Space-time samples: `values` is row-major in `(time, x1, x2, component)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledField {
    grid: PeriodicGrid,
    times: Vec<f64>,
    components: usize,
    values: Vec<f64>,
}

impl SampledField {
    pub fn new(
        grid: PeriodicGrid,
        times: Vec<f64>,
        components: usize,
        values: Vec<f64>,
    ) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::usage("sampled field needs at least one time"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::usage("sample times must be strictly increasing"));
        }
        if components == 0 {
            return Err(Error::usage("component count must be positive"));
        }
        let expected = times.len() * grid.len() * components;
        if values.len() != expected {
            return Err(Error::usage(format!(
                "value array has {} entries, shape expects {expected}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::data(format!("non-finite sample at flat index {i}")));
        }
        Ok(Self {
            grid,
            times,
            components,
            values,
        })
    }

    pub fn from_scalar_snapshots(times: Vec<f64>, snaps: &[ScalarField]) -> Result<Self> {
        let grid = snaps
            .first()
            .ok_or_else(|| Error::usage("no snapshots"))?
            .grid()
            .clone();
        let mut values = Vec::with_capacity(snaps.len() * grid.len());
        for s in snaps {
            grid.ensure_same(s.grid())?;
            values.extend_from_slice(s.data());
        }
        Self::new(grid, times, 1, values)
    }

    pub fn from_vector_snapshots(times: Vec<f64>, snaps: &[VectorField]) -> Result<Self> {
        let first = snaps.first().ok_or_else(|| Error::usage("no snapshots"))?;
        let grid = first.grid().clone();
        let nc = first.components.len();
        let mut values = Vec::with_capacity(snaps.len() * grid.len() * nc);
        for s in snaps {
            grid.ensure_same(s.grid())?;
            if s.components.len() != nc {
                return Err(Error::usage("inconsistent component counts"));
            }
            for i in 0..grid.len() {
                for c in &s.components {
                    values.push(c.data()[i]);
                }
            }
        }
        Self::new(grid, times, nc, values)
    }

    /// A single-time scalar field.
    pub fn single(field: &ScalarField, t: f64) -> Self {
        Self {
            grid: field.grid().clone(),
            times: vec![t],
            components: 1,
            values: field.data().to_vec(),
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len_times(&self) -> usize {
        self.times.len()
    }

    pub fn component(&self, ti: usize, c: usize) -> ScalarField {
        let npts = self.grid.len();
        let nc = self.components;
        let base = ti * npts * nc;
        let data = (0..npts).map(|i| self.values[base + i * nc + c]).collect();
        ScalarField {
            grid: self.grid.clone(),
            data,
        }
    }

    /// Scalar snapshot (component 0).
    pub fn snapshot(&self, ti: usize) -> ScalarField {
        self.component(ti, 0)
    }

    pub fn vector_snapshot(&self, ti: usize) -> VectorField {
        VectorField {
            components: (0..self.components).map(|c| self.component(ti, c)).collect(),
        }
    }

    /// Pointwise Euclidean magnitude over components, per time.
    pub fn magnitude_snapshot(&self, ti: usize) -> ScalarField {
        if self.components == 1 {
            self.snapshot(ti).map(f64::abs)
        } else {
            self.vector_snapshot(ti).magnitude()
        }
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }

    /// Same samples relabelled on a different grid and time lattice.
    pub fn relabel(&self, grid: PeriodicGrid, times: Vec<f64>, scale: f64) -> Result<Self> {
        if grid.len() != self.grid.len() || times.len() != self.times.len() {
            return Err(Error::usage("relabel must preserve the sample shape"));
        }
        Self::new(
            grid,
            times,
            self.components,
            self.values.iter().map(|v| v * scale).collect(),
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &SampledField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Linear interpolation in time (clamped at the ends).
    pub fn vector_at(&self, t: f64) -> VectorField {
        let (i, w) = self.bracket(t);
        let a = self.vector_snapshot(i);
        if w == 0.0 {
            a
        } else {
            a.lerp(&self.vector_snapshot(i + 1), w)
        }
    }

    pub fn scalar_at(&self, t: f64) -> ScalarField {
        let (i, w) = self.bracket(t);
        let a = self.snapshot(i);
        if w == 0.0 {
            a
        } else {
            let b = self.snapshot(i + 1);
            a.zip_map(&b, |x, y| (1.0 - w) * x + w * y)
        }
    }

    fn bracket(&self, t: f64) -> (usize, f64) {
        let ts = &self.times;
        if ts.len() == 1 || t <= ts[0] {
            return (0, 0.0);
        }
        if t >= ts[ts.len() - 1] {
            return (ts.len() - 1, 0.0);
        }
        let j = ts.partition_point(|&s| s <= t) - 1;
        (j, (t - ts[j]) / (ts[j + 1] - ts[j]))
    }

    /// Index of the sample time closest to `t`.
    pub fn nearest_time_index(&self, t: f64) -> usize {
        let mut best = 0;
        for (i, &s) in self.times.iter().enumerate() {
            if (s - t).abs() < (self.times[best] - t).abs() {
                best = i;
            }
        }
        best
    }
}

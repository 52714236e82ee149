//! Interaction kernels `b(t, x, y)` and their mollification.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::PeriodicGrid;
use crate::mollifier::{self, gauss_legendre, PairMass};
use crate::spectral::{self, Wavenumbers};

type KernelFn = Arc<dyn Fn(f64, [f64; 2], [f64; 2]) -> [f64; 2] + Send + Sync>;
type EnvelopeFn = Arc<dyn Fn(f64, [f64; 2]) -> f64 + Send + Sync>;

/// Lattice rows per band of the source ordering in `KernelTable::pair_sums`.
const SOURCE_BAND: usize = 8;

/// `s mod n` in `[0, n)`, guarding the rounding of `rem_euclid` up to `n`.
fn lattice_coord(s: f64, n: f64) -> f64 {
    let r = s.rem_euclid(n);
    if r < n {
        r
    } else {
        0.0
    }
}

/// Translation-invariant kernel sampled on a periodic lattice, evaluated by
/// bilinear interpolation.
#[derive(Clone, Debug)]
pub struct KernelTable {
    n: usize,
    period: f64,
    /// Interleaved `(b1, b2)` so one lookup touches one cache line.
    b: Vec<[f64; 2]>,
    bound: f64,
}

impl KernelTable {
    /// Builds the table from lattice samples, projecting them onto odd functions.
    fn new(n: usize, period: f64, b1: &[f64], b2: &[f64]) -> Self {
        let odd = |b: &[f64]| -> Vec<f64> {
            (0..n * n)
                .map(|k| {
                    let (i, j) = (k / n, k % n);
                    let m = ((n - i) % n) * n + (n - j) % n;
                    0.5 * (b[k] - b[m])
                })
                .collect()
        };
        let (b1, b2) = (&odd(b1)[..], &odd(b2)[..]);
        let w = n + 1;
        let mut b = vec![[0.0; 2]; w * w];
        for i in 0..w {
            for j in 0..w {
                let k = (i % n) * n + j % n;
                b[i * w + j] = [b1[k], b2[k]];
            }
        }
        let bound = b1.iter().zip(b2).map(|(x, y)| x.hypot(*y)).fold(0.0, f64::max);
        KernelTable { n, period, b, bound }
    }

    /// Bilinear lookup at lattice coordinates `s` with `0 <= s < 2n`.
    #[inline]
    fn lookup(&self, s1: f64, s2: f64) -> [f64; 2] {
        let n = self.n;
        let w = n + 1;
        let (f1, f2) = (s1 as usize, s2 as usize);
        let (u, v) = (s1 - f1 as f64, s2 - f2 as f64);
        let wrap = |i: usize| i - if i >= n { n } else { 0 };
        let base = wrap(f1) * w + wrap(f2);
        let (a, b, c, d) = (self.b[base], self.b[base + 1], self.b[base + w], self.b[base + w + 1]);
        let (wa, wb, wc, wd) = ((1.0 - u) * (1.0 - v), (1.0 - u) * v, u * (1.0 - v), u * v);
        [
            wa * a[0] + wb * b[0] + wc * c[0] + wd * d[0],
            wa * a[1] + wb * b[1] + wc * c[1] + wd * d[1],
        ]
    }

    pub fn eval(&self, z: [f64; 2]) -> [f64; 2] {
        // Lattice index 0 holds the source, so displacements index directly.
        let n = self.n as f64;
        let h = self.period / n;
        self.lookup(lattice_coord(z[0] / h, n), lattice_coord(z[1] / h, n))
    }

    /// `Σ_j b(x_i - x_j)` for every `i`. The table is odd, so each pair is
    /// evaluated once and applied with opposite signs. Particles are visited
    /// in a fixed banded lattice order that keeps lookups close in the table.
    pub fn pair_sums(&self, pos: &[[f64; 2]]) -> Vec<[f64; 2]> {
        let n = self.n as f64;
        let h = self.period / n;
        let a: Vec<[f64; 2]> = pos.iter().map(|p| [lattice_coord(p[0] / h, n), lattice_coord(p[1] / h, n)]).collect();
        let mut order: Vec<usize> = (0..a.len()).collect();
        order.sort_by_key(|&i| (a[i][0] as usize / SOURCE_BAND, a[i][1] as usize));
        let pts: Vec<[f64; 2]> = order.iter().map(|&i| a[i]).collect();
        let mut acc = vec![[0.0f64; 2]; pts.len()];
        for i in 0..pts.len() {
            let (x1, x2) = (pts[i][0] + n, pts[i][1] + n);
            let mut s = acc[i];
            let (_, rest) = acc.split_at_mut(i + 1);
            for (y, t) in pts[i + 1..].iter().zip(rest) {
                let v = self.lookup(x1 - y[0], x2 - y[1]);
                s[0] += v[0];
                s[1] += v[1];
                t[0] -= v[0];
                t[1] -= v[1];
            }
            acc[i] = s;
        }
        let mut out = vec![[0.0; 2]; pts.len()];
        for (k, &i) in order.iter().enumerate() {
            out[i] = acc[k];
        }
        out
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }
}

#[derive(Clone)]
pub enum KernelKind {
    Zero,
    Constant([f64; 2]),
    /// Whole-plane `K₂(x - y)` on the minimum-image displacement, 0 at `x = y`.
    BiotSavart,
    /// `K₂(z) M(n|z|)`: `K₂` mollified in both arguments by the radial bump.
    MollifiedBiotSavart { level: f64, mass: Arc<PairMass> },
    Table(Arc<KernelTable>),
    Func(KernelFn),
}

/// Interaction kernel with its dominating envelope and structural flags.
#[derive(Clone)]
pub struct InteractionKernel {
    pub kind: KernelKind,
    pub dim: usize,
    pub period: f64,
    /// `x ↦ b(t, x, y)` divergence free for every `y`.
    pub div_free: bool,
    envelope: Option<EnvelopeFn>,
    bound: Option<f64>,
}

impl fmt::Debug for InteractionKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match &self.kind {
            KernelKind::Zero => "zero".to_string(),
            KernelKind::Constant(c) => format!("constant {c:?}"),
            KernelKind::BiotSavart => "biot-savart".into(),
            KernelKind::MollifiedBiotSavart { level, .. } => format!("mollified biot-savart n={level}"),
            KernelKind::Table(t) => format!("table n={}", t.n),
            KernelKind::Func(_) => "closure".into(),
        };
        write!(f, "InteractionKernel({k}, d={}, L={})", self.dim, self.period)
    }
}

fn check_cell(dim: usize, period: f64) -> Result<()> {
    if dim != 1 && dim != 2 {
        return Err(Error::usage(format!("dimension must be 1 or 2, got {dim}")));
    }
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::usage(format!("period must be positive, got {period}")));
    }
    Ok(())
}

#[inline]
pub(crate) fn min_image(d: f64, period: f64) -> f64 {
    let h = 0.5 * period;
    if d >= h {
        d - period
    } else if d < -h {
        d + period
    } else {
        d
    }
}

#[inline]
fn k2(z: [f64; 2]) -> [f64; 2] {
    let r2 = z[0] * z[0] + z[1] * z[1];
    if r2 == 0.0 {
        return [0.0, 0.0];
    }
    let c = 1.0 / (2.0 * PI * r2);
    [-z[1] * c, z[0] * c]
}

impl InteractionKernel {
    fn base(kind: KernelKind, dim: usize, period: f64, div_free: bool, bound: Option<f64>) -> Result<Self> {
        check_cell(dim, period)?;
        Ok(Self {
            kind,
            dim,
            period,
            div_free,
            envelope: None,
            bound,
        })
    }

    pub fn zero(dim: usize, period: f64) -> Result<Self> {
        Self::base(KernelKind::Zero, dim, period, true, Some(0.0))
    }

    pub fn constant(dim: usize, period: f64, c: [f64; 2]) -> Result<Self> {
        let c = if dim == 1 { [c[0], 0.0] } else { c };
        Self::base(KernelKind::Constant(c), dim, period, true, Some(c[0].hypot(c[1])))
    }

    pub fn biot_savart(period: f64) -> Result<Self> {
        Self::base(KernelKind::BiotSavart, 2, period, true, None)
    }

    /// The whole-plane Biot–Savart kernel mollified at level `n`.
    pub fn mollified_biot_savart(period: f64, level: f64) -> Result<Self> {
        if !(level > 0.0) {
            return Err(Error::usage(format!("mollification level must be positive, got {level}")));
        }
        let mass = Arc::new(PairMass::new(2001)?);
        let mut k = Self::base(
            KernelKind::MollifiedBiotSavart { level, mass },
            2,
            period,
            true,
            None,
        )?;
        k.bound = Some(k.sampled_bound());
        Ok(k)
    }

    /// Torus Biot–Savart kernel mollified at level `n`: the velocity of
    /// `ψ_n * ψ_n` (periodized), tabulated on an `m × m` lattice.
    pub fn periodic_mollified_biot_savart(period: f64, level: f64, m: usize) -> Result<Self> {
        if !(level > 0.0) {
            return Err(Error::usage(format!("mollification level must be positive, got {level}")));
        }
        let grid = PeriodicGrid::new(2, m, period)?;
        let wn = Wavenumbers::new(&grid);
        let scale = grid.len() as f64 / (period * period);
        let mut cache = std::collections::HashMap::new();
        let src: Vec<Complex64> = wn
            .kabs
            .iter()
            .map(|&k| {
                let v = *cache
                    .entry(k.to_bits())
                    .or_insert_with(|| mollifier::bump_fourier(k / level).powi(2));
                Complex64::new(scale * v, 0.0)
            })
            .collect();
        let (a, b) = spectral::biot_savart_modes(&wn, &src);
        let b1 = spectral::inverse_real(&grid, a);
        let b2 = spectral::inverse_real(&grid, b);
        let table = KernelTable::new(m, period, &b1, &b2);
        let bound = table.bound;
        Self::base(KernelKind::Table(Arc::new(table)), 2, period, true, Some(bound))
    }

    pub fn from_fn(
        dim: usize,
        period: f64,
        div_free: bool,
        f: impl Fn(f64, [f64; 2], [f64; 2]) -> [f64; 2] + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::base(KernelKind::Func(Arc::new(f)), dim, period, div_free, None)
    }

    pub fn with_envelope(mut self, h: impl Fn(f64, [f64; 2]) -> f64 + Send + Sync + 'static) -> Self {
        self.envelope = Some(Arc::new(h));
        self
    }

    pub fn with_bound(mut self, bound: f64) -> Self {
        self.bound = Some(bound);
        self
    }

    /// Global bound on `|b|` when one is known.
    pub fn bound(&self) -> Option<f64> {
        self.bound
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, KernelKind::Zero)
    }

    fn displacement(&self, x: [f64; 2], y: [f64; 2]) -> [f64; 2] {
        [min_image(x[0] - y[0], self.period), min_image(x[1] - y[1], self.period)]
    }

    pub fn eval(&self, t: f64, x: [f64; 2], y: [f64; 2]) -> [f64; 2] {
        match &self.kind {
            KernelKind::Zero => [0.0, 0.0],
            KernelKind::Constant(c) => *c,
            KernelKind::BiotSavart => k2(self.displacement(x, y)),
            KernelKind::MollifiedBiotSavart { level, mass } => {
                let z = self.displacement(x, y);
                let w = mass.eval(level * z[0].hypot(z[1]));
                let v = k2(z);
                [w * v[0], w * v[1]]
            }
            KernelKind::Table(tab) => tab.eval(self.displacement(x, y)),
            KernelKind::Func(f) => f(t, x, y),
        }
    }

    /// Dominating envelope `h(t, x - y)` with `|b(t, x, y)| <= h`.
    pub fn envelope(&self, t: f64, z: [f64; 2]) -> f64 {
        if let Some(h) = &self.envelope {
            return h(t, z);
        }
        let r = z[0].hypot(z[1]);
        let sing = if r > 0.0 { 1.0 / (2.0 * PI * r) } else { f64::INFINITY };
        match &self.kind {
            KernelKind::Zero => 0.0,
            KernelKind::Constant(c) => c[0].hypot(c[1]),
            KernelKind::BiotSavart => sing,
            KernelKind::MollifiedBiotSavart { .. } | KernelKind::Table(_) => {
                sing.min(self.bound.unwrap_or(f64::INFINITY)) * (1.0 + 1e-9)
            }
            KernelKind::Func(_) => self.bound.unwrap_or(f64::INFINITY),
        }
    }

    /// Largest `|b(0, z, 0)| / h(0, z)` over sampled displacements.
    pub fn envelope_ratio(&self, samples: &[[f64; 2]]) -> f64 {
        samples
            .iter()
            .map(|&z| {
                let v = self.eval(0.0, z, [0.0, 0.0]);
                let m = v[0].hypot(v[1]);
                if m == 0.0 {
                    0.0
                } else {
                    m / self.envelope(0.0, z)
                }
            })
            .fold(0.0, f64::max)
    }

    /// `max |b(0, z, 0)|` over a lattice of displacements plus a fine radial set near 0.
    fn sampled_bound(&self) -> f64 {
        let mut best = 0.0_f64;
        let m = 64;
        let h = self.period / m as f64;
        for i in 0..m {
            for j in 0..m {
                let z = [-0.5 * self.period + i as f64 * h, -0.5 * self.period + j as f64 * h];
                let v = self.eval(0.0, z, [0.0, 0.0]);
                best = best.max(v[0].hypot(v[1]));
            }
        }
        let level = match &self.kind {
            KernelKind::MollifiedBiotSavart { level, .. } => *level,
            _ => 1.0,
        };
        for k in 1..=800 {
            let r = (k as f64) * 4e-3 / level;
            let v = self.eval(0.0, [r, 0.0], [0.0, 0.0]);
            best = best.max(v[0].hypot(v[1]));
        }
        best
    }

    /// `v_i = (1/N) Σ_j b(t, x_i, x_j)` in a fixed summation order.
    pub fn mean_field(&self, t: f64, pos: &[[f64; 2]]) -> Vec<[f64; 2]> {
        let n = pos.len();
        let inv = 1.0 / n as f64;
        match &self.kind {
            KernelKind::Zero => vec![[0.0, 0.0]; n],
            KernelKind::Constant(c) => {
                // Same reduction as the generic path so results do not depend on N's parity.
                let mut s = [0.0, 0.0];
                for _ in 0..n {
                    s[0] += c[0];
                    s[1] += c[1];
                }
                vec![[s[0] * inv, s[1] * inv]; n]
            }
            KernelKind::Table(tab) => tab.pair_sums(pos).into_iter().map(|v| [v[0] * inv, v[1] * inv]).collect(),
            _ => pos
                .iter()
                .map(|&x| {
                    let mut s = [0.0, 0.0];
                    for &y in pos {
                        let v = self.eval(t, x, y);
                        s[0] += v[0];
                        s[1] += v[1];
                    }
                    [s[0] * inv, s[1] * inv]
                })
                .collect(),
        }
    }
}

/// Space-only mollifier `Γ_n(x, y) = n^{2d} ψ(n x) ψ(n y)` with a radial bump.
#[derive(Clone)]
pub struct MollifierSpec {
    pub level: f64,
    pub dim: usize,
    /// Quadrature nodes of `ψ` on its unit support, weights summing to 1.
    nodes: Vec<([f64; 2], f64)>,
}

impl fmt::Debug for MollifierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MollifierSpec(n={}, d={}, {} nodes)", self.level, self.dim, self.nodes.len())
    }
}

impl MollifierSpec {
    /// The standard bump `c(1 - |x|²)³₊`.
    pub fn standard(dim: usize, level: f64) -> Result<Self> {
        let c = if dim == 1 { 35.0 / 32.0 } else { 4.0 / PI };
        Self::with_profile(dim, level, move |r| if r < 1.0 { c * (1.0 - r * r).powi(3) } else { 0.0 })
    }

    /// Radial profile `ψ(|x|)` supported in the unit ball; it must integrate to 1.
    pub fn with_profile(dim: usize, level: f64, psi: impl Fn(f64) -> f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::usage(format!("dimension must be 1 or 2, got {dim}")));
        }
        if !(level > 0.0 && level.is_finite()) {
            return Err(Error::usage(format!("mollification level must be positive, got {level}")));
        }
        let mut nodes = Vec::new();
        if dim == 1 {
            for (x, w) in gauss_legendre(16, -1.0, 1.0) {
                nodes.push(([x, 0.0], w * psi(x.abs())));
            }
        } else {
            let na = 8;
            for (r, w) in gauss_legendre(8, 0.0, 1.0) {
                for a in 0..na {
                    let th = 2.0 * PI * (a as f64 + 0.5) / na as f64;
                    nodes.push(([r * th.cos(), r * th.sin()], w * r * psi(r) * 2.0 * PI / na as f64));
                }
            }
        }
        let total: f64 = nodes.iter().map(|n| n.1).sum();
        if (total - 1.0).abs() > 1e-8 {
            return Err(Error::usage(format!("mollifier profile integrates to {total}, not 1")));
        }
        Ok(Self { level, dim, nodes })
    }

    /// Pointwise value of `Γ_n(x, y)`.
    pub fn gamma_n(&self, psi: impl Fn(f64) -> f64, x: [f64; 2], y: [f64; 2]) -> f64 {
        let n = self.level;
        let d = self.dim as i32;
        let rx = n * x[0].hypot(x[1]);
        let ry = n * y[0].hypot(y[1]);
        n.powi(2 * d) * psi(rx) * psi(ry)
    }

    pub fn total_weight(&self) -> f64 {
        self.nodes.iter().map(|n| n.1).sum()
    }
}

/// `b_n(t, x, y) = ∫∫ b(t, x - x', y - y') Γ_n(x', y') dx' dy'` by tensor quadrature.
pub fn mollify_kernel(kernel: &InteractionKernel, moll: &MollifierSpec) -> Result<InteractionKernel> {
    if moll.dim != kernel.dim {
        return Err(Error::usage("mollifier and kernel dimensions differ"));
    }
    if 4.0 / moll.level >= kernel.period {
        return Err(Error::usage("mollifier support exceeds the cell"));
    }
    let inner = kernel.clone();
    let h = 1.0 / moll.level;
    let nodes: Vec<([f64; 2], f64)> = moll.nodes.iter().map(|&(p, w)| ([p[0] * h, p[1] * h], w)).collect();
    let f = move |t: f64, x: [f64; 2], y: [f64; 2]| {
        let mut acc = [0.0, 0.0];
        for &(a, wa) in &nodes {
            let xa = [x[0] - a[0], x[1] - a[1]];
            for &(b, wb) in &nodes {
                let v = inner.eval(t, xa, [y[0] - b[0], y[1] - b[1]]);
                acc[0] += wa * wb * v[0];
                acc[1] += wa * wb * v[1];
            }
        }
        acc
    };
    let mut out = InteractionKernel::from_fn(kernel.dim, kernel.period, kernel.div_free, f)?;
    let mut bound = 0.0_f64;
    let m = 24;
    let step = kernel.period / m as f64;
    for i in 0..m {
        for j in 0..(if kernel.dim == 1 { 1 } else { m }) {
            let z = [
                -0.5 * kernel.period + (i as f64 + 0.5) * step,
                if kernel.dim == 1 { 0.0 } else { -0.5 * kernel.period + (j as f64 + 0.5) * step },
            ];
            let v = out.eval(0.0, z, [0.0, 0.0]);
            bound = bound.max(v[0].hypot(v[1]));
        }
    }
    out.bound = Some(bound);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_sums_match_direct_evaluation() {
        let l = 2.0 * PI;
        let k = InteractionKernel::periodic_mollified_biot_savart(l, 8.0, 64).unwrap();
        let KernelKind::Table(tab) = &k.kind else { panic!("table kernel expected") };
        let pos: Vec<[f64; 2]> = (0..40)
            .map(|i| {
                let t = i as f64;
                [(1.7 * t).rem_euclid(l), (0.9 * t * t).rem_euclid(l)]
            })
            .collect();
        let fast = tab.pair_sums(&pos);
        for (x, f) in pos.iter().zip(&fast) {
            let mut s = [0.0, 0.0];
            for y in &pos {
                let v = tab.eval([x[0] - y[0], x[1] - y[1]]);
                s[0] += v[0];
                s[1] += v[1];
            }
            assert!((s[0] - f[0]).abs() < 1e-12 && (s[1] - f[1]).abs() < 1e-12, "{s:?} {f:?}");
        }
        assert_eq!(tab.eval([0.0, 0.0]), [0.0, 0.0]);
    }

    #[test]
    fn constants_survive_mollification() {
        let k = InteractionKernel::constant(2, 2.0 * PI, [0.3, -1.1]).unwrap();
        let m = MollifierSpec::standard(2, 8.0).unwrap();
        let kn = mollify_kernel(&k, &m).unwrap();
        let v = kn.eval(0.0, [0.4, 0.1], [-1.0, 2.0]);
        assert!((v[0] - 0.3).abs() < 1e-13 && (v[1] + 1.1).abs() < 1e-13);
    }

    #[test]
    fn unnormalized_profiles_are_rejected() {
        assert!(MollifierSpec::with_profile(2, 4.0, |r| if r < 1.0 { 1.0 } else { 0.0 }).is_err());
        let m = MollifierSpec::standard(1, 4.0).unwrap();
        assert!((m.total_weight() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_mollified_k2_matches_quadrature_away_from_origin() {
        let l = 2.0 * PI;
        let exact = InteractionKernel::mollified_biot_savart(l, 8.0).unwrap();
        let quad = mollify_kernel(&InteractionKernel::biot_savart(l).unwrap(), &MollifierSpec::standard(2, 8.0).unwrap())
            .unwrap();
        for z in [[0.6, 0.2], [-0.4, 0.9], [1.5, -1.0]] {
            let a = exact.eval(0.0, z, [0.0, 0.0]);
            let b = quad.eval(0.0, z, [0.0, 0.0]);
            assert!((a[0] - b[0]).abs() < 1e-6 && (a[1] - b[1]).abs() < 1e-6, "{a:?} {b:?}");
        }
    }

    #[test]
    fn periodic_table_is_divergence_free_and_close_to_k2() {
        let l = 2.0 * PI;
        let k = InteractionKernel::periodic_mollified_biot_savart(l, 16.0, 256).unwrap();
        // Away from the core the periodic kernel is K₂ minus z^⊥/(2L²) to leading order.
        let z = [0.5, 0.3];
        let v = k.eval(0.0, z, [0.0, 0.0]);
        let w = k2(z);
        let corr = [z[1] / (2.0 * l * l), -z[0] / (2.0 * l * l)];
        assert!((v[0] - w[0] - corr[0]).abs() < 2e-3, "{v:?} {w:?}");
        assert!((v[1] - w[1] - corr[1]).abs() < 2e-3);
        assert!(k.bound().unwrap() < 16.0);
    }

    #[test]
    fn envelope_dominates() {
        let k = InteractionKernel::mollified_biot_savart(2.0 * PI, 4.0).unwrap();
        let pts: Vec<[f64; 2]> = (1..200).map(|i| [0.01 * i as f64, 0.003 * i as f64]).collect();
        assert!(k.envelope_ratio(&pts) <= 1.0);
    }
}

//! Pseudo-spectral operators on the periodic lattice.
//!
//! Transforms are full complex FFTs: forward unnormalized, inverse scaled by
//! `1/n^d`. Plans are cached per length. Odd multipliers (gradients, Riesz,
//! Biot–Savart) zero every Nyquist mode so real fields stay real.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::{PeriodicGrid, ScalarField, VectorField};

type Plan = Arc<dyn Fft<f64>>;

fn plan(n: usize, forward: bool) -> Plan {
    static CACHE: OnceLock<Mutex<HashMap<(usize, bool), Plan>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("fft plan cache poisoned");
    map.entry((n, forward))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if forward {
                planner.plan_fft_forward(n)
            } else {
                planner.plan_fft_inverse(n)
            }
        })
        .clone()
}

fn transpose(buf: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

/// In-place unnormalized transform of a row-major `n^d` buffer.
pub fn fft_in_place(grid: &PeriodicGrid, buf: &mut [Complex64], forward: bool) {
    let n = grid.n();
    let p = plan(n, forward);
    p.process(buf);
    if grid.dim() == 2 {
        transpose(buf, n);
        p.process(buf);
        transpose(buf, n);
    }
}

pub fn forward_real(grid: &PeriodicGrid, data: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_in_place(grid, &mut buf, true);
    buf
}

/// Inverse transform returning the real part, scaled by `1/n^d`.
pub fn inverse_real(grid: &PeriodicGrid, mut modes: Vec<Complex64>) -> Vec<f64> {
    fft_in_place(grid, &mut modes, false);
    let s = 1.0 / grid.len() as f64;
    modes.into_iter().map(|c| c.re * s).collect()
}

/// Mode coefficients of a scalar field (unnormalized DFT convention).
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    pub grid: PeriodicGrid,
    pub modes: Vec<Complex64>,
}

impl SpectralField {
    /// Largest violation of `F(-k) = conj F(k)`.
    pub fn hermitian_defect(&self) -> f64 {
        (0..self.modes.len())
            .map(|i| (self.modes[self.grid.conjugate_index(i)] - self.modes[i].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// `L²` norm of the physical field via Parseval.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.modes.iter().map(|c| c.norm_sqr()).sum();
        (s * self.grid.cell_volume() / self.grid.len() as f64).sqrt()
    }
}

pub fn to_modes(f: &ScalarField) -> SpectralField {
    SpectralField {
        grid: f.grid().clone(),
        modes: forward_real(f.grid(), f.data()),
    }
}

pub fn from_modes(s: &SpectralField) -> ScalarField {
    let data = inverse_real(&s.grid, s.modes.clone());
    ScalarField::new(s.grid.clone(), data).expect("transform preserves length")
}

/// Precomputed wavevectors for one grid.
#[derive(Clone, Debug)]
pub struct Wavenumbers {
    pub k1: Vec<f64>,
    pub k2: Vec<f64>,
    pub kabs: Vec<f64>,
    pub nyquist: Vec<bool>,
}

impl Wavenumbers {
    pub fn new(grid: &PeriodicGrid) -> Self {
        let len = grid.len();
        let mut k1 = Vec::with_capacity(len);
        let mut k2 = Vec::with_capacity(len);
        let mut kabs = Vec::with_capacity(len);
        let mut nyquist = Vec::with_capacity(len);
        for i in 0..len {
            let k = grid.k_vec(i);
            k1.push(k[0]);
            k2.push(k[1]);
            kabs.push((k[0] * k[0] + k[1] * k[1]).sqrt());
            nyquist.push(grid.is_nyquist(i));
        }
        Self {
            k1,
            k2,
            kabs,
            nyquist,
        }
    }

    pub fn len(&self) -> usize {
        self.kabs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kabs.is_empty()
    }

    /// `-|k|^α`, the symbol of `Δ^{α/2}`.
    pub fn frac_symbol(&self, alpha: f64) -> Vec<f64> {
        self.kabs.iter().map(|&k| -k.powf(alpha)).collect()
    }
}

/// 2/3-rule mask: keeps modes with `|m_i| <= n/3` on every axis.
pub fn dealias_mask(grid: &PeriodicGrid) -> Vec<bool> {
    let cut = (grid.n() / 3) as i64;
    (0..grid.len())
        .map(|i| {
            let [i1, i2] = grid.axis_indices(i);
            let ok1 = grid.signed_mode(i1).abs() <= cut;
            let ok2 = grid.dim() == 1 || grid.signed_mode(i2).abs() <= cut;
            ok1 && ok2
        })
        .collect()
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 2.0 {
        Ok(())
    } else {
        Err(Error::usage(format!("alpha must lie in (0, 2], got {alpha}")))
    }
}

fn require_2d(grid: &PeriodicGrid, what: &str) -> Result<()> {
    if grid.dim() == 2 {
        Ok(())
    } else {
        Err(Error::usage(format!("{what} requires a two-dimensional grid")))
    }
}

/// Applies a real even multiplier `m(idx)`.
pub fn apply_real_multiplier(f: &ScalarField, m: impl Fn(usize) -> f64) -> ScalarField {
    let mut s = to_modes(f);
    for (i, c) in s.modes.iter_mut().enumerate() {
        *c *= m(i);
    }
    from_modes(&s)
}

/// `|k|^s` multiplier; the zero mode is annihilated.
pub fn abs_k_power(f: &ScalarField, s: f64) -> ScalarField {
    let grid = f.grid();
    apply_real_multiplier(f, |i| {
        let k = grid.k_abs(i);
        if k == 0.0 {
            0.0
        } else {
            k.powf(s)
        }
    })
}

/// `Δ^{α/2} f`, multiplier `-|k|^α`.
pub fn frac_laplacian(f: &ScalarField, alpha: f64) -> Result<ScalarField> {
    check_alpha(alpha)?;
    let grid = f.grid();
    Ok(apply_real_multiplier(f, |i| -grid.k_abs(i).powf(alpha)))
}

/// `P_t f`, multiplier `exp(-t|k|^α)`.
pub fn semigroup_apply(f: &ScalarField, t: f64, alpha: f64) -> Result<ScalarField> {
    check_alpha(alpha)?;
    if !(t >= 0.0) {
        return Err(Error::usage(format!("semigroup time must be >= 0, got {t}")));
    }
    let grid = f.grid();
    Ok(apply_real_multiplier(f, |i| (-t * grid.k_abs(i).powf(alpha)).exp()))
}

/// `(1 + |k|²)^{s/2}` multiplier.
pub fn bessel_potential(f: &ScalarField, s: f64) -> ScalarField {
    let grid = f.grid();
    apply_real_multiplier(f, |i| {
        let k = grid.k_abs(i);
        (1.0 + k * k).powf(0.5 * s)
    })
}

fn vector_from_mode_pair(grid: &PeriodicGrid, a: Vec<Complex64>, b: Vec<Complex64>) -> VectorField {
    VectorField {
        components: vec![
            ScalarField::new(grid.clone(), inverse_real(grid, a)).expect("length"),
            ScalarField::new(grid.clone(), inverse_real(grid, b)).expect("length"),
        ],
    }
}

/// Riesz velocity `(-R₂θ, R₁θ)` with multiplier `(-ik₂/|k|, ik₁/|k|)`.
pub fn riesz_velocity(theta: &ScalarField) -> Result<VectorField> {
    let grid = theta.grid();
    require_2d(grid, "riesz_velocity")?;
    let wn = Wavenumbers::new(grid);
    let modes = forward_real(grid, theta.data());
    let (a, b) = riesz_modes(&wn, &modes);
    Ok(vector_from_mode_pair(grid, a, b))
}

pub(crate) fn riesz_modes(wn: &Wavenumbers, modes: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let i = Complex64::i();
    let mut a = vec![Complex64::new(0.0, 0.0); modes.len()];
    let mut b = a.clone();
    for idx in 0..modes.len() {
        let k = wn.kabs[idx];
        if k == 0.0 || wn.nyquist[idx] {
            continue;
        }
        a[idx] = -i * (wn.k2[idx] / k) * modes[idx];
        b[idx] = i * (wn.k1[idx] / k) * modes[idx];
    }
    (a, b)
}

/// Periodic Biot–Savart velocity, multiplier `(ik₂/|k|², -ik₁/|k|²)`.
///
/// The sign is fixed so that `curl u = ρ - mean ρ`, which is the periodic
/// counterpart of convolution with [`k2_eval`].
pub fn biot_savart_velocity(rho: &ScalarField) -> Result<VectorField> {
    let grid = rho.grid();
    require_2d(grid, "biot_savart_velocity")?;
    let wn = Wavenumbers::new(grid);
    let modes = forward_real(grid, rho.data());
    let (a, b) = biot_savart_modes(&wn, &modes);
    Ok(vector_from_mode_pair(grid, a, b))
}

pub(crate) fn biot_savart_modes(
    wn: &Wavenumbers,
    modes: &[Complex64],
) -> (Vec<Complex64>, Vec<Complex64>) {
    let i = Complex64::i();
    let mut a = vec![Complex64::new(0.0, 0.0); modes.len()];
    let mut b = a.clone();
    for idx in 0..modes.len() {
        let k = wn.kabs[idx];
        if k == 0.0 || wn.nyquist[idx] {
            continue;
        }
        let k2 = k * k;
        a[idx] = i * (wn.k2[idx] / k2) * modes[idx];
        b[idx] = -i * (wn.k1[idx] / k2) * modes[idx];
    }
    (a, b)
}

/// Whole-plane Biot–Savart kernel `(1/2π)(-x₂, x₁)/|x|²`.
pub fn k2_eval(x: [f64; 2]) -> Result<[f64; 2]> {
    let r2 = x[0] * x[0] + x[1] * x[1];
    if r2 == 0.0 || !r2.is_finite() {
        return Err(Error::Domain(format!("K2 undefined at {x:?}")));
    }
    let c = 1.0 / (2.0 * PI * r2);
    Ok([-x[1] * c, x[0] * c])
}

pub fn gradient(f: &ScalarField) -> VectorField {
    let grid = f.grid();
    let wn = Wavenumbers::new(grid);
    let modes = forward_real(grid, f.data());
    let comps = (0..grid.dim())
        .map(|axis| {
            let ks = if axis == 0 { &wn.k1 } else { &wn.k2 };
            let m: Vec<Complex64> = modes
                .iter()
                .enumerate()
                .map(|(idx, &c)| {
                    if wn.nyquist[idx] {
                        Complex64::new(0.0, 0.0)
                    } else {
                        Complex64::new(0.0, ks[idx]) * c
                    }
                })
                .collect();
            ScalarField::new(grid.clone(), inverse_real(grid, m)).expect("length")
        })
        .collect();
    VectorField { components: comps }
}

pub fn divergence(v: &VectorField) -> ScalarField {
    let grid = v.grid();
    let wn = Wavenumbers::new(grid);
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (axis, comp) in v.components.iter().enumerate().take(grid.dim()) {
        let ks = if axis == 0 { &wn.k1 } else { &wn.k2 };
        let modes = forward_real(grid, comp.data());
        for idx in 0..acc.len() {
            if !wn.nyquist[idx] {
                acc[idx] += Complex64::new(0.0, ks[idx]) * modes[idx];
            }
        }
    }
    ScalarField::new(grid.clone(), inverse_real(grid, acc)).expect("length")
}

/// Scalar curl `∂₁v₂ - ∂₂v₁` of a planar field.
pub fn curl(v: &VectorField) -> Result<ScalarField> {
    let grid = v.grid();
    require_2d(grid, "curl")?;
    let wn = Wavenumbers::new(grid);
    let a = forward_real(grid, v.components[0].data());
    let b = forward_real(grid, v.components[1].data());
    let m = (0..grid.len())
        .map(|idx| {
            if wn.nyquist[idx] {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, wn.k1[idx]) * b[idx] - Complex64::new(0.0, wn.k2[idx]) * a[idx]
            }
        })
        .collect();
    Ok(ScalarField::new(grid.clone(), inverse_real(grid, m)).expect("length"))
}

/// Constant `c_{d,α}` with `Δ^{α/2} f(x) = c_{d,α} PV∫ (f(x+y)-f(x)) |y|^{-d-α} dy`.
pub fn frac_constant(d: usize, alpha: f64) -> f64 {
    use statrs::function::gamma::gamma;
    let df = d as f64;
    alpha * 2f64.powf(alpha - 1.0) * gamma(0.5 * (df + alpha))
        / (PI.powf(0.5 * df) * gamma(1.0 - 0.5 * alpha))
}

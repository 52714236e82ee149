//! Residual of the distributional formulation against a bank of bumps.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{PeriodicGrid, SampledField, ScalarField};
use crate::norms::{default_images, periodized_kernel, trapezoid_weights, KernelSpec};
use crate::solver::{Drift, Forcing};
use crate::spectral;

/// `∫_{-1}^{1} (1 - s²)³ ds`.
const BUMP_MASS: f64 = 32.0 / 35.0;

fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - s * s).powi(3)
    }
}

fn bump_prime(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        -6.0 * s * (1.0 - s * s).powi(2)
    }
}

/// `φ(t, x) = η((t - t_c)/r_t) Π_i η((x_i - c_i)/r)` with `η(s) = (1 - s²)³₊`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestFunction {
    pub t_center: f64,
    pub t_radius: f64,
    pub x_center: [f64; 2],
    pub x_radius: f64,
}

impl TestFunction {
    pub fn time_factor(&self, t: f64) -> f64 {
        bump((t - self.t_center) / self.t_radius)
    }

    pub fn time_derivative(&self, t: f64) -> f64 {
        bump_prime((t - self.t_center) / self.t_radius) / self.t_radius
    }

    pub fn space_factor(&self, grid: &PeriodicGrid) -> ScalarField {
        let d = grid.dim();
        ScalarField::from_fn(grid, |x| {
            (0..d)
                .map(|i| bump((x[i] - self.x_center[i]) / self.x_radius))
                .product()
        })
    }

    /// `∫∫ |φ|` in closed form.
    pub fn l1_mass(&self, dim: usize) -> f64 {
        BUMP_MASS.powi(dim as i32 + 1) * self.t_radius * self.x_radius.powi(dim as i32)
    }

    fn check_inside(&self, grid: &PeriodicGrid, times: &[f64]) -> Result<()> {
        let half = 0.5 * grid.period();
        for i in 0..grid.dim() {
            if self.x_center[i].abs() + self.x_radius >= half {
                return Err(Error::usage(format!(
                    "test function support along axis {i} touches the cell boundary"
                )));
            }
        }
        let (lo, hi) = (times[0], times[times.len() - 1]);
        if self.t_center - self.t_radius <= lo || self.t_center + self.t_radius >= hi {
            return Err(Error::usage(format!(
                "test function time support [{}, {}] touches the sampled range [{lo}, {hi}]",
                self.t_center - self.t_radius,
                self.t_center + self.t_radius
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestBank {
    pub functions: Vec<TestFunction>,
}

impl TestBank {
    pub fn new(functions: Vec<TestFunction>) -> Self {
        Self { functions }
    }

    /// Three spatial scales times five centres, all with the same time window.
    pub fn standard(grid: &PeriodicGrid, times: &[f64]) -> Result<Self> {
        if times.len() < 3 {
            return Err(Error::usage("the test bank needs at least three sample times"));
        }
        let l = grid.period();
        let (lo, hi) = (times[0], times[times.len() - 1]);
        let t_center = 0.5 * (lo + hi);
        let t_radius = 0.4 * (hi - lo);
        let a = 0.15 * l;
        let centres: Vec<[f64; 2]> = if grid.dim() == 1 {
            vec![[0.0, 0.0], [a, 0.0], [-a, 0.0], [0.5 * a, 0.0], [-0.5 * a, 0.0]]
        } else {
            vec![[0.0, 0.0], [a, a], [-a, a], [a, -a], [-a, -a]]
        };
        let mut functions = Vec::new();
        for &s in &[0.2, 0.12, 0.06] {
            for &c in &centres {
                functions.push(TestFunction {
                    t_center,
                    t_radius,
                    x_center: c,
                    x_radius: s * l,
                });
            }
        }
        Ok(Self { functions })
    }
}

/// Spatial operator of the equation.
#[derive(Clone, Debug)]
pub enum Operator {
    /// `Δ^{α/2}` by its Fourier multiplier.
    Spectral { alpha: f64 },
    /// `L_K φ(x) = Σ_z K(t, z)(φ(x+z) - φ(x)) h^d` with the periodized kernel,
    /// the nearest image dropped below `delta`.
    Kernel {
        spec: KernelSpec,
        delta: f64,
        /// Tabulate the kernel at every sample time rather than once.
        time_dependent: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeakResidual {
    /// Signed residual of each test function divided by `∫∫|φ|`.
    pub per_test: Vec<f64>,
    pub max: f64,
}

fn kernel_apply(grid: &PeriodicGrid, kp: &[f64], psi: &ScalarField) -> ScalarField {
    let dv = grid.cell_volume();
    let total: f64 = kp.iter().sum();
    let kh = spectral::forward_real(grid, kp);
    let ph = spectral::forward_real(grid, psi.data());
    let prod: Vec<Complex64> = kh.iter().zip(&ph).map(|(a, b)| a * b).collect();
    let conv = spectral::inverse_real(grid, prod);
    let data = conv
        .iter()
        .zip(psi.data())
        .map(|(c, p)| (c - p * total) * dv)
        .collect();
    ScalarField::new(grid.clone(), data).expect("length")
}

/// `-∫u∂_tφ - ∫u Lφ + ∫(b·∇φ + φ div b)u - ∫fφ` for each test function, by
/// the trapezoid rule in time and the lattice rule in space.
///
/// The time-derivative term uses `u - u(t_0)`, which leaves the value
/// unchanged because `∫∂_tφ dt = 0`, and makes constants exact solutions.
pub fn weak_residual(
    u: &SampledField,
    drift: &Drift,
    forcing: &Forcing,
    op: &Operator,
    bank: &TestBank,
) -> Result<WeakResidual> {
    let grid = u.grid();
    let times = u.times();
    if u.components() != 1 {
        return Err(Error::usage("weak residual needs a scalar field"));
    }
    if bank.functions.is_empty() {
        return Err(Error::usage("empty test bank"));
    }
    drift.check(grid)?;
    for phi in &bank.functions {
        phi.check_inside(grid, times)?;
    }
    let d = grid.dim();
    let dv = grid.cell_volume();
    let psis: Vec<ScalarField> = bank.functions.iter().map(|p| p.space_factor(grid)).collect();
    let grads: Vec<_> = psis.iter().map(spectral::gradient).collect();
    let static_op: Option<Vec<ScalarField>> = match op {
        Operator::Spectral { alpha } => Some(
            psis.iter()
                .map(|p| spectral::frac_laplacian(p, *alpha))
                .collect::<Result<_>>()?,
        ),
        Operator::Kernel {
            spec,
            delta,
            time_dependent: false,
        } => {
            check_kernel(grid, spec, *delta)?;
            let kp = periodized_kernel(grid, spec, *delta, times[0], default_images(d) as i64);
            Some(psis.iter().map(|p| kernel_apply(grid, &kp, p)).collect())
        }
        Operator::Kernel { spec, delta, .. } => {
            check_kernel(grid, spec, *delta)?;
            None
        }
    };
    let w = trapezoid_weights(times);
    let u0 = u.snapshot(0);
    let mut acc = vec![0.0; bank.functions.len()];
    for (j, &t) in times.iter().enumerate() {
        let active: Vec<usize> = (0..bank.functions.len())
            .filter(|&i| {
                let p = &bank.functions[i];
                p.time_factor(t) != 0.0 || p.time_derivative(t) != 0.0
            })
            .collect();
        if active.is_empty() {
            continue;
        }
        let uj = u.snapshot(j);
        let b = drift.at(grid, t);
        let divb = spectral::divergence(&b);
        let fj = forcing.at(grid, t);
        let dyn_op: Option<Vec<ScalarField>> = match (&static_op, op) {
            (None, Operator::Kernel { spec, delta, .. }) => {
                let kp = periodized_kernel(grid, spec, *delta, t, default_images(d) as i64);
                Some(active.iter().map(|&i| kernel_apply(grid, &kp, &psis[i])).collect())
            }
            _ => None,
        };
        for (a, &i) in active.iter().enumerate() {
            let phi = &bank.functions[i];
            let (eta, deta) = (phi.time_factor(t), phi.time_derivative(t));
            let lpsi = match &dyn_op {
                Some(v) => &v[a],
                None => &static_op.as_ref().expect("static operator")[i],
            };
            let psi = psis[i].data();
            let (ud, u0d, lp, fd, dd) = (uj.data(), u0.data(), lpsi.data(), fj.data(), divb.data());
            let mut s_t = 0.0;
            let mut s_l = 0.0;
            let mut s_b = 0.0;
            let mut s_f = 0.0;
            for x in 0..grid.len() {
                s_t += (ud[x] - u0d[x]) * psi[x];
                s_l += ud[x] * lp[x];
                let mut bg = psi[x] * dd[x];
                for c in 0..d {
                    bg += b.components[c].data()[x] * grads[i].components[c].data()[x];
                }
                s_b += bg * ud[x];
                s_f += fd[x] * psi[x];
            }
            acc[i] += w[j] * dv * (-deta * s_t + eta * (-s_l + s_b - s_f));
        }
    }
    let per_test: Vec<f64> = acc
        .iter()
        .zip(&bank.functions)
        .map(|(r, p)| r / p.l1_mass(d))
        .collect();
    let max = per_test.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    Ok(WeakResidual { per_test, max })
}

fn check_kernel(grid: &PeriodicGrid, spec: &KernelSpec, delta: f64) -> Result<()> {
    if spec.dim != grid.dim() {
        return Err(Error::usage("kernel and field dimensions differ"));
    }
    if delta < grid.spacing() * (1.0 - 1e-12) {
        return Err(Error::usage(format!(
            "cutoff {delta} is below the lattice spacing {}",
            grid.spacing()
        )));
    }
    Ok(())
}

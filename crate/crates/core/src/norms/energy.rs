//! Nonlocal energy form `(1/2) ΣΣ (f(x)-f(y))(g(x)-g(y)) K(t, x-y)` on the torus.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{PeriodicGrid, ScalarField};

type Profile = Arc<dyn Fn(f64, [f64; 2]) -> f64 + Send + Sync>;

/// Symmetric jump kernel comparable to `|y|^{-d-α}`.
#[derive(Clone)]
pub struct KernelSpec {
    pub alpha: f64,
    pub kappa0: f64,
    pub kappa1: f64,
    pub dim: usize,
    profile: Profile,
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSpec")
            .field("alpha", &self.alpha)
            .field("kappa0", &self.kappa0)
            .field("kappa1", &self.kappa1)
            .field("dim", &self.dim)
            .finish_non_exhaustive()
    }
}

impl KernelSpec {
    /// Validates the two-sided bound and the symmetry `K(t,y) = K(t,-y)` on a
    /// test lattice of radii and directions.
    pub fn new(
        dim: usize,
        alpha: f64,
        kappa0: f64,
        kappa1: f64,
        profile: impl Fn(f64, [f64; 2]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::usage(format!("alpha must lie in (0, 2), got {alpha}")));
        }
        if dim != 1 && dim != 2 {
            return Err(Error::usage("kernel dimension must be 1 or 2"));
        }
        if !(kappa0 > 0.0 && kappa0 <= kappa1) {
            return Err(Error::usage(format!(
                "need 0 < kappa0 <= kappa1, got {kappa0}, {kappa1}"
            )));
        }
        let spec = Self {
            alpha,
            kappa0,
            kappa1,
            dim,
            profile: Arc::new(profile),
        };
        spec.check_bounds()?;
        Ok(spec)
    }

    /// Exact fractional kernel `|y|^{-d-α}`.
    pub fn fractional(dim: usize, alpha: f64) -> Result<Self> {
        let e = dim as f64 + alpha;
        Self::new(dim, alpha, 1.0, 1.0, move |_, y| {
            (y[0] * y[0] + y[1] * y[1]).sqrt().powf(-e)
        })
    }

    pub fn eval(&self, t: f64, y: [f64; 2]) -> f64 {
        (self.profile)(t, y)
    }

    fn check_bounds(&self) -> Result<()> {
        let e = self.dim as f64 + self.alpha;
        let tol = 1e-9;
        for &t in &[0.0, 0.5, 1.0] {
            for ri in 0..12 {
                let rad = 0.05 * 1.6f64.powi(ri);
                for ai in 0..8 {
                    let th = ai as f64 * std::f64::consts::PI / 8.0;
                    let y = if self.dim == 1 {
                        [if ai % 2 == 0 { rad } else { -rad }, 0.0]
                    } else {
                        [rad * th.cos(), rad * th.sin()]
                    };
                    let k = self.eval(t, y);
                    let km = self.eval(t, [-y[0], -y[1]]);
                    let base = rad.powf(-e);
                    if !(k >= self.kappa0 * base * (1.0 - tol) && k <= self.kappa1 * base * (1.0 + tol)) {
                        return Err(Error::usage(format!(
                            "kernel value {k} at y = {y:?} violates the two-sided bound"
                        )));
                    }
                    if (k - km).abs() > tol * k.abs() {
                        return Err(Error::usage(format!("kernel is not symmetric at y = {y:?}")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Default image count for the periodized kernel.
pub(crate) fn default_images(dim: usize) -> usize {
    if dim == 1 {
        64
    } else {
        16
    }
}

/// Energy form with the kernel periodized over the default number of images.
pub fn energy_form(
    f: &ScalarField,
    g: &ScalarField,
    k: &KernelSpec,
    delta: f64,
    t: f64,
) -> Result<f64> {
    energy_form_with_images(f, g, k, delta, t, default_images(f.grid().dim()))
}

/// Energy form with `K_per(z) = Σ_{|m_i| <= images} K(t, z + mL)`; the
/// minimum-image term is dropped when `|z| < delta`.
pub fn energy_form_with_images(
    f: &ScalarField,
    g: &ScalarField,
    k: &KernelSpec,
    delta: f64,
    t: f64,
    images: usize,
) -> Result<f64> {
    let grid = f.grid();
    grid.ensure_same(g.grid())?;
    if k.dim != grid.dim() {
        return Err(Error::usage("kernel and field dimensions differ"));
    }
    if delta < grid.spacing() * (1.0 - 1e-12) {
        return Err(Error::usage(format!(
            "cutoff {delta} is below the lattice spacing {}",
            grid.spacing()
        )));
    }
    f.check_finite()?;
    g.check_finite()?;
    let kp = periodized_kernel(grid, k, delta, t, images as i64);
    let (fd, gd) = (f.data(), g.data());
    let n = grid.n();
    let mut total = 0.0;
    for (z, &kz) in kp.iter().enumerate() {
        if kz == 0.0 {
            continue;
        }
        let [z1, z2] = grid.axis_indices(z);
        let mut s = 0.0;
        for x in 0..grid.len() {
            let [x1, x2] = grid.axis_indices(x);
            let y = grid.flat_index((x1 + n - z1) % n, (x2 + n - z2) % n);
            s += (fd[x] - fd[y]) * (gd[x] - gd[y]);
        }
        total += kz * s;
    }
    let dv = grid.cell_volume();
    Ok(0.5 * total * dv * dv)
}

pub(crate) fn periodized_kernel(grid: &PeriodicGrid, k: &KernelSpec, delta: f64, t: f64, m: i64) -> Vec<f64> {
    let l = grid.period();
    let second = if grid.dim() == 1 { 0 } else { m };
    (0..grid.len())
        .map(|z| {
            if z == 0 {
                return 0.0;
            }
            let p = grid.point(z);
            let z0 = [grid.min_image(p[0]), if grid.dim() == 1 { 0.0 } else { grid.min_image(p[1]) }];
            let mut s = 0.0;
            for a in -m..=m {
                for b in -second..=second {
                    let y = [z0[0] + a as f64 * l, z0[1] + b as f64 * l];
                    let r = (y[0] * y[0] + y[1] * y[1]).sqrt();
                    if a == 0 && b == 0 && r < delta * (1.0 - 1e-12) {
                        continue;
                    }
                    s += k.eval(t, y);
                }
            }
            s
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral;

    #[test]
    fn constants_have_zero_energy() {
        let g = PeriodicGrid::standard(1, 32).unwrap();
        let k = KernelSpec::fractional(1, 1.0).unwrap();
        let c = ScalarField::constant(&g, 2.0);
        let h = ScalarField::from_fn(&g, |p| p[0].sin());
        assert_eq!(energy_form(&c, &h, &k, g.spacing(), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn symmetric_in_arguments() {
        let g = PeriodicGrid::standard(2, 16).unwrap();
        let k = KernelSpec::fractional(2, 1.3).unwrap();
        let a = ScalarField::from_fn(&g, |p| (p[0] + 2.0 * p[1]).sin());
        let b = ScalarField::from_fn(&g, |p| p[0].cos() * p[1].cos().exp());
        let e1 = energy_form(&a, &b, &k, g.spacing(), 0.0).unwrap();
        let e2 = energy_form(&b, &a, &k, g.spacing(), 0.0).unwrap();
        assert_eq!(e1, e2);
    }

    #[test]
    fn single_mode_matches_spectral_pairing() {
        let g = PeriodicGrid::standard(1, 64).unwrap();
        let alpha = 1.0;
        let k = KernelSpec::fractional(1, alpha).unwrap();
        let f = ScalarField::from_fn(&g, |p| (2.0 * p[0]).cos());
        let e = energy_form(&f, &f, &k, g.spacing(), 0.0).unwrap();
        let lf = spectral::frac_laplacian(&f, alpha).unwrap();
        let pairing = -lf.inner(&f) / spectral::frac_constant(1, alpha);
        assert!((e - pairing).abs() < 0.05 * pairing, "{e} vs {pairing}");
    }

    #[test]
    fn bound_violations_are_rejected() {
        let r = KernelSpec::new(1, 1.0, 1.0, 1.5, |_, y| 2.0 * y[0].abs().powf(-2.0));
        assert!(r.is_err());
        let r = KernelSpec::new(1, 1.0, 0.5, 2.0, |_, y| {
            (1.0 + 0.5 * y[0].signum()) * y[0].abs().powf(-2.0)
        });
        assert!(r.is_err());
    }
}

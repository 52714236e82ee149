//! Run configuration: a TOML document with nested tables, unknown keys rejected.

use std::f64::consts::PI;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{PeriodicGrid, ScalarField, VectorField};
use crate::particles::{GaussComponent, InitialLaw};
use crate::rng::{derive_seed, RngStream};
use crate::solver::{random_divfree_drift, Drift, Forcing, NoiseMode, NoiseSpec, Scheme, SolverConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    SolvePde,
    SolveSqg,
    SolveNs2d,
    RunParticles,
    SampleStable,
    VerifyMaxprinciple,
    VerifyHarnack,
    VerifyHolder,
    VerifyScaling,
    VerifyDegiorgi,
    VerifyKrylov,
    VerifyMartingale,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 12] = [
        ScenarioKind::SolvePde,
        ScenarioKind::SolveSqg,
        ScenarioKind::SolveNs2d,
        ScenarioKind::RunParticles,
        ScenarioKind::SampleStable,
        ScenarioKind::VerifyMaxprinciple,
        ScenarioKind::VerifyHarnack,
        ScenarioKind::VerifyHolder,
        ScenarioKind::VerifyScaling,
        ScenarioKind::VerifyDegiorgi,
        ScenarioKind::VerifyKrylov,
        ScenarioKind::VerifyMartingale,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::SolvePde => "solve-pde",
            ScenarioKind::SolveSqg => "solve-sqg",
            ScenarioKind::SolveNs2d => "solve-ns2d",
            ScenarioKind::RunParticles => "run-particles",
            ScenarioKind::SampleStable => "sample-stable",
            ScenarioKind::VerifyMaxprinciple => "verify-maxprinciple",
            ScenarioKind::VerifyHarnack => "verify-harnack",
            ScenarioKind::VerifyHolder => "verify-holder",
            ScenarioKind::VerifyScaling => "verify-scaling",
            ScenarioKind::VerifyDegiorgi => "verify-degiorgi",
            ScenarioKind::VerifyKrylov => "verify-krylov",
            ScenarioKind::VerifyMartingale => "verify-martingale",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub dim: usize,
    pub n: usize,
    pub period: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            dim: 2,
            n: 64,
            period: 2.0 * PI,
        }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<PeriodicGrid> {
        PeriodicGrid::new(self.dim, self.n, self.period)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSpec {
    pub dt: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub output_stride: usize,
    pub scheme: Scheme,
    pub dealias: bool,
}

impl Default for TimeSpec {
    fn default() -> Self {
        Self {
            dt: 0.01,
            t_start: 0.0,
            t_end: 1.0,
            output_stride: 10,
            scheme: Scheme::EtdRk2,
            dealias: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeTerm {
    pub mode: [i64; 2],
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

fn mode_sum(grid: &PeriodicGrid, terms: &[ModeTerm], offset: f64) -> ScalarField {
    let w = 2.0 * PI / grid.period();
    ScalarField::from_fn(grid, |x| {
        offset
            + terms
                .iter()
                .map(|t| {
                    let ph = w * (t.mode[0] as f64 * x[0] + t.mode[1] as f64 * x[1]);
                    t.cos * ph.cos() + t.sin * ph.sin()
                })
                .sum::<f64>()
    })
}

/// Periodized isotropic Gaussian mixture, each component of unit mass times its weight.
pub fn gaussian_mixture(grid: &PeriodicGrid, comps: &[GaussComponent], offset: f64) -> ScalarField {
    let d = grid.dim() as i32;
    let l = grid.period();
    ScalarField::from_fn(grid, |x| {
        let mut s = offset;
        for c in comps {
            let norm = (2.0 * PI * c.sigma * c.sigma).powi(d).sqrt();
            let dx = grid.min_image(x[0] - c.center[0]);
            let dy = if d == 1 { 0.0 } else { grid.min_image(x[1] - c.center[1]) };
            let images = (6.0 * c.sigma / l).ceil() as i64;
            let second = if d == 1 { 0 } else { images };
            for a in -images..=images {
                for b in -second..=second {
                    let (u, v) = (dx + a as f64 * l, dy + b as f64 * l);
                    s += c.weight * (-(u * u + v * v) / (2.0 * c.sigma * c.sigma)).exp() / norm;
                }
            }
        }
        s
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialSpec {
    Zero,
    Constant {
        value: f64,
    },
    Gaussians {
        components: Vec<GaussComponent>,
        #[serde(default)]
        offset: f64,
    },
    Modes {
        terms: Vec<ModeTerm>,
        #[serde(default)]
        offset: f64,
    },
    /// `offset + Σ a_j exp(-|x - c_j|²/(2σ²))` with `a_j ∈ [amplitude/2, 3·amplitude/2]`
    /// and centres uniform in the ball of radius `radius`.
    RandomBumps {
        count: usize,
        amplitude: f64,
        sigma: f64,
        radius: f64,
        #[serde(default)]
        offset: f64,
    },
}

impl Default for InitialSpec {
    fn default() -> Self {
        InitialSpec::Gaussians {
            components: vec![GaussComponent {
                weight: 1.0,
                center: [0.0, 0.0],
                sigma: 0.5,
            }],
            offset: 0.0,
        }
    }
}

impl InitialSpec {
    pub fn build(&self, grid: &PeriodicGrid, seed: u64) -> Result<ScalarField> {
        Ok(match self {
            InitialSpec::Zero => ScalarField::zeros(grid),
            InitialSpec::Constant { value } => ScalarField::constant(grid, *value),
            InitialSpec::Gaussians { components, offset } => gaussian_mixture(grid, components, *offset),
            InitialSpec::Modes { terms, offset } => mode_sum(grid, terms, *offset),
            InitialSpec::RandomBumps {
                count,
                amplitude,
                sigma,
                radius,
                offset,
            } => {
                let mut rng = RngStream::new(derive_seed(seed, 0x1b0b), 0);
                let comps: Vec<GaussComponent> = (0..*count)
                    .map(|_| {
                        let r = radius * rng.random::<f64>().sqrt();
                        let th = 2.0 * PI * rng.random::<f64>();
                        let a = amplitude * (0.5 + rng.random::<f64>());
                        let center = if grid.dim() == 1 { [r * th.cos(), 0.0] } else { [r * th.cos(), r * th.sin()] };
                        let mass = (2.0 * PI * sigma * sigma).powi(grid.dim() as i32).sqrt();
                        GaussComponent {
                            weight: a * mass,
                            center,
                            sigma: *sigma,
                        }
                    })
                    .collect();
                gaussian_mixture(grid, &comps, *offset)
            }
        })
    }

    fn validate(&self, path: &str) -> Result<()> {
        match self {
            InitialSpec::Gaussians { components, .. } => check_components(components, &format!("{path}.components")),
            InitialSpec::RandomBumps { sigma, radius, .. } => {
                if !(*sigma > 0.0) {
                    return Err(Error::config(format!("{path}.sigma"), "must be positive"));
                }
                if !(*radius >= 0.0) {
                    return Err(Error::config(format!("{path}.radius"), "must be >= 0"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

fn check_components(c: &[GaussComponent], path: &str) -> Result<()> {
    if c.is_empty() {
        return Err(Error::config(path, "needs at least one component"));
    }
    for (i, g) in c.iter().enumerate() {
        if !(g.sigma > 0.0) {
            return Err(Error::config(format!("{path}[{i}].sigma"), "must be positive"));
        }
        if !(g.weight.is_finite()) {
            return Err(Error::config(format!("{path}[{i}].weight"), "must be finite"));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DriftSpec {
    Zero,
    Constant {
        value: [f64; 2],
    },
    /// `(A sin(m ω x₂), 0)`.
    Shear {
        amplitude: f64,
        mode: i64,
    },
    /// `∇^⊥(A sin(ωx₁) sin(ωx₂))`.
    Cellular {
        amplitude: f64,
    },
    RandomDivfree {
        kmax: i64,
        #[serde(default = "default_decay")]
        decay: f64,
        speed: f64,
    },
}

fn default_decay() -> f64 {
    1.5
}

impl Default for DriftSpec {
    fn default() -> Self {
        DriftSpec::Zero
    }
}

impl DriftSpec {
    /// Steady drift; random drifts use stream `stream` of the run seed.
    pub fn build(&self, grid: &PeriodicGrid, seed: u64, stream: u64) -> Result<Drift> {
        let w = 2.0 * PI / grid.period();
        Ok(match self {
            DriftSpec::Zero => Drift::Zero,
            DriftSpec::Constant { value } => {
                let v = if grid.dim() == 1 { [value[0], 0.0] } else { *value };
                Drift::Steady(VectorField::constant(grid, v))
            }
            DriftSpec::Shear { amplitude, mode } => {
                if grid.dim() != 2 {
                    return Err(Error::config("drift.kind", "shear drift needs d = 2"));
                }
                let k = *mode as f64 * w;
                Drift::Steady(VectorField::new(vec![
                    ScalarField::from_fn(grid, |x| amplitude * (k * x[1]).sin()),
                    ScalarField::zeros(grid),
                ])?)
            }
            DriftSpec::Cellular { amplitude } => {
                if grid.dim() != 2 {
                    return Err(Error::config("drift.kind", "cellular drift needs d = 2"));
                }
                Drift::Steady(VectorField::new(vec![
                    ScalarField::from_fn(grid, |x| amplitude * w * (w * x[0]).sin() * (w * x[1]).cos()),
                    ScalarField::from_fn(grid, |x| -amplitude * w * (w * x[0]).cos() * (w * x[1]).sin()),
                ])?)
            }
            DriftSpec::RandomDivfree { kmax, decay, speed } => {
                let mut rng = RngStream::new(derive_seed(seed, 0xd71f), stream);
                Drift::Steady(random_divfree_drift(grid, *kmax, *decay, *speed, &mut rng)?)
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ForcingSpec {
    Zero,
    Modes {
        terms: Vec<ModeTerm>,
        #[serde(default)]
        offset: f64,
    },
    Gaussians {
        components: Vec<GaussComponent>,
        #[serde(default)]
        offset: f64,
    },
}

impl Default for ForcingSpec {
    fn default() -> Self {
        ForcingSpec::Zero
    }
}

impl ForcingSpec {
    pub fn field(&self, grid: &PeriodicGrid) -> Option<ScalarField> {
        match self {
            ForcingSpec::Zero => None,
            ForcingSpec::Modes { terms, offset } => Some(mode_sum(grid, terms, *offset)),
            ForcingSpec::Gaussians { components, offset } => Some(gaussian_mixture(grid, components, *offset)),
        }
    }

    pub fn build(&self, grid: &PeriodicGrid) -> Forcing {
        match self.field(grid) {
            None => Forcing::Zero,
            Some(f) => Forcing::Steady(f),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub modes: Vec<NoiseMode>,
}

impl NoiseConfig {
    pub fn build(&self, seed: u64) -> NoiseSpec {
        NoiseSpec {
            modes: self.modes.clone(),
            seed: derive_seed(seed, 0x0e15e),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParticleKernel {
    Zero,
    BiotSavart,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParticleSpec {
    pub n: usize,
    pub level: f64,
    pub bandwidth: Option<f64>,
    pub kernel: ParticleKernel,
    pub law: Vec<GaussComponent>,
    pub table_n: usize,
    pub snapshot_stride: usize,
    /// Gaussian width applied to both densities before the particle–PDE comparison.
    pub smoothing: f64,
    /// Bootstrap resamples for the standard error of the comparison; 0 skips it.
    pub bootstrap: usize,
    /// Compare the particle density with the vorticity PDE.
    pub compare_pde: bool,
}

impl Default for ParticleSpec {
    fn default() -> Self {
        Self {
            n: 1000,
            level: 16.0,
            bandwidth: None,
            kernel: ParticleKernel::BiotSavart,
            law: vec![
                GaussComponent {
                    weight: 0.6,
                    center: [-0.5, 0.2],
                    sigma: 0.5,
                },
                GaussComponent {
                    weight: 0.4,
                    center: [0.7, -0.3],
                    sigma: 0.4,
                },
            ],
            table_n: 512,
            snapshot_stride: 10,
            smoothing: 0.3,
            bootstrap: 0,
            compare_pde: true,
        }
    }
}

impl ParticleSpec {
    pub fn law(&self) -> InitialLaw {
        InitialLaw::Gaussians(self.law.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySpec {
    /// Time exponent of the forcing norms.
    pub q: f64,
    /// Space exponents of the forcing norms.
    pub p: Vec<f64>,
    pub beta: f64,
    pub p_weak: f64,
    pub t0: f64,
    pub x0: [f64; 2],
    pub cases: usize,
    pub radii: Vec<f64>,
    pub probes: Vec<[f64; 2]>,
    pub kappas: Vec<f64>,
    pub taus: Vec<f64>,
    pub base_radius: f64,
    pub lambda: f64,
    pub samples: usize,
    pub loc_radius: f64,
    pub loc_stride: usize,
    /// Amplitude of the perturbation used by the martingale negative control.
    pub perturbation: f64,
    pub alphas: Vec<f64>,
    pub tail_samples: usize,
    pub cf_radius: f64,
    pub cf_steps: usize,
}

impl Default for VerifySpec {
    fn default() -> Self {
        Self {
            q: 4.0,
            p: vec![4.0, 4.0],
            beta: 0.0,
            p_weak: 0.5,
            t0: 0.0,
            x0: [0.0, 0.0],
            cases: 20,
            radii: (0..6).map(|j| 2f64.powi(-j)).collect(),
            probes: vec![[0.0, 0.0]],
            kappas: vec![0.0, 0.25, 0.5, 0.75],
            taus: vec![1.0, 1.25, 1.5, 1.75, 2.0],
            base_radius: 1.0,
            lambda: 0.5,
            samples: 100_000,
            loc_radius: 1.0,
            loc_stride: 16,
            perturbation: 0.5,
            alphas: vec![0.8, 1.0, 1.5, 2.0],
            tail_samples: 1_000_000,
            cf_radius: 3.0,
            cf_steps: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Optional; must agree with the subcommand when present.
    #[serde(default)]
    pub scenario: Option<ScenarioKind>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub time: TimeSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub drift: DriftSpec,
    #[serde(default)]
    pub forcing: ForcingSpec,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub particles: ParticleSpec,
    #[serde(default)]
    pub verify: VerifySpec,
}

fn default_alpha() -> f64 {
    1.0
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: None,
            seed: 0,
            grid: GridSpec::default(),
            alpha: default_alpha(),
            time: TimeSpec::default(),
            initial: InitialSpec::default(),
            drift: DriftSpec::default(),
            forcing: ForcingSpec::default(),
            noise: NoiseConfig::default(),
            particles: ParticleSpec::default(),
            verify: VerifySpec::default(),
        }
    }
}

impl RunConfig {
    pub fn grid(&self) -> Result<PeriodicGrid> {
        self.grid.build()
    }

    pub fn solver(&self) -> SolverConfig {
        let mut c = SolverConfig::new(self.alpha, self.time.dt, self.time.t_end)
            .with_scheme(self.time.scheme)
            .with_stride(self.time.output_stride)
            .with_dealias(self.time.dealias);
        c.t_start = self.time.t_start;
        c
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    /// Domain checks with the offending field path.
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if g.dim != 1 && g.dim != 2 {
            return Err(Error::config("grid.dim", format!("must be 1 or 2, got {}", g.dim)));
        }
        if g.n < 4 || g.n % 2 != 0 {
            return Err(Error::config("grid.n", format!("must be even and >= 4, got {}", g.n)));
        }
        if !(g.period > 0.0 && g.period.is_finite()) {
            return Err(Error::config("grid.period", format!("must be positive, got {}", g.period)));
        }
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(Error::config("alpha", format!("must lie in (0, 2], got {}", self.alpha)));
        }
        let t = &self.time;
        if !(t.dt > 0.0 && t.dt.is_finite()) {
            return Err(Error::config("time.dt", format!("must be positive, got {}", t.dt)));
        }
        if !(t.t_end > t.t_start) {
            return Err(Error::config("time.t_end", "must exceed time.t_start"));
        }
        if t.output_stride == 0 {
            return Err(Error::config("time.output_stride", "must be positive"));
        }
        self.solver()
            .validate()
            .map_err(|e| Error::config("time", e.to_string()))?;
        self.initial.validate("initial")?;
        if let ForcingSpec::Gaussians { components, .. } = &self.forcing {
            check_components(components, "forcing.components")?;
        }
        if let DriftSpec::RandomDivfree { kmax, speed, .. } = &self.drift {
            if *kmax < 1 || 2 * kmax >= g.n as i64 {
                return Err(Error::config("drift.kmax", format!("must lie in [1, n/2), got {kmax}")));
            }
            if !(*speed >= 0.0) {
                return Err(Error::config("drift.speed", "must be >= 0"));
            }
        }
        let p = &self.particles;
        if p.n < 2 {
            return Err(Error::config("particles.n", "need at least two particles"));
        }
        if !(p.level > 0.0) {
            return Err(Error::config("particles.level", "must be positive"));
        }
        if let Some(b) = p.bandwidth {
            if !(b > 0.0) {
                return Err(Error::config("particles.bandwidth", "must be positive"));
            }
        }
        if p.snapshot_stride == 0 {
            return Err(Error::config("particles.snapshot_stride", "must be positive"));
        }
        check_components(&p.law, "particles.law")?;
        if !(p.smoothing > 0.0) {
            return Err(Error::config("particles.smoothing", "must be positive"));
        }
        let v = &self.verify;
        if !(v.q > 0.0) {
            return Err(Error::config("verify.q", "must be positive"));
        }
        if v.p.len() != g.dim || v.p.iter().any(|&x| !(x >= 1.0)) {
            return Err(Error::config("verify.p", format!("needs {} exponents >= 1", g.dim)));
        }
        if !(v.beta >= 0.0) {
            return Err(Error::config("verify.beta", "must be >= 0"));
        }
        if !(v.p_weak > 0.0) {
            return Err(Error::config("verify.p_weak", "must be positive"));
        }
        if v.cases == 0 {
            return Err(Error::config("verify.cases", "must be positive"));
        }
        if !(v.lambda > 0.0) {
            return Err(Error::config("verify.lambda", "must be positive"));
        }
        if v.radii.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::config("verify.radii", "radii must be positive"));
        }
        if v.taus.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::config("verify.taus", "radii must be positive"));
        }
        if v.alphas.iter().any(|&a| !(a > 0.0 && a <= 2.0)) {
            return Err(Error::config("verify.alphas", "each alpha must lie in (0, 2]"));
        }
        if v.samples < 10 || v.tail_samples < 100 {
            return Err(Error::config("verify.samples", "sample counts are too small"));
        }
        if !(v.cf_radius > 0.0) || v.cf_steps == 0 {
            return Err(Error::config("verify.cf_radius", "needs a positive radius and step count"));
        }
        if v.loc_stride == 0 {
            return Err(Error::config("verify.loc_stride", "must be positive"));
        }
        Ok(())
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = toml::Deserializer::new(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let msg = inner.message().to_string();
        Error::config(if path == "." { String::from("<root>") } else { path }, msg)
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config("<file>", format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn out_of_range_alpha_names_the_field() {
        let e = parse_config("alpha = 2.5").unwrap_err();
        assert_eq!(e.exit_code(), 2);
        match e {
            Error::Config { path, .. } => assert_eq!(path, "alpha"),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected_with_their_table() {
        let e = parse_config("[grid]\nn = 32\nwidth = 3\n").unwrap_err();
        let s = e.to_string();
        assert!(s.contains("grid") && s.contains("width"), "{s}");
        let e = parse_config("[drift]\nkind = \"shear\"\namplitude = 1.0\nmode = 1\nphase = 2\n").unwrap_err();
        assert!(e.to_string().contains("phase"), "{e}");
    }

    #[test]
    fn type_errors_carry_the_path() {
        let e = parse_config("[time]\ndt = \"fast\"\n").unwrap_err();
        match e {
            Error::Config { path, .. } => assert_eq!(path, "time.dt"),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn round_trips_through_toml() {
        let mut c = RunConfig::default();
        c.drift = DriftSpec::RandomDivfree {
            kmax: 3,
            decay: 1.5,
            speed: 0.5,
        };
        c.forcing = ForcingSpec::Modes {
            terms: vec![ModeTerm {
                mode: [1, 0],
                cos: 1.0,
                sin: 0.0,
            }],
            offset: 0.0,
        };
        c.scenario = Some(ScenarioKind::VerifyHarnack);
        let text = c.to_toml().unwrap();
        assert_eq!(parse_config(&text).unwrap(), c);
    }

    #[test]
    fn gaussian_mixture_has_unit_mass() {
        let g = PeriodicGrid::standard(2, 64).unwrap();
        let f = gaussian_mixture(
            &g,
            &[GaussComponent {
                weight: 1.0,
                center: [3.0, 0.0],
                sigma: 0.4,
            }],
            0.0,
        );
        assert!((f.integral() - 1.0).abs() < 1e-10);
    }
}

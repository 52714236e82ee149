//! Acceptance harness: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::path::PathBuf;
use std::time::Instant;

use fracflow::field::{PeriodicGrid, ScalarField};
use fracflow::io::{load_config, run_scenario, RunConfig, ScenarioKind};
use fracflow::norms::{mixed_norm, periodic_convolution, MultiIndex};
use fracflow::regularity::{moser_iteration_constant, moser_partial_product, MoserParams};
use fracflow::spectral::{frac_laplacian, from_modes, semigroup_apply, to_modes};
use fracflow::verify::{execute, ScenarioOutput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PLANE_WAVE_TOL: f64 = 1e-12;
const SEMIGROUP_TOL: f64 = 1e-13;
const ROUND_TRIP_TOL: f64 = 1e-12;
const MAX_PRINCIPLE_TOL: f64 = 1e-6;
const MASS_TOL: f64 = 1e-10;
const DIV_TOL: f64 = 1e-10;
const CF_TOL: f64 = 0.02;
const TAIL_TOL: f64 = 0.15;
const SCALING_TOL: f64 = 1e-3;
const PARTICLE_TOL: f64 = 0.1;
const OSC_SHARE: f64 = 0.9;
const HOLDER_R2: f64 = 0.9;
const HOLDER_CONTROL_TOL: f64 = 0.05;
const LINFTY_SPREAD: f64 = 0.5;
const HOMOGENEITY_TOL: f64 = 1e-9;
const MOSER_TOL: f64 = 1e-10;
const INEQUALITY_SLACK: f64 = 1e-12;
const INEQUALITY_TRIALS: usize = 1000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn config(name: &str) -> RunConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    load_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn run(kind: ScenarioKind, cfg: &RunConfig) -> ScenarioOutput {
    execute(kind, cfg).unwrap_or_else(|e| panic!("{}: {e}", kind.name()))
}

fn value(out: &ScenarioOutput, check: &str) -> f64 {
    out.verdict(check).unwrap_or_else(|| panic!("no verdict {check}")).value
}

fn max_over(out: &ScenarioOutput, prefix: &str) -> f64 {
    out.verdicts
        .iter()
        .filter(|v| v.check.starts_with(prefix))
        .map(|v| v.value)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn spectral_exactness() -> Outcome {
    let grid = PeriodicGrid::standard(2, 64).unwrap();
    let mut wave = 0.0f64;
    for &alpha in &[0.5, 1.0, 1.5, 2.0] {
        for &(k1, k2) in &[(1i32, 0i32), (3, -2), (7, 5), (0, 12)] {
            let f = ScalarField::from_fn(&grid, |x| (k1 as f64 * x[0] + k2 as f64 * x[1]).cos());
            let lam = ((k1 * k1 + k2 * k2) as f64).sqrt().powf(alpha);
            let got = frac_laplacian(&f, alpha).unwrap();
            wave = wave.max(got.max_abs_diff(&f.scaled(-lam)) / lam.max(1.0));
        }
    }
    let f = ScalarField::from_fn(&grid, |x| (x[0].sin() + 0.5 * (2.0 * x[1]).cos()).exp());
    let two = semigroup_apply(&semigroup_apply(&f, 0.3, 1.5).unwrap(), 0.2, 1.5).unwrap();
    let one = semigroup_apply(&f, 0.5, 1.5).unwrap();
    let comp = two.max_abs_diff(&one);
    let trip = from_modes(&to_modes(&f)).max_abs_diff(&f);
    outcome(
        wave <= PLANE_WAVE_TOL && comp <= SEMIGROUP_TOL && trip <= ROUND_TRIP_TOL,
        format!("plane_wave={wave:.2e} semigroup={comp:.2e} round_trip={trip:.2e}"),
    )
}

fn maximum_principle(mp: &ScenarioOutput) -> Outcome {
    let growth = value(mp, "max-principle");
    outcome(growth <= MAX_PRINCIPLE_TOL, format!("growth={growth:.2e} tol={MAX_PRINCIPLE_TOL:e}"))
}

fn mass_conservation(ns: &ScenarioOutput) -> Outcome {
    let drift = value(ns, "mass-conservation");
    outcome(drift <= MASS_TOL, format!("max_mass_error={drift:.2e} tol={MASS_TOL:e}"))
}

fn divergence_free(mp: &ScenarioOutput, ns: &ScenarioOutput) -> Outcome {
    let a = value(mp, "velocity-divergence");
    let b = value(ns, "velocity-divergence");
    outcome(
        a <= DIV_TOL && b <= DIV_TOL,
        format!("riesz={a:.2e} biot_savart={b:.2e} tol={DIV_TOL:e}"),
    )
}

fn stable_law() -> Outcome {
    let out = run(ScenarioKind::SampleStable, &config("stable.toml"));
    let cf = max_over(&out, "cf-");
    let tail = max_over(&out, "tail-");
    let n_tail = out.verdicts.iter().filter(|v| v.check.starts_with("tail-")).count();
    outcome(
        out.all_pass() && cf <= CF_TOL && tail <= TAIL_TOL,
        format!("max_cf_error={cf:.4} max_tail_gap={tail:.4} tail_fits={n_tail} (alpha=2 has no power tail)"),
    )
}

fn scaling() -> Outcome {
    let out = run(ScenarioKind::VerifyScaling, &config("scaling.toml"));
    let lin = value(&out, "scaling-linear");
    let sqg = value(&out, "scaling-sqg");
    outcome(
        lin <= SCALING_TOL && sqg <= SCALING_TOL,
        format!("linear={lin:.2e} sqg={sqg:.2e} tol={SCALING_TOL:e}"),
    )
}

fn particle_gap(cfg: &RunConfig, n: usize) -> (f64, f64) {
    let mut c = cfg.clone();
    c.particles.n = n;
    let out = run(ScenarioKind::RunParticles, &c);
    let d = out.report["l1_distance"].as_f64().expect("l1 distance");
    let se = out.report["l1_se"].as_f64().expect("l1 se");
    (d, se)
}

fn particle_pde() -> Outcome {
    let cfg = config("particles.toml");
    let (d5, se5) = particle_gap(&cfg, 5000);
    let ladder: Vec<(f64, f64)> = [1000, 4000, 16000].iter().map(|&n| particle_gap(&cfg, n)).collect();
    let monotone = ladder.windows(2).all(|w| w[1].0 <= w[0].0 + w[0].1.max(w[1].1));
    let steps: Vec<String> = ladder.iter().map(|(d, se)| format!("{d:.4}±{se:.4}")).collect();
    outcome(
        d5 <= PARTICLE_TOL && monotone,
        format!("l1(N=5000)={d5:.4}±{se5:.4} ladder(1000,4000,16000)=[{}]", steps.join(", ")),
    )
}

fn harnack() -> Outcome {
    let out = run(ScenarioKind::VerifyHarnack, &config("harnack.toml"));
    let finite = value(&out, "harnack-finite");
    let share = value(&out, "osc-decay-share");
    outcome(
        finite >= 1.0 && share >= OSC_SHARE,
        format!("finite_share={finite:.2} osc_decay_share={share:.2} required={OSC_SHARE}"),
    )
}

fn holder() -> Outcome {
    let out = run(ScenarioKind::VerifyHolder, &config("holder.toml"));
    let r2 = out
        .verdicts
        .iter()
        .filter(|v| v.check.starts_with("holder-r2-"))
        .map(|v| v.value)
        .fold(f64::INFINITY, f64::min);
    let gamma = out.table.column("gamma").unwrap().into_iter().fold(f64::INFINITY, f64::min);
    let probes = out.verdicts.iter().filter(|v| v.check.starts_with("holder-r2-")).count();
    let control = value(&out, "holder-control");
    outcome(
        probes == 5 && r2 >= HOLDER_R2 && gamma > 0.0 && control <= HOLDER_CONTROL_TOL,
        format!("probes={probes} min_gamma={gamma:.3} min_r2={r2:.4} control_gap={control:.2e}"),
    )
}

fn linfty() -> Outcome {
    let out = run(ScenarioKind::VerifyDegiorgi, &config("degiorgi.toml"));
    let spread = value(&out, "linfty-spread");
    let homog = value(&out, "linfty-homogeneity");
    let cases = out.table.rows.len();
    outcome(
        cases == 10 && spread <= LINFTY_SPREAD && homog <= HOMOGENEITY_TOL,
        format!("cases={cases} spread={spread:.3} homogeneity={homog:.2e}"),
    )
}

fn martingale() -> Outcome {
    let out = run(ScenarioKind::VerifyMartingale, &config("martingale.toml"));
    let c = out.verdict("martingale-control").expect("control");
    let n = out.verdict("martingale-negative-control").expect("negative control");
    outcome(
        c.pass && n.pass,
        format!(
            "control={:.2e}<={:.2e} perturbed={:.2e}>={:.2e}",
            c.value, c.threshold, n.value, n.threshold
        ),
    )
}

fn moser_constants() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..100 {
        let theta = 1.2 + 1.8 * i as f64 / 99.0;
        let p = MoserParams {
            theta,
            gamma: 1.0 + 0.01 * i as f64,
            beta: 0.5,
            m: 2.0,
            c0: 1.5,
            q: 0.5,
            gap: 0.25 + 0.005 * i as f64,
        };
        let closed = moser_iteration_constant(&p).unwrap();
        let partial = moser_partial_product(&p, 200).unwrap();
        worst = worst.max((partial / closed - 1.0).abs());
    }
    outcome(worst <= MOSER_TOL, format!("max_rel_gap={worst:.2e} over 100 points"))
}

fn random_inverse(rng: &mut ChaCha8Rng) -> f64 {
    if rng.random_bool(0.1) {
        0.0
    } else {
        rng.random_range(0.02..=1.0)
    }
}

fn exponent(inv: f64) -> f64 {
    if inv == 0.0 {
        f64::INFINITY
    } else {
        1.0 / inv
    }
}

fn random_field(grid: &PeriodicGrid, rng: &mut ChaCha8Rng) -> ScalarField {
    ScalarField::new(grid.clone(), (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

fn norm_inequalities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut holder = 0;
    let grid = PeriodicGrid::new(2, 16, 2.0).unwrap();
    for _ in 0..INEQUALITY_TRIALS {
        let (f, g) = (random_field(&grid, &mut rng), random_field(&grid, &mut rng));
        let a = [random_inverse(&mut rng), random_inverse(&mut rng)];
        let b = [random_inverse(&mut rng), random_inverse(&mut rng)];
        let idx = |v: [f64; 2]| MultiIndex::new(vec![exponent(v[0]), exponent(v[1])]).unwrap();
        let lhs = mixed_norm(&f.zip_map(&g, |x, y| x * y), &idx([a[0] + b[0], a[1] + b[1]])).unwrap();
        let rhs = mixed_norm(&f, &idx(a)).unwrap() * mixed_norm(&g, &idx(b)).unwrap();
        if lhs > rhs + INEQUALITY_SLACK {
            holder += 1;
        }
    }
    let mut young = 0;
    let grid = PeriodicGrid::new(2, 8, 3.0).unwrap();
    for _ in 0..INEQUALITY_TRIALS {
        let (f, g) = (random_field(&grid, &mut rng), random_field(&grid, &mut rng));
        let c = [random_inverse(&mut rng), random_inverse(&mut rng)];
        let s: [f64; 2] = [rng.random(), rng.random()];
        let a = [c[0] + s[0] * (1.0 - c[0]), c[1] + s[1] * (1.0 - c[1])];
        let b = [1.0 + c[0] - a[0], 1.0 + c[1] - a[1]];
        let idx = |v: [f64; 2]| MultiIndex::new(vec![exponent(v[0]), exponent(v[1])]).unwrap();
        let lhs = mixed_norm(&periodic_convolution(&f, &g).unwrap(), &idx(c)).unwrap();
        let rhs = mixed_norm(&f, &idx(a)).unwrap() * mixed_norm(&g, &idx(b)).unwrap();
        if lhs > rhs + INEQUALITY_SLACK {
            young += 1;
        }
    }
    outcome(
        holder == 0 && young == 0,
        format!("holder_violations={holder}/{INEQUALITY_TRIALS} young_violations={young}/{INEQUALITY_TRIALS}"),
    )
}

/// Reduced copy of each example config so every scenario runs in seconds.
fn small_config(kind: ScenarioKind) -> RunConfig {
    let file = match kind {
        ScenarioKind::SolvePde => "pde.toml",
        ScenarioKind::SolveSqg => "sqg.toml",
        ScenarioKind::SolveNs2d => "ns2d.toml",
        ScenarioKind::RunParticles => "particles.toml",
        ScenarioKind::SampleStable => "stable.toml",
        ScenarioKind::VerifyMaxprinciple => "maxprinciple.toml",
        ScenarioKind::VerifyHarnack => "harnack.toml",
        ScenarioKind::VerifyHolder => "holder.toml",
        ScenarioKind::VerifyScaling => "scaling.toml",
        ScenarioKind::VerifyDegiorgi => "degiorgi.toml",
        ScenarioKind::VerifyKrylov => "krylov.toml",
        ScenarioKind::VerifyMartingale => "martingale.toml",
    };
    let mut c = config(file);
    match kind {
        ScenarioKind::SolvePde | ScenarioKind::VerifyScaling => c.grid.n = 32,
        ScenarioKind::SolveSqg | ScenarioKind::SolveNs2d | ScenarioKind::VerifyMaxprinciple => {
            c.grid.n = 32;
            c.time.t_end = 0.2;
        }
        ScenarioKind::RunParticles => {
            c.grid.n = 32;
            c.particles.n = 400;
            c.particles.bootstrap = 2;
        }
        ScenarioKind::SampleStable => {
            c.verify.samples = 2000;
            c.verify.tail_samples = 20000;
        }
        ScenarioKind::VerifyHarnack | ScenarioKind::VerifyDegiorgi => c.verify.cases = 2,
        ScenarioKind::VerifyHolder => {
            c.grid.n = 128;
            c.verify.radii = vec![1.0, 0.5, 0.25];
        }
        ScenarioKind::VerifyKrylov | ScenarioKind::VerifyMartingale => {
            c.grid.n = 32;
            c.particles.n = 1000;
        }
    }
    c
}

fn determinism() -> Outcome {
    let mut mismatched = Vec::new();
    for &kind in ScenarioKind::ALL.iter() {
        let cfg = small_config(kind);
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let ra = run_scenario(&cfg, kind, a.path()).unwrap_or_else(|e| panic!("{}: {e}", kind.name()));
        let rb = run_scenario(&cfg, kind, b.path()).unwrap_or_else(|e| panic!("{}: {e}", kind.name()));
        if ra.checksums != rb.checksums {
            mismatched.push(kind.name());
        }
    }
    outcome(
        mismatched.is_empty(),
        format!("scenarios={} mismatched={mismatched:?}", ScenarioKind::ALL.len()),
    )
}

fn main() {
    let mut failed = 0;
    let mut report = |id: usize, name: &str, budget_s: Option<f64>, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        let secs = t.elapsed().as_secs_f64();
        let in_time = budget_s.is_none_or(|b| secs < b);
        let pass = o.pass && in_time;
        if !pass {
            failed += 1;
        }
        let budget = budget_s.map(|b| format!(" budget={b}s")).unwrap_or_default();
        println!(
            "{} criterion {id:>2} {name}: {} runtime={secs:.1}s{budget}",
            if pass { "PASS" } else { "FAIL" },
            o.detail
        );
    };

    report(1, "spectral exactness", Some(5.0), &mut spectral_exactness);
    let mut mp = None;
    report(2, "maximum principle", Some(60.0), &mut || {
        let out = run(ScenarioKind::VerifyMaxprinciple, &config("maxprinciple.toml"));
        let o = maximum_principle(&out);
        mp = Some(out);
        o
    });
    let mut ns = None;
    report(3, "mass conservation", Some(60.0), &mut || {
        let out = run(ScenarioKind::SolveNs2d, &config("ns2d.toml"));
        let o = mass_conservation(&out);
        ns = Some(out);
        o
    });
    let (mp, ns) = (mp.expect("criterion 2 ran"), ns.expect("criterion 3 ran"));
    report(4, "divergence-free drifts", None, &mut || divergence_free(&mp, &ns));
    report(5, "stable sampler law", Some(120.0), &mut stable_law);
    report(6, "scaling covariance", Some(120.0), &mut scaling);
    report(7, "particle-PDE cross-validation", Some(600.0), &mut particle_pde);
    report(8, "Harnack diagnostics", Some(900.0), &mut harnack);
    report(9, "Holder regularity", Some(300.0), &mut holder);
    report(10, "L-infinity bound", Some(600.0), &mut linfty);
    report(11, "martingale residual", Some(300.0), &mut martingale);
    report(12, "iteration constants", Some(1.0), &mut moser_constants);
    report(13, "norm inequalities", None, &mut norm_inequalities);
    report(14, "determinism", None, &mut determinism);

    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

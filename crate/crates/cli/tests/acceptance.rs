//! Acceptance suite. Each criterion prints one `criterion NN [...]: PASS|FAIL`
//! line to stderr (bypassing the test harness capture) and then asserts.
//! Criteria run one at a time so that their wall-clock budgets are measured
//! without contention.

use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use lfot::curvature::tau_coefficient;
use lfot::distance::{lorentzianity_defect, random_future_timelike};
use lfot::finsler::{g_pair, metric_tensor};
use lfot::geometry::{curvature_endomorphism, ricci};
use lfot::measure::DiscreteMeasure;
use lfot::montecarlo::Verdict;
use lfot::potential::Potential;
use lfot::region::Region;
use lfot::{
    build_model, model_ground_truth, FinslerStructure, Model, ModelName, ModelSpec, Point, Vector,
};
use lfot_cli::checks::{algebra, comparison, flow, instance_rng, pairs, sample_point, transport};
use lfot_cli::Outcome;
use rand::Rng;

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn record(id: u32, name: &str, pass: bool, detail: &str) {
    let word = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(
        std::io::stderr(),
        "criterion {id:>2} [{name}]: {word} ({detail})"
    );
}

fn finish(id: u32, name: &str, start: Instant, budget: Duration, failures: Vec<String>) {
    let elapsed = start.elapsed();
    let mut failures = failures;
    if elapsed > budget {
        failures.push(format!("runtime {elapsed:?} exceeds {budget:?}"));
    }
    let detail = if failures.is_empty() {
        format!("{:.2}s", elapsed.as_secs_f64())
    } else {
        failures.join("; ")
    };
    record(id, name, failures.is_empty(), &detail);
    assert!(failures.is_empty(), "criterion {id} [{name}]: {detail}");
}

fn spec(name: ModelName, dim: usize) -> ModelSpec {
    ModelSpec::new(name, dim)
}

fn builtins() -> Vec<(ModelSpec, Model)> {
    [
        spec(ModelName::Minkowski, 3),
        spec(ModelName::WeightedMinkowski, 3).with("epsilon", 0.5),
        spec(ModelName::Bogoslovsky, 3).with("b", 0.1),
        spec(ModelName::DeSitter2d, 2),
    ]
    .into_iter()
    .map(|s| {
        let m = build_model(&s).unwrap();
        (s, m)
    })
    .collect()
}

fn flat_builtins() -> Vec<(ModelSpec, Model)> {
    builtins().into_iter().filter(|(_, m)| m.is_flat()).collect()
}

fn passed(o: &Outcome) -> bool {
    o.verdict == Verdict::Pass
}

fn detail_f64(o: &Outcome, key: &str) -> f64 {
    o.details[key].as_f64().unwrap_or(f64::NAN)
}

#[test]
fn criterion_01_algebraic_core() {
    let _g = serial();
    let start = Instant::now();
    let mut failures = Vec::new();
    for (spec, s) in builtins() {
        let r = algebra::invariant_residuals(&s, 1000, 1).unwrap();
        let checks = [
            ("euler", r.euler, algebra::EULER_TOL),
            ("homogeneity", r.homogeneity, algebra::HOMOGENEITY_TOL),
            ("signature failures", r.signature_failures as f64, 0.0),
            ("legendre vector", r.legendre_vector, algebra::LEGENDRE_TOL),
            ("legendre covector", r.legendre_covector, algebra::LEGENDRE_TOL),
            ("reverse Cauchy-Schwarz", r.cauchy_schwarz, algebra::CAUCHY_SCHWARZ_TOL),
        ];
        for (what, err, tol) in checks {
            if !(err <= tol) {
                failures.push(format!("{}: {what} {err:e} > {tol:e}", spec.name));
            }
        }
    }
    finish(1, "algebraic core", start, Duration::from_secs(10), failures);
}

#[test]
fn criterion_02_autodiff_vs_finite_differences() {
    let _g = serial();
    let start = Instant::now();
    let mut failures = Vec::new();
    for (spec, s) in builtins() {
        let r = algebra::invariant_residuals(&s, 100, 2).unwrap();
        for (what, err) in [("g", r.metric_fd), ("N", r.connection_fd)] {
            if !(err < algebra::FINITE_DIFFERENCE_TOL) {
                failures.push(format!("{}: {what} relative error {err:e}", spec.name));
            }
        }
    }
    finish(2, "autodiff vs finite differences", start, Duration::from_secs(10), failures);
}

#[test]
fn criterion_03_geodesics() {
    let _g = serial();
    let start = Instant::now();
    let mut failures = Vec::new();
    for (spec, s) in builtins() {
        let o = flow::geodesic(&s, 20, 1000, 3).unwrap();
        if s.is_flat() {
            let dev = detail_f64(&o, "straight_line_deviation");
            if !(dev < flow::STRAIGHT_TOL) {
                failures.push(format!("{}: straight-line deviation {dev:e}", spec.name));
            }
        } else {
            let drift = detail_f64(&o, "speed_drift");
            if !(drift < flow::SPEED_DRIFT_TOL) {
                failures.push(format!("{}: speed drift {drift:e}", spec.name));
            }
            let order = detail_f64(&o, "min_observed_order");
            if !(order >= flow::ORDER_MIN) {
                failures.push(format!("{}: observed order {order}", spec.name));
            }
        }
        if !passed(&o) {
            failures.push(format!("{}: verdict {:?}", spec.name, o.verdict));
        }
    }
    finish(3, "geodesics", start, Duration::from_secs(30), failures);
}

const CURVATURE_SAMPLES: usize = 200;

fn random_vectors(s: &Model, count: usize, seed: u64) -> Vec<Vector> {
    let mut rng = instance_rng(seed);
    (0..count)
        .map(|_| {
            let x = sample_point(s.dim(), 0.5, &mut rng);
            let v = random_future_timelike(s, &x, &mut rng);
            Vector::new(x, v)
        })
        .collect()
}

#[test]
fn criterion_04_curvature() {
    let _g = serial();
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut rng = instance_rng(44);
    for (spec, s) in builtins() {
        let n = s.dim();
        let (mut flat_ric, mut rvv, mut asym): (f64, f64, f64) = (0.0, 0.0, 0.0);
        for v in random_vectors(&s, CURVATURE_SAMPLES, 4) {
            if s.is_flat() {
                flat_ric = flat_ric.max(ricci(&s, &v).unwrap().abs());
            }
            let r = curvature_endomorphism(&s, &v, &v.comps).unwrap();
            rvv = rvv.max(r.comps.iter().fold(0.0, |m, c| m.max(c.abs())));
            let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let g = metric_tensor(&s, &v).unwrap();
            let ra = curvature_endomorphism(&s, &v, &a).unwrap().comps;
            let rb = curvature_endomorphism(&s, &v, &b).unwrap().comps;
            asym = asym.max((g_pair(&g, &ra, &b) - g_pair(&g, &a, &rb)).abs());
        }
        if !(flat_ric < 1e-8) {
            failures.push(format!("{}: |Ric| = {flat_ric:e}", spec.name));
        }
        if !(rvv < 1e-7) {
            failures.push(format!("{}: |R_v(v)| = {rvv:e}", spec.name));
        }
        if !(asym < 1e-7) {
            failures.push(format!("{}: g_v-asymmetry {asym:e}", spec.name));
        }
    }
    finish(4, "curvature", start, Duration::from_secs(30), failures);
}

/// The de Sitter sub-check of criterion 4, stated as `Ric(v) = F(v)²`.
#[test]
fn criterion_04_de_sitter_ricci_equals_f_squared() {
    let _g = serial();
    let start = Instant::now();
    let s = build_model(&spec(ModelName::DeSitter2d, 2)).unwrap();
    let mut worst: f64 = 0.0;
    let mut observed = 0.0;
    for v in random_vectors(&s, CURVATURE_SAMPLES, 5) {
        let f2 = -2.0 * s.lagrangian(v.x(), &v.comps);
        let ric = ricci(&s, &v).unwrap();
        if (ric - f2).abs() > worst {
            worst = (ric - f2).abs();
            observed = ric / f2;
        }
    }
    let failures = if worst < 1e-6 {
        vec![]
    } else {
        vec![format!(
            "max |Ric - F²| = {worst:e}; Ric/F² = {observed:.9} at the worst sample"
        )]
    };
    finish(4, "de Sitter Ric = F²", start, Duration::from_secs(30), failures);
}

#[test]
fn criterion_05_riccati_identity() {
    let _g = serial();
    let start = Instant::now();
    let mut failures = Vec::new();
    for (spec, s) in builtins()
        .into_iter()
        .filter(|(sp, _)| matches!(sp.name, ModelName::DeSitter2d | ModelName::Bogoslovsky))
    {
        match flow::riccati(&s, 20, 2000, 5) {
            Ok(o) if passed(&o) => {}
            Ok(o) => failures.push(format!(
                "{}: residual {:e}",
                spec.name,
                detail_f64(&o, "max_residual")
            )),
            Err(e) => failures.push(format!("{}: {e}", spec.name)),
        }
    }
    finish(5, "Riccati identity", start, Duration::from_secs(60), failures);
}

#[test]
fn criterion_06_time_separation() {
    let _g = serial();
    let start = Instant::now();
    let mut failures = Vec::new();
    for (spec, s) in flat_builtins() {
        let o = pairs::separation(&s, 200, 6).unwrap();
        let err = detail_f64(&o, "max_shooting_error");
        let slack = detail_f64(&o, "min_triangle_slack");
        if !(err < pairs::SHOOTING_TOL) {
            failures.push(format!("{}: shooting error {err:e}", spec.name));
        }
        if !(slack >= -pairs::TRIANGLE_TOL) {
            failures.push(format!("{}: triangle slack {slack:e}", spec.name));
        }
    }
    finish(6, "time separation", start, Duration::from_secs(60), failures);
}

fn random_measures<R: Rng>(s: &Model, m: usize, rng: &mut R) -> (DiscreteMeasure, DiscreteMeasure) {
    let n = s.dim();
    let source: Vec<Point> = (0..m).map(|_| Point(sample_point(n, 0.5, rng))).collect();
    let target: Vec<Point> = (0..m)
        .map(|_| {
            let mut y = sample_point(n, 0.5, rng);
            y[0] += 2.75;
            Point(y)
        })
        .collect();
    (
        DiscreteMeasure::uniform(source).unwrap(),
        DiscreteMeasure::uniform(target).unwrap(),
    )
}

#[test]
fn criterion_07_transport() {
    let _g = serial();
    let start = Instant::now();
    let mut failures = Vec::new();
    let models = flat_builtins();
    let mut rng = instance_rng(7);
    for k in 0..50 {
        let (spec, s) = &models[k % models.len()];
        let m = rng.gen_range(2..=6);
        let q = rng.gen_range(0.2..0.9);
        let (mu, nu) = random_measures(s, m, &mut rng);
        match transport::coupling(s, &mu, &nu, q) {
            Ok(o) if passed(&o) && o.rhs.is_some() => {}
            Ok(o) => failures.push(format!(
                "instance {k} ({}, m = {m}): LP {:?} vs brute force {:?}, gap {}, monotonicity {}",
                spec.name, o.lhs, o.rhs, o.details["duality_gap"], o.details["monotonicity"]
            )),
            Err(e) => failures.push(format!("instance {k}: {e}")),
        }
    }
    finish(7, "transport", start, Duration::from_secs(60), failures);
}

#[test]
fn criterion_08_q_geodesics() {
    let _g = serial();
    let start = Instant::now();
    let mut failures = Vec::new();
    let models = flat_builtins();
    let mut rng = instance_rng(8);
    let times = [[0.0, 0.25], [0.25, 0.75], [0.75, 1.0]];
    for k in 0..20 {
        let (spec, s) = &models[k % models.len()];
        let m = rng.gen_range(2..=5);
        let q = rng.gen_range(0.2..0.9);
        let (mu, nu) = random_measures(s, m, &mut rng);
        match transport::q_geodesic(s, &mu, &nu, q, &times) {
            Ok(o) if passed(&o) => {}
            Ok(o) => failures.push(format!("instance {k} ({}): {}", spec.name, o.details["intervals"])),
            Err(e) => failures.push(format!("instance {k}: {e}")),
        }
    }
    finish(8, "q-geodesics", start, Duration::from_secs(60), failures);
}

fn params(k: f64, n: f64, t: f64) -> lfot::curvature::ComparisonParams {
    lfot::curvature::ComparisonParams { k, n, q: 0.5, t }
}

#[test]
fn criterion_09_measure_contraction() {
    let _g = serial();
    let start = Instant::now();
    let mut failures = Vec::new();

    let s = build_model(&spec(ModelName::Minkowski, 3)).unwrap();
    let b = Region::ball([1.5, 0.0, 0.0], 0.5);
    let o = comparison::mcp(&s, &Point::new([0.0, 0.0, 0.0]), &b, &params(0.0, 3.0, 0.5), 200_000, 9)
        .unwrap();
    if !(o.slack.abs() < 3.0 * o.stderr) {
        failures.push(format!(
            "minkowski homothety: |slack| = {:e} vs 3·stderr = {:e}",
            o.slack.abs(),
            3.0 * o.stderr
        ));
    }

    let wspec = spec(ModelName::WeightedMinkowski, 3).with("epsilon", 0.5);
    let w = build_model(&wspec).unwrap();
    let bound = model_ground_truth(&wspec)
        .unwrap()
        .ric_n_lower_bounds
        .into_iter()
        .find(|r| r.n_eff == "6")
        .expect("ground truth lists N = 2n");
    let b = Region::ball([0.5, 0.0, 0.0], 0.3);
    let o = comparison::mcp(&w, &Point::new([-0.5, 0.0, 0.0]), &b, &params(bound.k, 6.0, 0.5), 200_000, 9)
        .unwrap();
    if !(o.slack >= -3.0 * o.stderr) {
        failures.push(format!(
            "weighted N = 2n: slack {:e} < -3·stderr {:e}",
            o.slack,
            -3.0 * o.stderr
        ));
    }
    finish(9, "measure contraction", start, Duration::from_secs(120), failures);
}

fn unit_square() -> Region {
    Region::boxed([0.0, 0.0], [1.0, 1.0])
}

#[test]
fn criterion_10_tcd_positive() {
    let _g = serial();
    let start = Instant::now();
    let mut failures = Vec::new();
    let s = build_model(&spec(ModelName::Minkowski, 2)).unwrap();
    let potentials = [
        Potential::linear([-1.0, 0.0]),
        Potential::linear([-2.0, 0.5]),
        Potential::quadratic([-1.0, 0.0], [0.0, -0.4], [0.0, 0.0]),
        Potential::quadratic([-1.0, 0.2], [0.3, 0.3], [0.0, 0.0]),
        Potential::quadratic([-1.5, 0.0], [-0.2, -0.2], [0.5, 0.5]),
    ];
    for (i, u) in potentials.iter().enumerate() {
        for n_eff in [2.0, 4.0, f64::INFINITY] {
            match comparison::tcd(&s, &unit_square(), u, &params(0.0, n_eff, 0.5), 100_000, 10) {
                Ok(o) if o.slack >= -3.0 * o.stderr && passed(&o) => {}
                Ok(o) => failures.push(format!(
                    "potential {i}, N = {n_eff}: slack {:e}, stderr {:e}",
                    o.slack, o.stderr
                )),
                Err(e) => failures.push(format!("potential {i}, N = {n_eff}: {e}")),
            }
        }
    }
    // The linear potential saturates the inequality, so it is judged by the
    // verdict rule, whose floor absorbs rounding of an exact equality.
    let eps = 0.5;
    let w = build_model(&spec(ModelName::WeightedMinkowski, 2).with("epsilon", eps)).unwrap();
    let weighted = [
        Potential::linear([-1.0, 0.0]),
        Potential::quadratic([-1.0, 0.0], [0.0, -0.4], [0.0, 0.0]),
    ];
    for (i, u) in weighted.iter().enumerate() {
        match comparison::tcd(&w, &unit_square(), u, &params(eps, f64::INFINITY, 0.5), 100_000, 10) {
            Ok(o) if passed(&o) => {}
            Ok(o) => failures.push(format!(
                "weighted K = ε, potential {i}: slack {:e}, stderr {:e}",
                o.slack, o.stderr
            )),
            Err(e) => failures.push(format!("weighted K = ε, potential {i}: {e}")),
        }
    }
    finish(10, "TCD positive checks", start, Duration::from_secs(300), failures);
}

#[test]
fn criterion_11_tcd_failure_detection() {
    let _g = serial();
    let start = Instant::now();
    let eps = 0.5;
    let w = build_model(&spec(ModelName::WeightedMinkowski, 2).with("epsilon", eps)).unwrap();
    let concentrated = Region::boxed([0.0, 0.0], [0.01, 0.01]);
    let u = Potential::linear([-1.0, 0.0]);
    let o = comparison::tcd(&w, &concentrated, &u, &params(2.0 * eps, f64::INFINITY, 0.5), 100_000, 11)
        .unwrap();
    let failures = if o.slack < -3.0 * o.stderr && o.verdict == Verdict::Fail {
        vec![]
    } else {
        vec![format!(
            "slack {:e}, stderr {:e}, verdict {:?}",
            o.slack, o.stderr, o.verdict
        )]
    };
    finish(11, "TCD failure detection", start, Duration::from_secs(120), failures);
}

#[test]
fn criterion_12_brunn_minkowski() {
    let _g = serial();
    let start = Instant::now();
    let mut failures = Vec::new();
    let s = build_model(&spec(ModelName::Minkowski, 2)).unwrap();
    let p = params(0.0, 2.0, 0.5);
    let a0 = Region::boxed([0.0, 0.0], [0.2, 0.2]);
    let a1 = Region::boxed([2.0, -0.2], [2.4, 0.2]);
    let o = comparison::brunn_minkowski(&s, &a0, &a1, &p, 200_000, 12).unwrap();
    if !(o.slack.abs() < 3.0 * o.stderr) {
        failures.push(format!(
            "homothetic boxes: |slack| = {:e} vs 3·stderr = {:e}",
            o.slack.abs(),
            3.0 * o.stderr
        ));
    }
    let mut rng = instance_rng(12);
    for k in 0..5 {
        let corner = |rng: &mut rand_chacha::ChaCha8Rng, t0: f64| {
            let lo = [t0 + rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)];
            let hi = [lo[0] + rng.gen_range(0.1..0.4), lo[1] + rng.gen_range(0.1..0.4)];
            Region::boxed(lo, hi)
        };
        let a0 = corner(&mut rng, 0.0);
        let a1 = corner(&mut rng, 2.5);
        match comparison::brunn_minkowski(&s, &a0, &a1, &p, 200_000, 12 + k) {
            Ok(o) if o.slack >= -3.0 * o.stderr => {}
            Ok(o) => failures.push(format!("pair {k}: slack {:e}, stderr {:e}", o.slack, o.stderr)),
            Err(e) => failures.push(format!("pair {k}: {e}")),
        }
    }
    finish(12, "Brunn-Minkowski", start, Duration::from_secs(120), failures);
}

#[test]
fn criterion_13_tau_unit_values() {
    let _g = serial();
    let start = Instant::now();
    let mut failures = Vec::new();
    for (k, n, t) in [(1.0, 2.0, 0.5), (-1.0, 3.0, 0.3), (2.0, -1.0, 0.8), (0.5, 4.0, 1.0)] {
        let v = tau_coefficient(k, n, t, 0.0).unwrap();
        if v != t {
            failures.push(format!("τ(0) = {v} for K = {k}, N = {n}, t = {t}"));
        }
    }
    for (n, t, r) in [(2.0, 0.5, 1.0), (3.0, 0.25, 2.0), (-2.0, 0.7, 0.4)] {
        let v = tau_coefficient(0.0, n, t, r).unwrap();
        if v != t {
            failures.push(format!("K = 0: τ = {v} for N = {n}, t = {t}, r = {r}"));
        }
    }
    // mpmath at 50 digits: 0.53373540432609235012...
    let v = tau_coefficient(1.0, 2.0, 0.5, 1.0).unwrap();
    if !((v - 0.533_735_404_326_092_35).abs() < 1e-10) {
        failures.push(format!("K = 1, N = 2, t = 0.5, r = 1: τ = {v:.17}"));
    }
    finish(13, "τ unit values", start, Duration::from_secs(1), failures);
}

#[test]
fn criterion_14_lorentzianity_defect() {
    let _g = serial();
    let start = Instant::now();
    let mut failures = Vec::new();
    for (spec, s) in builtins() {
        let x = Point(vec![0.0; s.dim()]);
        let d = lorentzianity_defect(&s, &x, 500).unwrap();
        match spec.name {
            ModelName::Minkowski | ModelName::DeSitter2d if !(d < 1e-9) => {
                failures.push(format!("{}: defect {d:e}", spec.name))
            }
            ModelName::Bogoslovsky if !(d > 0.01) => {
                failures.push(format!("{}: defect {d:e}", spec.name))
            }
            _ => {}
        }
    }
    finish(14, "Lorentzianity defect", start, Duration::from_secs(5), failures);
}

const DETERMINISM_CONFIG: &str = r#"
check = "tcd"
samples = 20000
seed = 15

[model]
name = "minkowski"
dim = 2

[params]
K = 0.0
N = 4.0
q = 0.5
t = 0.5

[potential]
kind = "quadratic"
a = [-1.0, 0.0]
h = [0.0, -0.4]
c = [0.0, 0.0]

[regions.initial]
kind = "box"
lo = [0.0, 0.0]
hi = [1.0, 1.0]
"#;

fn run_cli(config: &Path, out: &Path, threads: &str) -> (i32, Vec<u8>) {
    let status = Command::new(env!("CARGO_BIN_EXE_lfot"))
        .arg("run")
        .arg(config)
        .arg("--out")
        .arg(out)
        .env(lfot_cli::THREADS_ENV, threads)
        .output()
        .unwrap();
    let json = std::fs::read(out.with_extension("json")).unwrap_or_default();
    (status.status.code().unwrap_or(-1), json)
}

#[test]
fn criterion_15_determinism() {
    let _g = serial();
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("tcd.toml");
    std::fs::write(&config, DETERMINISM_CONFIG).unwrap();
    let (c1, a) = run_cli(&config, &dir.path().join("a"), "1");
    let (c2, b) = run_cli(&config, &dir.path().join("b"), "4");
    let mut failures = Vec::new();
    if c1 != 0 || c2 != 0 {
        failures.push(format!("exit codes {c1}, {c2}"));
    }
    if a.is_empty() || a != b {
        failures.push("reports differ between reruns".into());
    }
    finish(15, "determinism", start, Duration::from_secs(60), failures);
}

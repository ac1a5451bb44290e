//! Pointwise algebraic invariants of the Lagrangian and the Lorentzianity
//! defect.

use lfot::distance::{lorentzianity_defect, random_future_timelike};
use lfot::finsler::{
    dual_lagrangian, g_pair, legendre_inverse, legendre_map, metric_tensor, q_momentum, q_velocity,
    signature,
};
use lfot::geometry::{nonlinear_connection, spray};
use lfot::{model_ground_truth, FinslerStructure, Model, ModelSpec, Point, Result, Vector};
use rand::Rng;
use serde_json::json;

use super::{instance_rng, max_abs, max_abs_diff, sample_point};
use crate::report::{real, Outcome};

pub const EULER_TOL: f64 = 1e-10;
pub const HOMOGENEITY_TOL: f64 = 1e-10;
pub const LEGENDRE_TOL: f64 = 1e-8;
pub const Q_DUALITY_TOL: f64 = 1e-8;
/// Absolute floor of the reverse Cauchy–Schwarz inequality, relative to
/// `max(1, ζ(v)²)`.
pub const CAUCHY_SCHWARZ_TOL: f64 = 1e-12;
/// Relative error of autodiff against finite differences.
pub const FINITE_DIFFERENCE_TOL: f64 = 1e-6;
pub const LORENTZIAN_TOL: f64 = 1e-9;

/// Half-width of the cube from which base points are drawn.
const BASE_WIDTH: f64 = 0.5;
/// Finite-difference step relative to `max(1, |v|∞)`.
const FD_STEP: f64 = 1e-4;

/// Richardson-extrapolated central difference `(4 D(h/2) - D(h)) / 3`.
fn richardson(d: impl Fn(f64) -> f64, h: f64) -> f64 {
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

fn shifted(v: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut w = v.to_vec();
    for &(i, h) in moves {
        w[i] += h;
    }
    w
}

/// `Hess_v L` by central differences.
pub fn metric_fd<S: FinslerStructure>(s: &S, x: &[f64], v: &[f64]) -> Vec<Vec<f64>> {
    let n = v.len();
    let h = FD_STEP * max_abs(v).max(1.0);
    let l = |w: Vec<f64>| s.lagrangian(x, &w);
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    richardson(
                        |h| {
                            (l(shifted(v, &[(i, h), (j, h)])) - l(shifted(v, &[(i, h), (j, -h)]))
                                - l(shifted(v, &[(i, -h), (j, h)]))
                                + l(shifted(v, &[(i, -h), (j, -h)])))
                                / (4.0 * h * h)
                        },
                        h,
                    )
                })
                .collect()
        })
        .collect()
}

/// `N^α_β = ∂G^α/∂v^β` by central differences of the spray.
pub fn connection_fd<S: FinslerStructure>(s: &S, x: &[f64], v: &[f64]) -> Vec<Vec<f64>> {
    let n = v.len();
    let h = FD_STEP * max_abs(v).max(1.0);
    let mut out = vec![vec![0.0; n]; n];
    for (beta, _) in v.iter().enumerate() {
        for (alpha, row) in out.iter_mut().enumerate() {
            row[beta] = richardson(
                |h| {
                    (spray(s, x, &shifted(v, &[(beta, h)]))[alpha]
                        - spray(s, x, &shifted(v, &[(beta, -h)]))[alpha])
                        / (2.0 * h)
                },
                h,
            );
        }
    }
    out
}

fn relative_matrix_error(exact: &[Vec<f64>], approx: &[Vec<f64>]) -> f64 {
    let scale = exact.iter().map(|r| max_abs(r)).fold(1.0, f64::max);
    exact
        .iter()
        .zip(approx)
        .map(|(a, b)| max_abs_diff(a, b))
        .fold(0.0, f64::max)
        / scale
}

/// Worst-case residuals of the algebraic invariants over random cone
/// samples.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InvariantResiduals {
    pub euler: f64,
    pub homogeneity: f64,
    pub signature_failures: usize,
    pub legendre_vector: f64,
    pub legendre_covector: f64,
    pub q_duality: f64,
    pub cauchy_schwarz: f64,
    pub metric_fd: f64,
    pub connection_fd: f64,
}

pub fn invariant_residuals(s: &Model, samples: usize, seed: u64) -> Result<InvariantResiduals> {
    let n = s.dim();
    let mut rng = instance_rng(seed);
    let mut r = InvariantResiduals::default();
    for _ in 0..samples {
        let x = sample_point(n, BASE_WIDTH, &mut rng);
        let v = random_future_timelike(s, &x, &mut rng);
        let w = random_future_timelike(s, &x, &mut rng);
        let c: f64 = rng.gen_range(0.1..10.0);
        let q: f64 = rng.gen_range(0.1..0.9);
        let vv = Vector::new(x.clone(), v.clone());
        let l = s.lagrangian(&x, &v);

        let g = metric_tensor(s, &vv)?;
        r.euler = r.euler.max((g_pair(&g, &v, &v) - 2.0 * l).abs() / (2.0 * l).abs().max(1.0));
        if signature(&g) != (1, n - 1) {
            r.signature_failures += 1;
        }
        let cv: Vec<f64> = v.iter().map(|a| c * a).collect();
        r.homogeneity = r
            .homogeneity
            .max((s.lagrangian(&x, &cv) - c * c * l).abs() / (c * c * l).abs().max(1.0));

        let zeta = legendre_map(s, &vv)?;
        let back = legendre_inverse(s, &zeta)?;
        r.legendre_vector = r
            .legendre_vector
            .max(max_abs_diff(&back.comps, &v) / max_abs(&v).max(1.0));
        let eta = legendre_map(s, &Vector::new(x.clone(), w.clone()))?;
        let again = legendre_map(s, &legendre_inverse(s, &eta)?)?;
        r.legendre_covector = r
            .legendre_covector
            .max(max_abs_diff(&again.comps, &eta.comps) / max_abs(&eta.comps).max(1.0));

        let mom = q_momentum(s, &vv, q)?;
        let vel = q_velocity(s, &mom, q)?;
        r.q_duality = r
            .q_duality
            .max(max_abs_diff(&vel.comps, &v) / max_abs(&v).max(1.0));

        let pairing = eta.pair(&v);
        let excess = 4.0 * dual_lagrangian(s, &eta)? * l - pairing * pairing;
        r.cauchy_schwarz = r.cauchy_schwarz.max(excess / (pairing * pairing).max(1.0));

        let g_exact: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| g[(i, j)]).collect()).collect();
        r.metric_fd = r
            .metric_fd
            .max(relative_matrix_error(&g_exact, &metric_fd(s, &x, &v)));
        r.connection_fd = r.connection_fd.max(relative_matrix_error(
            &nonlinear_connection(s, &x, &v),
            &connection_fd(s, &x, &v),
        ));
    }
    Ok(r)
}

pub fn invariants(s: &Model, samples: usize, seed: u64) -> Result<Outcome> {
    let r = invariant_residuals(s, samples, seed)?;
    let details = json!({
        "euler": real(r.euler),
        "homogeneity": real(r.homogeneity),
        "signature_failures": r.signature_failures,
        "legendre_vector": real(r.legendre_vector),
        "legendre_covector": real(r.legendre_covector),
        "q_duality": real(r.q_duality),
        "cauchy_schwarz_excess": real(r.cauchy_schwarz),
        "metric_fd_error": real(r.metric_fd),
        "connection_fd_error": real(r.connection_fd),
        "tolerances": {
            "euler": EULER_TOL,
            "homogeneity": HOMOGENEITY_TOL,
            "legendre": LEGENDRE_TOL,
            "q_duality": Q_DUALITY_TOL,
            "cauchy_schwarz": CAUCHY_SCHWARZ_TOL,
            "finite_difference": FINITE_DIFFERENCE_TOL,
        },
    });
    let mut checks = vec![
        (r.euler, EULER_TOL),
        (r.homogeneity, HOMOGENEITY_TOL),
        (r.legendre_vector, LEGENDRE_TOL),
        (r.legendre_covector, LEGENDRE_TOL),
        (r.q_duality, Q_DUALITY_TOL),
        (r.cauchy_schwarz, CAUCHY_SCHWARZ_TOL),
        (r.metric_fd, FINITE_DIFFERENCE_TOL),
        (r.connection_fd, FINITE_DIFFERENCE_TOL),
    ];
    if r.signature_failures > 0 {
        // any wrong signature fails the check outright
        checks.push((r.signature_failures as f64, 0.0));
    }
    Ok(Outcome::tolerance(&checks, samples, details))
}

/// Compares the sampled defect with the model's known classification:
/// Lorentzian models must stay below [`LORENTZIAN_TOL`], the others above.
pub fn lorentzianity(s: &Model, spec: &ModelSpec, x: &Point, samples: usize) -> Result<Outcome> {
    let defect = lorentzianity_defect(s, x, samples)?;
    let lorentzian = model_ground_truth(spec)?.is_lorentzian;
    let details = json!({
        "defect": real(defect),
        "expected_lorentzian": lorentzian,
        "threshold": LORENTZIAN_TOL,
    });
    let check = if lorentzian {
        (defect, LORENTZIAN_TOL)
    } else {
        (LORENTZIAN_TOL, defect)
    };
    let mut o = Outcome::tolerance(&[check], samples, details);
    o.lhs = Some(defect);
    Ok(o)
}

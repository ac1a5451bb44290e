//! Geodesic integration accuracy and the Riccati trace identity along
//! random geodesics.

use lfot::distance::random_future_timelike;
use lfot::geometry::{exp_geodesic, jacobi_propagate, riccati_residual};
use lfot::{FinslerStructure, Model, Result, Vector};
use nalgebra::DMatrix;
use rand::Rng;
use serde_json::json;

use super::{instance_rng, max_abs_diff, sample_point};
use crate::report::{real, Outcome};

/// Endpoint deviation from the straight line on flat models.
pub const STRAIGHT_TOL: f64 = 1e-8;
/// `max_t |F(γ̇(t)) - F(γ̇(0))|`.
pub const SPEED_DRIFT_TOL: f64 = 1e-7;
/// Smallest accepted observed convergence order of RK4.
pub const ORDER_MIN: f64 = 3.5;
pub const RICCATI_TOL: f64 = 1e-5;

/// Step counts of the convergence study; coarse enough that truncation
/// error dominates rounding.
const ORDER_STEPS: [usize; 3] = [16, 32, 64];
/// Differences below this are rounding noise and carry no order information.
const ORDER_FLOOR: f64 = 1e-12;
const BASE_WIDTH: f64 = 0.5;
/// Shrinks sampled velocities so unit-time geodesics stay inside curved
/// charts.
const VELOCITY_SCALE: f64 = 0.5;
/// Entries of the initial `J'` are drawn from `[-w, w]`, keeping `J`
/// invertible over unit time.
const JACOBI_SLOPE: f64 = 0.25;

fn random_velocity<R: Rng>(s: &Model, rng: &mut R) -> Vector {
    let x = sample_point(s.dim(), BASE_WIDTH, rng);
    let v: Vec<f64> = random_future_timelike(s, &x, rng)
        .iter()
        .map(|a| VELOCITY_SCALE * a)
        .collect();
    Vector::new(x, v)
}

/// Observed order `log2(|y_h - y_{h/2}| / |y_{h/2} - y_{h/4}|)`, or `None`
/// when the differences are at rounding level.
pub fn observed_order<S: FinslerStructure>(s: &S, v: &Vector) -> Result<Option<f64>> {
    let ends = ORDER_STEPS
        .iter()
        .map(|&k| Ok(exp_geodesic(s, v, 1.0, k)?.endpoint().0.clone()))
        .collect::<Result<Vec<_>>>()?;
    let e1 = max_abs_diff(&ends[0], &ends[1]);
    let e2 = max_abs_diff(&ends[1], &ends[2]);
    Ok((e2 > ORDER_FLOOR).then(|| (e1 / e2).log2()))
}

pub fn geodesic(s: &Model, samples: usize, steps: usize, seed: u64) -> Result<Outcome> {
    let mut rng = instance_rng(seed);
    let mut deviation: f64 = 0.0;
    let mut drift: f64 = 0.0;
    let mut min_order = f64::INFINITY;
    let mut measured = 0usize;
    for _ in 0..samples {
        let v = random_velocity(s, &mut rng);
        let seg = exp_geodesic(s, &v, 1.0, steps)?;
        drift = drift.max(seg.speed_drift(s));
        if s.is_flat() {
            let line: Vec<f64> = v.x().iter().zip(&v.comps).map(|(a, b)| a + b).collect();
            deviation = deviation.max(max_abs_diff(&seg.endpoint().0, &line));
        }
        if let Some(p) = observed_order(s, &v)? {
            min_order = min_order.min(p);
            measured += 1;
        }
    }
    let mut checks = vec![(drift, SPEED_DRIFT_TOL)];
    if s.is_flat() {
        checks.push((deviation, STRAIGHT_TOL));
    }
    if measured > 0 {
        checks.push((ORDER_MIN, min_order));
    }
    let details = json!({
        "steps": steps,
        "speed_drift": real(drift),
        "straight_line_deviation": if s.is_flat() { real(deviation) } else { serde_json::Value::Null },
        "min_observed_order": if measured > 0 { real(min_order) } else { serde_json::Value::Null },
        "order_samples": measured,
        "tolerances": {
            "speed_drift": SPEED_DRIFT_TOL,
            "straight_line": STRAIGHT_TOL,
            "min_order": ORDER_MIN,
        },
    });
    Ok(Outcome::tolerance(&checks, samples, details))
}

pub fn riccati(s: &Model, samples: usize, steps: usize, seed: u64) -> Result<Outcome> {
    let n = s.dim();
    let mut rng = instance_rng(seed);
    let mut worst: f64 = 0.0;
    let mut worst_ode: f64 = 0.0;
    for _ in 0..samples {
        let v = random_velocity(s, &mut rng);
        let b0 = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-JACOBI_SLOPE..JACOBI_SLOPE));
        let seg = exp_geodesic(s, &v, 1.0, steps)?;
        let frame = jacobi_propagate(s, &seg, &DMatrix::identity(n, n), &b0)?;
        let res = riccati_residual(s, &frame)?;
        worst = worst.max(res.max_abs());
        worst_ode = worst_ode.max(res.max_ode());
    }
    let details = json!({
        "steps": steps,
        "max_residual": real(worst),
        "max_residual_ode": real(worst_ode),
        "tolerance": RICCATI_TOL,
    });
    Ok(Outcome::tolerance(&[(worst, RICCATI_TOL)], samples, details))
}

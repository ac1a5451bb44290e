//! Time separation: shooting against closed forms and the reverse triangle
//! inequality.

use lfot::distance::{
    analytic_separation, random_future_timelike, shooting_separation, time_separation,
    ShootingOptions,
};
use lfot::{FinslerStructure, Model, Point, Result};
use rand::Rng;
use serde_json::json;

use super::{instance_rng, sample_point};
use crate::report::{real, Outcome};

/// `|l_shooting - l_analytic|` on flat models.
pub const SHOOTING_TOL: f64 = 1e-6;
/// Accepted violation of `l(x,z) >= l(x,y) + l(y,z)`.
pub const TRIANGLE_TOL: f64 = 1e-6;

const BASE_WIDTH: f64 = 0.5;
const STEP_SCALE: f64 = 0.4;

fn step<R: Rng>(s: &Model, x: &[f64], rng: &mut R) -> Vec<f64> {
    let v = random_future_timelike(s, x, rng);
    x.iter().zip(&v).map(|(a, b)| a + STEP_SCALE * b).collect()
}

pub fn separation(s: &Model, samples: usize, seed: u64) -> Result<Outcome> {
    let mut rng = instance_rng(seed);
    let opts = ShootingOptions::default();
    let mut shooting_error: f64 = 0.0;
    let mut min_slack = f64::INFINITY;
    let mut skipped = 0usize;
    for _ in 0..samples {
        let x = sample_point(s.dim(), BASE_WIDTH, &mut rng);
        let y = step(s, &x, &mut rng);
        let z = step(s, &y, &mut rng);
        let (px, py, pz) = (Point(x), Point(y), Point(z));
        if s.is_flat() {
            let exact = analytic_separation(s, &px, &py)?.value;
            let shot = shooting_separation(s, &px, &py, &opts)?.value;
            shooting_error = shooting_error.max((shot - exact).abs());
        }
        let lxy = time_separation(s, &px, &py)?.value;
        let lyz = time_separation(s, &py, &pz)?.value;
        let lxz = time_separation(s, &px, &pz)?.value;
        if [lxy, lyz, lxz].iter().any(|l| !l.is_finite()) {
            skipped += 1;
            continue;
        }
        min_slack = min_slack.min(lxz - lxy - lyz);
    }
    let mut checks = vec![(-min_slack, TRIANGLE_TOL)];
    if s.is_flat() {
        checks.push((shooting_error, SHOOTING_TOL));
    }
    let details = json!({
        "max_shooting_error": if s.is_flat() { real(shooting_error) } else { serde_json::Value::Null },
        "min_triangle_slack": real(min_slack),
        "unrelated_triples": skipped,
        "tolerances": { "shooting": SHOOTING_TOL, "triangle": TRIANGLE_TOL },
    });
    Ok(Outcome::tolerance(&checks, samples, details))
}

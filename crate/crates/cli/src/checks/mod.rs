//! Executable checks. Each returns an [`Outcome`]; numerical errors raised
//! by the toolkit become INCONCLUSIVE outcomes carrying the error.

pub mod algebra;
pub mod comparison;
pub mod flow;
pub mod pairs;
pub mod transport;

use lfot::montecarlo::batch_rng;
use lfot::{FinslerStructure, Model, Point};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::config::{CheckKind, Experiment};
use crate::report::Outcome;

/// Random stream reserved for generating check instances, disjoint from the
/// Monte Carlo streams of the toolkit.
pub const INSTANCE_STREAM: u64 = 0x100;

pub fn instance_rng(seed: u64) -> ChaCha8Rng {
    batch_rng(seed, INSTANCE_STREAM, 0)
}

/// Uniform point of the cube `[-w, w]^n`.
pub fn sample_point<R: Rng>(n: usize, w: f64, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-w..w)).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

fn origin(s: &Model) -> Point {
    Point(vec![0.0; s.dim()])
}

/// Runs the configured check.
pub fn run(exp: &Experiment) -> Outcome {
    let c = &exp.config;
    let s = &exp.model;
    let (samples, seed) = (c.samples(), c.seed);
    let r = &c.regions;
    let result = match c.check {
        CheckKind::Invariants => algebra::invariants(s, samples, seed),
        CheckKind::Lorentzianity => {
            let x = c.point.clone().map_or_else(|| origin(s), Point);
            algebra::lorentzianity(s, &c.model, &x, samples)
        }
        CheckKind::Geodesic => flow::geodesic(s, samples, c.steps(), seed),
        CheckKind::Riccati => flow::riccati(s, samples, c.steps(), seed),
        CheckKind::Separation => pairs::separation(s, samples, seed),
        CheckKind::Coupling => transport::coupling(
            s,
            exp.source.as_ref().expect("validated"),
            exp.target.as_ref().expect("validated"),
            c.q.expect("validated"),
        ),
        CheckKind::QGeodesic => transport::q_geodesic(
            s,
            exp.source.as_ref().expect("validated"),
            exp.target.as_ref().expect("validated"),
            c.q.expect("validated"),
            &c.times(),
        ),
        CheckKind::Mcp => comparison::mcp(
            s,
            &Point(c.point.clone().expect("validated")),
            r.b.as_ref().expect("validated"),
            &c.params.expect("validated"),
            samples,
            seed,
        ),
        CheckKind::Tcd => comparison::tcd(
            s,
            r.initial.as_ref().expect("validated"),
            c.potential.as_ref().expect("validated"),
            &c.params.expect("validated"),
            samples,
            seed,
        ),
        CheckKind::BrunnMinkowski => comparison::brunn_minkowski(
            s,
            r.a0.as_ref().expect("validated"),
            r.a1.as_ref().expect("validated"),
            &c.params.expect("validated"),
            samples,
            seed,
        ),
    };
    result.unwrap_or_else(|e| Outcome::from_error(&e))
}

//! Time separation, intermediate points, the sets `Z_t` and the
//! Lorentzianity defect.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::autodiff;
use crate::error::{Error, Result};
use crate::ext;
use crate::finsler::{
    check_dim, classify_vector, g_pair, metric_tensor, CausalKind, FinslerStructure, Point, Vector,
};
use crate::geometry::{exp_geodesic, geodesic_endpoint, GeodesicSegment};
use crate::region::{box_intersection, Region};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparationMethod {
    Analytic,
    Shooting,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Causality {
    Related,
    Unrelated,
    Unknown,
}

/// `l(x, y)` with its maximizing geodesic when one was found.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparationResult {
    /// `l(x, y) >= 0`, or `-inf` when no causal curve joins `x` to `y`.
    pub value: f64,
    pub maximizer: Option<GeodesicSegment>,
    /// Initial velocity of the maximizer on `[0, 1]`.
    pub velocity: Option<Vec<f64>>,
    pub method: SeparationMethod,
    pub causality: Causality,
    /// Several converged shooting solutions share the maximal action; an
    /// empirical signal that `(x, y)` lies in the singular set of `l`.
    pub multiple_maximizers: bool,
}

/// Tuning for the shooting solver.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShootingOptions {
    pub steps: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions {
            steps: 128,
            max_iter: 60,
            tol: 1e-11,
        }
    }
}

fn diff(x: &[f64], y: &[f64]) -> Vec<f64> {
    y.iter().zip(x).map(|(a, b)| a - b).collect()
}

fn straight_segment(x: &[f64], d: &[f64]) -> GeodesicSegment {
    let nodes = 17;
    let mut seg = GeodesicSegment {
        times: Vec::with_capacity(nodes),
        points: Vec::with_capacity(nodes),
        tangents: Vec::with_capacity(nodes),
        action_q: None,
    };
    for k in 0..nodes {
        let t = k as f64 / (nodes - 1) as f64;
        let p: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + t * b).collect();
        seg.times.push(t);
        seg.tangents.push(Vector::new(p.clone(), d.to_vec()));
        seg.points.push(Point(p));
    }
    seg
}

fn check_points<S: FinslerStructure>(s: &S, x: &Point, y: &Point) -> Result<()> {
    check_dim(s, x.dim())?;
    check_dim(s, y.dim())
}

/// Closed-form `l` for flat models: `F(y - x)` when `y - x` is future causal.
pub fn analytic_separation<S: FinslerStructure>(
    s: &S,
    x: &Point,
    y: &Point,
) -> Result<SeparationResult> {
    check_points(s, x, y)?;
    if !s.is_flat() {
        return Err(Error::Unsupported(format!(
            "no analytic separation for {}",
            s.name()
        )));
    }
    let d = diff(x.coords(), y.coords());
    let v = Vector::new(x.coords().to_vec(), d.clone());
    let class = classify_vector(s, &v);
    let value = match class.kind {
        CausalKind::Zero => 0.0,
        _ if class.is_future_timelike() => (-2.0 * s.lagrangian(x.coords(), &d)).sqrt(),
        _ if class.is_future_causal() => 0.0,
        _ => f64::NEG_INFINITY,
    };
    Ok(SeparationResult {
        value,
        maximizer: (value >= 0.0).then(|| straight_segment(x.coords(), &d)),
        velocity: (value >= 0.0).then(|| d.clone()),
        method: SeparationMethod::Analytic,
        causality: if value >= 0.0 {
            Causality::Related
        } else {
            Causality::Unrelated
        },
        multiple_maximizers: false,
    })
}

/// `l(x, y)`: closed form on flat models, multiple-start shooting otherwise.
pub fn time_separation<S: FinslerStructure>(
    s: &S,
    x: &Point,
    y: &Point,
) -> Result<SeparationResult> {
    if s.is_flat() {
        analytic_separation(s, x, y)
    } else {
        shooting_separation(s, x, y, &ShootingOptions::default())
    }
}

/// Deterministic initial velocities spread over the future cone around the
/// coordinate difference `y - x`.
fn shooting_seeds<S: FinslerStructure>(s: &S, x: &[f64], d: &[f64]) -> Vec<Vec<f64>> {
    let xo = s.time_orientation(x);
    let fx = (-2.0 * s.lagrangian(x, &xo)).sqrt();
    let spatial_norm: f64 = d[1..].iter().map(|a| a * a).sum::<f64>().sqrt();
    let scale = d[0].abs().max(spatial_norm).max(1e-3);
    let factors = [
        (1.0, 1.0),
        (1.0, 0.8),
        (1.0, 1.2),
        (1.2, 1.0),
        (0.9, 0.6),
        (1.5, 1.0),
        (1.0, 0.0),
        (2.0, 1.5),
    ];
    factors
        .iter()
        .map(|&(a, b)| {
            let mut v: Vec<f64> = d.iter().map(|c| b * c).collect();
            v[0] = 0.0;
            let time = a * d[0].max(0.0) + 1e-3 * scale;
            for (vi, o) in v.iter_mut().zip(&xo) {
                *vi += time * o / fx;
            }
            v
        })
        .collect()
}

fn endpoint_residual<S: FinslerStructure>(
    s: &S,
    x: &[f64],
    y: &[f64],
    v: &[f64],
    steps: usize,
) -> Result<(Vec<f64>, nalgebra::DMatrix<f64>)> {
    let n = x.len();
    let xl = autodiff::lift(x);
    let mut jac = nalgebra::DMatrix::zeros(n, n);
    let mut r = vec![0.0; n];
    for k in 0..n {
        let (end, _) = geodesic_endpoint(s, &xl, &autodiff::seed_axis(v, k), 1.0, steps)?;
        for i in 0..n {
            jac[(i, k)] = end[i].du;
            r[i] = end[i].re - y[i];
        }
    }
    Ok((r, jac))
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Newton solve of `exp_x(v) = y` over future timelike `v`.
pub fn shoot<S: FinslerStructure>(
    s: &S,
    x: &[f64],
    y: &[f64],
    seed: &[f64],
    opts: &ShootingOptions,
) -> Option<Vec<f64>> {
    let admissible =
        |v: &[f64]| classify_vector(s, &Vector::new(x.to_vec(), v.to_vec())).is_future_timelike();
    if !admissible(seed) {
        return None;
    }
    let tol = opts.tol * norm(y).max(1.0);
    let mut v = seed.to_vec();
    let (mut r, mut jac) = endpoint_residual(s, x, y, &v, opts.steps).ok()?;
    for _ in 0..opts.max_iter {
        if norm(&r) <= tol {
            return Some(v);
        }
        let step = jac
            .clone()
            .lu()
            .solve(&nalgebra::DVector::from_vec(r.iter().map(|a| -a).collect()))?;
        let mut lambda = 1.0;
        loop {
            let cand: Vec<f64> = v
                .iter()
                .zip(step.iter())
                .map(|(a, d)| a + lambda * d)
                .collect();
            if admissible(&cand) {
                if let Ok((rc, jc)) = endpoint_residual(s, x, y, &cand, opts.steps) {
                    if norm(&rc) < norm(&r) {
                        v = cand;
                        r = rc;
                        jac = jc;
                        break;
                    }
                }
            }
            lambda *= 0.5;
            if lambda < 1e-8 {
                return None;
            }
        }
    }
    (norm(&r) <= tol).then_some(v)
}

/// Coarse causal-cone pretest: whether `y - x` looks causal at either end.
fn pretest_causal<S: FinslerStructure>(s: &S, x: &[f64], y: &[f64]) -> bool {
    let d = diff(x, y);
    [x, y].iter().any(|p| {
        let c = classify_vector(s, &Vector::new(p.to_vec(), d.clone()));
        c.is_future_causal() || c.kind == CausalKind::Zero
    })
}

/// `l(x, y)` by multiple-start shooting, keeping the largest action among
/// converged solutions.
pub fn shooting_separation<S: FinslerStructure>(
    s: &S,
    x: &Point,
    y: &Point,
    opts: &ShootingOptions,
) -> Result<SeparationResult> {
    check_points(s, x, y)?;
    let (xc, yc) = (x.coords(), y.coords());
    if xc == yc {
        return Ok(SeparationResult {
            value: 0.0,
            maximizer: None,
            velocity: Some(vec![0.0; xc.len()]),
            method: SeparationMethod::Shooting,
            causality: Causality::Related,
            multiple_maximizers: false,
        });
    }
    let d = diff(xc, yc);
    let mut found: Vec<(f64, Vec<f64>)> = Vec::new();
    for seed in shooting_seeds(s, xc, &d) {
        if let Some(v) = shoot(s, xc, yc, &seed, opts) {
            let f = (-2.0 * s.lagrangian(xc, &v)).sqrt();
            found.push((f, v));
        }
    }
    if found.is_empty() {
        if s.is_flat() && !pretest_causal(s, xc, yc) {
            return Ok(SeparationResult {
                value: f64::NEG_INFINITY,
                maximizer: None,
                velocity: None,
                method: SeparationMethod::Shooting,
                causality: Causality::Unrelated,
                multiple_maximizers: false,
            });
        }
        if pretest_causal(s, xc, yc) {
            return Err(Error::ShootingFailure);
        }
        return Ok(SeparationResult {
            value: f64::NEG_INFINITY,
            maximizer: None,
            velocity: None,
            method: SeparationMethod::Shooting,
            causality: Causality::Unknown,
            multiple_maximizers: false,
        });
    }
    // largest action; near-ties broken by the lexicographically smallest velocity
    found.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then_with(|| a.1.partial_cmp(&b.1).unwrap())
    });
    let best = found[0].0;
    let ties: Vec<&(f64, Vec<f64>)> = found.iter().filter(|c| best - c.0 < 1e-9).collect();
    let mut chosen = ties[0].clone();
    for c in &ties {
        if c.1 < chosen.1 {
            chosen = (*c).clone();
        }
    }
    let distinct = ties.iter().any(|c| norm(&diff(&c.1, &chosen.1)) > 1e-6);
    let seg = exp_geodesic(
        s,
        &Vector::new(xc.to_vec(), chosen.1.clone()),
        1.0,
        opts.steps,
    )?;
    Ok(SeparationResult {
        value: chosen.0,
        maximizer: Some(seg),
        velocity: Some(chosen.1),
        method: SeparationMethod::Shooting,
        causality: Causality::Related,
        multiple_maximizers: distinct,
    })
}

/// `l_q(x, y) = l(x, y)^q / q`, with `(-inf)^q / q = -inf`.
pub fn lq_separation<S: FinslerStructure>(s: &S, x: &Point, y: &Point, q: f64) -> Result<f64> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::Parameter(format!("q = {q} outside (0, 1]")));
    }
    let l = time_separation(s, x, y)?.value;
    Ok(ext::pow(l, q) / q)
}

/// The point `γ(t)` on the maximizing geodesic from `x` to `y`.
pub fn intermediate_point<S: FinslerStructure>(
    s: &S,
    x: &Point,
    y: &Point,
    t: f64,
) -> Result<Point> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Parameter(format!("t = {t} outside [0, 1]")));
    }
    let sep = time_separation(s, x, y)?;
    if !(sep.value > 0.0) {
        return Err(Error::NoMaximizer);
    }
    if t == 0.0 {
        return Ok(x.clone());
    }
    if t == 1.0 {
        return Ok(y.clone());
    }
    let v = sep.velocity.ok_or(Error::NoMaximizer)?;
    if s.is_flat() {
        return Ok(Point(
            x.coords().iter().zip(&v).map(|(a, b)| a + t * b).collect(),
        ));
    }
    let (end, _) = geodesic_endpoint(
        s,
        x.coords(),
        &v.iter().map(|a| a * t).collect::<Vec<_>>(),
        1.0,
        ShootingOptions::default().steps,
    )?;
    Ok(Point(end))
}

/// Outcome of a membership query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Inside,
    Outside,
    Inconclusive,
}

/// Second-order cone `{(s, u): s >= |u|}` projection.
fn project_soc(w: &[f64]) -> Vec<f64> {
    let s0 = w[0];
    let u = norm(&w[1..]);
    if u <= s0 {
        w.to_vec()
    } else if u <= -s0 {
        vec![0.0; w.len()]
    } else {
        let a = 0.5 * (s0 + u);
        let mut out = vec![a];
        out.extend(w[1..].iter().map(|c| a * c / u));
        out
    }
}

/// Timelike margin `(z⁰ - x⁰) - |z̄ - x̄|` of the Minkowski cone.
fn cone_margin(z: &[f64], x: &[f64]) -> f64 {
    (z[0] - x[0]) - norm(&diff(&x[1..], &z[1..]))
}

const MEMBERSHIP_TOL: f64 = 1e-12;
const PROJECTION_BUDGET: usize = 5000;

/// Decides whether some `x ∈ P ∩ Q` has `z - x` in the open Minkowski cone.
fn cone_reachable(z: &[f64], p: &Region, q: &Region) -> Membership {
    let decide = |x: &[f64]| {
        if cone_margin(z, x) > MEMBERSHIP_TOL {
            Membership::Inside
        } else {
            Membership::Outside
        }
    };
    match (p, q) {
        (Region::Point { at }, other) | (other, Region::Point { at }) => {
            if !other.contains(at) && crate::region::dist(&other.project(at), at) > MEMBERSHIP_TOL {
                return Membership::Outside;
            }
            decide(at)
        }
        (Region::Box { lo: l1, hi: h1 }, Region::Box { lo: l2, hi: h2 }) => {
            let Some((lo, hi)) = box_intersection((l1, h1), (l2, h2)) else {
                return Membership::Outside;
            };
            // maximize the margin: smallest x⁰, spatial part closest to z̄
            let mut x: Vec<f64> = z
                .iter()
                .zip(lo.iter().zip(&hi))
                .map(|(c, (a, b))| c.clamp(*a, *b))
                .collect();
            x[0] = lo[0];
            decide(&x)
        }
        _ => {
            // cyclic projections onto P, Q and the closed cone z - C
            let cone = |x: &[f64]| -> Vec<f64> {
                let w = project_soc(&diff(x, z));
                z.iter().zip(&w).map(|(a, b)| a - b).collect()
            };
            let (lo, hi) = p.bounding_box();
            let mut x: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
            let mut last_gap = f64::INFINITY;
            for _ in 0..PROJECTION_BUDGET {
                let next = p.project(&q.project(&cone(&x)));
                let gap = crate::region::dist(&next, &cone(&next))
                    .max(crate::region::dist(&next, &q.project(&next)));
                let moved = crate::region::dist(&next, &x);
                x = next;
                if gap < 1e-13 {
                    return if cone_margin(z, &x) > MEMBERSHIP_TOL {
                        Membership::Inside
                    } else {
                        // feasible only on the null boundary; probe slightly inside
                        let mut probe = x.clone();
                        probe[0] -= 1e-9;
                        if p.contains(&probe) && q.contains(&probe) && cone_margin(z, &probe) > 0.0
                        {
                            Membership::Inside
                        } else {
                            Membership::Inconclusive
                        }
                    };
                }
                if moved < 1e-15 && gap > 1e-9 && (last_gap - gap).abs() < 1e-15 {
                    return Membership::Outside;
                }
                last_gap = gap;
            }
            Membership::Inconclusive
        }
    }
}

/// Whether `z ∈ Z_t(A, B)`: some `x ∈ A`, `y ∈ B` with `y - x` future
/// timelike and `z = x + t(y - x)`. Exact for the flat built-ins, whose cones
/// coincide with the Minkowski cone.
pub fn z_t_membership<S: FinslerStructure>(
    s: &S,
    z: &[f64],
    a: &Region,
    b: &Region,
    t: f64,
) -> Result<Membership> {
    if !s.is_flat() {
        return Err(Error::Unsupported(
            "exact Z_t membership is only available for flat models".into(),
        ));
    }
    check_dim(s, z.len())?;
    a.validate(s.dim())?;
    b.validate(s.dim())?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Parameter(format!("t = {t} outside [0, 1]")));
    }
    if t == 0.0 {
        if !a.contains(z) {
            return Ok(Membership::Outside);
        }
        // some y ∈ B with y - z timelike: reflect through z
        let neg = |r: &Region| r.affine(&z.iter().map(|c| 2.0 * c).collect::<Vec<_>>(), -1.0);
        return Ok(cone_reachable(z, &neg(b), &neg(b)));
    }
    if t == 1.0 {
        if !b.contains(z) {
            return Ok(Membership::Outside);
        }
        return Ok(cone_reachable(z, a, a));
    }
    // x ∈ C iff (z - (1-t)x)/t ∈ B
    let c = b.affine(
        &z.iter().map(|v| v / (1.0 - t)).collect::<Vec<_>>(),
        -t / (1.0 - t),
    );
    Ok(cone_reachable(z, a, &c))
}

/// Random future timelike vector at `x` with `F ∈ [0.5, 2]` and spatial
/// rapidity bounded away from the light cone.
pub fn random_future_timelike<S: FinslerStructure, R: Rng>(
    s: &S,
    x: &[f64],
    rng: &mut R,
) -> Vec<f64> {
    let n = s.dim();
    let xo = s.time_orientation(x);
    loop {
        let mut v: Vec<f64> = (0..n).map(|_| 1.6 * rng.gen::<f64>() - 0.8).collect();
        v[0] = 0.0;
        for (vi, o) in v.iter_mut().zip(&xo) {
            *vi += o;
        }
        let vec = Vector::new(x.to_vec(), v.clone());
        if classify_vector(s, &vec).is_future_timelike() {
            let f = (-2.0 * s.lagrangian(x, &v)).sqrt();
            if f > 0.2 {
                let target = 0.5 + 1.5 * rng.gen::<f64>();
                return v.iter().map(|a| a * target / f).collect();
            }
        }
    }
}

const DEFECT_SEED: u64 = 0x5eed_1a9a;

/// `max |g_v(w,w) - 2L(w)| / max(1, |2L(w)|)` over sampled timelike `v, w`
/// at `x`. Zero on Lorentzian structures.
pub fn lorentzianity_defect<S: FinslerStructure>(s: &S, x: &Point, samples: usize) -> Result<f64> {
    check_dim(s, x.dim())?;
    if samples < 10 {
        return Err(Error::Parameter(format!("samples = {samples} < 10")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(DEFECT_SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let v = random_future_timelike(s, x.coords(), &mut rng);
        let w = random_future_timelike(s, x.coords(), &mut rng);
        worst = worst.max(pair_defect(s, x.coords(), &v, &w)?);
    }
    Ok(worst)
}

/// `|g_v(w,w) - 2L(w)| / max(1, |2L(w)|)` for one pair.
pub fn pair_defect<S: FinslerStructure>(s: &S, x: &[f64], v: &[f64], w: &[f64]) -> Result<f64> {
    let g = metric_tensor(s, &Vector::new(x.to_vec(), v.to_vec()))?;
    let two_l = 2.0 * s.lagrangian(x, w);
    Ok((g_pair(&g, w, w) - two_l).abs() / two_l.abs().max(1.0))
}

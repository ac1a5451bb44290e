//! Pointwise algebra of a Lorentz–Finsler structure: metric tensor, causal
//! character, Legendre transforms and the q-dependent Lagrangian/Hamiltonian
//! pair.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::autodiff::{self, Dual, Scalar};
use crate::error::{Error, Result};

/// A Lagrangian `L: TM -> R`, 2-homogeneous in `v`, with Lorentzian
/// fibre Hessian, plus the data that turns it into a weighted spacetime.
///
/// Implementors write `lagrangian` and `weight` generically so that every
/// derivative the toolkit needs is available through nested dual numbers.
/// Implementing this trait is the extension point for user models.
pub trait FinslerStructure: Send + Sync {
    fn dim(&self) -> usize;

    fn name(&self) -> String;

    /// `L(x, v)`. Only meaningful where [`FinslerStructure::in_domain`] holds.
    fn lagrangian<T: Scalar>(&self, x: &[T], v: &[T]) -> T;

    /// Whether the closed form of `L` is defined at `(x, v)`. Outside the
    /// domain the vector is classified spacelike.
    fn in_domain(&self, _x: &[f64], _v: &[f64]) -> bool {
        true
    }

    /// Smooth timelike vector field fixing the future cone.
    fn time_orientation(&self, x: &[f64]) -> Vec<f64>;

    /// Weight `psi_m(x, v)`, positively 0-homogeneous in `v`, defined by
    /// `dm = exp(-psi) sqrt(-det g_v) dx`.
    fn weight<T: Scalar>(&self, _x: &[T], _v: &[T]) -> T {
        T::zero()
    }

    /// Density of the reference measure `m` with respect to chart Lebesgue
    /// measure.
    fn reference_density(&self, x: &[f64]) -> f64;

    /// Flat models have straight geodesics and `l(x, y) = F(y - x)`; the
    /// toolkit then uses those closed forms as analytic overrides.
    fn is_flat(&self) -> bool {
        false
    }

    /// Chart bound used by the geodesic blow-up guard.
    fn chart_contains(&self, _x: &[f64]) -> bool {
        true
    }
}

/// Point of the single global chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<f64>);

/// Tangent vector `v ∈ T_xM`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Vector {
    pub base: Point,
    pub comps: Vec<f64>,
}

/// Cotangent vector `ζ ∈ T*_xM`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Covector {
    pub base: Point,
    pub comps: Vec<f64>,
}

impl Point {
    pub fn new(coords: impl Into<Vec<f64>>) -> Self {
        Point(coords.into())
    }
    pub fn coords(&self) -> &[f64] {
        &self.0
    }
    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl Vector {
    pub fn new(base: impl Into<Vec<f64>>, comps: impl Into<Vec<f64>>) -> Self {
        Vector {
            base: Point(base.into()),
            comps: comps.into(),
        }
    }
    pub fn x(&self) -> &[f64] {
        &self.base.0
    }
    pub fn scaled(&self, c: f64) -> Self {
        Vector {
            base: self.base.clone(),
            comps: self.comps.iter().map(|a| a * c).collect(),
        }
    }
    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|&a| a == 0.0)
    }
}

impl Covector {
    pub fn new(base: impl Into<Vec<f64>>, comps: impl Into<Vec<f64>>) -> Self {
        Covector {
            base: Point(base.into()),
            comps: comps.into(),
        }
    }
    /// Duality pairing `ζ(v)`.
    pub fn pair(&self, v: &[f64]) -> f64 {
        self.comps.iter().zip(v).map(|(a, b)| a * b).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CausalKind {
    Timelike,
    Lightlike,
    Spacelike,
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CausalClass {
    pub kind: CausalKind,
    /// Present exactly for timelike and lightlike vectors.
    pub future_directed: Option<bool>,
}

impl CausalClass {
    pub fn is_future_timelike(&self) -> bool {
        self.kind == CausalKind::Timelike && self.future_directed == Some(true)
    }
    pub fn is_future_causal(&self) -> bool {
        matches!(self.kind, CausalKind::Timelike | CausalKind::Lightlike)
            && self.future_directed == Some(true)
    }
}

/// Relative threshold below which `|L(v)|` counts as null.
pub const NULL_TOL: f64 = 1e-12;

/// Singular-metric threshold on `|det g|`.
pub const SINGULAR_DET_TOL: f64 = 1e-12;

pub(crate) fn check_dim<S: FinslerStructure>(s: &S, len: usize) -> Result<()> {
    if len != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            got: len,
        });
    }
    Ok(())
}

fn check_vector<S: FinslerStructure>(s: &S, v: &Vector) -> Result<()> {
    check_dim(s, v.base.dim())?;
    check_dim(s, v.comps.len())
}

/// `L(v)`.
pub fn lagrangian_eval<S: FinslerStructure>(s: &S, v: &Vector) -> Result<f64> {
    check_vector(s, v)?;
    if !s.in_domain(v.x(), &v.comps) {
        return Err(Error::Domain(format!(
            "{} Lagrangian undefined at v = {:?}",
            s.name(),
            v.comps
        )));
    }
    Ok(s.lagrangian(v.x(), &v.comps))
}

/// `∂L/∂v^α` at any scalar depth.
pub fn grad_v<S: FinslerStructure, T: Scalar>(s: &S, x: &[T], v: &[T]) -> Vec<T> {
    let xl = autodiff::lift(x);
    (0..v.len())
        .map(|k| s.lagrangian(&xl, &autodiff::seed_axis(v, k)).du)
        .collect()
}

/// `g_{αβ}(x, v) = ∂²L/∂v^α∂v^β` at any scalar depth.
pub fn metric_generic<S: FinslerStructure, T: Scalar>(s: &S, x: &[T], v: &[T]) -> Vec<Vec<T>> {
    let xl: Vec<Dual<Dual<T>>> = x
        .iter()
        .map(|&a| Dual::constant(Dual::constant(a)))
        .collect();
    autodiff::hessian(|vv| s.lagrangian(&xl, vv), v)
}

pub(crate) fn to_dmatrix(m: &[Vec<f64>]) -> DMatrix<f64> {
    let n = m.len();
    DMatrix::from_fn(n, n, |i, j| m[i][j])
}

/// Fibre metric `g_v` as a matrix. Errors if it is numerically singular.
pub fn metric_tensor<S: FinslerStructure>(s: &S, v: &Vector) -> Result<DMatrix<f64>> {
    check_vector(s, v)?;
    if v.is_zero() {
        return Err(Error::Domain("metric tensor undefined at v = 0".into()));
    }
    if !s.in_domain(v.x(), &v.comps) {
        return Err(Error::Domain(format!(
            "{} metric undefined at {:?}",
            s.name(),
            v.comps
        )));
    }
    let g = to_dmatrix(&metric_generic(s, v.x(), &v.comps));
    let det = g.determinant();
    if !det.is_finite() || det.abs() < SINGULAR_DET_TOL {
        return Err(Error::SingularMetric { det });
    }
    Ok(g)
}

/// `g_v(a, b)`.
pub fn g_pair(g: &DMatrix<f64>, a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += g[(i, j)] * a[i] * b[j];
        }
    }
    s
}

/// Numbers of negative and positive eigenvalues of `g_v`.
pub fn signature(g: &DMatrix<f64>) -> (usize, usize) {
    let eig = g.clone().symmetric_eigen();
    let neg = eig.eigenvalues.iter().filter(|&&e| e < 0.0).count();
    let pos = eig.eigenvalues.iter().filter(|&&e| e > 0.0).count();
    (neg, pos)
}

/// Causal character, with future-directedness decided by the sign of
/// `g_X(X, v)` for the time orientation `X`.
pub fn classify_vector<S: FinslerStructure>(s: &S, v: &Vector) -> CausalClass {
    let x = v.x();
    if v.is_zero() {
        return CausalClass {
            kind: CausalKind::Zero,
            future_directed: None,
        };
    }
    if !s.in_domain(x, &v.comps) {
        return CausalClass {
            kind: CausalKind::Spacelike,
            future_directed: None,
        };
    }
    let l = s.lagrangian(x, &v.comps);
    let norm2: f64 = v.comps.iter().map(|a| a * a).sum();
    let kind = if l.abs() <= NULL_TOL * norm2.max(f64::MIN_POSITIVE) {
        CausalKind::Lightlike
    } else if l < 0.0 {
        CausalKind::Timelike
    } else {
        CausalKind::Spacelike
    };
    let future_directed = match kind {
        CausalKind::Timelike | CausalKind::Lightlike => {
            // g_X(X, v) = dL/dv(X) . v by 2-homogeneity
            let xo = s.time_orientation(x);
            let dl = grad_v(s, x, &xo);
            let pairing: f64 = dl.iter().zip(&v.comps).map(|(a, b)| a * b).sum();
            Some(pairing < 0.0)
        }
        _ => None,
    };
    CausalClass {
        kind,
        future_directed,
    }
}

/// `F(v) = sqrt(-2 L(v))` for causal `v`.
pub fn f_norm<S: FinslerStructure>(s: &S, v: &Vector) -> Result<f64> {
    check_vector(s, v)?;
    let class = classify_vector(s, v);
    match class.kind {
        CausalKind::Zero | CausalKind::Lightlike => Ok(0.0),
        CausalKind::Timelike => Ok((-2.0 * s.lagrangian(v.x(), &v.comps)).sqrt()),
        CausalKind::Spacelike => Err(Error::Domain("F undefined on spacelike vectors".into())),
    }
}

/// Legendre map `ℒ(v) = ∂L/∂v(v)` on future timelike vectors.
pub fn legendre_map<S: FinslerStructure>(s: &S, v: &Vector) -> Result<Covector> {
    check_vector(s, v)?;
    if !classify_vector(s, v).is_future_timelike() {
        return Err(Error::NotTimelike(format!("{:?}", v.comps)));
    }
    Ok(Covector {
        base: v.base.clone(),
        comps: grad_v(s, v.x(), &v.comps),
    })
}

const NEWTON_MAX_ITER: usize = 100;
const NEWTON_TOL: f64 = 1e-12;

/// Inverse Legendre map `ℒ*`: the unique future timelike `v` with
/// `∂L/∂v(v) = ζ`, found by damped Newton iteration seeded on the time
/// orientation.
pub fn legendre_inverse<S: FinslerStructure>(s: &S, zeta: &Covector) -> Result<Vector> {
    check_dim(s, zeta.base.dim())?;
    check_dim(s, zeta.comps.len())?;
    let x = zeta.base.coords();
    let xo = s.time_orientation(x);
    let fx = (-2.0 * s.lagrangian(x, &xo)).sqrt();
    let xhat: Vec<f64> = xo.iter().map(|a| a / fx).collect();
    // 2L(s·X̂) = -s² must equal ζ(s·X̂)
    let scale = -zeta.pair(&xhat);
    if !(scale > 0.0) {
        return Err(Error::OutsidePolarCone);
    }
    let tol = NEWTON_TOL * zeta.comps.iter().map(|a| a.abs()).fold(1.0, f64::max);
    let residual = |v: &[f64]| -> DVector<f64> {
        let dl = grad_v(s, x, v);
        DVector::from_iterator(v.len(), dl.iter().zip(&zeta.comps).map(|(a, b)| a - b))
    };
    let admissible = |v: &[f64]| -> bool {
        s.in_domain(x, v)
            && classify_vector(s, &Vector::new(x.to_vec(), v.to_vec())).is_future_timelike()
    };
    let mut v: Vec<f64> = xhat.iter().map(|a| a * scale).collect();
    let mut r = residual(&v);
    let mut iters = 0;
    while r.norm() > tol {
        if iters >= NEWTON_MAX_ITER {
            return Err(Error::NoConvergence {
                what: "legendre_inverse",
                iterations: iters,
                residual: r.norm(),
            });
        }
        iters += 1;
        let g = to_dmatrix(&metric_generic(s, x, &v));
        let step = g
            .lu()
            .solve(&(-&r))
            .ok_or(Error::SingularMetric { det: 0.0 })?;
        let mut lambda = 1.0;
        loop {
            let cand: Vec<f64> = v
                .iter()
                .zip(step.iter())
                .map(|(a, d)| a + lambda * d)
                .collect();
            if admissible(&cand) {
                let rc = residual(&cand);
                if rc.norm() < r.norm() || rc.norm() <= tol {
                    v = cand;
                    r = rc;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-12 {
                return Err(Error::NoConvergence {
                    what: "legendre_inverse (line search)",
                    iterations: iters,
                    residual: r.norm(),
                });
            }
        }
    }
    if !admissible(&v) {
        return Err(Error::NotTimelike(format!("{v:?}")));
    }
    Ok(Vector::new(x.to_vec(), v))
}

/// Re-express an already converged `ℒ*(ζ)` at a higher scalar depth so
/// that derivatives with respect to `x` and `ζ` flow through it. Two Newton
/// steps from the converged root make first and second derivatives exact.
pub fn legendre_inverse_lift<S: FinslerStructure, T: Scalar>(
    s: &S,
    x: &[T],
    zeta: &[T],
    root: &[f64],
) -> Vec<T> {
    let mut v: Vec<T> = root.iter().map(|&a| T::cst(a)).collect();
    for _ in 0..2 {
        let dl = grad_v(s, x, &v);
        let r: Vec<T> = dl.iter().zip(zeta).map(|(&a, &b)| b - a).collect();
        let g = metric_generic(s, x, &v);
        let step = autodiff::solve(g, r).expect("metric singular at converged Legendre root");
        for (vi, di) in v.iter_mut().zip(step) {
            *vi += di;
        }
    }
    v
}

/// `L*(ζ) = L(ℒ*(ζ))`.
pub fn dual_lagrangian<S: FinslerStructure>(s: &S, zeta: &Covector) -> Result<f64> {
    let v = legendre_inverse(s, zeta)?;
    Ok(s.lagrangian(v.x(), &v.comps))
}

/// `F*(ζ) = sqrt(-2 L*(ζ))`.
pub fn dual_norm<S: FinslerStructure>(s: &S, zeta: &Covector) -> Result<f64> {
    Ok((-2.0 * dual_lagrangian(s, zeta)?).sqrt())
}

/// Dual exponent `p = q/(q-1)`.
pub fn dual_exponent(q: f64) -> f64 {
    q / (q - 1.0)
}

fn check_q(q: f64, allow_one: bool) -> Result<()> {
    let ok = q > 0.0 && (q < 1.0 || (allow_one && q == 1.0));
    if ok {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "q = {q} outside admissible range"
        )))
    }
}

/// `𝓛_q(v) = -F(v)^q / q` on future causal vectors and zero, `+inf`
/// otherwise.
pub fn q_lagrangian<S: FinslerStructure>(s: &S, v: &Vector, q: f64) -> Result<f64> {
    check_vector(s, v)?;
    check_q(q, true)?;
    let class = classify_vector(s, v);
    match class.kind {
        CausalKind::Zero => Ok(0.0),
        _ if class.is_future_causal() => Ok(-f_norm(s, v)?.powf(q) / q),
        _ => Ok(f64::INFINITY),
    }
}

/// `ℋ_q(ζ)`: `-F*(ζ)^p / p` on the polar cone for `q < 1`; for `q = 1` the
/// indicator of `{L* <= -1/2}`.
pub fn q_hamiltonian<S: FinslerStructure>(s: &S, zeta: &Covector, q: f64) -> Result<f64> {
    check_q(q, true)?;
    let lstar = match dual_lagrangian(s, zeta) {
        Ok(l) => l,
        Err(Error::DimensionMismatch { expected, got }) => {
            return Err(Error::DimensionMismatch { expected, got })
        }
        Err(_) => return Ok(f64::INFINITY),
    };
    if q == 1.0 {
        return Ok(if lstar <= -0.5 { 0.0 } else { f64::INFINITY });
    }
    let p = dual_exponent(q);
    let fstar = (-2.0 * lstar).sqrt();
    Ok(-fstar.powf(p) / p)
}

/// `d𝓛_q(v) = F(v)^{q-2} ℒ(v)`.
pub fn q_momentum<S: FinslerStructure>(s: &S, v: &Vector, q: f64) -> Result<Covector> {
    let f = f_norm(s, v)?;
    let mut z = legendre_map(s, v)?;
    let k = f.powf(q - 2.0);
    z.comps.iter_mut().for_each(|a| *a *= k);
    Ok(z)
}

/// `dℋ_q(ζ) = F*(ζ)^{p-2} ℒ*(ζ)`, the inverse of [`q_momentum`].
pub fn q_velocity<S: FinslerStructure>(s: &S, zeta: &Covector, q: f64) -> Result<Vector> {
    let v = legendre_inverse(s, zeta)?;
    let fstar = (-2.0 * s.lagrangian(v.x(), &v.comps)).sqrt();
    Ok(v.scaled(fstar.powf(dual_exponent(q) - 2.0)))
}

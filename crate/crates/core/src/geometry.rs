//! Chern connection, geodesics, curvature and Jacobi fields.
//!
//! Everything here is derived from the Lagrangian alone through nested dual
//! numbers: the spray needs second derivatives of `L`, the curvature
//! endomorphism needs fourth.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::autodiff::{self, Dual, Scalar};
use crate::error::{Error, Result};
use crate::finsler::{
    check_dim, classify_vector, metric_generic, to_dmatrix, CausalKind, FinslerStructure, Point,
    Vector, SINGULAR_DET_TOL,
};

type D2<T> = Dual<Dual<T>>;

fn d2<T: Scalar>(val: T, inner: T, outer: T) -> D2<T> {
    Dual::new(Dual::new(val, inner), Dual::new(outer, T::zero()))
}

/// Geodesic spray `G^α(x, v) = ½ g^{αλ}(∂²L/∂v^λ∂x^β v^β - ∂L/∂x^λ)`.
pub fn spray<S: FinslerStructure, T: Scalar>(s: &S, x: &[T], v: &[T]) -> Vec<T> {
    let n = x.len();
    let zero = T::zero();
    let one = T::one();
    let mut hvv = vec![vec![zero; n]; n];
    let mut hvx = vec![vec![zero; n]; n];
    let mut dldx = vec![zero; n];
    for lam in 0..n {
        let vin: Vec<D2<T>> = (0..n)
            .map(|i| d2(v[i], if i == lam { one } else { zero }, zero))
            .collect();
        let xc: Vec<D2<T>> = x.iter().map(|&a| d2(a, zero, zero)).collect();
        for mu in lam..n {
            let vv: Vec<D2<T>> = (0..n)
                .map(|i| {
                    d2(
                        v[i],
                        if i == lam { one } else { zero },
                        if i == mu { one } else { zero },
                    )
                })
                .collect();
            let r = s.lagrangian(&xc, &vv);
            hvv[lam][mu] = r.du.du;
            hvv[mu][lam] = r.du.du;
        }
        for beta in 0..n {
            let xs: Vec<D2<T>> = (0..n)
                .map(|i| d2(x[i], zero, if i == beta { one } else { zero }))
                .collect();
            let r = s.lagrangian(&xs, &vin);
            hvx[lam][beta] = r.du.du;
            if lam == 0 {
                dldx[beta] = r.du.re;
            }
        }
    }
    let rhs: Vec<T> = (0..n)
        .map(|lam| {
            let mut acc = -dldx[lam];
            for beta in 0..n {
                acc += hvx[lam][beta] * v[beta];
            }
            acc.scale(0.5)
        })
        .collect();
    autodiff::solve(hvv, rhs).unwrap_or_else(|| vec![T::cst(f64::NAN); n])
}

/// `N^α_β = ∂G^α/∂v^β`.
pub fn nonlinear_connection<S: FinslerStructure, T: Scalar>(
    s: &S,
    x: &[T],
    v: &[T],
) -> Vec<Vec<T>> {
    let n = x.len();
    let xl = autodiff::lift(x);
    let mut out = vec![vec![T::zero(); n]; n];
    for beta in 0..n {
        let g = spray(s, &xl, &autodiff::seed_axis(v, beta));
        for alpha in 0..n {
            out[alpha][beta] = g[alpha].du;
        }
    }
    out
}

/// Connection coefficients at a reference vector.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConnectionData {
    pub at: Vector,
    pub spray: Vec<f64>,
    pub nonlinear_conn: DMatrix<f64>,
    /// `chern[α][(β, δ)] = Γ^α_{βδ}`.
    pub chern: Vec<DMatrix<f64>>,
}

fn require_nonspacelike<S: FinslerStructure>(s: &S, v: &Vector) -> Result<()> {
    check_dim(s, v.base.dim())?;
    check_dim(s, v.comps.len())?;
    match classify_vector(s, v).kind {
        CausalKind::Timelike => Ok(()),
        _ => Err(Error::NotTimelike(format!("{:?}", v.comps))),
    }
}

fn metric_derivatives<S: FinslerStructure>(
    s: &S,
    x: &[f64],
    v: &[f64],
    wrt_x: bool,
) -> Vec<DMatrix<f64>> {
    let n = x.len();
    (0..n)
        .map(|k| {
            let m = if wrt_x {
                metric_generic(s, &autodiff::seed_axis(x, k), &autodiff::lift(v))
            } else {
                metric_generic(s, &autodiff::lift(x), &autodiff::seed_axis(v, k))
            };
            DMatrix::from_fn(n, n, |i, j| m[i][j].du)
        })
        .collect()
}

/// Spray, nonlinear connection and Chern connection coefficients at the
/// timelike reference vector `v`.
pub fn connection_at<S: FinslerStructure>(s: &S, v: &Vector) -> Result<ConnectionData> {
    require_nonspacelike(s, v)?;
    let (x, w) = (v.x(), &v.comps[..]);
    let n = x.len();
    let g = to_dmatrix(&metric_generic(s, x, w));
    let det = g.determinant();
    if det.abs() < SINGULAR_DET_TOL {
        return Err(Error::SingularMetric { det });
    }
    let ginv = g.try_inverse().ok_or(Error::SingularMetric { det })?;
    let dgx = metric_derivatives(s, x, w, true);
    let dgv = metric_derivatives(s, x, w, false);
    let nmat = to_dmatrix(&nonlinear_connection(s, x, w));
    let mut chern = vec![DMatrix::zeros(n, n); n];
    for alpha in 0..n {
        for beta in 0..n {
            for delta in 0..n {
                let mut acc = 0.0;
                for lam in 0..n {
                    let mut bar =
                        dgx[beta][(lam, delta)] + dgx[delta][(beta, lam)] - dgx[lam][(beta, delta)];
                    for mu in 0..n {
                        bar -= dgv[mu][(lam, delta)] * nmat[(mu, beta)]
                            + dgv[mu][(beta, lam)] * nmat[(mu, delta)]
                            - dgv[mu][(beta, delta)] * nmat[(mu, lam)];
                    }
                    acc += ginv[(alpha, lam)] * bar;
                }
                chern[alpha][(beta, delta)] = 0.5 * acc;
            }
        }
    }
    Ok(ConnectionData {
        at: v.clone(),
        spray: spray(s, x, w),
        nonlinear_conn: nmat,
        chern,
    })
}

/// Sampled solution of the geodesic equation on a uniform grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeodesicSegment {
    pub times: Vec<f64>,
    pub points: Vec<Point>,
    pub tangents: Vec<Vector>,
    /// `∫ 𝓛_q(γ̇) dt` when requested by the caller.
    pub action_q: Option<f64>,
}

impl GeodesicSegment {
    pub fn endpoint(&self) -> &Point {
        self.points.last().expect("segment has at least two nodes")
    }

    pub fn step(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    /// `F(γ̇)` per node.
    pub fn speeds<S: FinslerStructure>(&self, s: &S) -> Vec<f64> {
        self.tangents
            .iter()
            .map(|v| (-2.0 * s.lagrangian(v.x(), &v.comps)).max(0.0).sqrt())
            .collect()
    }

    /// `max_t |F(γ̇(t)) - F(γ̇(0))|`.
    pub fn speed_drift<S: FinslerStructure>(&self, s: &S) -> f64 {
        let sp = self.speeds(s);
        sp.iter().map(|a| (a - sp[0]).abs()).fold(0.0, f64::max)
    }

    /// Length `∫ F(γ̇) dt` by the trapezoidal rule.
    pub fn length<S: FinslerStructure>(&self, s: &S) -> f64 {
        let sp = self.speeds(s);
        self.times
            .windows(2)
            .zip(sp.windows(2))
            .map(|(t, f)| 0.5 * (t[1] - t[0]) * (f[0] + f[1]))
            .sum()
    }

    /// Sets `action_q = ∫ -F(γ̇)^q/q dt`.
    pub fn with_action<S: FinslerStructure>(mut self, s: &S, q: f64) -> Self {
        let sp = self.speeds(s);
        let a = self
            .times
            .windows(2)
            .zip(sp.windows(2))
            .map(|(t, f)| -0.5 * (t[1] - t[0]) * (f[0].powf(q) + f[1].powf(q)) / q)
            .sum();
        self.action_q = Some(a);
        self
    }
}

fn axpy<T: Scalar>(a: &[T], h: f64, d: &[T]) -> Vec<T> {
    a.iter().zip(d).map(|(&p, &q)| p + q.scale(h)).collect()
}

/// One classical RK4 step of `ẋ = v, v̇ = -2G(x, v)`.
pub fn rk4_step<S: FinslerStructure, T: Scalar>(
    s: &S,
    x: &[T],
    v: &[T],
    h: f64,
) -> (Vec<T>, Vec<T>) {
    let acc = |x: &[T], v: &[T]| -> Vec<T> {
        spray(s, x, v).into_iter().map(|g| g.scale(-2.0)).collect()
    };
    let k1x = v.to_vec();
    let k1v = acc(x, v);
    let (x2, v2) = (axpy(x, 0.5 * h, &k1x), axpy(v, 0.5 * h, &k1v));
    let k2v = acc(&x2, &v2);
    let (x3, v3) = (axpy(x, 0.5 * h, &v2), axpy(v, 0.5 * h, &k2v));
    let k3v = acc(&x3, &v3);
    let (x4, v4) = (axpy(x, h, &v3), axpy(v, h, &k3v));
    let k4v = acc(&x4, &v4);
    let comb = |base: &[T], k1: &[T], k2: &[T], k3: &[T], k4: &[T]| -> Vec<T> {
        (0..base.len())
            .map(|i| base[i] + (k1[i] + (k2[i] + k3[i]).scale(2.0) + k4[i]).scale(h / 6.0))
            .collect()
    };
    (
        comb(x, &k1x, &v2, &v3, &v4),
        comb(v, &k1v, &k2v, &k3v, &k4v),
    )
}

fn guard<S: FinslerStructure>(s: &S, x: &[f64], v: &[f64], t: f64) -> Result<()> {
    if !x.iter().chain(v).all(|a| a.is_finite()) || !s.chart_contains(x) {
        return Err(Error::BlowUp { t });
    }
    if !s.in_domain(x, v) || !(s.lagrangian(x, v) < 0.0) {
        return Err(Error::CausalityLost { t });
    }
    Ok(())
}

/// Endpoint `(γ(T), γ̇(T))` of the geodesic with initial data `(x, v)`, at any
/// scalar depth, so that derivatives of the endpoint map flow through.
pub fn geodesic_endpoint<S: FinslerStructure, T: Scalar>(
    s: &S,
    x: &[T],
    v: &[T],
    total: f64,
    steps: usize,
) -> Result<(Vec<T>, Vec<T>)> {
    let h = total / steps as f64;
    let (mut x, mut v) = (x.to_vec(), v.to_vec());
    for k in 0..steps {
        (x, v) = rk4_step(s, &x, &v, h);
        let xr: Vec<f64> = x.iter().map(|a| a.re()).collect();
        let vr: Vec<f64> = v.iter().map(|a| a.re()).collect();
        guard(s, &xr, &vr, (k + 1) as f64 * h)?;
    }
    Ok((x, v))
}

/// Minimum step count accepted by [`exp_geodesic`].
pub const MIN_STEPS: usize = 16;

/// Integrates the geodesic with initial velocity `v` over `[0, total]` with
/// fixed-step RK4.
pub fn exp_geodesic<S: FinslerStructure>(
    s: &S,
    v: &Vector,
    total: f64,
    steps: usize,
) -> Result<GeodesicSegment> {
    check_dim(s, v.base.dim())?;
    check_dim(s, v.comps.len())?;
    if steps < MIN_STEPS {
        return Err(Error::Parameter(format!("steps = {steps} < {MIN_STEPS}")));
    }
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::Parameter(format!(
            "integration time {total} must be positive"
        )));
    }
    if !classify_vector(s, v).is_future_timelike() {
        return Err(Error::NotTimelike(format!("{:?}", v.comps)));
    }
    let h = total / steps as f64;
    let (mut x, mut w) = (v.x().to_vec(), v.comps.clone());
    guard(s, &x, &w, 0.0)?;
    let mut seg = GeodesicSegment {
        times: Vec::with_capacity(steps + 1),
        points: Vec::with_capacity(steps + 1),
        tangents: Vec::with_capacity(steps + 1),
        action_q: None,
    };
    seg.times.push(0.0);
    seg.points.push(Point(x.clone()));
    seg.tangents.push(Vector::new(x.clone(), w.clone()));
    for k in 1..=steps {
        (x, w) = rk4_step(s, &x, &w, h);
        let t = k as f64 * h;
        guard(s, &x, &w, t)?;
        seg.times.push(t);
        seg.points.push(Point(x.clone()));
        seg.tangents.push(Vector::new(x.clone(), w.clone()));
    }
    Ok(seg)
}

/// Default step count for the exponential map.
pub const EXP_STEPS: usize = 200;

/// `exp_x(v)`: the geodesic endpoint at time 1. Flat models use the straight
/// line.
pub fn exp_map<S: FinslerStructure>(s: &S, v: &Vector) -> Result<Point> {
    if s.is_flat() {
        check_dim(s, v.comps.len())?;
        return Ok(Point(
            v.x().iter().zip(&v.comps).map(|(a, b)| a + b).collect(),
        ));
    }
    Ok(exp_geodesic(s, v, 1.0, EXP_STEPS)?.endpoint().clone())
}

/// Matrix `R^α_β(v)` of the curvature endomorphism at `(x, v)`.
pub fn curvature_matrix<S: FinslerStructure>(s: &S, x: &[f64], v: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let g0 = spray(s, x, v);
    let nmat = to_dmatrix(&nonlinear_connection(s, x, v));
    let mut r = DMatrix::zeros(n, n);
    for beta in 0..n {
        let e = |i: usize| if i == beta { 1.0 } else { 0.0 };
        // ∂N^α_β/∂x^δ v^δ
        let xa: Vec<D2<f64>> = (0..n).map(|i| d2(x[i], 0.0, v[i])).collect();
        let vb: Vec<D2<f64>> = (0..n).map(|i| d2(v[i], e(i), 0.0)).collect();
        let a = spray(s, &xa, &vb);
        // ∂N^α_β/∂v^δ G^δ
        let xc: Vec<D2<f64>> = (0..n).map(|i| d2(x[i], 0.0, 0.0)).collect();
        let vg: Vec<D2<f64>> = (0..n).map(|i| d2(v[i], e(i), g0[i])).collect();
        let b = spray(s, &xc, &vg);
        // ∂G^α/∂x^β
        let c = spray(s, &autodiff::seed_axis(x, beta), &autodiff::lift(v));
        for alpha in 0..n {
            let nn: f64 = (0..n).map(|d| nmat[(alpha, d)] * nmat[(d, beta)]).sum();
            r[(alpha, beta)] = 2.0 * c[alpha].du - a[alpha].du.du + 2.0 * b[alpha].du.du - nn;
        }
    }
    r
}

/// `R_v(w)`.
pub fn curvature_endomorphism<S: FinslerStructure>(s: &S, v: &Vector, w: &[f64]) -> Result<Vector> {
    require_nonspacelike(s, v)?;
    check_dim(s, w.len())?;
    let r = curvature_matrix(s, v.x(), &v.comps);
    let out = &r * nalgebra::DVector::from_column_slice(w);
    Ok(Vector::new(v.x().to_vec(), out.as_slice().to_vec()))
}

/// `Ric(v) = trace R_v`.
pub fn ricci<S: FinslerStructure>(s: &S, v: &Vector) -> Result<f64> {
    require_nonspacelike(s, v)?;
    Ok(curvature_matrix(s, v.x(), &v.comps).trace())
}

/// Jacobi matrices along a geodesic in a parallel `g_γ̇`-orthonormal frame.
///
/// Row `i` of `j[k]` holds the frame components of the `i`-th Jacobi field at
/// node `k`; `frames[k]` holds the frame vectors as columns, the first being
/// `γ̇/F(γ̇)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JacobiFrame {
    pub along: GeodesicSegment,
    pub frames: Vec<DMatrix<f64>>,
    pub j: Vec<DMatrix<f64>>,
    pub jp: Vec<DMatrix<f64>>,
    pub reorthonormalizations: usize,
}

/// Pairing error beyond which the frame is re-orthonormalized.
pub const FRAME_REORTHO_TOL: f64 = 1e-9;
/// Pairing error beyond which the frame is declared degenerate.
pub const FRAME_FAIL_TOL: f64 = 1e-3;

fn signature_diag(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| match (i == j, i) {
        (true, 0) => -1.0,
        (true, _) => 1.0,
        _ => 0.0,
    })
}

/// `g`-orthonormal basis by modified Gram–Schmidt on `cands`, starting with
/// the timelike unit vector `lead`.
fn g_orthonormalize(g: &DMatrix<f64>, lead: &[f64], cands: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = lead.len();
    let ip = |a: &[f64], b: &[f64]| crate::finsler::g_pair(g, a, b);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    let nl = (-ip(lead, lead)).sqrt();
    basis.push(lead.iter().map(|a| a / nl).collect());
    for c in cands {
        if basis.len() == n {
            break;
        }
        let mut u = c.clone();
        for b in &basis {
            let coef = ip(&u, b) / ip(b, b);
            for (ui, bi) in u.iter_mut().zip(b) {
                *ui -= coef * bi;
            }
        }
        let nu = ip(&u, &u);
        if nu > 1e-10 {
            let k = nu.sqrt();
            basis.push(u.iter().map(|a| a / k).collect());
        }
    }
    if basis.len() < n {
        return Err(Error::FrameDegeneracy { err: f64::INFINITY });
    }
    Ok(DMatrix::from_fn(n, n, |i, j| basis[j][i]))
}

struct JacobiState {
    x: Vec<f64>,
    v: Vec<f64>,
    e: DMatrix<f64>,
    j: DMatrix<f64>,
    jp: DMatrix<f64>,
}

impl JacobiState {
    fn derivative<S: FinslerStructure>(&self, s: &S) -> Result<JacobiState> {
        let acc: Vec<f64> = spray(s, &self.x, &self.v)
            .iter()
            .map(|g| -2.0 * g)
            .collect();
        let nmat = to_dmatrix(&nonlinear_connection(s, &self.x, &self.v));
        let rc = curvature_matrix(s, &self.x, &self.v);
        let einv = self
            .e
            .clone()
            .try_inverse()
            .ok_or(Error::FrameDegeneracy { err: f64::INFINITY })?;
        let rm = (einv * rc * &self.e).transpose();
        Ok(JacobiState {
            x: self.v.clone(),
            v: acc,
            e: -(nmat * &self.e),
            j: self.jp.clone(),
            jp: -(&self.j * rm),
        })
    }

    fn add(&self, h: f64, d: &JacobiState) -> JacobiState {
        JacobiState {
            x: axpy(&self.x, h, &d.x),
            v: axpy(&self.v, h, &d.v),
            e: &self.e + &d.e * h,
            j: &self.j + &d.j * h,
            jp: &self.jp + &d.jp * h,
        }
    }
}

/// Propagates `J'' = -J·R(t)` along `gamma`, where `R(t)` is the curvature
/// endomorphism in the parallel frame, with fixed-step RK4 on the grid of
/// `gamma`.
pub fn jacobi_propagate<S: FinslerStructure>(
    s: &S,
    gamma: &GeodesicSegment,
    j0: &DMatrix<f64>,
    jp0: &DMatrix<f64>,
) -> Result<JacobiFrame> {
    let n = s.dim();
    if j0.shape() != (n, n) || jp0.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: j0.nrows(),
        });
    }
    if gamma.times.len() < 2 {
        return Err(Error::Parameter(
            "geodesic segment needs at least two nodes".into(),
        ));
    }
    let v0 = &gamma.tangents[0];
    require_nonspacelike(s, v0)?;
    let eta = signature_diag(n);
    let coord: Vec<Vec<f64>> = (0..n)
        .map(|k| (0..n).map(|i| if i == k { 1.0 } else { 0.0 }).collect())
        .collect();
    let g0 = to_dmatrix(&metric_generic(s, v0.x(), &v0.comps));
    let mut st = JacobiState {
        x: v0.x().to_vec(),
        v: v0.comps.clone(),
        e: g_orthonormalize(&g0, &v0.comps, &coord)?,
        j: j0.clone(),
        jp: jp0.clone(),
    };
    let h = gamma.step();
    let mut out = JacobiFrame {
        along: gamma.clone(),
        frames: vec![st.e.clone()],
        j: vec![st.j.clone()],
        jp: vec![st.jp.clone()],
        reorthonormalizations: 0,
    };
    for k in 1..gamma.times.len() {
        let k1 = st.derivative(s)?;
        let k2 = st.add(0.5 * h, &k1).derivative(s)?;
        let k3 = st.add(0.5 * h, &k2).derivative(s)?;
        let k4 = st.add(h, &k3).derivative(s)?;
        let mut next = st.add(h / 6.0, &k1);
        next = next.add(h / 3.0, &k2);
        next = next.add(h / 3.0, &k3);
        next = next.add(h / 6.0, &k4);
        guard(s, &next.x, &next.v, gamma.times[k])?;
        let g = to_dmatrix(&metric_generic(s, &next.x, &next.v));
        let err = (next.e.transpose() * &g * &next.e - &eta).amax();
        if err > FRAME_FAIL_TOL {
            return Err(Error::FrameDegeneracy { err });
        }
        if err > FRAME_REORTHO_TOL {
            let cols: Vec<Vec<f64>> = (1..n)
                .map(|c| next.e.column(c).iter().copied().collect())
                .collect();
            let fresh = g_orthonormalize(&g, &next.v, &cols)?;
            let finv = fresh
                .clone()
                .try_inverse()
                .ok_or(Error::FrameDegeneracy { err })?;
            let change = finv * &next.e;
            next.j = &next.j * change.transpose();
            next.jp = &next.jp * change.transpose();
            next.e = fresh;
            out.reorthonormalizations += 1;
        }
        out.frames.push(next.e.clone());
        out.j.push(next.j.clone());
        out.jp.push(next.jp.clone());
        st = next;
    }
    Ok(out)
}

/// Riccati trace identity residual `tr B' + tr B² + Ric(γ̇)` per node, with
/// `B = J'J⁻¹`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RiccatiResidual {
    pub times: Vec<f64>,
    /// `B'` from second-order finite differences of `B` on the grid.
    pub finite_difference: Vec<f64>,
    /// `B'` from the Jacobi equation, `B' = -J R J⁻¹ - B²`.
    pub ode: Vec<f64>,
}

impl RiccatiResidual {
    pub fn max_ode(&self) -> f64 {
        self.ode.iter().map(|a| a.abs()).fold(0.0, f64::max)
    }
    pub fn max_finite_difference(&self) -> f64 {
        self.finite_difference
            .iter()
            .map(|a| a.abs())
            .fold(0.0, f64::max)
    }
    pub fn max_abs(&self) -> f64 {
        self.max_ode().max(self.max_finite_difference())
    }
}

pub fn riccati_residual<S: FinslerStructure>(
    s: &S,
    frame: &JacobiFrame,
) -> Result<RiccatiResidual> {
    let times = &frame.along.times;
    let m = times.len();
    if m < 3 {
        return Err(Error::Parameter(
            "Riccati residual needs at least three nodes".into(),
        ));
    }
    let h = frame.along.step();
    let mut bs = Vec::with_capacity(m);
    for k in 0..m {
        let d = frame.j[k].determinant();
        if d.abs() < 1e-12 {
            return Err(Error::SingularJacobi { t: times[k] });
        }
        let jinv = frame.j[k]
            .clone()
            .try_inverse()
            .ok_or(Error::SingularJacobi { t: times[k] })?;
        bs.push((&frame.jp[k] * &jinv, jinv));
    }
    let mut fd = Vec::with_capacity(m);
    let mut ode = Vec::with_capacity(m);
    for k in 0..m {
        let tang = &frame.along.tangents[k];
        let rc = curvature_matrix(s, tang.x(), &tang.comps);
        let ric = rc.trace();
        let (b, jinv) = &bs[k];
        let b2 = (b * b).trace();
        let dtrace = if k == 0 {
            (-3.0 * bs[0].0.trace() + 4.0 * bs[1].0.trace() - bs[2].0.trace()) / (2.0 * h)
        } else if k == m - 1 {
            (3.0 * bs[m - 1].0.trace() - 4.0 * bs[m - 2].0.trace() + bs[m - 3].0.trace())
                / (2.0 * h)
        } else {
            (bs[k + 1].0.trace() - bs[k - 1].0.trace()) / (2.0 * h)
        };
        fd.push(dtrace + b2 + ric);
        let e = &frame.frames[k];
        let einv = e
            .clone()
            .try_inverse()
            .ok_or(Error::FrameDegeneracy { err: f64::INFINITY })?;
        let rm = (einv * rc * e).transpose();
        let bprime = -(&frame.j[k] * rm * jinv) - b * b;
        ode.push(bprime.trace() + b2 + ric);
    }
    Ok(RiccatiResidual {
        times: times.clone(),
        finite_difference: fd,
        ode,
    })
}

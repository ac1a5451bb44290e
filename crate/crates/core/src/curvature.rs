//! Weight derivatives along geodesics, weighted Ricci curvature `Ric_N`,
//! the distortion coefficients `s_κ` and `τ_{K,N}`, and the timelike
//! measure-contraction checker.

use serde::{Deserialize, Serialize};

use crate::autodiff::{self, Dual, Scalar};
use crate::distance::{intermediate_point, time_separation, z_t_membership, Membership};
use crate::error::{Error, Result};
use crate::finsler::{check_dim, classify_vector, FinslerStructure, Point, Vector};
use crate::geometry::{ricci, rk4_step, spray, GeodesicSegment};
use crate::montecarlo::{self, sample_batches};
use crate::region::Region;

/// `ψ_γ` and its first two derivatives at one parameter value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeightDerivatives {
    pub psi: f64,
    pub psi_prime: f64,
    pub psi_second: f64,
}

/// `d/dt ψ(γ, γ̇) = ∂_x ψ·v - 2 ∂_v ψ·G` at any scalar depth.
fn psi_dot<S: FinslerStructure, T: Scalar>(s: &S, x: &[T], v: &[T]) -> T {
    let g = spray(s, x, v);
    let xd = autodiff::seed(x, v);
    let vd: Vec<Dual<T>> = v
        .iter()
        .zip(&g)
        .map(|(&a, &gi)| Dual::new(a, gi.scale(-2.0)))
        .collect();
    s.weight(&xd, &vd).du
}

/// Weight derivatives at time 0 of the geodesic with initial data `(x, v)`.
/// Second derivatives of the path are eliminated through `γ̈ = -2G`.
pub fn weight_derivatives_at<S: FinslerStructure>(
    s: &S,
    x: &[f64],
    v: &[f64],
) -> WeightDerivatives {
    let g = spray(s, x, v);
    let acc: Vec<f64> = g.iter().map(|a| -2.0 * a).collect();
    WeightDerivatives {
        psi: s.weight(x, v),
        psi_prime: psi_dot(s, x, v),
        psi_second: psi_dot(s, &autodiff::seed(x, v), &autodiff::seed(v, &acc)).du,
    }
}

/// Weight derivatives at parameter `t` of an integrated geodesic. Off-grid
/// times are reached by one RK4 step from the preceding node.
pub fn weight_derivatives<S: FinslerStructure>(
    s: &S,
    gamma: &GeodesicSegment,
    t: f64,
) -> Result<WeightDerivatives> {
    let last = *gamma
        .times
        .last()
        .ok_or_else(|| Error::Parameter("empty geodesic".into()))?;
    if !(0.0..=last).contains(&t) {
        return Err(Error::Parameter(format!("t = {t} outside [0, {last}]")));
    }
    let k = gamma.times.partition_point(|&a| a <= t).saturating_sub(1);
    let (x, v) = (gamma.points[k].coords(), &gamma.tangents[k].comps);
    let h = t - gamma.times[k];
    if h == 0.0 {
        return Ok(weight_derivatives_at(s, x, v));
    }
    let (x1, v1) = rk4_step(s, x, v, h);
    Ok(weight_derivatives_at(s, &x1, &v1))
}

/// `Ric_N(v) = Ric(v) + ψ''(0) - ψ'(0)²/(N - n)`. `N = +∞` drops the last
/// term; `N = n` is the monotone limit, `-∞` unless `ψ'(0) = 0`.
pub fn weighted_ricci<S: FinslerStructure>(s: &S, v: &Vector, n_eff: f64) -> Result<f64> {
    let n = s.dim() as f64;
    check_dim(s, v.comps.len())?;
    if n_eff.is_nan() || (n_eff > 0.0 && n_eff < n) {
        return Err(Error::Parameter(format!("N = {n_eff} lies in (0, {n})")));
    }
    if !classify_vector(s, v).is_future_timelike() {
        return Err(Error::NotTimelike(format!("{:?}", v.comps)));
    }
    let ric = ricci(s, v)?;
    let w = weight_derivatives_at(s, v.x(), &v.comps);
    let base = ric + w.psi_second;
    if n_eff == f64::INFINITY {
        return Ok(base);
    }
    if n_eff == n {
        return Ok(if w.psi_prime.abs() > WEIGHT_SLOPE_TOL {
            f64::NEG_INFINITY
        } else {
            base
        });
    }
    Ok(base - w.psi_prime.powi(2) / (n_eff - n))
}

/// `|ψ'|` below which the `N = n` limit is finite.
pub const WEIGHT_SLOPE_TOL: f64 = 1e-12;

/// Curvature and dimension parameters of a comparison inequality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonParams {
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "N", with = "crate::ext::serde_real")]
    pub n: f64,
    pub q: f64,
    pub t: f64,
}

impl ComparisonParams {
    /// Checks `K` finite, `N ∈ (-∞, 0] ∪ [dim, +∞]`, `q ∈ (0, 1)`, `t ∈ [0, 1]`.
    pub fn validate(&self, dim: usize) -> Result<()> {
        if !self.k.is_finite() {
            return Err(Error::Parameter(format!("K = {} must be finite", self.k)));
        }
        if self.n.is_nan() || self.n == f64::NEG_INFINITY || (self.n > 0.0 && self.n < dim as f64) {
            return Err(Error::Parameter(format!(
                "N = {} outside (-inf, 0] ∪ [{dim}, +inf]",
                self.n
            )));
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(Error::Parameter(format!("q = {} outside (0, 1)", self.q)));
        }
        if !(0.0..=1.0).contains(&self.t) {
            return Err(Error::Parameter(format!("t = {} outside [0, 1]", self.t)));
        }
        Ok(())
    }
}

/// `s_κ(r)`: `sin(√κ r)/√κ`, `r` or `sinh(√-κ r)/√-κ` by the sign of `κ`.
pub fn s_kappa(kappa: f64, r: f64) -> Result<f64> {
    if kappa > 0.0 {
        let rk = kappa.sqrt();
        if r < 0.0 || r > std::f64::consts::PI / rk {
            return Err(Error::Domain(format!(
                "r = {r} outside [0, π/√κ] for κ = {kappa}"
            )));
        }
        Ok((rk * r).sin() / rk)
    } else if kappa == 0.0 {
        Ok(r)
    } else {
        let rk = (-kappa).sqrt();
        Ok((rk * r).sinh() / rk)
    }
}

/// `τ^{(t)}_{K,N}(r) = t^{1/N} (s_κ(tr)/s_κ(r))^{(N-1)/N}` with `κ = K/(N-1)`
/// and `τ(0) = t`. For `N < 0` and `r` beyond the range of `s_κ` the value
/// is `+∞`; for `N > 1` that range is a domain error.
pub fn tau_coefficient(k: f64, n_eff: f64, t: f64, r: f64) -> Result<f64> {
    if !(n_eff < 0.0 || (n_eff > 1.0 && n_eff.is_finite())) {
        return Err(Error::Parameter(format!(
            "N = {n_eff} outside (-inf, 0) ∪ (1, inf)"
        )));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Parameter(format!("t = {t} outside [0, 1]")));
    }
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("r = {r} must be nonnegative")));
    }
    if r == 0.0 || k == 0.0 {
        return Ok(t);
    }
    let kappa = k / (n_eff - 1.0);
    if kappa > 0.0 && r >= std::f64::consts::PI / kappa.sqrt() {
        return if n_eff < 0.0 {
            Ok(f64::INFINITY)
        } else {
            Err(Error::Domain(format!(
                "r = {r} beyond π√((N-1)/K) for K = {k}, N = {n_eff}"
            )))
        };
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let ratio = s_kappa(kappa, t * r)? / s_kappa(kappa, r)?;
    Ok(t.powf(1.0 / n_eff) * ratio.powf((n_eff - 1.0) / n_eff))
}

/// Sides of `m[Z_t(x, B)] >= inf_B τ^{(t)}(l(x, ·))^N m[B]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McpReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs - rhs`; the inequality holds when `slack >= -3·stderr`.
    pub slack: f64,
    pub stderr: f64,
    /// Sampled minimum of `τ^N` over `B`.
    pub tau_min: f64,
    pub mass_b: f64,
    /// Fraction of volume samples whose membership was undecided.
    pub inconclusive_fraction: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Relative enlargement of the sampling boxes, so that hit-or-miss volume
/// estimates keep a nonzero variance even when a set fills its bounding box.
pub const HIT_OR_MISS_PAD: f64 = 0.1;

const LHS_STREAM: u64 = 1;
const RHS_STREAM: u64 = 2;

/// Relative step of the central differences used for `det dΨ_t`.
const JACOBIAN_STEP: f64 = 1e-5;

fn box_point(lo: &[f64], hi: &[f64], u: &[f64]) -> Vec<f64> {
    lo.iter()
        .zip(hi)
        .zip(u)
        .map(|((a, b), c)| a + (b - a) * c)
        .collect()
}

/// Monte Carlo check of the timelike measure contraction inequality.
///
/// `m[B]` and `inf_B τ^N` come from one stratified sample of the padded
/// bounding box of `B`. On flat models `m[Z_t(x, B)]` is a hit-or-miss
/// estimate over the padded bounding box of `Z_t` with exact membership, drawn from an independent stream. On curved
/// models it is `∫_B ρ_m(Ψ_t(y)) det dΨ_t(y) dy` on the same sample as
/// `m[B]`, with `Ψ_t(y) = z_t(x, y)` differentiated by central differences.
#[allow(clippy::too_many_arguments)]
pub fn mcp_check<S: FinslerStructure>(
    s: &S,
    x: &Point,
    b: &Region,
    t: f64,
    k: f64,
    n_eff: f64,
    samples: usize,
    seed: u64,
) -> Result<McpReport> {
    let n = s.dim();
    check_dim(s, x.dim())?;
    b.validate(n)?;
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::Parameter(format!("t = {t} outside (0, 1]")));
    }
    if !(n_eff >= n as f64 && n_eff.is_finite()) {
        return Err(Error::Parameter(format!("N = {n_eff} outside [{n}, inf)")));
    }
    if !(b.volume() > 0.0) {
        return Err(Error::Parameter("B must have positive volume".into()));
    }
    let (blo, bhi) = b.padded_bounding_box(HIT_OR_MISS_PAD);
    let bvol = Region::boxed(blo.clone(), bhi.clone()).volume();
    let flat = s.is_flat();

    // components: m[B] integrand, -τ^N (max gives the inf), change-of-variables lhs integrand
    let rhs_table = sample_batches(n, samples, seed, RHS_STREAM, |u| {
        let y = box_point(&blo, &bhi, u);
        if !b.contains(&y) {
            return Ok(vec![0.0, f64::NEG_INFINITY, 0.0]);
        }
        let l = time_separation(s, x, &Point(y.clone()))?.value;
        if !(l > 0.0) {
            return Err(Error::Parameter(format!(
                "B is not inside I⁺(x): l(x, {y:?}) = {l}"
            )));
        }
        let tau_n = tau_coefficient(k, n_eff, t, l)?.powf(n_eff);
        let jac = if flat {
            0.0
        } else {
            bvol * contraction_density(s, x, &y, t)?
        };
        Ok(vec![bvol * s.reference_density(&y), -tau_n, jac])
    })?;
    let tau_min = -rhs_table.max(1);
    let mass_b = rhs_table.component(0);

    let (lhs, slack, inconclusive_fraction) = if flat {
        let (zlo, zhi) = b
            .affine(
                &x.coords().iter().map(|c| (1.0 - t) * c).collect::<Vec<_>>(),
                t,
            )
            .padded_bounding_box(HIT_OR_MISS_PAD);
        let zvol = Region::boxed(zlo.clone(), zhi.clone()).volume();
        let xr = Region::point(x.coords().to_vec());
        let lhs_table = sample_batches(n, samples, seed, LHS_STREAM, |u| {
            let z = box_point(&zlo, &zhi, u);
            Ok(match z_t_membership(s, &z, &xr, b, t)? {
                Membership::Inside => vec![zvol * s.reference_density(&z), 0.0],
                Membership::Outside => vec![0.0, 0.0],
                Membership::Inconclusive => vec![0.0, 1.0],
            })
        })?;
        let lhs = lhs_table.component(0);
        let stderr = lhs.stderr.hypot(tau_min * mass_b.stderr);
        let slack = lhs.mean - tau_min * mass_b.mean;
        ((lhs.mean, stderr), slack, lhs_table.component(1).mean)
    } else {
        let lhs = rhs_table.component(2);
        let diff = rhs_table.combine(|m| m[2] - tau_min * m[0]);
        ((lhs.mean, diff.stderr), diff.mean, 0.0)
    };
    Ok(McpReport {
        lhs: lhs.0,
        rhs: tau_min * mass_b.mean,
        slack,
        stderr: lhs.1,
        tau_min,
        mass_b: mass_b.mean,
        inconclusive_fraction,
        samples: rhs_table.samples(),
        seed,
    })
}

/// `ρ_m(Ψ_t(y)) |det dΨ_t(y)|` for `Ψ_t(y) = z_t(x, y)`.
fn contraction_density<S: FinslerStructure>(s: &S, x: &Point, y: &[f64], t: f64) -> Result<f64> {
    let n = y.len();
    let mut jac = vec![vec![0.0; n]; n];
    for kk in 0..n {
        let h = JACOBIAN_STEP * y[kk].abs().max(1.0);
        let mut yp = y.to_vec();
        let mut ym = y.to_vec();
        yp[kk] += h;
        ym[kk] -= h;
        let zp = intermediate_point(s, x, &Point(yp), t)?;
        let zm = intermediate_point(s, x, &Point(ym), t)?;
        for i in 0..n {
            jac[i][kk] = (zp.0[i] - zm.0[i]) / (2.0 * h);
        }
    }
    let z = intermediate_point(s, x, &Point(y.to_vec()), t)?;
    Ok(s.reference_density(z.coords()) * autodiff::det(jac).abs())
}

/// Verdict of an MCP report.
pub fn mcp_verdict(r: &McpReport) -> montecarlo::Verdict {
    montecarlo::verdict(r.slack, r.stderr, r.lhs.abs().max(r.rhs.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::exp_geodesic;
    use crate::models::{Bogoslovsky, DeSitter2d, Minkowski, WeightedMinkowski};

    #[test]
    fn weighted_minkowski_second_derivative() {
        let eps = 0.3;
        let s = WeightedMinkowski::new(3, eps).unwrap();
        let (x, w) = ([0.4, 0.1, -0.2], [1.3, 0.2, 0.5]);
        let d = weight_derivatives_at(&s, &x, &w);
        assert!((d.psi - 0.5 * eps * 0.16).abs() < 1e-15);
        assert!((d.psi_prime - eps * 0.4 * 1.3).abs() < 1e-14);
        assert!((d.psi_second - eps * 1.3 * 1.3).abs() < 1e-14);
    }

    #[test]
    fn weight_is_zero_homogeneous() {
        let s = Bogoslovsky::new(3, 0.2).unwrap();
        let (x, v) = ([0.0, 0.3, 0.1], [1.0, 0.3, -0.2]);
        let a = s.weight(&x, &v);
        let b = s.weight(&x, &[2.0, 0.6, -0.4]);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn derivatives_follow_the_geodesic() {
        let s = WeightedMinkowski::new(2, 0.5).unwrap();
        let v = Vector::new([0.1, 0.0], [1.0, 0.4]);
        let seg = exp_geodesic(&s, &v, 1.0, 64).unwrap();
        let d = weight_derivatives(&s, &seg, 0.37).unwrap();
        let x0 = 0.1 + 0.37;
        assert!((d.psi - 0.25 * x0 * x0).abs() < 1e-13);
        assert!((d.psi_prime - 0.5 * x0).abs() < 1e-13);
        assert!(weight_derivatives(&s, &seg, 1.5).is_err());
    }

    #[test]
    fn weighted_ricci_values() {
        let m = Minkowski::new(2);
        let v = Vector::new([0.0, 0.0], [1.0, 0.3]);
        for n_eff in [2.0, 5.0, f64::INFINITY, -1.0, 0.0] {
            assert!(weighted_ricci(&m, &v, n_eff).unwrap().abs() < 1e-12);
        }
        assert!(weighted_ricci(&m, &v, 1.5).is_err());
        let eps = 0.7;
        let w = WeightedMinkowski::new(2, eps).unwrap();
        let e0 = Vector::new([0.0, 0.0], [1.0, 0.0]);
        assert!((weighted_ricci(&w, &e0, f64::INFINITY).unwrap() - eps).abs() < 1e-12);
        // ψ' = 0 at x⁰ = 0 so the N = n limit stays finite
        assert!((weighted_ricci(&w, &e0, 2.0).unwrap() - eps).abs() < 1e-12);
        let off = Vector::new([0.5, 0.0], [1.0, 0.0]);
        assert_eq!(weighted_ricci(&w, &off, 2.0).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn de_sitter_ricci_is_unweighted() {
        let v = Vector::new([0.2, 0.0], [1.0, 0.3]);
        let r = ricci(&DeSitter2d, &v).unwrap();
        assert!((weighted_ricci(&DeSitter2d, &v, 4.0).unwrap() - r).abs() < 1e-12);
    }

    #[test]
    fn s_kappa_branches() {
        assert_eq!(s_kappa(0.0, 2.0).unwrap(), 2.0);
        assert!((s_kappa(1.0, std::f64::consts::FRAC_PI_2).unwrap() - 1.0).abs() < 1e-15);
        assert!((s_kappa(1e-8, 1.0).unwrap() - 1.0).abs() < 1e-7);
        assert!((s_kappa(-1e-8, 1.0).unwrap() - 1.0).abs() < 1e-7);
        assert!((s_kappa(-4.0, 1.0).unwrap() - 2f64.sinh() / 2.0).abs() < 1e-15);
        assert!(s_kappa(1.0, 4.0).is_err());
    }

    #[test]
    fn tau_unit_values() {
        assert_eq!(tau_coefficient(3.0, 4.0, 0.3, 0.0).unwrap(), 0.3);
        assert_eq!(tau_coefficient(0.0, 4.0, 0.3, 1.7).unwrap(), 0.3);
        assert_eq!(tau_coefficient(0.0, -2.0, 0.6, 1.7).unwrap(), 0.6);
        // frozen from a 30-digit evaluation of sqrt(0.5·sin(0.5)/sin(1))
        let v = tau_coefficient(1.0, 2.0, 0.5, 1.0).unwrap();
        assert!((v - 0.533_735_404_326_092_35).abs() < 1e-10);
        assert!((tau_coefficient(2.0, 3.0, 0.4, 1e-6).unwrap() - 0.4).abs() < 1e-5);
    }

    #[test]
    fn tau_ranges() {
        assert!(tau_coefficient(1.0, 2.0, 0.5, 4.0).is_err());
        assert_eq!(
            tau_coefficient(-1.0, -1.0, 0.5, 10.0).unwrap(),
            f64::INFINITY
        );
        assert!(tau_coefficient(1.0, 0.5, 0.5, 1.0).is_err());
        assert!(tau_coefficient(1.0, f64::INFINITY, 0.5, 1.0).is_err());
    }

    #[test]
    fn tau_is_nondecreasing_in_k() {
        for n_eff in [2.0, 3.0, 10.0] {
            for t in [0.1, 0.5, 0.9] {
                for r in [0.2, 1.0, 2.0] {
                    let vals: Vec<f64> = [-2.0, -0.5, 0.0, 0.5, 1.0]
                        .iter()
                        .map(|&k| tau_coefficient(k, n_eff, t, r).unwrap())
                        .collect();
                    assert!(vals.windows(2).all(|w| w[0] <= w[1] + 1e-15), "{vals:?}");
                }
            }
        }
    }

    #[test]
    fn params_validation() {
        let p = ComparisonParams {
            k: 0.0,
            n: 2.0,
            q: 0.5,
            t: 0.5,
        };
        assert!(p.validate(2).is_ok());
        assert!(ComparisonParams { n: 1.5, ..p }.validate(2).is_err());
        assert!(ComparisonParams {
            n: f64::INFINITY,
            ..p
        }
        .validate(2)
        .is_ok());
        assert!(ComparisonParams { q: 1.0, ..p }.validate(2).is_err());
    }

    #[test]
    fn mcp_minkowski_homothety() {
        let s = Minkowski::new(2);
        let b = Region::ball([2.0, 0.0], 0.5);
        let r = mcp_check(&s, &Point::new([0.0, 0.0]), &b, 0.5, 0.0, 2.0, 20_000, 1).unwrap();
        assert!(r.slack.abs() < 3.0 * r.stderr, "{r:?}");
        assert!((r.tau_min - 0.25).abs() < 1e-15);
        assert_eq!(r.inconclusive_fraction, 0.0);
    }

    #[test]
    fn mcp_t_one_is_tight() {
        let s = Minkowski::new(2);
        let b = Region::boxed([2.0, -0.3], [2.5, 0.3]);
        let r = mcp_check(&s, &Point::new([0.0, 0.0]), &b, 1.0, 0.0, 2.0, 16_000, 1).unwrap();
        assert_eq!(r.tau_min, 1.0);
        assert!(r.slack.abs() < 3.0 * r.stderr);
        assert!((r.lhs - b.volume()).abs() < 3.0 * r.stderr);
    }

    #[test]
    fn mcp_rejects_acausal_sets() {
        let s = Minkowski::new(2);
        let b = Region::boxed([0.5, 0.0], [1.0, 2.0]);
        assert!(mcp_check(&s, &Point::new([0.0, 0.0]), &b, 0.5, 0.0, 2.0, 400, 1).is_err());
    }
}

//! Closed-form potentials and the transport maps they induce,
//! `𝓕_t(x) = exp_x(t F*(du)^{p-2} ℒ*(du))`, together with their Jacobians
//! relative to the reference measure.

use serde::{Deserialize, Serialize};

use crate::autodiff::{self, Dual, Scalar};
use crate::error::{Error, Result};
use crate::finsler::{
    check_dim, dual_exponent, legendre_inverse, legendre_inverse_lift, q_velocity, Covector,
    FinslerStructure, Point,
};
use crate::geometry::{geodesic_endpoint, EXP_STEPS};

/// Smooth scalar function on the chart, evaluable at any scalar depth.
pub trait ScalarPotential: Send + Sync {
    fn dim(&self) -> usize;

    fn eval<T: Scalar>(&self, x: &[T]) -> T;
}

/// Built-in potentials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Potential {
    /// `u(x) = a·x`.
    Linear { a: Vec<f64> },
    /// `u(x) = a·x + ½ Σ h_i (x_i - c_i)²`.
    Quadratic {
        a: Vec<f64>,
        h: Vec<f64>,
        c: Vec<f64>,
    },
}

impl Potential {
    pub fn linear(a: impl Into<Vec<f64>>) -> Self {
        Potential::Linear { a: a.into() }
    }

    pub fn quadratic(
        a: impl Into<Vec<f64>>,
        h: impl Into<Vec<f64>>,
        c: impl Into<Vec<f64>>,
    ) -> Self {
        Potential::Quadratic {
            a: a.into(),
            h: h.into(),
            c: c.into(),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let lens: Vec<usize> = match self {
            Potential::Linear { a } => vec![a.len()],
            Potential::Quadratic { a, h, c } => vec![a.len(), h.len(), c.len()],
        };
        match lens.into_iter().find(|&l| l != dim) {
            Some(got) => Err(Error::DimensionMismatch { expected: dim, got }),
            None => Ok(()),
        }
    }
}

impl ScalarPotential for Potential {
    fn dim(&self) -> usize {
        match self {
            Potential::Linear { a } | Potential::Quadratic { a, .. } => a.len(),
        }
    }

    fn eval<T: Scalar>(&self, x: &[T]) -> T {
        let lin = |a: &[f64]| {
            a.iter()
                .zip(x)
                .fold(T::zero(), |acc, (&ai, &xi)| acc + xi.scale(ai))
        };
        match self {
            Potential::Linear { a } => lin(a),
            Potential::Quadratic { a, h, c } => {
                let quad = h
                    .iter()
                    .zip(c)
                    .zip(x)
                    .fold(T::zero(), |acc, ((&hi, &ci), &xi)| {
                        let d = xi - T::cst(ci);
                        acc + (d * d).scale(0.5 * hi)
                    });
                lin(a) + quad
            }
        }
    }
}

/// `du(x)` by forward-mode differentiation.
pub fn differential<U: ScalarPotential, T: Scalar>(u: &U, x: &[T]) -> Vec<T> {
    (0..x.len())
        .map(|k| u.eval(&autodiff::seed_axis(x, k)).du)
        .collect()
}

/// `𝓕_t(x)` at any scalar depth. The Legendre root is found in `f64` and
/// then lifted so that derivatives with respect to `x` are exact.
pub fn transport_map_generic<S: FinslerStructure, U: ScalarPotential, T: Scalar>(
    s: &S,
    u: &U,
    x: &[T],
    t: f64,
    q: f64,
) -> Result<Vec<T>> {
    check_dim(s, x.len())?;
    check_dim(s, u.dim())?;
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Parameter(format!("q = {q} outside (0, 1)")));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Parameter(format!("t = {t} outside [0, 1]")));
    }
    if t == 0.0 {
        return Ok(x.to_vec());
    }
    let du = differential(u, x);
    let xr: Vec<f64> = x.iter().map(|a| a.re()).collect();
    let root = legendre_inverse(
        s,
        &Covector::new(xr, du.iter().map(|a| a.re()).collect::<Vec<_>>()),
    )?;
    let v = legendre_inverse_lift(s, x, &du, &root.comps);
    let fstar = (s.lagrangian(x, &v).scale(-2.0)).sqrt();
    let k = fstar.powf(dual_exponent(q) - 2.0).scale(t);
    let w: Vec<T> = v.iter().map(|&c| c * k).collect();
    if s.is_flat() {
        return Ok(x.iter().zip(&w).map(|(&a, &b)| a + b).collect());
    }
    Ok(geodesic_endpoint(s, x, &w, 1.0, EXP_STEPS)?.0)
}

/// Initial velocity `F*(du)^{p-2} ℒ*(du)` of the transport ray from `x`, so
/// that `𝓕_t(x) = exp_x(t·w)`.
pub fn transport_velocity<S: FinslerStructure, U: ScalarPotential>(
    s: &S,
    u: &U,
    x: &[f64],
    q: f64,
) -> Result<Vec<f64>> {
    check_dim(s, x.len())?;
    check_dim(s, u.dim())?;
    let zeta = Covector::new(x.to_vec(), differential(u, x));
    Ok(q_velocity(s, &zeta, q)?.comps)
}

/// `𝓕_t(x)`. Errors with [`Error::OutsidePolarCone`] when `du(x)` is not the
/// Legendre image of a future timelike vector.
pub fn transport_map_from_potential<S: FinslerStructure, U: ScalarPotential>(
    s: &S,
    u: &U,
    x: &Point,
    t: f64,
    q: f64,
) -> Result<Point> {
    Ok(Point(transport_map_generic(s, u, x.coords(), t, q)?))
}

/// Image point together with `det_m[d𝓕_t(x)]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportJacobian {
    pub image: Point,
    /// Lebesgue Jacobian `det d𝓕_t(x)` in the chart.
    pub det_chart: f64,
    /// Jacobian relative to the reference measure.
    pub det_m: f64,
}

/// `det_m[d𝓕_t(x)] = ρ_m(𝓕_t(x)) / ρ_m(x) · det d𝓕_t(x)`, where `ρ_m` is
/// the chart density of the reference measure.
pub fn transport_jacobian<S: FinslerStructure, U: ScalarPotential>(
    s: &S,
    u: &U,
    x: &Point,
    t: f64,
    q: f64,
) -> Result<TransportJacobian> {
    let n = x.dim();
    check_dim(s, n)?;
    if t == 0.0 {
        transport_map_generic(s, u, x.coords(), t, q)?;
        return Ok(TransportJacobian {
            image: x.clone(),
            det_chart: 1.0,
            det_m: 1.0,
        });
    }
    let mut jac = vec![vec![0.0; n]; n];
    let mut image = Vec::new();
    for k in 0..n {
        let col: Vec<Dual<f64>> =
            transport_map_generic(s, u, &autodiff::seed_axis(x.coords(), k), t, q)?;
        for (i, c) in col.iter().enumerate() {
            jac[i][k] = c.du;
        }
        image = autodiff::values(&col);
    }
    let det_chart = autodiff::det(jac);
    let det_m = s.reference_density(&image) / s.reference_density(x.coords()) * det_chart;
    if !(det_m > 0.0) {
        return Err(Error::NegativeJacobian { det: det_m });
    }
    Ok(TransportJacobian {
        image: Point(image),
        det_chart,
        det_m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{DeSitter2d, Minkowski, WeightedMinkowski};

    #[test]
    fn time_translation() {
        let s = Minkowski::new(3);
        let u = Potential::linear([-1.0, 0.0, 0.0]);
        let x = Point::new([0.2, -0.4, 1.0]);
        for t in [0.0, 0.3, 1.0] {
            let y = transport_map_from_potential(&s, &u, &x, t, 0.5).unwrap();
            assert!((y.0[0] - (0.2 + t)).abs() < 1e-14);
            assert_eq!(&y.0[1..], &x.0[1..]);
            let j = transport_jacobian(&s, &u, &x, t, 0.5).unwrap();
            assert!((j.det_m - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn translation_speed_scales_with_slope() {
        // F* = -a and p = -1 give displacement t·(-a)^{p-1}
        let s = Minkowski::new(2);
        let u = Potential::linear([-2.0, 0.0]);
        let y = transport_map_from_potential(&s, &u, &Point::new([0.0, 0.0]), 1.0, 0.5).unwrap();
        assert!((y.0[0] - 0.25).abs() < 1e-14);
        let w = transport_velocity(&s, &u, &[0.0, 0.0], 0.5).unwrap();
        assert!((w[0] - 0.25).abs() < 1e-14 && w[1].abs() < 1e-15);
    }

    #[test]
    fn spacelike_differential_is_rejected() {
        let s = Minkowski::new(2);
        let u = Potential::linear([1.0, 0.0]);
        let r = transport_map_from_potential(&s, &u, &Point::new([0.0, 0.0]), 0.5, 0.5);
        assert!(matches!(r, Err(Error::OutsidePolarCone)));
    }

    fn fd_det<S: FinslerStructure>(s: &S, u: &Potential, x: &[f64], t: f64, q: f64) -> f64 {
        let n = x.len();
        let h = 1e-5;
        let mut jac = vec![vec![0.0; n]; n];
        for k in 0..n {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[k] += h;
            xm[k] -= h;
            let fp = transport_map_generic(s, u, &xp, t, q).unwrap();
            let fm = transport_map_generic(s, u, &xm, t, q).unwrap();
            for i in 0..n {
                jac[i][k] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        autodiff::det(jac)
    }

    #[test]
    fn quadratic_jacobian_matches_finite_differences() {
        let s = Minkowski::new(3);
        let u = Potential::quadratic([-1.0, 0.1, 0.0], [0.0, 0.3, 0.3], [0.0, 0.0, 0.0]);
        let x = [0.1, 0.4, -0.3];
        for t in [0.25, 0.5, 1.0] {
            let j = transport_jacobian(&s, &u, &Point::new(x), t, 0.5).unwrap();
            let fd = fd_det(&s, &u, &x, t, 0.5);
            assert!(
                ((j.det_chart - fd) / fd).abs() < 1e-5,
                "t={t}: {} vs {fd}",
                j.det_chart
            );
        }
    }

    #[test]
    fn curved_jacobian_matches_finite_differences() {
        let s = DeSitter2d;
        let u = Potential::quadratic([-1.0, 0.0], [0.2, 0.4], [0.0, 0.0]);
        let x = [0.1, 0.2];
        let j = transport_jacobian(&s, &u, &Point::new(x), 0.6, 0.5).unwrap();
        let fd = fd_det(&s, &u, &x, 0.6, 0.5);
        assert!(((j.det_chart - fd) / fd).abs() < 1e-5);
        let ratio = j.image.0[0].cosh() / x[0].cosh();
        assert!((j.det_m - ratio * j.det_chart).abs() < 1e-14);
    }

    #[test]
    fn weighted_jacobian_includes_density_ratio() {
        let eps = 0.5;
        let s = WeightedMinkowski::new(2, eps).unwrap();
        let u = Potential::linear([-1.0, 0.0]);
        let j = transport_jacobian(&s, &u, &Point::new([0.2, 0.0]), 0.5, 0.5).unwrap();
        let expected = (-0.5 * eps * (0.7f64.powi(2) - 0.2f64.powi(2))).exp();
        assert!((j.det_m - expected).abs() < 1e-14);
        assert!((j.det_chart - 1.0).abs() < 1e-14);
    }
}

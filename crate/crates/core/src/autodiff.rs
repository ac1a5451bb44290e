//! Forward-mode automatic differentiation with nestable dual numbers.
//!
//! A [`Dual<T>`] carries a value and one directional derivative. Because the
//! component type is itself any [`Scalar`], duals nest: `Dual<Dual<f64>>`
//! yields mixed second derivatives, and four levels give the fourth-order
//! derivatives of a Lagrangian that the curvature formulas need.
//!
//! Model code is written once, generic over `T: Scalar`, and evaluated at
//! whatever depth the caller requires.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Real-like number type that supports the elementary functions used by the
/// built-in Lagrangians and weights.
pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + 'static
{
    fn cst(x: f64) -> Self;
    /// Underlying real value, stripped of all derivative parts.
    fn re(&self) -> f64;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn powf(self, e: f64) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn abs(self) -> Self;

    fn zero() -> Self {
        Self::cst(0.0)
    }
    fn one() -> Self {
        Self::cst(1.0)
    }
    fn scale(self, k: f64) -> Self {
        self * Self::cst(k)
    }
    fn tanh(self) -> Self {
        self.sinh() / self.cosh()
    }
    fn powi(self, k: i32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k.unsigned_abs() {
            acc *= self;
        }
        if k < 0 {
            Self::one() / acc
        } else {
            acc
        }
    }
}

impl Scalar for f64 {
    #[inline]
    fn cst(x: f64) -> Self {
        x
    }
    #[inline]
    fn re(&self) -> f64 {
        *self
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn powf(self, e: f64) -> Self {
        f64::powf(self, e)
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    #[inline]
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }
    #[inline]
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
}

/// Dual number `re + eps·du` with `eps² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub du: T,
}

impl<T: Scalar> Dual<T> {
    pub fn new(re: T, du: T) -> Self {
        Self { re, du }
    }
    /// Independent variable with unit seed.
    pub fn var(re: T) -> Self {
        Self { re, du: T::one() }
    }
    pub fn constant(re: T) -> Self {
        Self { re, du: T::zero() }
    }
    #[inline]
    fn chain(self, f: T, df: T) -> Self {
        Self {
            re: f,
            du: self.du * df,
        }
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.du + o.du)
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.du - o.du)
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Self::new(self.re * o.re, self.re * o.du + self.du * o.re)
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let inv = T::one() / o.re;
        let q = self.re * inv;
        Self::new(q, (self.du - q * o.du) * inv)
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.re, -self.du)
    }
}

impl<T: Scalar> AddAssign for Dual<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Scalar> SubAssign for Dual<T> {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<T: Scalar> MulAssign for Dual<T> {
    #[inline]
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn cst(x: f64) -> Self {
        Self::constant(T::cst(x))
    }
    fn re(&self) -> f64 {
        self.re.re()
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        self.chain(s, T::one() / (s + s))
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.re.ln(), T::one() / self.re)
    }
    fn powf(self, e: f64) -> Self {
        let p = self.re.powf(e);
        if e == 0.0 {
            return Self::constant(p);
        }
        self.chain(p, self.re.powf(e - 1.0).scale(e))
    }
    fn sin(self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }
    fn sinh(self) -> Self {
        self.chain(self.re.sinh(), self.re.cosh())
    }
    fn cosh(self) -> Self {
        self.chain(self.re.cosh(), self.re.sinh())
    }
    fn abs(self) -> Self {
        if self.re.re() < 0.0 {
            -self
        } else {
            self
        }
    }
}

/// Lift a slice of constants into a dual slice.
pub fn lift<T: Scalar>(xs: &[T]) -> Vec<Dual<T>> {
    xs.iter().map(|&x| Dual::constant(x)).collect()
}

/// Seed `xs + eps·dir` as duals.
pub fn seed<T: Scalar>(xs: &[T], dir: &[T]) -> Vec<Dual<T>> {
    xs.iter().zip(dir).map(|(&x, &d)| Dual::new(x, d)).collect()
}

/// Seed `xs + eps·e_k`.
pub fn seed_axis<T: Scalar>(xs: &[T], k: usize) -> Vec<Dual<T>> {
    xs.iter()
        .enumerate()
        .map(|(i, &x)| Dual::new(x, if i == k { T::one() } else { T::zero() }))
        .collect()
}

pub fn values<T: Scalar>(xs: &[Dual<T>]) -> Vec<T> {
    xs.iter().map(|d| d.re).collect()
}

pub fn derivs<T: Scalar>(xs: &[Dual<T>]) -> Vec<T> {
    xs.iter().map(|d| d.du).collect()
}

/// Gradient of a scalar function by `n` forward passes.
pub fn gradient<T: Scalar, F>(f: F, x: &[T]) -> (T, Vec<T>)
where
    F: Fn(&[Dual<T>]) -> Dual<T>,
{
    let mut val = T::zero();
    let mut g = Vec::with_capacity(x.len());
    for k in 0..x.len() {
        let r = f(&seed_axis(x, k));
        val = r.re;
        g.push(r.du);
    }
    if x.is_empty() {
        val = f(&[]).re;
    }
    (val, g)
}

/// Dense Hessian of a scalar function using hyper-dual (nested) passes,
/// one per unordered index pair.
pub fn hessian<T: Scalar, F>(f: F, x: &[T]) -> Vec<Vec<T>>
where
    F: Fn(&[Dual<Dual<T>>]) -> Dual<Dual<T>>,
{
    let n = x.len();
    let mut h = vec![vec![T::zero(); n]; n];
    for a in 0..n {
        for b in a..n {
            let z: Vec<Dual<Dual<T>>> = (0..n)
                .map(|i| {
                    let ia = if i == a { T::one() } else { T::zero() };
                    let ib = if i == b { T::one() } else { T::zero() };
                    Dual::new(Dual::new(x[i], ia), Dual::new(ib, T::zero()))
                })
                .collect();
            let r = f(&z);
            h[a][b] = r.du.du;
            h[b][a] = r.du.du;
        }
    }
    h
}

/// Solve `a·y = b` by Gaussian elimination with partial pivoting on the real
/// part. Works for any scalar depth, so derivatives flow through the solve.
pub fn solve<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| {
            a[i][col]
                .re()
                .abs()
                .partial_cmp(&a[j][col].re().abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[piv][col].re().abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = T::one() / a[col][col];
        for row in col + 1..n {
            let f = a[row][col] * inv;
            for k in col..n {
                let t = a[col][k];
                a[row][k] -= f * t;
            }
            let t = b[col];
            b[row] -= f * t;
        }
    }
    let mut y = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= a[row][k] * y[k];
        }
        y[row] = s / a[row][row];
    }
    Some(y)
}

/// Determinant by elimination with partial pivoting, at any scalar depth.
pub fn det<T: Scalar>(mut a: Vec<Vec<T>>) -> T {
    let n = a.len();
    let mut acc = T::one();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| {
                a[i][col]
                    .re()
                    .abs()
                    .partial_cmp(&a[j][col].re().abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        if a[piv][col].re() == 0.0 {
            return T::zero();
        }
        if piv != col {
            a.swap(col, piv);
            acc = -acc;
        }
        let p = a[col][col];
        acc *= p;
        for row in col + 1..n {
            let f = a[row][col] / p;
            for k in col..n {
                let t = a[col][k];
                a[row][k] -= f * t;
            }
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn central(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    /// A function lifted to duals paired with its plain form.
    type Pair = (fn(Dual<f64>) -> Dual<f64>, fn(f64) -> f64);

    #[test]
    fn first_derivatives_match_finite_differences() {
        let fs: Vec<Pair> = vec![
            (|x| x.sin() * x.cosh(), |x| x.sin() * x.cosh()),
            (
                |x| (x * x + Dual::cst(1.0)).sqrt().ln(),
                |x| (x * x + 1.0).sqrt().ln(),
            ),
            (|x| x.powf(0.9) / x.exp(), |x| x.powf(0.9) / x.exp()),
            (|x| x.tanh().powi(3), |x| x.tanh().powi(3)),
        ];
        for (fd, ff) in fs {
            for &x in &[0.3, 0.7, 1.9] {
                let ad = fd(Dual::var(x)).du;
                let fdv = central(ff, x, 1e-6);
                assert!((ad - fdv).abs() < 1e-7 * (1.0 + fdv.abs()), "{ad} vs {fdv}");
            }
        }
    }

    #[test]
    fn nested_duals_give_higher_derivatives() {
        // d^4/dx^4 sin x = sin x
        type D4 = Dual<Dual<Dual<Dual<f64>>>>;
        let x = 0.8_f64;
        let mut v: D4 = D4::cst(0.0);
        v.re.re.re.re = x;
        v.re.re.re.du = 1.0;
        v.re.re.du.re = 1.0;
        v.re.du.re.re = 1.0;
        v.du.re.re.re = 1.0;
        let s = v.sin();
        assert!((s.du.du.du.du - x.sin()).abs() < 1e-14);
        assert!((s.du.du.du.re + x.cos()).abs() < 1e-14);
    }

    #[test]
    fn hessian_of_quadratic_form_is_exact() {
        let f = |z: &[Dual<Dual<f64>>]| {
            z[0] * z[0] * Dual::cst(3.0) + z[0] * z[1] - z[1] * z[1] * Dual::cst(0.5)
        };
        let h = hessian(f, &[0.4, -1.2]);
        assert_eq!(h, vec![vec![6.0, 1.0], vec![1.0, -1.0]]);
    }

    #[test]
    fn solve_propagates_derivatives() {
        // y(s) = A(s)^{-1} b with A = [[2+s, 1],[1, 3]]
        let s = Dual::var(0.5_f64);
        let a = vec![
            vec![Dual::cst(2.0) + s, Dual::cst(1.0)],
            vec![Dual::cst(1.0), Dual::cst(3.0)],
        ];
        let b = vec![Dual::cst(1.0), Dual::cst(2.0)];
        let y = solve(a, b).unwrap();
        let yf = |s: f64| {
            let det = (2.0 + s) * 3.0 - 1.0;
            (3.0 * 1.0 - 2.0) / det
        };
        assert!((y[0].re - yf(0.5)).abs() < 1e-14);
        assert!((y[0].du - central(yf, 0.5, 1e-6)).abs() < 1e-8);
    }

    #[test]
    fn det_matches_closed_form_and_differentiates() {
        let a = vec![
            vec![2.0, 1.0, 0.5],
            vec![1.0, -3.0, 0.0],
            vec![0.5, 0.0, 4.0],
        ];
        // cofactor expansion along the last column
        let oracle = 0.5 * (1.0 * 0.0 - (-3.0) * 0.5) + 4.0 * (2.0 * -3.0 - 1.0 * 1.0);
        assert!((det(a) - oracle).abs() < 1e-12);
        let t = Dual::var(0.7);
        let m = vec![vec![t, Dual::cst(1.0)], vec![Dual::cst(2.0), t * t]];
        let d = det(m);
        assert!((d.re - (0.7f64.powi(3) - 2.0)).abs() < 1e-14);
        assert!((d.du - 3.0 * 0.49).abs() < 1e-14);
    }
}

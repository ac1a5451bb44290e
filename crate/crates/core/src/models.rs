//! Built-in spacetimes with closed-form Lagrangians and known curvature.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::autodiff::{self, Scalar};
use crate::error::{Error, Result};
use crate::finsler::{metric_generic, FinslerStructure};

fn e0(n: usize) -> Vec<f64> {
    let mut x = vec![0.0; n];
    x[0] = 1.0;
    x
}

fn minkowski_l<T: Scalar>(v: &[T]) -> T {
    let mut s = -(v[0] * v[0]);
    for &c in &v[1..] {
        s += c * c;
    }
    s.scale(0.5)
}

/// `L = ½(-(v⁰)² + |v̄|²)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Minkowski {
    dim: usize,
}

impl Minkowski {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 2, "spacetime dimension must be at least 2");
        Minkowski { dim }
    }
}

impl FinslerStructure for Minkowski {
    fn dim(&self) -> usize {
        self.dim
    }
    fn name(&self) -> String {
        "minkowski".into()
    }
    fn lagrangian<T: Scalar>(&self, _x: &[T], v: &[T]) -> T {
        minkowski_l(v)
    }
    fn time_orientation(&self, _x: &[f64]) -> Vec<f64> {
        e0(self.dim)
    }
    fn reference_density(&self, _x: &[f64]) -> f64 {
        1.0
    }
    fn is_flat(&self) -> bool {
        true
    }
}

/// Minkowski with weight `ψ(x) = ½ε(x⁰)²`, so that `Ric_∞(v) = ε(v⁰)²`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedMinkowski {
    dim: usize,
    epsilon: f64,
}

impl WeightedMinkowski {
    pub fn new(dim: usize, epsilon: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Parameter("dimension must be at least 2".into()));
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::Parameter(format!(
                "weight strength {epsilon} must be >= 0"
            )));
        }
        Ok(WeightedMinkowski { dim, epsilon })
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

impl FinslerStructure for WeightedMinkowski {
    fn dim(&self) -> usize {
        self.dim
    }
    fn name(&self) -> String {
        "weighted_minkowski".into()
    }
    fn lagrangian<T: Scalar>(&self, _x: &[T], v: &[T]) -> T {
        minkowski_l(v)
    }
    fn time_orientation(&self, _x: &[f64]) -> Vec<f64> {
        e0(self.dim)
    }
    fn weight<T: Scalar>(&self, x: &[T], _v: &[T]) -> T {
        (x[0] * x[0]).scale(0.5 * self.epsilon)
    }
    fn reference_density(&self, x: &[f64]) -> f64 {
        (-0.5 * self.epsilon * x[0] * x[0]).exp()
    }
    fn is_flat(&self) -> bool {
        true
    }
}

/// `L = -½ Q^{1-b} |v⁰ - v¹|^{2b}` with `Q = (v⁰)² - |v̄|²`, defined on
/// `Q >= 0`. The absolute value extends the future-cone formula to the past
/// cone by `L(-v) = L(v)`.
///
/// The reference measure is chart Lebesgue measure; since `det g_v` varies
/// with the direction of `v`, the weight is `ψ(v) = ½ log(-det g_v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Bogoslovsky {
    dim: usize,
    b: f64,
}

impl Bogoslovsky {
    pub fn new(dim: usize, b: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Parameter("dimension must be at least 2".into()));
        }
        if !(b > 0.0 && b < 0.5) {
            return Err(Error::Parameter(format!(
                "exponent b = {b} must lie in (0, 1/2)"
            )));
        }
        Ok(Bogoslovsky { dim, b })
    }
    pub fn exponent(&self) -> f64 {
        self.b
    }
    fn quadratic<T: Scalar>(v: &[T]) -> T {
        minkowski_l(v).scale(-2.0)
    }
}

impl FinslerStructure for Bogoslovsky {
    fn dim(&self) -> usize {
        self.dim
    }
    fn name(&self) -> String {
        "bogoslovsky".into()
    }
    fn lagrangian<T: Scalar>(&self, _x: &[T], v: &[T]) -> T {
        let q = Self::quadratic(v);
        let k = (v[0] - v[1]).abs();
        -(q.powf(1.0 - self.b) * k.powf(2.0 * self.b)).scale(0.5)
    }
    fn in_domain(&self, _x: &[f64], v: &[f64]) -> bool {
        Self::quadratic(v) >= 0.0
    }
    fn time_orientation(&self, _x: &[f64]) -> Vec<f64> {
        e0(self.dim)
    }
    fn weight<T: Scalar>(&self, x: &[T], v: &[T]) -> T {
        (-autodiff::det(metric_generic(self, x, v))).ln().scale(0.5)
    }
    fn reference_density(&self, _x: &[f64]) -> f64 {
        1.0
    }
    fn is_flat(&self) -> bool {
        true
    }
}

/// Two-dimensional de Sitter space in global coordinates,
/// `L = ½(-(v⁰)² + cosh²(x⁰)(v¹)²)`, restricted to the chart `|x⁰| <= 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeSitter2d;

/// Chart bound on `|x⁰|` for [`DeSitter2d`].
pub const DE_SITTER_CHART: f64 = 2.0;

impl FinslerStructure for DeSitter2d {
    fn dim(&self) -> usize {
        2
    }
    fn name(&self) -> String {
        "de_sitter_2d".into()
    }
    fn lagrangian<T: Scalar>(&self, x: &[T], v: &[T]) -> T {
        let c = x[0].cosh();
        (c * c * v[1] * v[1] - v[0] * v[0]).scale(0.5)
    }
    fn time_orientation(&self, _x: &[f64]) -> Vec<f64> {
        e0(2)
    }
    fn reference_density(&self, x: &[f64]) -> f64 {
        x[0].cosh()
    }
    fn chart_contains(&self, x: &[f64]) -> bool {
        x[0].abs() <= DE_SITTER_CHART
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    Minkowski,
    WeightedMinkowski,
    Bogoslovsky,
    #[serde(rename = "de_sitter_2d")]
    DeSitter2d,
}

impl fmt::Display for ModelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModelName::Minkowski => "minkowski",
            ModelName::WeightedMinkowski => "weighted_minkowski",
            ModelName::Bogoslovsky => "bogoslovsky",
            ModelName::DeSitter2d => "de_sitter_2d",
        };
        f.write_str(s)
    }
}

/// Name, dimension and parameters of a built-in model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub name: ModelName,
    pub dim: usize,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl ModelSpec {
    pub fn new(name: ModelName, dim: usize) -> Self {
        ModelSpec {
            name,
            dim,
            params: BTreeMap::new(),
        }
    }
    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }
}

/// Any built-in model. Dispatches the structure methods by variant.
#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    Minkowski(Minkowski),
    WeightedMinkowski(WeightedMinkowski),
    Bogoslovsky(Bogoslovsky),
    DeSitter2d(DeSitter2d),
}

macro_rules! dispatch {
    ($self:ident, $m:ident => $e:expr) => {
        match $self {
            Model::Minkowski($m) => $e,
            Model::WeightedMinkowski($m) => $e,
            Model::Bogoslovsky($m) => $e,
            Model::DeSitter2d($m) => $e,
        }
    };
}

impl FinslerStructure for Model {
    fn dim(&self) -> usize {
        dispatch!(self, m => m.dim())
    }
    fn name(&self) -> String {
        dispatch!(self, m => m.name())
    }
    fn lagrangian<T: Scalar>(&self, x: &[T], v: &[T]) -> T {
        dispatch!(self, m => m.lagrangian(x, v))
    }
    fn in_domain(&self, x: &[f64], v: &[f64]) -> bool {
        dispatch!(self, m => m.in_domain(x, v))
    }
    fn time_orientation(&self, x: &[f64]) -> Vec<f64> {
        dispatch!(self, m => m.time_orientation(x))
    }
    fn weight<T: Scalar>(&self, x: &[T], v: &[T]) -> T {
        dispatch!(self, m => m.weight(x, v))
    }
    fn reference_density(&self, x: &[f64]) -> f64 {
        dispatch!(self, m => m.reference_density(x))
    }
    fn is_flat(&self) -> bool {
        dispatch!(self, m => m.is_flat())
    }
    fn chart_contains(&self, x: &[f64]) -> bool {
        dispatch!(self, m => m.chart_contains(x))
    }
}

fn take_params(spec: &ModelSpec, allowed: &[&str]) -> Result<BTreeMap<String, f64>> {
    if let Some(k) = spec.params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::Parameter(format!(
            "unknown parameter `{k}` for model {}",
            spec.name
        )));
    }
    Ok(spec.params.clone())
}

fn required(p: &BTreeMap<String, f64>, key: &str, model: ModelName) -> Result<f64> {
    p.get(key)
        .copied()
        .ok_or_else(|| Error::Parameter(format!("model {model} requires parameter `{key}`")))
}

pub fn build_model(spec: &ModelSpec) -> Result<Model> {
    if spec.dim < 2 {
        return Err(Error::Parameter(format!(
            "dimension {} must be at least 2",
            spec.dim
        )));
    }
    match spec.name {
        ModelName::Minkowski => {
            take_params(spec, &[])?;
            Ok(Model::Minkowski(Minkowski::new(spec.dim)))
        }
        ModelName::WeightedMinkowski => {
            let p = take_params(spec, &["epsilon"])?;
            let eps = required(&p, "epsilon", spec.name)?;
            Ok(Model::WeightedMinkowski(WeightedMinkowski::new(
                spec.dim, eps,
            )?))
        }
        ModelName::Bogoslovsky => {
            let p = take_params(spec, &["b"])?;
            let b = required(&p, "b", spec.name)?;
            Ok(Model::Bogoslovsky(Bogoslovsky::new(spec.dim, b)?))
        }
        ModelName::DeSitter2d => {
            take_params(spec, &[])?;
            if spec.dim != 2 {
                return Err(Error::Parameter("de_sitter_2d has dimension 2".into()));
            }
            Ok(Model::DeSitter2d(DeSitter2d))
        }
    }
}

/// Lower bound `K` with `Ric_N(v) >= K F(v)²` for one effective dimension
/// regime, valid on `region`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RicciBound {
    /// `"inf"`, or the decimal value of `N`.
    pub n_eff: String,
    pub k: f64,
    pub region: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroundTruth {
    pub ric_n_lower_bounds: Vec<RicciBound>,
    /// `Ric(v) / F(v)²` for models where it is constant.
    pub curvature_constant: Option<f64>,
    pub is_flat: bool,
    pub has_analytic_l: bool,
    /// Whether `g_v` is independent of `v`.
    pub is_lorentzian: bool,
}

/// Radius in `|x⁰|` of the compact slab on which finite-`N` bounds for the
/// weighted Minkowski model are stated.
pub const WEIGHTED_SLAB: f64 = 1.0;

/// Known curvature constants of a built-in model.
///
/// For de Sitter, `Ric(v) = g_v(v, v) = -F(v)²` on timelike `v`, so the
/// timelike bound is `K = -1`.
pub fn model_ground_truth(spec: &ModelSpec) -> Result<GroundTruth> {
    let model = build_model(spec)?;
    let n = spec.dim as f64;
    let all_n = |k: f64, region: &str| {
        vec![
            RicciBound {
                n_eff: "inf".into(),
                k,
                region: region.into(),
            },
            RicciBound {
                n_eff: format!("{n}"),
                k,
                region: region.into(),
            },
        ]
    };
    Ok(match model {
        Model::Minkowski(_) => GroundTruth {
            ric_n_lower_bounds: all_n(0.0, "everywhere"),
            curvature_constant: Some(0.0),
            is_flat: true,
            has_analytic_l: true,
            is_lorentzian: true,
        },
        Model::WeightedMinkowski(w) => {
            let eps = w.epsilon();
            // Ric_N = ε(v⁰)² - (ε x⁰ v⁰)²/(N-n) and (v⁰)² >= F² on the cone
            let slab = format!("|x0| <= {WEIGHTED_SLAB}");
            let two_n = 2.0 * n;
            GroundTruth {
                ric_n_lower_bounds: vec![
                    RicciBound {
                        n_eff: "inf".into(),
                        k: eps,
                        region: "everywhere".into(),
                    },
                    RicciBound {
                        n_eff: format!("{two_n}"),
                        k: eps - eps * eps * WEIGHTED_SLAB * WEIGHTED_SLAB / n,
                        region: slab,
                    },
                ],
                curvature_constant: None,
                is_flat: true,
                has_analytic_l: true,
                is_lorentzian: true,
            }
        }
        Model::Bogoslovsky(_) => GroundTruth {
            ric_n_lower_bounds: all_n(0.0, "everywhere"),
            curvature_constant: Some(0.0),
            is_flat: true,
            has_analytic_l: true,
            is_lorentzian: false,
        },
        Model::DeSitter2d(_) => GroundTruth {
            ric_n_lower_bounds: all_n(-1.0, "|x0| <= 2"),
            curvature_constant: Some(-1.0),
            is_flat: false,
            has_analytic_l: false,
            is_lorentzian: true,
        },
    })
}

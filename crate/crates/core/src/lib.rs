//! Numerical toolkit for optimal transport and curvature-dimension
//! conditions on weighted Lorentz–Finsler spacetimes.

pub mod autodiff;
pub mod curvature;
pub mod distance;
pub mod entropy;
pub mod error;
pub mod ext;
pub mod finsler;
pub mod geometry;
pub mod lp;
pub mod measure;
pub mod models;
pub mod montecarlo;
pub mod potential;
pub mod region;
pub mod transport;

pub use error::{Error, Result};
pub use finsler::{CausalClass, CausalKind, Covector, FinslerStructure, Point, Vector};
pub use models::{build_model, model_ground_truth, Model, ModelName, ModelSpec};

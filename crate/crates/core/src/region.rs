//! Convex regions in the chart: points, axis-aligned boxes and balls.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Region {
    Point { at: Vec<f64> },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

impl Region {
    pub fn point(at: impl Into<Vec<f64>>) -> Self {
        Region::Point { at: at.into() }
    }

    pub fn boxed(lo: impl Into<Vec<f64>>, hi: impl Into<Vec<f64>>) -> Self {
        Region::Box {
            lo: lo.into(),
            hi: hi.into(),
        }
    }

    pub fn ball(center: impl Into<Vec<f64>>, radius: f64) -> Self {
        Region::Ball {
            center: center.into(),
            radius,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Point { at } => at.len(),
            Region::Box { lo, .. } => lo.len(),
            Region::Ball { center, .. } => center.len(),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: self.dim(),
            });
        }
        match self {
            Region::Box { lo, hi }
                if lo.len() != hi.len() || lo.iter().zip(hi).any(|(a, b)| !(a <= b)) =>
            {
                Err(Error::Parameter(format!(
                    "box corners {lo:?} / {hi:?} not ordered"
                )))
            }
            Region::Ball { radius, .. } if !(*radius >= 0.0) => Err(Error::Parameter(format!(
                "ball radius {radius} must be >= 0"
            ))),
            _ => Ok(()),
        }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        match self {
            Region::Point { at } => at.as_slice() == p,
            Region::Box { lo, hi } => p
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(x, (a, b))| a <= x && x <= b),
            Region::Ball { center, radius } => dist(p, center) <= *radius,
        }
    }

    /// Euclidean nearest point.
    pub fn project(&self, p: &[f64]) -> Vec<f64> {
        match self {
            Region::Point { at } => at.clone(),
            Region::Box { lo, hi } => p
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(x, (a, b))| x.clamp(*a, *b))
                .collect(),
            Region::Ball { center, radius } => {
                let d = dist(p, center);
                if d <= *radius {
                    p.to_vec()
                } else {
                    center
                        .iter()
                        .zip(p)
                        .map(|(c, x)| c + (x - c) * radius / d)
                        .collect()
                }
            }
        }
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Region::Point { at } => (at.clone(), at.clone()),
            Region::Box { lo, hi } => (lo.clone(), hi.clone()),
            Region::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
        }
    }

    /// Bounding box enlarged by `pad` times the edge length on every side.
    /// Degenerate edges stay degenerate.
    pub fn padded_bounding_box(&self, pad: f64) -> (Vec<f64>, Vec<f64>) {
        pad_box(self.bounding_box(), pad)
    }

    /// Lebesgue volume.
    pub fn volume(&self) -> f64 {
        match self {
            Region::Point { .. } => 0.0,
            Region::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| b - a).product(),
            Region::Ball { center, radius } => ball_volume(center.len(), *radius),
        }
    }

    /// Image under `p ↦ a + c·p`, `c != 0`.
    pub fn affine(&self, a: &[f64], c: f64) -> Region {
        let map = |p: &[f64]| -> Vec<f64> { p.iter().zip(a).map(|(x, o)| o + c * x).collect() };
        match self {
            Region::Point { at } => Region::Point { at: map(at) },
            Region::Box { lo, hi } => {
                let (l, h) = (map(lo), map(hi));
                Region::Box {
                    lo: l.iter().zip(&h).map(|(x, y)| x.min(*y)).collect(),
                    hi: l.iter().zip(&h).map(|(x, y)| x.max(*y)).collect(),
                }
            }
            Region::Ball { center, radius } => Region::Ball {
                center: map(center),
                radius: radius * c.abs(),
            },
        }
    }

    /// Uniform sample from the region given `u ∈ [0,1)^n` (boxes) or by
    /// rejection from the bounding box (balls).
    pub fn sample_uniform<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            Region::Point { at } => at.clone(),
            Region::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(a, b)| a + (b - a) * rng.gen::<f64>())
                .collect(),
            Region::Ball { center, radius } => loop {
                let p: Vec<f64> = center
                    .iter()
                    .map(|c| c + radius * (2.0 * rng.gen::<f64>() - 1.0))
                    .collect();
                if dist(&p, center) <= *radius {
                    break p;
                }
            },
        }
    }
}

/// Box enlarged by `pad` times its edge length on every side.
pub fn pad_box((lo, hi): (Vec<f64>, Vec<f64>), pad: f64) -> (Vec<f64>, Vec<f64>) {
    let w: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| pad * (b - a)).collect();
    (
        lo.iter().zip(&w).map(|(a, d)| a - d).collect(),
        hi.iter().zip(&w).map(|(b, d)| b + d).collect(),
    )
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Volume of the Euclidean `n`-ball.
pub fn ball_volume(n: usize, r: f64) -> f64 {
    // V_n = π^{n/2} r^n / Γ(n/2 + 1), by the recursion V_n = 2π r² V_{n-2} / n
    let mut v = if n.is_multiple_of(2) { 1.0 } else { 2.0 * r };
    let mut k = if n.is_multiple_of(2) { 0 } else { 1 };
    while k < n {
        k += 2;
        v *= 2.0 * std::f64::consts::PI * r * r / k as f64;
    }
    v
}

/// Intersection of two boxes, if nonempty.
pub fn box_intersection(a: (&[f64], &[f64]), b: (&[f64], &[f64])) -> Option<(Vec<f64>, Vec<f64>)> {
    let lo: Vec<f64> = a.0.iter().zip(b.0).map(|(x, y)| x.max(*y)).collect();
    let hi: Vec<f64> = a.1.iter().zip(b.1).map(|(x, y)| x.min(*y)).collect();
    if lo.iter().zip(&hi).all(|(l, h)| l <= h) {
        Some((lo, hi))
    } else {
        None
    }
}

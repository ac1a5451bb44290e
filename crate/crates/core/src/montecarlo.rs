//! Stratified Monte Carlo over the unit cube with batch-means error bars.
//!
//! Each of the [`BATCHES`] batches draws a Latin hypercube from its own
//! ChaCha stream derived from `(seed, stream, batch)`. Batches run in
//! parallel, each batch sums sequentially by pairwise reduction, and batch
//! results are combined in batch order, so reports are bit-identical for any
//! thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

pub const BATCHES: usize = 16;

/// Minimum total sample count (two per batch).
pub const MIN_SAMPLES: usize = 2 * BATCHES;

/// Relative floor added to `3·stderr` in verdicts, covering rounding when
/// both sides of an inequality are computed exactly.
pub const SLACK_FLOOR: f64 = 1e-10;

pub fn batch_rng(seed: u64, stream: u64, batch: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((stream << 16) | batch as u64);
    rng
}

/// `count` points of `[0,1)^dim`, one per stratum along every axis.
pub fn latin_hypercube<R: Rng>(rng: &mut R, count: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut pts = vec![vec![0.0; dim]; count];
    let mut perm: Vec<usize> = (0..count).collect();
    for d in 0..dim {
        for i in (1..count).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        for (p, &k) in pts.iter_mut().zip(&perm) {
            p[d] = (k as f64 + rng.gen::<f64>()) / count as f64;
        }
    }
    pts
}

/// Sum by recursive halving; the reduction order depends only on the length.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        xs.iter().sum()
    } else {
        let (a, b) = xs.split_at(xs.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Per-batch means and maxima of a vector-valued integrand.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchTable {
    means: Vec<Vec<f64>>,
    maxima: Vec<Vec<f64>>,
    /// Unit-cube location of each batch maximum.
    argmax: Vec<Vec<Vec<f64>>>,
    per_batch: usize,
}

impl BatchTable {
    pub fn samples(&self) -> usize {
        self.per_batch * BATCHES
    }

    pub fn component(&self, k: usize) -> Estimate {
        self.combine(|m| m[k])
    }

    /// Estimate of `f(E[X])`; the error bar is the batch-means spread of
    /// `f` applied to each batch mean.
    pub fn combine(&self, f: impl Fn(&[f64]) -> f64) -> Estimate {
        let k = self.means[0].len();
        let overall: Vec<f64> = (0..k)
            .map(|j| {
                pairwise_sum(&self.means.iter().map(|m| m[j]).collect::<Vec<_>>()) / BATCHES as f64
            })
            .collect();
        let per: Vec<f64> = self.means.iter().map(|m| f(m)).collect();
        let centre = pairwise_sum(&per) / BATCHES as f64;
        let var = pairwise_sum(&per.iter().map(|v| (v - centre).powi(2)).collect::<Vec<_>>())
            / (BATCHES * (BATCHES - 1)) as f64;
        Estimate {
            mean: f(&overall),
            stderr: var.sqrt(),
            samples: self.samples(),
        }
    }

    pub fn max(&self, k: usize) -> f64 {
        self.maxima
            .iter()
            .map(|m| m[k])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Unit-cube point attaining [`BatchTable::max`]; the first batch wins ties.
    pub fn argmax(&self, k: usize) -> &[f64] {
        let best = self.max(k);
        let b = self.maxima.iter().position(|m| m[k] == best).unwrap_or(0);
        &self.argmax[b][k]
    }

    pub fn per_batch(&self) -> usize {
        self.per_batch
    }
}

/// Evaluates `f` on `samples` stratified points of `[0,1)^dim`. The first
/// error in batch order is returned.
pub fn sample_batches<F>(
    dim: usize,
    samples: usize,
    seed: u64,
    stream: u64,
    f: F,
) -> Result<BatchTable>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    if samples < MIN_SAMPLES {
        return Err(Error::Parameter(format!(
            "sample budget {samples} below the minimum {MIN_SAMPLES}"
        )));
    }
    let per_batch = samples / BATCHES;
    type Batch = (Vec<f64>, Vec<f64>, Vec<Vec<f64>>);
    let batches: Vec<Result<Batch>> = (0..BATCHES)
        .into_par_iter()
        .map(|b| {
            let mut rng = batch_rng(seed, stream, b);
            let pts = latin_hypercube(&mut rng, per_batch, dim);
            let vals = pts.iter().map(|u| f(u)).collect::<Result<Vec<_>>>()?;
            let k = vals[0].len();
            let mut means = Vec::with_capacity(k);
            let mut maxima = Vec::with_capacity(k);
            let mut argmax = Vec::with_capacity(k);
            for j in 0..k {
                let col: Vec<f64> = vals.iter().map(|v| v[j]).collect();
                means.push(pairwise_sum(&col) / per_batch as f64);
                let mut best = 0;
                for (i, v) in col.iter().enumerate() {
                    if *v > col[best] {
                        best = i;
                    }
                }
                maxima.push(col[best]);
                argmax.push(pts[best].clone());
            }
            Ok((means, maxima, argmax))
        })
        .collect();
    let mut table = BatchTable {
        means: Vec::with_capacity(BATCHES),
        maxima: Vec::with_capacity(BATCHES),
        argmax: Vec::with_capacity(BATCHES),
        per_batch,
    };
    for b in batches {
        let (m, x, a) = b?;
        table.means.push(m);
        table.maxima.push(x);
        table.argmax.push(a);
    }
    Ok(table)
}

/// Outcome of a checked inequality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// `slack >= -(3·stderr + SLACK_FLOOR·max(scale, 1))`.
pub fn holds(slack: f64, stderr: f64, scale: f64) -> bool {
    slack >= -(3.0 * stderr + SLACK_FLOOR * scale.abs().max(1.0))
}

pub fn verdict(slack: f64, stderr: f64, scale: f64) -> Verdict {
    if slack.is_nan() || stderr.is_nan() {
        Verdict::Inconclusive
    } else if holds(slack, stderr, scale) {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn latin_hypercube_covers_every_stratum() {
        let mut rng = batch_rng(7, 0, 0);
        let pts = latin_hypercube(&mut rng, 50, 3);
        for d in 0..3 {
            let mut strata: Vec<usize> = pts.iter().map(|p| (p[d] * 50.0) as usize).collect();
            strata.sort_unstable();
            assert_eq!(strata, (0..50).collect::<Vec<_>>());
        }
    }

    #[test]
    fn streams_differ() {
        let a: u64 = batch_rng(1, 0, 0).gen();
        let b: u64 = batch_rng(1, 0, 1).gen();
        let c: u64 = batch_rng(1, 1, 0).gen();
        assert!(a != b && a != c && b != c);
    }

    #[test]
    fn integrates_polynomial_within_error_bar() {
        let t = sample_batches(2, 16_000, 3, 0, |u| Ok(vec![u[0] * u[1], u[0] * u[0]])).unwrap();
        let e = t.component(0);
        assert!((e.mean - 0.25).abs() < 3.0 * e.stderr + 1e-12);
        let r = t.combine(|m| m[0] / m[1]);
        assert!((r.mean - 0.75).abs() < 3.0 * r.stderr + 1e-12);
        assert!(t.max(1) < 1.0 && t.max(1) > 0.99);
        assert!(t.argmax(1)[0] > 0.99);
    }

    #[test]
    fn deterministic_across_thread_pools() {
        let run =
            || sample_batches(3, 3200, 11, 2, |u| Ok(vec![(u[0] + u[1] * u[2]).sin()])).unwrap();
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(run);
        let many = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(run);
        assert_eq!(one, many);
    }

    #[test]
    fn budget_and_errors() {
        assert!(sample_batches(1, 10, 0, 0, |_| Ok(vec![0.0])).is_err());
        let r = sample_batches(1, 64, 0, 0, |u| {
            if u[0] > 0.5 {
                Err(Error::Domain("x".into()))
            } else {
                Ok(vec![1.0])
            }
        });
        assert!(r.is_err());
    }

    #[test]
    fn verdict_floor() {
        assert!(holds(0.0, 0.0, 1.0));
        assert!(holds(-1e-12, 0.0, 1.0));
        assert!(!holds(-1e-6, 1e-8, 1.0));
        assert_eq!(verdict(f64::NAN, 0.0, 1.0), Verdict::Inconclusive);
    }
}

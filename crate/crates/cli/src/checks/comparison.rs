//! Monte Carlo comparison inequalities: measure contraction, the entropic
//! curvature-dimension condition and Brunn–Minkowski.

use lfot::curvature::{mcp_check, mcp_verdict, ComparisonParams};
use lfot::entropy::{brunn_minkowski_check, tcd_check, BoxMeasure, TcdSide};
use lfot::potential::Potential;
use lfot::region::Region;
use lfot::{Error, Model, Point, Result};

use crate::report::{to_value, Outcome};

pub fn mcp(
    s: &Model,
    x: &Point,
    b: &Region,
    p: &ComparisonParams,
    samples: usize,
    seed: u64,
) -> Result<Outcome> {
    let r = mcp_check(s, x, b, p.t, p.k, p.n, samples, seed)?;
    Ok(Outcome {
        verdict: mcp_verdict(&r),
        lhs: Some(r.lhs),
        rhs: Some(r.rhs),
        slack: r.slack,
        stderr: r.stderr,
        samples: r.samples,
        regime: None,
        details: to_value(&r),
        error: None,
    })
}

/// The side closest to failing, measured by `slack + 3·stderr`.
fn worst_side(sides: &[TcdSide]) -> &TcdSide {
    sides
        .iter()
        .min_by(|a, b| {
            (a.slack + 3.0 * a.stderr).total_cmp(&(b.slack + 3.0 * b.stderr))
        })
        .expect("at least one side is evaluated")
}

pub fn tcd(
    s: &Model,
    initial: &Region,
    u: &Potential,
    p: &ComparisonParams,
    samples: usize,
    seed: u64,
) -> Result<Outcome> {
    let Region::Box { lo, hi } = initial else {
        return Err(Error::Parameter("initial measure support must be a box".into()));
    };
    let mu0 = BoxMeasure::new(lo.clone(), hi.clone())?;
    let r = tcd_check(s, &mu0, u, p, samples, seed)?;
    let side = worst_side(&r.checks);
    Ok(Outcome {
        verdict: r.verdict(),
        lhs: Some(side.lhs),
        rhs: Some(side.rhs),
        slack: side.slack,
        stderr: side.stderr,
        samples: r.samples,
        regime: Some(r.regime),
        details: to_value(&r),
        error: None,
    })
}

pub fn brunn_minkowski(
    s: &Model,
    a0: &Region,
    a1: &Region,
    p: &ComparisonParams,
    samples: usize,
    seed: u64,
) -> Result<Outcome> {
    let r = brunn_minkowski_check(s, a0, a1, p.t, p.k, p.n, samples, seed)?;
    Ok(Outcome {
        verdict: r.verdict(),
        lhs: Some(r.lhs),
        rhs: Some(r.rhs),
        slack: r.slack,
        stderr: r.stderr,
        samples: r.samples,
        regime: Some(r.regime),
        details: to_value(&r),
        error: None,
    })
}

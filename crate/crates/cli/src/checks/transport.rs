//! Discrete optimal couplings and `q`-geodesics of measures.

use lfot::measure::DiscreteMeasure;
use lfot::transport::{
    brute_force_coupling, cyclical_monotonicity_check, displacement_interpolate, kantorovich_duals,
    optimal_coupling_lp, BRUTE_FORCE_MAX,
};
use lfot::{Model, Point, Result};
use serde_json::json;

use crate::report::{real, to_value, Outcome};

/// `|objective_LP - objective_brute_force|`.
pub const BRUTE_FORCE_TOL: f64 = 1e-9;
/// `|Σ μ u + Σ ν v - objective|`.
pub const DUALITY_GAP_TOL: f64 = 1e-8;
/// Accepted violation of cyclical monotonicity and of dual feasibility.
pub const MONOTONICITY_TOL: f64 = 1e-9;
pub const MARGINAL_TOL: f64 = 1e-9;
/// `|ℓ_q(μ_s, μ_t) - (t - s) ℓ_q(μ₀, μ₁)| / max(1, ℓ_q(μ₀, μ₁))`.
pub const Q_GEODESIC_TOL: f64 = 1e-6;

pub fn coupling(s: &Model, mu: &DiscreteMeasure, nu: &DiscreteMeasure, q: f64) -> Result<Outcome> {
    let pi = optimal_coupling_lp(s, mu, nu, q)?;
    let duals = kantorovich_duals(&pi)?;
    let pairs: Vec<(Point, Point)> = pi
        .support()
        .iter()
        .map(|&(i, j, _)| (mu.atoms()[i].clone(), nu.atoms()[j].clone()))
        .collect();
    let monotonicity = cyclical_monotonicity_check(s, &pairs, q)?;
    let brute = if mu.len() == nu.len()
        && mu.len() <= BRUTE_FORCE_MAX
        && mu.is_uniform()
        && nu.is_uniform()
    {
        Some(brute_force_coupling(s, mu, nu, q)?.objective)
    } else {
        None
    };
    let mut checks = vec![
        (duals.gap.abs(), DUALITY_GAP_TOL),
        (-duals.min_slack, MONOTONICITY_TOL),
        (-monotonicity, MONOTONICITY_TOL),
        (pi.marginal_error(), MARGINAL_TOL),
    ];
    if let Some(b) = brute {
        checks.push(((b - pi.objective).abs(), BRUTE_FORCE_TOL));
    }
    let details = json!({
        "cost_q": real(pi.cost_q),
        "objective": real(pi.objective),
        "brute_force_objective": brute.map_or(serde_json::Value::Null, real),
        "duality_gap": real(duals.gap),
        "dual_min_slack": real(duals.min_slack),
        "monotonicity": real(monotonicity),
        "marginal_error": real(pi.marginal_error()),
        "chronological": pi.chronological,
        "lightlike_pairs": pi.lightlike_pairs,
        "support": pi.support().iter().map(|&(i, j, m)| json!([i, j, m])).collect::<Vec<_>>(),
    });
    let mut o = Outcome::tolerance(&checks, mu.len() * nu.len(), details);
    o.lhs = Some(pi.objective);
    o.rhs = brute;
    Ok(o)
}

pub fn q_geodesic(
    s: &Model,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    q: f64,
    times: &[[f64; 2]],
) -> Result<Outcome> {
    let pi = optimal_coupling_lp(s, mu, nu, q)?;
    let full = pi.cost_q;
    let mut worst: f64 = 0.0;
    let mut rows = Vec::new();
    for &[a, b] in times {
        let mu_a = displacement_interpolate(s, &pi, a)?;
        let mu_b = displacement_interpolate(s, &pi, b)?;
        let part = optimal_coupling_lp(s, &mu_a, &mu_b, q)?.cost_q;
        let err = (part - (b - a) * full).abs() / full.abs().max(1.0);
        worst = worst.max(err);
        rows.push(json!({
            "s": a,
            "t": b,
            "cost_q": real(part),
            "expected": real((b - a) * full),
            "relative_error": real(err),
        }));
    }
    let details = json!({
        "cost_q": real(full),
        "coupling_support": to_value(&pi.support()),
        "intervals": rows,
        "tolerance": Q_GEODESIC_TOL,
    });
    let mut o = Outcome::tolerance(&[(worst, Q_GEODESIC_TOL)], times.len(), details);
    o.lhs = Some(full);
    Ok(o)
}

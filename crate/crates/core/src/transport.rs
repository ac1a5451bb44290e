//! Optimal couplings of discrete measures for the cost `l^q / q`, their
//! Kantorovich duals and displacement interpolation.

use std::collections::HashMap;
use std::io::Write;

use itertools::Itertools;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::distance::{intermediate_point, time_separation};
use crate::error::{Error, Result};
use crate::ext;
use crate::finsler::{FinslerStructure, Point};
use crate::lp::{self, LpError};
use crate::measure::DiscreteMeasure;

fn check_q(q: f64) -> Result<()> {
    if q > 0.0 && q <= 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("q = {q} outside (0, 1]")))
    }
}

/// `l(x_i, y_j)` for all atom pairs, computed in parallel.
pub fn separation_matrix<S: FinslerStructure>(
    s: &S,
    xs: &[Point],
    ys: &[Point],
) -> Result<Vec<Vec<f64>>> {
    xs.par_iter()
        .map(|x| {
            ys.iter()
                .map(|y| Ok(time_separation(s, x, y)?.value))
                .collect()
        })
        .collect()
}

/// `l^q / q` entrywise, `-inf` on non-causal pairs.
pub fn lq_matrix(l: &[Vec<f64>], q: f64) -> Vec<Vec<f64>> {
    l.iter()
        .map(|row| row.iter().map(|&v| ext::pow(v, q) / q).collect())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Coupling {
    pub source: DiscreteMeasure,
    pub target: DiscreteMeasure,
    /// `table[i][j] = π(x_i, y_j)`.
    pub table: Vec<Vec<f64>>,
    /// `ℓ_q = (Σ π l^q)^{1/q}`.
    pub cost_q: f64,
    /// `Σ π l^q / q`.
    pub objective: f64,
    pub q: f64,
    /// Every supported pair is chronological (`l > 0`).
    pub chronological: bool,
    /// Admissible pairs with `l = 0`; their presence makes the cost degenerate.
    pub lightlike_pairs: usize,
    /// `l(x_i, y_j)`.
    pub separations: Vec<Vec<f64>>,
    /// LP dual values when produced by the solver.
    pub lp_duals: Option<(Vec<f64>, Vec<f64>)>,
}

/// Mass below which a table entry counts as unsupported.
pub const SUPPORT_TOL: f64 = 1e-14;

impl Coupling {
    fn assemble(
        source: &DiscreteMeasure,
        target: &DiscreteMeasure,
        table: Vec<Vec<f64>>,
        separations: Vec<Vec<f64>>,
        q: f64,
        lp_duals: Option<(Vec<f64>, Vec<f64>)>,
    ) -> Self {
        let mut objective = 0.0;
        let mut chronological = true;
        let mut lightlike_pairs = 0;
        for (i, row) in table.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                let l = separations[i][j];
                if l == 0.0 {
                    lightlike_pairs += 1;
                }
                if p > SUPPORT_TOL {
                    objective += p * l.powf(q) / q;
                    if !(l > 0.0) {
                        chronological = false;
                    }
                }
            }
        }
        Coupling {
            source: source.clone(),
            target: target.clone(),
            table,
            cost_q: (q * objective).max(0.0).powf(1.0 / q),
            objective,
            q,
            chronological,
            lightlike_pairs,
            separations,
            lp_duals,
        }
    }

    /// Supported pairs `(i, j, mass)`.
    pub fn support(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (i, row) in self.table.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                if p > SUPPORT_TOL {
                    out.push((i, j, p));
                }
            }
        }
        out
    }

    /// Largest deviation of the marginals from the prescribed weights.
    pub fn marginal_error(&self) -> f64 {
        let rows = self
            .table
            .iter()
            .zip(self.source.weights())
            .map(|(r, w)| (r.iter().sum::<f64>() - w).abs());
        let cols = (0..self.target.len()).map(|j| {
            (self.table.iter().map(|r| r[j]).sum::<f64>() - self.target.weights()[j]).abs()
        });
        rows.chain(cols).fold(0.0, f64::max)
    }

    /// Writes `i, j, weight, l, lq` for each supported pair.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["i", "j", "weight", "l", "lq"])?;
        for (i, j, p) in self.support() {
            let l = self.separations[i][j];
            w.write_record(&[
                i.to_string(),
                j.to_string(),
                format!("{p:.12e}"),
                format!("{l:.12e}"),
                format!("{:.12e}", l.powf(self.q) / self.q),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `ℓ_q`-optimal coupling by exact linear programming over causal pairs.
pub fn optimal_coupling_lp<S: FinslerStructure>(
    s: &S,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    q: f64,
) -> Result<Coupling> {
    check_q(q)?;
    let l = separation_matrix(s, mu.atoms(), nu.atoms())?;
    optimal_coupling_from_separations(mu, nu, l, q)
}

/// As [`optimal_coupling_lp`] with a precomputed separation matrix.
pub fn optimal_coupling_from_separations(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    l: Vec<Vec<f64>>,
    q: f64,
) -> Result<Coupling> {
    check_q(q)?;
    let (m, k) = (mu.len(), nu.len());
    let vars: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .filter(|&(i, j)| l[i][j] >= 0.0)
        .collect();
    if vars.is_empty() {
        return Err(Error::NoCausalCoupling);
    }
    let c: Vec<f64> = vars.iter().map(|&(i, j)| l[i][j].powf(q) / q).collect();
    // row constraints, then all column constraints but the last (redundant)
    let ncons = m + k - 1;
    let mut a = vec![vec![0.0; vars.len()]; ncons];
    for (col, &(i, j)) in vars.iter().enumerate() {
        a[i][col] = 1.0;
        if j < k - 1 {
            a[m + j][col] = 1.0;
        }
    }
    let mut b: Vec<f64> = mu.weights().to_vec();
    b.extend_from_slice(&nu.weights()[..k - 1]);
    let sol = match lp::maximize(&c, &a, &b) {
        Ok(sol) => sol,
        Err(LpError::Infeasible(_)) => return Err(Error::NoCausalCoupling),
        Err(e) => return Err(Error::Unsupported(format!("LP failure: {e}"))),
    };
    let mut table = vec![vec![0.0; k]; m];
    for (col, &(i, j)) in vars.iter().enumerate() {
        table[i][j] = sol.x[col];
    }
    let u = sol.duals[..m].to_vec();
    let mut v = sol.duals[m..].to_vec();
    v.push(0.0);
    Ok(Coupling::assemble(mu, nu, table, l, q, Some((u, v))))
}

/// Largest instance accepted by [`brute_force_coupling`].
pub const BRUTE_FORCE_MAX: usize = 8;

/// Best matching by enumeration of all permutations; test oracle for the LP.
pub fn brute_force_coupling<S: FinslerStructure>(
    s: &S,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    q: f64,
) -> Result<Coupling> {
    check_q(q)?;
    let n = mu.len();
    if n != nu.len() || !mu.is_uniform() || !nu.is_uniform() {
        return Err(Error::Parameter(
            "brute force needs equal-size uniform measures".into(),
        ));
    }
    if n > BRUTE_FORCE_MAX {
        return Err(Error::SizeLimit(format!("{n} atoms > {BRUTE_FORCE_MAX}")));
    }
    let l = separation_matrix(s, mu.atoms(), nu.atoms())?;
    let c = lq_matrix(&l, q);
    let best = (0..n)
        .permutations(n)
        .map(|p| {
            let val = ext::sum(p.iter().enumerate().map(|(i, &j)| c[i][j]));
            (val, p)
        })
        .filter(|(v, _)| *v > f64::NEG_INFINITY)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .ok_or(Error::NoCausalCoupling)?;
    let w = 1.0 / n as f64;
    let mut table = vec![vec![0.0; n]; n];
    for (i, &j) in best.1.iter().enumerate() {
        table[i][j] = w;
    }
    Ok(Coupling::assemble(mu, nu, table, l, q, None))
}

/// Size of the random subsets used for long pair lists.
pub const MONOTONICITY_SUBSET: usize = 6;
const MONOTONICITY_SEED: u64 = 0xc1c1_1ca1;

fn rearrangement_gap(lq: &[Vec<f64>], idx: &[usize], perm: &[usize]) -> f64 {
    let base: f64 = idx.iter().map(|&i| lq[i][i]).sum();
    let moved = ext::sum(idx.iter().zip(perm).map(|(&i, &j)| lq[i][j]));
    if moved == f64::NEG_INFINITY {
        f64::INFINITY
    } else {
        base - moved
    }
}

/// Worst `Σ l(x_i,y_i)^q - Σ l(x_i,y_σ(i))^q` over rearrangements `σ` of
/// subsets of the pairs: all permutations of every subset of size at most
/// six (random subsets once they become too many), plus all cyclic shifts of
/// the full list. Nonnegative values mean no violation was found.
pub fn cyclical_monotonicity_check<S: FinslerStructure>(
    s: &S,
    pairs: &[(Point, Point)],
    q: f64,
) -> Result<f64> {
    check_q(q)?;
    let n = pairs.len();
    if n <= 1 {
        return Ok(0.0);
    }
    let xs: Vec<Point> = pairs.iter().map(|p| p.0.clone()).collect();
    let ys: Vec<Point> = pairs.iter().map(|p| p.1.clone()).collect();
    let lq: Vec<Vec<f64>> = separation_matrix(s, &xs, &ys)?
        .iter()
        .map(|r| r.iter().map(|&v| ext::pow(v, q)).collect())
        .collect();
    let mut worst: f64 = 0.0;
    let k = n.min(MONOTONICITY_SUBSET);
    let subsets: Vec<Vec<usize>> = if n <= 10 {
        (0..n).combinations(k).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(MONOTONICITY_SEED);
        (0..200)
            .map(|_| sample(&mut rng, n, k).into_vec())
            .collect()
    };
    for idx in &subsets {
        for perm in idx.iter().copied().permutations(k) {
            worst = worst.min(rearrangement_gap(&lq, idx, &perm));
        }
    }
    let all: Vec<usize> = (0..n).collect();
    for shift in 1..n {
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        worst = worst.min(rearrangement_gap(&lq, &all, &perm));
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformSide {
    /// `u(x) = sup_y (l^q/q - v(y))` on the source points.
    Source,
    /// `v(y) = sup_x (l^q/q - u(x))` on the target points.
    Target,
}

/// The `l^q`-transform of `vals` over a finite set, given the `l^q/q`
/// matrix indexed `[source][target]`.
pub fn lq_transform(cost: &[Vec<f64>], vals: &[f64], side: TransformSide) -> Result<Vec<f64>> {
    let m = cost.len();
    let k = cost.first().map_or(0, |r| r.len());
    let (outer, inner) = match side {
        TransformSide::Source => (m, k),
        TransformSide::Target => (k, m),
    };
    (0..outer)
        .map(|a| {
            let best = (0..inner)
                .map(|b| {
                    let c = match side {
                        TransformSide::Source => cost[a][b],
                        TransformSide::Target => cost[b][a],
                    };
                    c - vals[b]
                })
                .fold(f64::NEG_INFINITY, f64::max);
            if best == f64::NEG_INFINITY {
                Err(Error::NoCausalPartner(a))
            } else {
                Ok(best)
            }
        })
        .collect()
}

/// Kantorovich potentials `(u, v)` with `u ⊕ v >= l^q/q` and their gap to
/// the primal value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualPair {
    pub u_vals: Vec<f64>,
    pub v_vals: Vec<f64>,
    /// `Σ μ u + Σ ν v - ℓ_q^q / q`.
    pub gap: f64,
    /// `min (u ⊕ v - l^q/q)` over causal support pairs.
    pub min_slack: f64,
}

/// `Σ μ u + Σ ν v - objective`.
pub fn dual_gap(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    u: &[f64],
    v: &[f64],
    objective: f64,
) -> f64 {
    let a: f64 = mu.weights().iter().zip(u).map(|(w, x)| w * x).sum();
    let b: f64 = nu.weights().iter().zip(v).map(|(w, x)| w * x).sum();
    a + b - objective
}

/// LP duals tightened by one round of `l^q`-transforms, `u = ^{(l^q)}v`
/// then `v = u^{(l^q)}`.
pub fn kantorovich_duals(coupling: &Coupling) -> Result<DualPair> {
    let (_, v0) = coupling
        .lp_duals
        .clone()
        .ok_or_else(|| Error::Unsupported("coupling carries no LP duals".into()))?;
    let cost = lq_matrix(&coupling.separations, coupling.q);
    let u = lq_transform(&cost, &v0, TransformSide::Source)?;
    let v = lq_transform(&cost, &u, TransformSide::Target)?;
    let mut min_slack = f64::INFINITY;
    for (i, row) in cost.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > f64::NEG_INFINITY {
                min_slack = min_slack.min(u[i] + v[j] - c);
            }
        }
    }
    Ok(DualPair {
        gap: dual_gap(
            &coupling.source,
            &coupling.target,
            &u,
            &v,
            coupling.objective,
        ),
        u_vals: u,
        v_vals: v,
        min_slack,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QSeparation {
    pub separated: bool,
    /// Support pair minimizing `l`.
    pub witness: (usize, usize),
    pub min_l: f64,
}

/// Default chronology margin for [`q_separation_check`].
pub const CHRONOLOGY_EPS: f64 = 1e-9;

/// Whether `supp μ × supp ν ⊂ {l > eps}`, the sufficient condition for
/// `q`-separation.
pub fn q_separation_check<S: FinslerStructure>(
    s: &S,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    eps: f64,
) -> Result<QSeparation> {
    let l = separation_matrix(s, mu.atoms(), nu.atoms())?;
    let mut witness = (0, 0);
    let mut min_l = f64::INFINITY;
    for (i, row) in l.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v < min_l {
                min_l = v;
                witness = (i, j);
            }
        }
    }
    Ok(QSeparation {
        separated: min_l > eps,
        witness,
        min_l,
    })
}

/// Grid resolution for merging coincident interpolated atoms.
pub const MERGE_RESOLUTION: f64 = 1e-9;

/// `μ_t = (z_t)_♯ π`: each supported pair is pushed to its `t`-intermediate
/// point.
pub fn displacement_interpolate<S: FinslerStructure>(
    s: &S,
    pi: &Coupling,
    t: f64,
) -> Result<DiscreteMeasure> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Parameter(format!("t = {t} outside [0, 1]")));
    }
    if !pi.chronological {
        return Err(Error::NoMaximizer);
    }
    let support = pi.support();
    let images: Vec<Point> = support
        .par_iter()
        .map(|&(i, j, _)| intermediate_point(s, &pi.source.atoms()[i], &pi.target.atoms()[j], t))
        .collect::<Result<_>>()?;
    let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut atoms: Vec<Point> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    for (z, &(_, _, p)) in images.into_iter().zip(&support) {
        let key: Vec<i64> = z
            .coords()
            .iter()
            .map(|c| (c / MERGE_RESOLUTION).round() as i64)
            .collect();
        match index.get(&key) {
            Some(&k) => weights[k] += p,
            None => {
                index.insert(key, atoms.len());
                atoms.push(z);
                weights.push(p);
            }
        }
    }
    DiscreteMeasure::normalized(atoms, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Minkowski;

    fn two_by_two() -> (DiscreteMeasure, DiscreteMeasure) {
        let mu =
            DiscreteMeasure::uniform(vec![Point::new([0.0, 0.0]), Point::new([0.0, 0.5])]).unwrap();
        let nu =
            DiscreteMeasure::uniform(vec![Point::new([3.0, 0.0]), Point::new([3.0, 0.5])]).unwrap();
        (mu, nu)
    }

    #[test]
    fn singletons() {
        let m = Minkowski::new(2);
        let mu = DiscreteMeasure::dirac(Point::new([0.0, 0.0]));
        let nu = DiscreteMeasure::dirac(Point::new([2.0, 1.0]));
        let c = optimal_coupling_lp(&m, &mu, &nu, 0.5).unwrap();
        assert_eq!(c.table, vec![vec![1.0]]);
        assert!((c.cost_q - 3f64.sqrt()).abs() < 1e-14);
    }

    // identity matching: ½·3^½ + ½·3^½ = √3, so ℓ_½ = (√3)² = 3;
    // crossed matching: l = √(9 - 0.25) for both pairs, which is smaller
    #[test]
    fn two_by_two_matches_brute_force() {
        let m = Minkowski::new(2);
        let (mu, nu) = two_by_two();
        let lp = optimal_coupling_lp(&m, &mu, &nu, 0.5).unwrap();
        let bf = brute_force_coupling(&m, &mu, &nu, 0.5).unwrap();
        assert!((lp.cost_q - 3.0).abs() < 1e-12);
        assert!((lp.cost_q - bf.cost_q).abs() < 1e-12);
        assert!(lp.table[0][0] > 0.49 && lp.table[1][1] > 0.49);
        assert!(lp.marginal_error() < 1e-12);
    }

    #[test]
    fn forced_permutation() {
        let m = Minkowski::new(2);
        // y₁ is only reachable from x₂ and y₂ only from x₁
        let mu =
            DiscreteMeasure::uniform(vec![Point::new([0.0, 0.0]), Point::new([0.0, 5.0])]).unwrap();
        let nu =
            DiscreteMeasure::uniform(vec![Point::new([1.0, 5.0]), Point::new([1.0, 0.0])]).unwrap();
        let bf = brute_force_coupling(&m, &mu, &nu, 0.5).unwrap();
        assert_eq!(bf.table, vec![vec![0.0, 0.5], vec![0.5, 0.0]]);
        let lp = optimal_coupling_lp(&m, &mu, &nu, 0.5).unwrap();
        assert_eq!(lp.support().len(), 2);
        assert!((lp.table[0][1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn no_causal_coupling() {
        let m = Minkowski::new(2);
        let mu = DiscreteMeasure::dirac(Point::new([0.0, 0.0]));
        let nu = DiscreteMeasure::dirac(Point::new([0.0, 1.0]));
        assert_eq!(
            optimal_coupling_lp(&m, &mu, &nu, 0.5),
            Err(Error::NoCausalCoupling)
        );
        // both mass of μ must go to y₁, which can only absorb half
        let mu =
            DiscreteMeasure::uniform(vec![Point::new([0.0, 0.0]), Point::new([0.0, 0.1])]).unwrap();
        let nu =
            DiscreteMeasure::uniform(vec![Point::new([1.0, 0.0]), Point::new([1.0, 9.0])]).unwrap();
        assert_eq!(
            optimal_coupling_lp(&m, &mu, &nu, 0.5),
            Err(Error::NoCausalCoupling)
        );
    }

    #[test]
    fn size_limit() {
        let m = Minkowski::new(2);
        let pts: Vec<Point> = (0..9).map(|i| Point::new([0.0, i as f64])).collect();
        let mu = DiscreteMeasure::uniform(pts.clone()).unwrap();
        assert!(matches!(
            brute_force_coupling(&m, &mu, &mu, 0.5),
            Err(Error::SizeLimit(_))
        ));
    }

    #[test]
    fn crossed_matching_violates_monotonicity() {
        let m = Minkowski::new(2);
        let (mu, nu) = two_by_two();
        let straight = vec![
            (mu.atoms()[0].clone(), nu.atoms()[0].clone()),
            (mu.atoms()[1].clone(), nu.atoms()[1].clone()),
        ];
        assert!(cyclical_monotonicity_check(&m, &straight, 0.5).unwrap() >= 0.0);
        let crossed = vec![
            (mu.atoms()[0].clone(), nu.atoms()[1].clone()),
            (mu.atoms()[1].clone(), nu.atoms()[0].clone()),
        ];
        assert!(cyclical_monotonicity_check(&m, &crossed, 0.5).unwrap() < 0.0);
        assert_eq!(
            cyclical_monotonicity_check(&m, &straight[..1], 0.5).unwrap(),
            0.0
        );
    }

    #[test]
    fn transforms_and_duality_gap() {
        let m = Minkowski::new(2);
        let (mu, nu) = two_by_two();
        let c = optimal_coupling_lp(&m, &mu, &nu, 0.5).unwrap();
        let d = kantorovich_duals(&c).unwrap();
        assert!(d.gap.abs() < 1e-9, "gap {}", d.gap);
        assert!(d.min_slack >= -1e-12);
        // singleton transform
        let cost = vec![vec![3f64.sqrt().sqrt() / 0.5]];
        assert_eq!(
            lq_transform(&cost, &[0.0], TransformSide::Source).unwrap(),
            vec![cost[0][0]]
        );
        // double transform is idempotent
        let cost = lq_matrix(&c.separations, 0.5);
        let u = lq_transform(&cost, &[0.3, -0.2], TransformSide::Source).unwrap();
        let v = lq_transform(&cost, &u, TransformSide::Target).unwrap();
        let u2 = lq_transform(&cost, &v, TransformSide::Source).unwrap();
        assert_eq!(u, u2);
    }

    #[test]
    fn transform_without_partner_errors() {
        let cost = vec![
            vec![f64::NEG_INFINITY, 1.0],
            vec![f64::NEG_INFINITY, f64::NEG_INFINITY],
        ];
        assert_eq!(
            lq_transform(&cost, &[0.0, 0.0], TransformSide::Source),
            Err(Error::NoCausalPartner(1))
        );
    }

    #[test]
    fn q_separation_examples() {
        let m = Minkowski::new(2);
        let (mu, nu) = two_by_two();
        assert!(
            q_separation_check(&m, &mu, &nu, CHRONOLOGY_EPS)
                .unwrap()
                .separated
        );
        let r = q_separation_check(&m, &mu, &mu, CHRONOLOGY_EPS).unwrap();
        assert!(!r.separated && r.min_l <= 0.0);
        let null = DiscreteMeasure::dirac(Point::new([1.0, 1.0]));
        let r = q_separation_check(
            &m,
            &DiscreteMeasure::dirac(Point::new([0.0, 0.0])),
            &null,
            CHRONOLOGY_EPS,
        )
        .unwrap();
        assert!(!r.separated);
        assert_eq!(r.min_l, 0.0);
    }

    #[test]
    fn interpolation_endpoints_and_affine_cost() {
        let m = Minkowski::new(2);
        let (mu, nu) = two_by_two();
        let c = optimal_coupling_lp(&m, &mu, &nu, 0.5).unwrap();
        assert_eq!(displacement_interpolate(&m, &c, 0.0).unwrap(), mu);
        assert_eq!(displacement_interpolate(&m, &c, 1.0).unwrap(), nu);
        let full = c.cost_q;
        for (s0, t0) in [(0.0, 0.25), (0.25, 0.75), (0.75, 1.0)] {
            let a = displacement_interpolate(&m, &c, s0).unwrap();
            let b = displacement_interpolate(&m, &c, t0).unwrap();
            let part = optimal_coupling_lp(&m, &a, &b, 0.5).unwrap().cost_q;
            assert!((part - (t0 - s0) * full).abs() < 1e-9);
        }
    }

    #[test]
    fn coupling_csv_has_one_row_per_support_pair() {
        let m = Minkowski::new(2);
        let (mu, nu) = two_by_two();
        let c = optimal_coupling_lp(&m, &mu, &nu, 0.5).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap().lines().count(),
            1 + c.support().len()
        );
    }
}

//! Dense two-phase simplex for `max cᵀx` subject to `Ax = b`, `x >= 0`.
//!
//! Bland's rule guarantees termination on degenerate problems, which
//! transportation polytopes always are. Problem sizes here are small
//! (a few hundred variables), so a dense tableau is adequate.

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum LpError {
    #[error("linear program is infeasible (phase-one residual {0:.3e})")]
    Infeasible(f64),
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex iteration limit reached")]
    IterationLimit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Dual values `y` with `Aᵀy >= c` and `bᵀy = objective`.
    pub duals: Vec<f64>,
}

const EPS: f64 = 1e-11;

struct Tableau {
    rows: Vec<Vec<f64>>,
    /// Reduced costs `c_j - c_B B⁻¹ A_j`; last entry is `-c_B B⁻¹ b`.
    cost: Vec<f64>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                let f = row[c];
                if f != 0.0 {
                    for (v, pv) in row.iter_mut().zip(&prow) {
                        *v -= f * pv;
                    }
                }
            }
        }
        let f = self.cost[c];
        if f != 0.0 {
            for (v, pv) in self.cost.iter_mut().zip(&prow) {
                *v -= f * pv;
            }
        }
        self.basis[r] = c;
    }

    fn set_costs(&mut self, c: &[f64]) {
        let w = self.ncols + 1;
        self.cost = vec![0.0; w];
        self.cost[..self.ncols].copy_from_slice(c);
        for (r, &bvar) in self.basis.iter().enumerate() {
            let cb = c[bvar];
            if cb != 0.0 {
                for (v, rv) in self.cost.iter_mut().zip(&self.rows[r]) {
                    *v -= cb * rv;
                }
            }
        }
    }

    /// Runs simplex iterations with Bland's rule over columns `< enter_limit`.
    fn optimize(&mut self, enter_limit: usize) -> Result<(), LpError> {
        let rhs = self.ncols;
        let max_iter = 50_000;
        for _ in 0..max_iter {
            let Some(c) = (0..enter_limit).find(|&j| self.cost[j] > EPS) else {
                return Ok(());
            };
            let mut best: Option<(usize, f64)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                if row[c] > EPS {
                    let ratio = row[rhs] / row[c];
                    best = match best {
                        None => Some((r, ratio)),
                        Some((br, bv)) => {
                            if ratio < bv - EPS
                                || (ratio <= bv + EPS && self.basis[r] < self.basis[br])
                            {
                                Some((r, ratio))
                            } else {
                                Some((br, bv))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = best else {
                return Err(LpError::Unbounded);
            };
            self.pivot(r, c);
        }
        Err(LpError::IterationLimit)
    }
}

/// Solves `max cᵀx` s.t. `Ax = b`, `x >= 0`.
pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution, LpError> {
    let m = b.len();
    let n = c.len();
    let ncols = n + m;
    let mut sign = vec![1.0; m];
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let s = if b[i] < 0.0 { -1.0 } else { 1.0 };
        sign[i] = s;
        let mut row = vec![0.0; ncols + 1];
        for j in 0..n {
            row[j] = s * a[i][j];
        }
        row[n + i] = 1.0;
        row[ncols] = s * b[i];
        rows.push(row);
    }
    let mut t = Tableau {
        rows,
        cost: Vec::new(),
        basis: (n..n + m).collect(),
        ncols,
    };
    // phase one: maximize -Σ artificials
    let mut c1 = vec![0.0; ncols];
    c1[n..].iter_mut().for_each(|v| *v = -1.0);
    t.set_costs(&c1);
    t.optimize(ncols)?;
    let residual = -t.cost[ncols];
    let scale = b.iter().map(|v| v.abs()).fold(1.0, f64::max);
    if residual.abs() > 1e-9 * scale {
        return Err(LpError::Infeasible(residual.abs()));
    }
    // drive zero-level artificials out of the basis where possible
    for r in 0..m {
        if t.basis[r] >= n {
            if let Some(j) = (0..n).find(|&j| t.rows[r][j].abs() > 1e-9) {
                t.pivot(r, j);
            }
        }
    }
    let mut c2 = vec![0.0; ncols];
    c2[..n].copy_from_slice(c);
    t.set_costs(&c2);
    t.optimize(n)?;
    let mut x = vec![0.0; n];
    for (r, &bv) in t.basis.iter().enumerate() {
        if bv < n {
            x[bv] = t.rows[r][ncols].max(0.0);
        }
    }
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    // reduced cost of artificial i is -(c_B B⁻¹)_i
    let duals = (0..m).map(|i| -t.cost[n + i] * sign[i]).collect();
    Ok(LpSolution {
        x,
        objective,
        duals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lp_with_known_optimum() {
        // max 3x + 2y s.t. x + y + s1 = 4, x + 3y + s2 = 6
        let c = [3.0, 2.0, 0.0, 0.0];
        let a = vec![vec![1.0, 1.0, 1.0, 0.0], vec![1.0, 3.0, 0.0, 1.0]];
        let sol = maximize(&c, &a, &[4.0, 6.0]).unwrap();
        assert!((sol.objective - 12.0).abs() < 1e-12);
        assert!((sol.x[0] - 4.0).abs() < 1e-12);
        let dual_obj: f64 = sol.duals.iter().zip([4.0, 6.0]).map(|(y, b)| y * b).sum();
        assert!((dual_obj - 12.0).abs() < 1e-12);
        assert_eq!(sol.duals, vec![3.0, 0.0]);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let a = vec![vec![1.0, 1.0]];
        assert!(matches!(
            maximize(&[1.0, 0.0], &a, &[-1.0]),
            Err(LpError::Infeasible(_))
        ));
        let a = vec![vec![1.0, -1.0]];
        assert_eq!(maximize(&[1.0, 1.0], &a, &[1.0]), Err(LpError::Unbounded));
    }

    #[test]
    fn negative_rhs_duals_keep_their_sign() {
        // max -x s.t. -x = -2
        let sol = maximize(&[-1.0], &[vec![-1.0]], &[-2.0]).unwrap();
        assert!((sol.objective + 2.0).abs() < 1e-12);
        assert!((sol.duals[0] * -2.0 - sol.objective).abs() < 1e-12);
    }
}

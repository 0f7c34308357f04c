//! Dense two-phase simplex with Bland's rule.
//!
//! Problem sizes here are a few dozen variables and a few hundred rows, so
//! the tableau is kept dense and every pivot is exact Gauss-Jordan.

use serde::{Deserialize, Serialize};

const PIVOT_TOL: f64 = 1e-10;
const FEAS_TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `max objective·x` subject to linear rows and per-variable bounds.
/// Variables default to `[0, +∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Pivot budget exhausted even with anti-cycling.
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Objective value; NaN unless optimal.
    pub value: f64,
    /// Optimal point; empty unless optimal.
    pub point: Vec<f64>,
}

impl LpOutcome {
    fn status_only(status: LpStatus) -> Self {
        LpOutcome {
            status,
            value: f64::NAN,
            point: Vec::new(),
        }
    }
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            constraints: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        assert_eq!(coeffs.len(), self.num_vars(), "constraint arity mismatch");
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn set_bounds(&mut self, var: usize, lo: f64, hi: f64) {
        self.bounds[var] = (lo, hi);
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            let v = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (v, (lo, hi)) in x.iter().zip(&self.bounds) {
            worst = worst.max(lo - v).max(v - hi);
        }
        worst
    }
}

/// How an original variable maps onto nonnegative tableau columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// x = lo + y
    Shifted { col: usize, lo: f64 },
    /// x = hi - y
    Mirrored { col: usize, hi: f64 },
    /// x = y⁺ - y⁻
    Split { pos: usize, neg: usize },
}

struct Tableau {
    /// rows × (cols + 1); the last column is the right-hand side.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, obj: &mut [f64], r: usize, c: usize) {
        let width = self.cols + 1;
        let piv = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= piv;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let factor = row[c];
            if factor != 0.0 {
                for j in 0..width {
                    row[j] -= factor * pivot_row[j];
                }
                row[c] = 0.0;
            }
        }
        let factor = obj[c];
        if factor != 0.0 {
            for j in 0..width {
                obj[j] -= factor * pivot_row[j];
            }
            obj[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Minimizes over columns `< allowed` with Bland's rule. `obj` holds
    /// reduced costs and, in its last slot, minus the objective value.
    fn optimize(&mut self, obj: &mut [f64], allowed: usize) -> Result<(), LpStatus> {
        for _ in 0..MAX_PIVOTS {
            let Some(enter) = (0..allowed).find(|&j| obj[j] < -PIVOT_TOL) else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[enter];
                if a > PIVOT_TOL {
                    let ratio = row[self.cols] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - 1e-12
                                || (ratio <= br + 1e-12 && self.basis[i] < self.basis[bi])
                            {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Err(LpStatus::Unbounded);
            };
            self.pivot(obj, r, enter);
        }
        Err(LpStatus::Failed)
    }
}

pub fn lp_solve(lp: &LinearProgram) -> LpOutcome {
    let n = lp.num_vars();
    for c in &lp.constraints {
        assert_eq!(c.coeffs.len(), n, "constraint arity mismatch");
    }

    // Substitute bounded/free variables by nonnegative columns.
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0;
    let mut extra_rows: Vec<(usize, f64)> = Vec::new();
    for &(lo, hi) in &lp.bounds {
        if lo > hi {
            return LpOutcome::status_only(LpStatus::Infeasible);
        }
        if lo.is_finite() {
            maps.push(VarMap::Shifted { col: ncols, lo });
            if hi.is_finite() {
                extra_rows.push((ncols, hi - lo));
            }
            ncols += 1;
        } else if hi.is_finite() {
            maps.push(VarMap::Mirrored { col: ncols, hi });
            ncols += 1;
        } else {
            maps.push(VarMap::Split {
                pos: ncols,
                neg: ncols + 1,
            });
            ncols += 2;
        }
    }
    let structural = ncols;

    // Rows over the substituted columns, all with rhs >= 0.
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::new();
    for c in &lp.constraints {
        let mut coeffs = vec![0.0; structural];
        let mut rhs = c.rhs;
        for (k, a) in c.coeffs.iter().enumerate() {
            match maps[k] {
                VarMap::Shifted { col, lo } => {
                    coeffs[col] += a;
                    rhs -= a * lo;
                }
                VarMap::Mirrored { col, hi } => {
                    coeffs[col] -= a;
                    rhs -= a * hi;
                }
                VarMap::Split { pos, neg } => {
                    coeffs[pos] += a;
                    coeffs[neg] -= a;
                }
            }
        }
        rows.push((coeffs, c.relation, rhs));
    }
    for (col, width) in extra_rows {
        let mut coeffs = vec![0.0; structural];
        coeffs[col] = 1.0;
        rows.push((coeffs, Relation::Le, width));
    }
    for (coeffs, rel, rhs) in rows.iter_mut() {
        if *rhs < 0.0 {
            coeffs.iter_mut().for_each(|v| *v = -*v);
            *rhs = -*rhs;
            *rel = match rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let first_art = structural + n_slack;
    let cols = first_art + n_art;

    let mut tab = Tableau {
        rows: Vec::with_capacity(rows.len()),
        basis: Vec::with_capacity(rows.len()),
        cols,
    };
    let (mut slack, mut art) = (structural, first_art);
    for (coeffs, rel, rhs) in &rows {
        let mut row = vec![0.0; cols + 1];
        row[..structural].copy_from_slice(coeffs);
        row[cols] = *rhs;
        match rel {
            Relation::Le => {
                row[slack] = 1.0;
                tab.basis.push(slack);
                slack += 1;
            }
            Relation::Ge => {
                row[slack] = -1.0;
                slack += 1;
                row[art] = 1.0;
                tab.basis.push(art);
                art += 1;
            }
            Relation::Eq => {
                row[art] = 1.0;
                tab.basis.push(art);
                art += 1;
            }
        }
        tab.rows.push(row);
    }

    // Phase 1: minimize the sum of artificials.
    let rhs_scale = 1.0 + rows.iter().map(|r| r.2.abs()).fold(0.0, f64::max);
    if n_art > 0 {
        let mut obj = vec![0.0; cols + 1];
        obj[first_art..cols].iter_mut().for_each(|v| *v = 1.0);
        for (i, row) in tab.rows.iter().enumerate() {
            if tab.basis[i] >= first_art {
                for j in 0..=cols {
                    obj[j] -= row[j];
                }
            }
        }
        if let Err(status) = tab.optimize(&mut obj, cols) {
            // Phase 1 is bounded below by zero; only the pivot cap can fire.
            return LpOutcome::status_only(status);
        }
        if -obj[cols] > FEAS_TOL * rhs_scale {
            return LpOutcome::status_only(LpStatus::Infeasible);
        }
        // Drive zero-level artificials out of the basis; drop redundant rows.
        let mut i = 0;
        while i < tab.rows.len() {
            if tab.basis[i] >= first_art {
                if let Some(j) = (0..first_art).find(|&j| tab.rows[i][j].abs() > 1e-9) {
                    tab.pivot(&mut obj, i, j);
                    i += 1;
                } else {
                    tab.rows.remove(i);
                    tab.basis.remove(i);
                }
            } else {
                i += 1;
            }
        }
    }

    // Phase 2 over structural and slack columns: minimize -objective.
    let mut cost = vec![0.0; cols + 1];
    for (k, c) in lp.objective.iter().enumerate() {
        match maps[k] {
            VarMap::Shifted { col, .. } => cost[col] -= c,
            VarMap::Mirrored { col, .. } => cost[col] += c,
            VarMap::Split { pos, neg } => {
                cost[pos] -= c;
                cost[neg] += c;
            }
        }
    }
    let mut obj = cost.clone();
    for (i, row) in tab.rows.iter().enumerate() {
        let cb = cost[tab.basis[i]];
        if cb != 0.0 {
            for j in 0..=cols {
                obj[j] -= cb * row[j];
            }
        }
    }
    if let Err(status) = tab.optimize(&mut obj, first_art) {
        return LpOutcome::status_only(status);
    }

    let mut y = vec![0.0; cols];
    for (i, row) in tab.rows.iter().enumerate() {
        y[tab.basis[i]] = row[cols];
    }
    let point: Vec<f64> = maps
        .iter()
        .map(|m| match *m {
            VarMap::Shifted { col, lo } => lo + y[col],
            VarMap::Mirrored { col, hi } => hi - y[col],
            VarMap::Split { pos, neg } => y[pos] - y[neg],
        })
        .collect();
    let value = lp.objective.iter().zip(&point).map(|(c, x)| c * x).sum();
    LpOutcome {
        status: LpStatus::Optimal,
        value,
        point,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_on_weight_simplex() {
        // vars: w1, w2, eps
        let mut lp = LinearProgram::new(vec![0.0, 0.0, 1.0]);
        lp.set_bounds(2, f64::NEG_INFINITY, f64::INFINITY);
        lp.add_constraint(vec![1.0, -1.0, -1.0], Relation::Ge, 0.0);
        lp.add_constraint(vec![1.0, 1.0, 0.0], Relation::Eq, 1.0);
        let out = lp_solve(&lp);
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.value - 1.0).abs() < 1e-12);
        assert!((out.point[0] - 1.0).abs() < 1e-12 && out.point[1].abs() < 1e-12);
    }

    #[test]
    fn contradiction_is_infeasible() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add_constraint(vec![1.0], Relation::Le, -1.0);
        assert_eq!(lp_solve(&lp).status, LpStatus::Infeasible);
    }

    #[test]
    fn open_ray_is_unbounded() {
        let lp = LinearProgram::new(vec![1.0]);
        assert_eq!(lp_solve(&lp).status, LpStatus::Unbounded);
    }

    #[test]
    fn bounds_are_honoured() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.set_bounds(0, -2.0, 3.0);
        lp.set_bounds(1, f64::NEG_INFINITY, -1.5);
        let out = lp_solve(&lp);
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.value - 1.5).abs() < 1e-12);
        assert!(lp.max_violation(&out.point) < 1e-12);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.add_constraint(vec![1.0, 1.0], Relation::Eq, 1.0);
        lp.add_constraint(vec![2.0, 2.0], Relation::Eq, 2.0);
        let out = lp_solve(&lp);
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_program_terminates() {
        // Classic cycling example (Beale); Bland's rule must terminate.
        let mut lp = LinearProgram::new(vec![0.75, -150.0, 0.02, -6.0]);
        lp.add_constraint(vec![0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0);
        lp.add_constraint(vec![0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0);
        lp.add_constraint(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0);
        let out = lp_solve(&lp);
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.value - 0.05).abs() < 1e-9);
    }
}

//! A small dense linear-program solver: two-phase primal simplex with
//! Bland's pivoting rule.
//!
//! The scheduling relaxations solved here have a few dozen variables per
//! window, so a dense tableau is plenty; Bland's rule keeps the pivot
//! sequence deterministic and cycle-free.

use std::fmt;

use crate::error::{Error, Result};
use crate::tol::PIVOT_EPS;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rel::Le => write!(f, "<="),
            Rel::Ge => write!(f, ">="),
            Rel::Eq => write!(f, "="),
        }
    }
}

/// One sparse constraint row: `sum coeff_i * x_i  rel  rhs`.
#[derive(Debug, Clone)]
pub struct LpRow {
    pub coeffs: Vec<(usize, f64)>,
    pub rel: Rel,
    pub rhs: f64,
}

/// A maximization problem over box-bounded variables.
#[derive(Debug, Clone, Default)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<LpRow>,
    names: Vec<String>,
}

impl LpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add a variable with objective coefficient `obj` and bounds
    /// `lo <= x <= hi` (`hi` may be infinite). Returns its index.
    pub fn add_var(&mut self, name: impl Into<String>, obj: f64, lo: f64, hi: f64) -> usize {
        assert!(lo.is_finite(), "variables need a finite lower bound");
        assert!(hi >= lo, "empty variable bound");
        self.objective.push(obj);
        self.lower.push(lo);
        self.upper.push(hi);
        self.names.push(name.into());
        self.objective.len() - 1
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, rel: Rel, rhs: f64) {
        self.rows.push(LpRow { coeffs, rel, rhs });
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Plain-text dump of the model, one row per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        out.push_str("max ");
        for (i, c) in self.objective.iter().enumerate() {
            if *c != 0.0 {
                out.push_str(&format!("{c:+}*{} ", self.names[i]));
            }
        }
        out.push('\n');
        for row in &self.rows {
            let terms: Vec<String> = row
                .coeffs
                .iter()
                .map(|&(i, c)| format!("{c:+}*{}", self.names[i]))
                .collect();
            out.push_str(&format!("  {} {} {}\n", terms.join(" "), row.rel, row.rhs));
        }
        for i in 0..self.num_vars() {
            out.push_str(&format!(
                "  {} in [{}, {}]\n",
                self.names[i], self.lower[i], self.upper[i]
            ));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

struct Tableau {
    rows: Vec<Vec<f64>>, // m x (n + 1), last column is rhs
    cost: Vec<f64>,      // n + 1, phase objective (minimization, reduced form)
    basis: Vec<usize>,
    n: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= piv;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r && row[c].abs() > 0.0 {
                let f = row[c];
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
                row[c] = 0.0;
            }
        }
        if self.cost[c].abs() > 0.0 {
            let f = self.cost[c];
            for (v, p) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= f * p;
            }
            self.cost[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Bland's rule: entering = lowest-index column with negative reduced
    /// cost; leaving = lowest ratio, ties to the lowest basis variable.
    fn simplex(&mut self, allowed: usize, max_iters: usize) -> Result<()> {
        for _ in 0..max_iters {
            let mut entering = None;
            for c in 0..allowed {
                if self.cost[c] < -PIVOT_EPS {
                    entering = Some(c);
                    break;
                }
            }
            let Some(c) = entering else {
                return Ok(());
            };
            let mut leaving: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][c];
                if a > PIVOT_EPS {
                    let ratio = self.rows[r][self.n] / a;
                    let replace = match leaving {
                        None => true,
                        Some((lr, lv)) => {
                            ratio < lv - PIVOT_EPS
                                || (ratio < lv + PIVOT_EPS && self.basis[r] < self.basis[lr])
                        }
                    };
                    if replace {
                        leaving = Some((r, ratio));
                    }
                }
            }
            let Some((r, _)) = leaving else {
                return Err(Error::Solver("unbounded objective".into()));
            };
            self.pivot(r, c);
        }
        Err(Error::Solver(format!(
            "simplex did not converge within {max_iters} iterations; basis {:?}, objective {}",
            self.basis, -self.cost[self.n]
        )))
    }
}

/// Solve a maximization LP. Returns `Error::Solver` on infeasible or
/// unbounded models.
pub fn solve(problem: &LpProblem) -> Result<LpSolution> {
    let nv = problem.num_vars();

    // Shift every variable by its lower bound so x = lo + y, y >= 0, and
    // turn finite upper bounds into explicit rows.
    let mut rows: Vec<(Vec<f64>, Rel, f64)> = Vec::with_capacity(problem.rows.len() + nv);
    for row in &problem.rows {
        let mut dense = vec![0.0; nv];
        let mut shift = 0.0;
        for &(i, c) in &row.coeffs {
            dense[i] += c;
            shift += c * problem.lower[i];
        }
        rows.push((dense, row.rel, row.rhs - shift));
    }
    for i in 0..nv {
        if problem.upper[i].is_finite() {
            let mut dense = vec![0.0; nv];
            dense[i] = 1.0;
            rows.push((dense, Rel::Le, problem.upper[i] - problem.lower[i]));
        }
    }

    // Normalize to b >= 0 and count slack/artificial columns.
    let m = rows.len();
    let mut n_slack = 0;
    for (dense, rel, rhs) in rows.iter_mut() {
        if *rhs < 0.0 {
            for v in dense.iter_mut() {
                *v = -*v;
            }
            *rhs = -*rhs;
            *rel = match *rel {
                Rel::Le => Rel::Ge,
                Rel::Ge => Rel::Le,
                Rel::Eq => Rel::Eq,
            };
        }
        if !matches!(rel, Rel::Eq) {
            n_slack += 1;
        }
    }

    let total = nv + n_slack + m; // artificials for every row keep setup simple
    let mut tab = Tableau {
        rows: Vec::with_capacity(m),
        cost: vec![0.0; total + 1],
        basis: vec![0; m],
        n: total,
    };

    let mut slack_idx = nv;
    for (r, (dense, rel, rhs)) in rows.iter().enumerate() {
        let mut row = vec![0.0; total + 1];
        row[..nv].copy_from_slice(dense);
        match rel {
            Rel::Le => {
                row[slack_idx] = 1.0;
                slack_idx += 1;
            }
            Rel::Ge => {
                row[slack_idx] = -1.0;
                slack_idx += 1;
            }
            Rel::Eq => {}
        }
        let art = nv + n_slack + r;
        row[art] = 1.0;
        row[total] = *rhs;
        tab.basis[r] = art;
        tab.rows.push(row);
    }

    // Phase 1: minimize the sum of artificials.
    for r in 0..m {
        for c in 0..=total {
            tab.cost[c] -= tab.rows[r][c];
        }
    }
    for a in (nv + n_slack)..total {
        tab.cost[a] = 0.0;
    }
    let iter_cap = 200 * (m + total + 10);
    tab.simplex(nv + n_slack, iter_cap)?;
    let phase1 = -tab.cost[total];
    if phase1 > 1e-7 {
        return Err(Error::Solver(format!(
            "infeasible model (phase-1 residual {phase1:.3e})"
        )));
    }
    // Pivot any artificial still in the basis out (or its row is redundant).
    for r in 0..m {
        if tab.basis[r] >= nv + n_slack {
            if let Some(c) = (0..nv + n_slack).find(|&c| tab.rows[r][c].abs() > PIVOT_EPS) {
                tab.pivot(r, c);
            }
        }
    }

    // Phase 2: minimize -objective over the shifted variables.
    tab.cost = vec![0.0; total + 1];
    for i in 0..nv {
        tab.cost[i] = -problem.objective[i];
    }
    for a in (nv + n_slack)..total {
        tab.cost[a] = 1e18; // keep artificials priced out
    }
    for r in 0..m {
        let b = tab.basis[r];
        if tab.cost[b].abs() > 0.0 {
            let f = tab.cost[b];
            let row = tab.rows[r].clone();
            for (v, p) in tab.cost.iter_mut().zip(&row) {
                *v -= f * p;
            }
            tab.cost[b] = 0.0;
        }
    }
    tab.simplex(nv + n_slack, iter_cap)?;

    let mut y = vec![0.0; nv];
    for r in 0..m {
        if tab.basis[r] < nv {
            y[tab.basis[r]] = tab.rows[r][total];
        }
    }
    let x: Vec<f64> = y
        .iter()
        .zip(&problem.lower)
        .map(|(yi, lo)| yi + lo)
        .collect();
    let objective = x.iter().zip(&problem.objective).map(|(xi, c)| xi * c).sum();
    Ok(LpSolution { x, objective })
}

//! Linear programs in the form `max c·x` subject to `A x ≤ b`, `0 ≤ x ≤ u`.

mod simplex;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use simplex::{solve_standard, Standard, FEASIBILITY_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("malformed linear program: {0}")]
    Structural(String),
    #[error("numerical breakdown: {0}")]
    Numeric(String),
    #[error("simplex iteration limit reached after {0} pivots")]
    IterationLimit(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// One `≤` row with sparse coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub terms: Vec<(usize, f64)>,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LinearProgram {
    /// Maximized.
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    /// Optional per-variable upper bounds; empty means none.
    pub upper_bounds: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub values: Vec<f64>,
    pub objective_value: f64,
    /// One multiplier per constraint row (non-negative at an optimum).
    pub row_duals: Vec<f64>,
    /// One multiplier per variable upper bound (zero where unbounded).
    pub bound_duals: Vec<f64>,
    pub iterations: usize,
}

/// Primal and dual objective values with the worst residuals of each side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualityCertificate {
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub max_primal_violation: f64,
    /// Largest `c_j − (Aᵀy + w)_j` or negative multiplier.
    pub max_dual_violation: f64,
}

impl DualityCertificate {
    pub fn holds(&self, rel_tol: f64) -> bool {
        let scale = 1.0 + self.primal_objective.abs().max(self.dual_objective.abs());
        (self.primal_objective - self.dual_objective).abs() <= rel_tol * scale
            && self.max_primal_violation <= 1e-8 * scale
            && self.max_dual_violation <= rel_tol * scale
    }
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        LinearProgram {
            objective,
            constraints: Vec::new(),
            upper_bounds: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_constraint(&mut self, terms: Vec<(usize, f64)>, bound: f64) {
        self.constraints.push(Constraint { terms, bound });
    }

    /// Adds a row from a dense coefficient vector.
    pub fn add_dense_constraint(&mut self, coefficients: &[f64], bound: f64) {
        let terms = coefficients
            .iter()
            .enumerate()
            .filter(|(_, &a)| a != 0.0)
            .map(|(j, &a)| (j, a))
            .collect();
        self.add_constraint(terms, bound);
    }

    pub fn set_upper_bound(&mut self, var: usize, bound: f64) {
        if self.upper_bounds.len() < self.num_vars() {
            self.upper_bounds.resize(self.num_vars(), None);
        }
        self.upper_bounds[var] = Some(bound);
    }

    fn upper(&self, j: usize) -> Option<f64> {
        self.upper_bounds.get(j).copied().flatten()
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.upper_bounds.len() > n {
            return Err(LpError::Structural(format!(
                "{} upper bounds for {} variables",
                self.upper_bounds.len(),
                n
            )));
        }
        if let Some(j) = self.objective.iter().position(|c| !c.is_finite()) {
            return Err(LpError::Structural(format!(
                "objective coefficient {j} is not finite"
            )));
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if !row.bound.is_finite() {
                return Err(LpError::Structural(format!("row {i} bound is not finite")));
            }
            for &(j, a) in &row.terms {
                if j >= n {
                    return Err(LpError::Structural(format!(
                        "row {i} refers to variable {j} of {n}"
                    )));
                }
                if !a.is_finite() {
                    return Err(LpError::Structural(format!(
                        "row {i} coefficient on x{j} is not finite"
                    )));
                }
            }
        }
        for (j, u) in self.upper_bounds.iter().enumerate() {
            if let Some(u) = u {
                if !u.is_finite() {
                    return Err(LpError::Structural(format!(
                        "upper bound of x{j} is not finite"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Residuals and dual objective of a candidate solution.
    pub fn certificate(&self, sol: &LpSolution) -> DualityCertificate {
        let n = self.num_vars();
        let primal_objective: f64 = self
            .objective
            .iter()
            .zip(&sol.values)
            .map(|(c, x)| c * x)
            .sum();
        let mut max_primal_violation = sol
            .values
            .iter()
            .map(|&x| (-x).max(0.0))
            .fold(0.0, f64::max);
        let mut reduced = self.objective.clone();
        let mut dual_objective = 0.0;
        let mut max_dual_violation: f64 = 0.0;
        for (row, &y) in self.constraints.iter().zip(&sol.row_duals) {
            let lhs: f64 = row.terms.iter().map(|&(j, a)| a * sol.values[j]).sum();
            max_primal_violation = max_primal_violation.max(lhs - row.bound);
            dual_objective += y * row.bound;
            max_dual_violation = max_dual_violation.max(-y);
            for &(j, a) in &row.terms {
                reduced[j] -= a * y;
            }
        }
        for j in 0..n {
            let w = sol.bound_duals.get(j).copied().unwrap_or(0.0);
            if let Some(u) = self.upper(j) {
                max_primal_violation = max_primal_violation.max(sol.values[j] - u);
                dual_objective += w * u;
            }
            max_dual_violation = max_dual_violation.max(-w);
            reduced[j] -= w;
            max_dual_violation = max_dual_violation.max(reduced[j]);
        }
        DualityCertificate {
            primal_objective,
            dual_objective,
            max_primal_violation,
            max_dual_violation,
        }
    }
}

/// Row/column equilibration factors for one block.
fn equilibrate(n: usize, rows: &[(Vec<(usize, f64)>, f64)]) -> (Vec<f64>, Vec<f64>) {
    let row_scale: Vec<f64> = rows
        .iter()
        .map(|(terms, _)| {
            let big = terms.iter().map(|&(_, a)| a.abs()).fold(0.0, f64::max);
            if big > 0.0 {
                1.0 / big
            } else {
                1.0
            }
        })
        .collect();
    let mut col_big = vec![0.0f64; n];
    for ((terms, _), r) in rows.iter().zip(&row_scale) {
        for &(j, a) in terms {
            col_big[j] = col_big[j].max((a * r).abs());
        }
    }
    let col_scale = col_big
        .iter()
        .map(|&b| if b > 0.0 { 1.0 / b } else { 1.0 })
        .collect();
    (row_scale, col_scale)
}

/// Solves one block after scaling. Row index `i < rows.len()`; the caller maps back.
fn solve_block(
    objective: &[f64],
    rows: &[(Vec<(usize, f64)>, f64)],
) -> Result<simplex::Outcome, LpError> {
    let n = objective.len();
    let (rs, cs) = equilibrate(n, rows);
    let scaled_rows: Vec<(Vec<(usize, f64)>, f64)> = rows
        .iter()
        .zip(&rs)
        .map(|((terms, b), r)| {
            (
                terms.iter().map(|&(j, a)| (j, a * r * cs[j])).collect(),
                b * r,
            )
        })
        .collect();
    let scaled_obj: Vec<f64> = objective.iter().zip(&cs).map(|(c, s)| c * s).collect();
    let mut out = solve_standard(&Standard {
        n,
        objective: &scaled_obj,
        rows: &scaled_rows,
    })?;
    for (x, s) in out.values.iter_mut().zip(&cs) {
        *x *= s;
    }
    for (y, r) in out.duals.iter_mut().zip(&rs) {
        *y *= r;
    }
    Ok(out)
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Solves the program as a whole with one simplex run.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let rows = all_rows(lp);
    let out = solve_block(&lp.objective, &rows)?;
    Ok(assemble(
        lp,
        out.status,
        out.values,
        &out.duals,
        out.iterations,
    ))
}

/// Solves independent blocks (variables linked through shared rows) separately
/// and merges the results. Equivalent to [`solve`], cheaper on separable programs.
pub fn solve_blocks(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let n = lp.num_vars();
    let rows = all_rows(lp);
    let mut uf = UnionFind((0..n).collect());
    for (terms, _) in &rows {
        let mut it = terms.iter().filter(|t| t.1 != 0.0).map(|t| t.0);
        if let Some(first) = it.next() {
            for j in it {
                uf.union(first, j);
            }
        }
    }
    let mut values = vec![0.0; n];
    let mut duals = vec![0.0; rows.len()];
    let mut status = LpStatus::Optimal;
    let mut iterations = 0;
    let mut block_vars: Vec<Vec<usize>> = vec![Vec::new(); n];
    for j in 0..n {
        let r = uf.find(j);
        block_vars[r].push(j);
    }
    let mut block_rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, (terms, b)) in rows.iter().enumerate() {
        match terms.iter().find(|t| t.1 != 0.0) {
            Some(&(j, _)) => {
                let r = uf.find(j);
                block_rows[r].push(i);
            }
            None if *b < -FEASIBILITY_TOL => status = LpStatus::Infeasible,
            None => {}
        }
    }
    for root in 0..n {
        let vars = &block_vars[root];
        if vars.is_empty() {
            continue;
        }
        let mut local = vec![usize::MAX; n];
        for (k, &j) in vars.iter().enumerate() {
            local[j] = k;
        }
        let obj: Vec<f64> = vars.iter().map(|&j| lp.objective[j]).collect();
        let sub_rows: Vec<(Vec<(usize, f64)>, f64)> = block_rows[root]
            .iter()
            .map(|&i| {
                let (terms, b) = &rows[i];
                (terms.iter().map(|&(j, a)| (local[j], a)).collect(), *b)
            })
            .collect();
        let out = solve_block(&obj, &sub_rows)?;
        iterations += out.iterations;
        match out.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => status = LpStatus::Infeasible,
            LpStatus::Unbounded => {
                if status == LpStatus::Optimal {
                    status = LpStatus::Unbounded;
                }
            }
        }
        for (k, &j) in vars.iter().enumerate() {
            values[j] = out.values[k];
        }
        for (k, &i) in block_rows[root].iter().enumerate() {
            duals[i] = out.duals[k];
        }
    }
    if status != LpStatus::Optimal {
        values.iter_mut().for_each(|x| *x = 0.0);
        duals.iter_mut().for_each(|y| *y = 0.0);
    }
    Ok(assemble(lp, status, values, &duals, iterations))
}

/// Constraint rows followed by one row per finite upper bound.
fn all_rows(lp: &LinearProgram) -> Vec<(Vec<(usize, f64)>, f64)> {
    let mut rows: Vec<(Vec<(usize, f64)>, f64)> = lp
        .constraints
        .iter()
        .map(|c| (c.terms.clone(), c.bound))
        .collect();
    for j in 0..lp.num_vars() {
        if let Some(u) = lp.upper(j) {
            rows.push((vec![(j, 1.0)], u));
        }
    }
    rows
}

fn assemble(
    lp: &LinearProgram,
    status: LpStatus,
    values: Vec<f64>,
    duals: &[f64],
    iterations: usize,
) -> LpSolution {
    let m = lp.constraints.len();
    let mut bound_duals = vec![0.0; lp.num_vars()];
    let mut k = m;
    for (j, w) in bound_duals.iter_mut().enumerate() {
        if lp.upper(j).is_some() {
            *w = duals[k];
            k += 1;
        }
    }
    let objective_value = match status {
        LpStatus::Optimal => lp.objective.iter().zip(&values).map(|(c, x)| c * x).sum(),
        LpStatus::Infeasible => f64::NEG_INFINITY,
        LpStatus::Unbounded => f64::INFINITY,
    };
    LpSolution {
        status,
        objective_value,
        row_duals: duals[..m].to_vec(),
        bound_duals,
        values,
        iterations,
    }
}

impl fmt::Display for LinearProgram {
    /// Plain-text dump in an LP-file-like layout.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn terms(f: &mut fmt::Formatter<'_>, t: &[(usize, f64)]) -> fmt::Result {
            if t.is_empty() {
                return write!(f, " 0");
            }
            for &(j, a) in t {
                write!(f, " {a:+} x{j}")?;
            }
            Ok(())
        }
        writeln!(f, "maximize")?;
        write!(f, "  obj:")?;
        let obj: Vec<(usize, f64)> = self
            .objective
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(j, &c)| (j, c))
            .collect();
        terms(f, &obj)?;
        writeln!(f)?;
        writeln!(f, "subject to")?;
        for (i, c) in self.constraints.iter().enumerate() {
            write!(f, "  r{i}:")?;
            terms(f, &c.terms)?;
            writeln!(f, " <= {}", c.bound)?;
        }
        writeln!(f, "bounds")?;
        for j in 0..self.num_vars() {
            match self.upper(j) {
                Some(u) => writeln!(f, "  0 <= x{j} <= {u}")?,
                None => writeln!(f, "  x{j} >= 0")?,
            }
        }
        writeln!(f, "end")
    }
}

//! Two-phase revised simplex over `max c·x, A x ≤ b, x ≥ 0` with a dense
//! basis inverse and sparse columns.

use super::{LpError, LpStatus};

pub(crate) const FEASIBILITY_TOL: f64 = 1e-8;
pub(crate) const REDUCED_COST_TOL: f64 = 1e-9;
pub(crate) const PIVOT_TOL: f64 = 1e-12;
const REFACTOR_EVERY: usize = 64;
const DEGENERATE_RUN_BEFORE_BLAND: usize = 24;

/// Dense problem handed to the simplex: rows `terms · x ≤ rhs`.
pub(crate) struct Standard<'a> {
    pub n: usize,
    pub objective: &'a [f64],
    pub rows: &'a [(Vec<(usize, f64)>, f64)],
}

pub(crate) struct Outcome {
    pub status: LpStatus,
    pub values: Vec<f64>,
    pub duals: Vec<f64>,
    pub iterations: usize,
}

struct Tableau {
    m: usize,
    /// Structural, then one slack per row, then artificials.
    cols: Vec<Vec<(usize, f64)>>,
    first_artificial: usize,
    rhs: Vec<f64>,
    binv: Vec<f64>,
    basis: Vec<usize>,
    position: Vec<Option<usize>>,
    xb: Vec<f64>,
    iterations: usize,
    since_refactor: usize,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn binv_row(&self, r: usize) -> &[f64] {
        &self.binv[r * self.m..(r + 1) * self.m]
    }

    fn column_image(&self, q: usize) -> Vec<f64> {
        let mut alpha = vec![0.0; self.m];
        for &(r, a) in &self.cols[q] {
            for (i, slot) in alpha.iter_mut().enumerate() {
                *slot += self.binv[i * self.m + r] * a;
            }
        }
        alpha
    }

    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.m];
        for (i, &var) in self.basis.iter().enumerate() {
            let c = cost[var];
            if c != 0.0 {
                for (k, v) in self.binv_row(i).iter().enumerate() {
                    y[k] += c * v;
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, cost: &[f64], y: &[f64]) -> f64 {
        cost[j] - self.cols[j].iter().map(|&(r, a)| y[r] * a).sum::<f64>()
    }

    fn pivot(&mut self, p: usize, q: usize, alpha: &[f64]) {
        let m = self.m;
        let inv = 1.0 / alpha[p];
        for k in 0..m {
            self.binv[p * m + k] *= inv;
        }
        let theta = self.xb[p] * inv;
        for i in 0..m {
            if i == p || alpha[i] == 0.0 {
                continue;
            }
            let f = alpha[i];
            for k in 0..m {
                self.binv[i * m + k] -= f * self.binv[p * m + k];
            }
            self.xb[i] -= f * theta;
        }
        self.xb[p] = theta;
        self.position[self.basis[p]] = None;
        self.basis[p] = q;
        self.position[q] = Some(p);
        self.iterations += 1;
        self.since_refactor += 1;
    }

    /// Rebuilds the basis inverse by Gauss-Jordan elimination with partial pivoting.
    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for (i, &var) in self.basis.iter().enumerate() {
            for &(r, v) in &self.cols[var] {
                a[r * m + i] = v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let (pr, pv) = (c..m)
                .map(|r| (r, a[r * m + c].abs()))
                .fold((c, -1.0), |best, x| if x.1 > best.1 { x } else { best });
            if pv < PIVOT_TOL {
                return Err(LpError::Numeric(format!(
                    "basis is singular after refactorization (pivot {pv:e} in column {c})"
                )));
            }
            if pr != c {
                for k in 0..m {
                    a.swap(pr * m + k, c * m + k);
                    inv.swap(pr * m + k, c * m + k);
                }
            }
            let d = 1.0 / a[c * m + c];
            for k in 0..m {
                a[c * m + k] *= d;
                inv[c * m + k] *= d;
            }
            for r in 0..m {
                if r == c {
                    continue;
                }
                let f = a[r * m + c];
                if f == 0.0 {
                    continue;
                }
                for k in 0..m {
                    a[r * m + k] -= f * a[c * m + k];
                    inv[r * m + k] -= f * inv[c * m + k];
                }
            }
        }
        self.binv = inv;
        for i in 0..m {
            self.xb[i] = self
                .binv_row(i)
                .iter()
                .zip(&self.rhs)
                .map(|(x, b)| x * b)
                .sum();
        }
        self.since_refactor = 0;
        Ok(())
    }

    fn run_phase(
        &mut self,
        cost: &[f64],
        can_enter: &dyn Fn(usize) -> bool,
        limit: usize,
    ) -> Result<PhaseEnd, LpError> {
        let mut degenerate_run = 0usize;
        let mut checked_after_refactor = false;
        loop {
            if self.iterations >= limit {
                return Err(LpError::IterationLimit(self.iterations));
            }
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            let bland = degenerate_run >= DEGENERATE_RUN_BEFORE_BLAND;
            let y = self.duals(cost);
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..self.cols.len() {
                if self.position[j].is_some() || !can_enter(j) {
                    continue;
                }
                let d = self.reduced_cost(j, cost, &y);
                if d > REDUCED_COST_TOL {
                    if bland {
                        entering = Some((j, d));
                        break;
                    }
                    if entering.is_none_or(|(_, best)| d > best) {
                        entering = Some((j, d));
                    }
                }
            }
            let Some((q, _)) = entering else {
                // Confirm optimality on a fresh factorization before stopping.
                if !checked_after_refactor && self.since_refactor > 0 {
                    self.refactor()?;
                    checked_after_refactor = true;
                    continue;
                }
                return Ok(PhaseEnd::Optimal);
            };
            checked_after_refactor = false;
            let alpha = self.column_image(q);
            let mut leave: Option<(usize, f64)> = None;
            for (i, &a) in alpha.iter().enumerate() {
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.xb[i].max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((p, best)) => {
                        let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                        let better = if tie {
                            if bland {
                                self.basis[i] < self.basis[p]
                            } else {
                                a > alpha[p]
                            }
                        } else {
                            ratio < best
                        };
                        if better {
                            Some((i, ratio))
                        } else {
                            Some((p, best))
                        }
                    }
                };
            }
            let Some((p, ratio)) = leave else {
                return Ok(PhaseEnd::Unbounded);
            };
            if ratio <= PIVOT_TOL {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(p, q, &alpha);
            for x in self.xb.iter_mut() {
                if *x < 0.0 && *x > -FEASIBILITY_TOL {
                    *x = 0.0;
                }
            }
        }
    }
}

pub(crate) fn solve_standard(problem: &Standard<'_>) -> Result<Outcome, LpError> {
    let n = problem.n;
    let m = problem.rows.len();
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut rhs = Vec::with_capacity(m);
    let mut flipped = vec![false; m];
    for (i, (terms, b)) in problem.rows.iter().enumerate() {
        let sign = if *b < 0.0 { -1.0 } else { 1.0 };
        flipped[i] = sign < 0.0;
        for &(j, a) in terms {
            if a != 0.0 {
                cols[j].push((i, sign * a));
            }
        }
        rhs.push(sign * b);
    }
    let first_slack = n;
    for i in 0..m {
        cols.push(vec![(i, if flipped[i] { -1.0 } else { 1.0 })]);
    }
    let first_artificial = cols.len();
    let mut basis = Vec::with_capacity(m);
    for i in 0..m {
        if flipped[i] {
            basis.push(cols.len());
            cols.push(vec![(i, 1.0)]);
        } else {
            basis.push(first_slack + i);
        }
    }
    let total = cols.len();
    let mut position = vec![None; total];
    for (i, &v) in basis.iter().enumerate() {
        position[v] = Some(i);
    }
    let mut binv = vec![0.0; m * m];
    for i in 0..m {
        binv[i * m + i] = 1.0;
    }
    let mut t = Tableau {
        m,
        cols,
        first_artificial,
        xb: rhs.clone(),
        rhs,
        binv,
        basis,
        position,
        iterations: 0,
        since_refactor: 0,
    };
    let limit = 50_000 + 200 * (m + total);

    if t.first_artificial < total {
        let mut phase1 = vec![0.0; total];
        for c in phase1.iter_mut().skip(t.first_artificial) {
            *c = -1.0;
        }
        t.run_phase(&phase1, &|_| true, limit)?;
        let infeasibility: f64 = t
            .basis
            .iter()
            .zip(&t.xb)
            .filter(|(&v, _)| v >= t.first_artificial)
            .map(|(_, &x)| x)
            .sum();
        if infeasibility > FEASIBILITY_TOL {
            return Ok(Outcome {
                status: LpStatus::Infeasible,
                values: vec![0.0; n],
                duals: vec![0.0; m],
                iterations: t.iterations,
            });
        }
        // Pivot remaining zero-valued artificials out where a structural or slack column allows.
        for p in 0..m {
            if t.basis[p] < t.first_artificial {
                continue;
            }
            let row: Vec<f64> = t.binv_row(p).to_vec();
            let mut best: Option<(usize, f64)> = None;
            for j in 0..t.first_artificial {
                if t.position[j].is_some() {
                    continue;
                }
                let v: f64 = t.cols[j].iter().map(|&(r, a)| row[r] * a).sum();
                if v.abs() > 1e-9 && best.is_none_or(|(_, b)| v.abs() > b.abs()) {
                    best = Some((j, v));
                }
            }
            if let Some((q, _)) = best {
                let alpha = t.column_image(q);
                t.xb[p] = 0.0;
                t.pivot(p, q, &alpha);
            }
        }
    }

    let mut cost = vec![0.0; total];
    cost[..n].copy_from_slice(problem.objective);
    let first_artificial = t.first_artificial;
    let end = t.run_phase(&cost, &|j| j < first_artificial, limit)?;
    if let PhaseEnd::Unbounded = end {
        return Ok(Outcome {
            status: LpStatus::Unbounded,
            values: vec![0.0; n],
            duals: vec![0.0; m],
            iterations: t.iterations,
        });
    }
    let mut values = vec![0.0; n];
    for (i, &v) in t.basis.iter().enumerate() {
        if v < n {
            values[v] = t.xb[i].max(0.0);
        }
    }
    let y = t.duals(&cost);
    let duals = (0..m)
        .map(|i| if flipped[i] { -y[i] } else { y[i] })
        .collect();
    Ok(Outcome {
        status: LpStatus::Optimal,
        values,
        duals,
        iterations: t.iterations,
    })
}

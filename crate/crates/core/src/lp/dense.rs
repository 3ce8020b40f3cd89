use std::time::{Duration, Instant};

use nalgebra::DMatrix;

use super::{LinearProgram, LpError, LpSolution, LpSolver, LpStatus, Relation};

const PIVOT_TOL: f64 = 1e-10;
const COST_TOL: f64 = 1e-10;
const PHASE1_TOL: f64 = 1e-9;
const REINVERT_EVERY: usize = 50;
/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_STREAK: usize = 50;

/// Two-phase dense tableau simplex.
///
/// Free variables are eliminated up front by Gauss-Jordan steps with
/// partial pivoting, so the tableau only carries nonnegative columns.
///
/// Entering variables follow Dantzig's rule until a run of degenerate
/// pivots suggests cycling, after which Bland's rule takes over for the
/// rest of the phase.
#[derive(Clone, Debug)]
pub struct DenseSimplex {
    pub max_pivots: usize,
}

impl Default for DenseSimplex {
    fn default() -> Self {
        DenseSimplex { max_pivots: 200_000 }
    }
}

struct Tableau {
    rows: Vec<Vec<f64>>, // last entry of each row is the rhs
    basis: Vec<usize>,
    ncols: usize,
    /// The initial rows, for rebuilding the tableau from the basis.
    original: Vec<Vec<f64>>,
}

enum Phase {
    Optimal,
    Unbounded,
    TimedOut,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.ncols]
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let p = self.rows[r][e];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[e];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[e] = 0.0;
            }
        }
        self.basis[r] = e;
    }

    /// Recomputes `B⁻¹ [A | b]` from the original rows, discarding the
    /// round-off accumulated by the pivots so far.
    fn reinvert(&mut self) {
        let m = self.rows.len();
        let basis = DMatrix::from_fn(m, m, |r, c| self.original[r][self.basis[c]]);
        let Some(inv) = basis.try_inverse() else { return };
        let orig = DMatrix::from_fn(m, self.ncols + 1, |r, c| self.original[r][c]);
        let fresh = inv * orig;
        for (i, row) in self.rows.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = fresh[(i, j)];
            }
            row[self.basis[i]] = 1.0;
        }
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for (i, row) in self.rows.iter().enumerate() {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (dj, a) in d.iter_mut().zip(row) {
                    *dj -= cb * a;
                }
            }
        }
        d
    }

    fn objective(&self, cost: &[f64]) -> f64 {
        (0..self.rows.len()).map(|i| cost[self.basis[i]] * self.rhs(i)).sum()
    }

    /// With `bounded` set the objective cannot decrease forever, so a column
    /// without a positive entry only reflects round-off and is skipped.
    fn run(&mut self, cost: &[f64], allowed: &[bool], bounded: bool, deadline: Instant, pivots: &mut usize, max_pivots: usize) -> Phase {
        let mut bland = false;
        let mut streak = 0;
        let mut blocked = vec![false; self.ncols];
        let mut fresh = false;
        loop {
            if *pivots >= max_pivots || Instant::now() >= deadline {
                return Phase::TimedOut;
            }
            let d = self.reduced_costs(cost);
            let mut entering: Option<usize> = None;
            for j in 0..self.ncols {
                if !allowed[j] || blocked[j] || d[j] >= -COST_TOL {
                    continue;
                }
                match entering {
                    None => entering = Some(j),
                    Some(e) if !bland && d[j] < d[e] => entering = Some(j),
                    _ => {}
                }
                if bland {
                    break;
                }
            }
            let Some(e) = entering else {
                self.reinvert();
                return Phase::Optimal;
            };

            let col_max = self.rows.iter().map(|row| row[e].abs()).fold(0.0, f64::max);
            let pivot_tol = PIVOT_TOL.max(1e-9 * col_max);
            let eligible: Vec<usize> = (0..self.rows.len()).filter(|&i| self.rows[i][e] > pivot_tol).collect();
            // among the rows attaining the minimum ratio, prefer the largest pivot
            let bound = eligible.iter().map(|&i| self.rhs(i).max(0.0) / self.rows[i][e]).fold(f64::INFINITY, f64::min);
            let mut leave: Option<(usize, f64)> = None;
            for &i in &eligible {
                let a = self.rows[i][e];
                let ratio = self.rhs(i).max(0.0) / a;
                if ratio > bound {
                    continue;
                }
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((r, best)) => {
                        let better = if bland { self.basis[i] < self.basis[r] } else { a > self.rows[r][e] };
                        if better {
                            Some((i, ratio))
                        } else {
                            Some((r, best))
                        }
                    }
                };
            }
            let Some((r, ratio)) = leave else {
                if bounded {
                    blocked[e] = true;
                    continue;
                }
                // only trust a ray seen on a freshly inverted tableau
                if !fresh {
                    self.reinvert();
                    fresh = true;
                    continue;
                }
                return Phase::Unbounded;
            };
            blocked.iter_mut().for_each(|b| *b = false);
            fresh = false;
            if ratio <= 1e-12 {
                streak += 1;
                if streak >= DEGENERATE_STREAK {
                    bland = true;
                }
            } else {
                streak = 0;
            }
            self.pivot(r, e);
            *pivots += 1;
            if *pivots % REINVERT_EVERY == 0 {
                self.reinvert();
                fresh = true;
            }
        }
    }
}

impl LpSolver for DenseSimplex {
    fn solve(&self, lp: &LinearProgram, budget: Duration) -> Result<LpSolution, LpError> {
        lp.validate()?;
        let deadline = Instant::now() + budget;
        let n = lp.num_vars();
        let m = lp.num_constraints();

        // Columns: the variables (bounded ones shifted to lower bound 0),
        // then one slack per inequality. Every row becomes an equality.
        let nslack = lp.constraints().iter().filter(|c| c.relation != Relation::Eq).count();
        let width = n + nslack;
        let lower: Vec<f64> = lp.lower_bounds().iter().map(|l| l.unwrap_or(0.0)).collect();
        let free: Vec<bool> = lp.lower_bounds().iter().map(|l| l.is_none()).collect();
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut s = n;
        for c in lp.constraints() {
            let mut row = vec![0.0; width + 1];
            let mut rhs = c.rhs;
            for &(v, a) in &c.form {
                row[v] += a;
                rhs -= a * lower[v];
            }
            match c.relation {
                Relation::Le => row[s] = 1.0,
                Relation::Ge => row[s] = -1.0,
                Relation::Eq => {}
            }
            if c.relation != Relation::Eq {
                s += 1;
            }
            row[width] = rhs;
            rows.push(row);
        }
        let mut cost = vec![0.0; width + 1];
        for &(v, c) in lp.objective() {
            cost[v] += c;
        }

        // Gauss-Jordan on the free columns: each takes the row where it has
        // the largest entry, and that row then only defines its value.
        let mut defining: Vec<(usize, Vec<f64>)> = Vec::new();
        for f in (0..n).filter(|&f| free[f]) {
            let best = (0..rows.len()).max_by(|&i, &j| rows[i][f].abs().total_cmp(&rows[j][f].abs()));
            let scale = rows.iter().map(|r| r[f].abs()).fold(0.0, f64::max);
            match best {
                Some(r) if rows[r][f].abs() > PIVOT_TOL && scale > 0.0 => {
                    let mut pr = rows.swap_remove(r);
                    let pv = pr[f];
                    pr.iter_mut().for_each(|x| *x /= pv);
                    pr[f] = 1.0;
                    let elim = |row: &mut Vec<f64>| {
                        let k = row[f];
                        if k != 0.0 {
                            row.iter_mut().zip(&pr).for_each(|(x, p)| *x -= k * p);
                            row[f] = 0.0;
                        }
                    };
                    rows.iter_mut().for_each(elim);
                    defining.iter_mut().for_each(|(_, row)| elim(row));
                    elim(&mut cost);
                    defining.push((f, pr));
                }
                // the column vanished: the variable is unconstrained
                _ if cost[f].abs() > COST_TOL => return Ok(LpSolution::without_values(LpStatus::Unbounded)),
                _ => {}
            }
        }

        // Phase one over the nonnegative columns with one artificial per row.
        let keep: Vec<usize> = (0..width).filter(|&j| j >= n || !free[j]).collect();
        let nk = keep.len();
        let ncols = nk + rows.len();
        let mut tab = Tableau { rows: Vec::with_capacity(rows.len()), basis: Vec::with_capacity(rows.len()), ncols, original: Vec::new() };
        for (i, row) in rows.iter().enumerate() {
            let sign = if row[width] < 0.0 { -1.0 } else { 1.0 };
            let mut full: Vec<f64> = keep.iter().map(|&j| sign * row[j]).collect();
            full.resize(ncols + 1, 0.0);
            full[nk + i] = 1.0;
            full[ncols] = sign * row[width];
            tab.rows.push(full);
            tab.basis.push(nk + i);
        }
        tab.original = tab.rows.clone();
        let mut pivots = 0;
        let all_allowed = vec![true; ncols];
        if !tab.rows.is_empty() {
            let mut cost1 = vec![0.0; ncols];
            cost1[nk..].iter_mut().for_each(|c| *c = 1.0);
            match tab.run(&cost1, &all_allowed, true, deadline, &mut pivots, self.max_pivots) {
                Phase::TimedOut => return Ok(LpSolution::without_values(LpStatus::TimedOut)),
                Phase::Unbounded => unreachable!("phase one is bounded below"),
                Phase::Optimal => {}
            }
            let scale = tab.rows.iter().map(|r| r[ncols].abs()).fold(1.0, f64::max);
            if tab.objective(&cost1) > PHASE1_TOL * scale {
                return Ok(LpSolution::without_values(LpStatus::Infeasible));
            }
            // drive remaining artificials out of the basis
            for i in 0..tab.rows.len() {
                if tab.basis[i] >= nk {
                    let big = (0..nk).max_by(|&a, &b| tab.rows[i][a].abs().total_cmp(&tab.rows[i][b].abs()));
                    if let Some(j) = big.filter(|&j| tab.rows[i][j].abs() > 1e-9) {
                        tab.pivot(i, j);
                    }
                }
            }
        }

        let mut cost2: Vec<f64> = keep.iter().map(|&j| cost[j]).collect();
        cost2.resize(ncols, 0.0);
        let mut allowed = all_allowed;
        allowed[nk..].iter_mut().for_each(|x| *x = false);
        match tab.run(&cost2, &allowed, false, deadline, &mut pivots, self.max_pivots) {
            Phase::TimedOut => return Ok(LpSolution::without_values(LpStatus::TimedOut)),
            Phase::Unbounded => return Ok(LpSolution::without_values(LpStatus::Unbounded)),
            Phase::Optimal => {}
        }

        let mut col = vec![0.0; width];
        for (i, &b) in tab.basis.iter().enumerate() {
            if b < nk {
                col[keep[b]] = tab.rhs(i).max(0.0);
            }
        }
        for (f, row) in &defining {
            col[*f] = row[width] - keep.iter().map(|&j| row[j] * col[j]).sum::<f64>();
        }
        let values: Vec<f64> = (0..n).map(|j| lower[j] + col[j]).collect();
        let objective = lp.objective_value(&values);
        Ok(LpSolution { status: LpStatus::Optimal, values, objective })
    }
}

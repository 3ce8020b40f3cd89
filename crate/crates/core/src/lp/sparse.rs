use std::time::Duration;

use microlp::{ComparisonOp, OptimizationDirection, Problem, SolveOutcome};

use super::{LinearProgram, LpError, LpSolution, LpSolver, LpStatus, Relation};

/// Sparse revised simplex backed by `microlp`.
#[derive(Clone, Copy, Debug, Default)]
pub struct SparseSimplex;

impl LpSolver for SparseSimplex {
    fn solve(&self, lp: &LinearProgram, budget: Duration) -> Result<LpSolution, LpError> {
        lp.validate()?;
        if budget.is_zero() {
            return Ok(LpSolution::without_values(LpStatus::TimedOut));
        }
        let mut objective = vec![0.0; lp.num_vars()];
        for &(v, c) in lp.objective() {
            objective[v] += c;
        }
        let mut problem = Problem::new(OptimizationDirection::Minimize);
        let vars: Vec<_> = lp
            .lower_bounds()
            .iter()
            .zip(&objective)
            .map(|(lb, &c)| problem.add_var(c, (lb.unwrap_or(f64::NEG_INFINITY), f64::INFINITY)))
            .collect();
        for c in lp.constraints() {
            let op = match c.relation {
                Relation::Le => ComparisonOp::Le,
                Relation::Eq => ComparisonOp::Eq,
                Relation::Ge => ComparisonOp::Ge,
            };
            let terms: Vec<_> = c.form.iter().map(|&(v, a)| (vars[v], a)).collect();
            problem.add_constraint(terms.as_slice(), op, c.rhs);
        }
        problem.set_time_limit(budget);

        match problem.solve() {
            Ok(SolveOutcome::Solution(sol)) if sol.termination_reason() == microlp::TerminationReason::ProvenOptimal => {
                let values: Vec<f64> = vars.iter().map(|&v| sol.var_value_raw(v)).collect();
                let objective = lp.objective_value(&values);
                Ok(LpSolution { status: LpStatus::Optimal, values, objective })
            }
            Ok(_) => Ok(LpSolution::without_values(LpStatus::TimedOut)),
            Err(microlp::Error::Infeasible) => Ok(LpSolution::without_values(LpStatus::Infeasible)),
            Err(microlp::Error::Unbounded) => Ok(LpSolution::without_values(LpStatus::Unbounded)),
            Err(e) => Err(LpError::Solver(e.to_string())),
        }
    }
}

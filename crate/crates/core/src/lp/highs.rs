use std::num::NonZeroU32;
use std::time::Duration;

use highs::{HighsModelStatus, RowProblem, Sense};

use super::{LinearProgram, LpError, LpSolution, LpSolver, LpStatus, Relation};

/// The HiGHS dual simplex, for the large Lyapunov programs.
#[derive(Clone, Copy, Debug, Default)]
pub struct HighsSimplex;

impl LpSolver for HighsSimplex {
    fn solve(&self, lp: &LinearProgram, budget: Duration) -> Result<LpSolution, LpError> {
        lp.validate()?;
        if budget.is_zero() {
            return Ok(LpSolution::without_values(LpStatus::TimedOut));
        }
        let mut objective = vec![0.0; lp.num_vars()];
        for &(v, c) in lp.objective() {
            objective[v] += c;
        }
        let mut pb = RowProblem::default();
        let cols: Vec<_> =
            lp.lower_bounds().iter().zip(&objective).map(|(lb, &c)| pb.add_column(c, lb.unwrap_or(f64::NEG_INFINITY)..)).collect();
        for c in lp.constraints() {
            let terms = c.form.iter().map(|&(v, a)| (cols[v], a));
            match c.relation {
                Relation::Le => pb.add_row(..=c.rhs, terms),
                Relation::Ge => pb.add_row(c.rhs.., terms),
                Relation::Eq => pb.add_row(c.rhs..=c.rhs, terms),
            }
        }
        let mut model = pb.optimise(Sense::Minimise);
        model.make_quiet();
        model.set_threads(NonZeroU32::MIN);
        model.set_option("time_limit", budget.as_secs_f64());
        model.set_option("solver", "simplex");
        let solved = model.try_solve().map_err(|s| LpError::Solver(format!("HiGHS failed: {s:?}")))?;
        match solved.status() {
            HighsModelStatus::Optimal => {
                let values = solved.get_solution().columns().to_vec();
                let objective = lp.objective_value(&values);
                Ok(LpSolution { status: LpStatus::Optimal, values, objective })
            }
            HighsModelStatus::Infeasible => Ok(LpSolution::without_values(LpStatus::Infeasible)),
            HighsModelStatus::Unbounded | HighsModelStatus::UnboundedOrInfeasible => Ok(LpSolution::without_values(LpStatus::Unbounded)),
            HighsModelStatus::ReachedTimeLimit | HighsModelStatus::ReachedIterationLimit | HighsModelStatus::ReachedInterrupt => {
                Ok(LpSolution::without_values(LpStatus::TimedOut))
            }
            other => Err(LpError::Solver(format!("HiGHS ended with status {other:?}"))),
        }
    }
}

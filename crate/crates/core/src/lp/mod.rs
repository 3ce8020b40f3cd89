//! Solver-agnostic linear programs.
//!
//! [`LinearProgram`] is the exchange form: variables with optional lower
//! bounds, sparse linear constraints and a linear objective that is always
//! minimized. Two solvers implement [`LpSolver`]:
//!
//! - [`DenseSimplex`]: a self-contained two-phase dense simplex with Bland's
//!   rule fallback, used for the small geometric programs and as an
//!   independent cross-check.
//! - [`SparseSimplex`]: a sparse LU-based simplex for the large Lyapunov
//!   programs.

mod dense;
mod export;
#[cfg(feature = "highs")]
mod highs;
mod sparse;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dense::DenseSimplex;
pub use export::write_cplex_lp;
#[cfg(feature = "highs")]
pub use highs::HighsSimplex;
pub use sparse::SparseSimplex;

/// Feasibility tolerance promised by the solvers.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("malformed program: {0}")]
    MalformedProgram(String),
    #[error("solver failure: {0}")]
    Solver(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

/// Sparse linear form: `(variable index, coefficient)` pairs.
pub type LinearForm = Vec<(usize, f64)>;

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub form: LinearForm,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinearProgram {
    lower_bounds: Vec<Option<f64>>,
    objective: LinearForm,
    constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a variable; `None` means free.
    pub fn add_var(&mut self, lower: Option<f64>) -> usize {
        self.lower_bounds.push(lower);
        self.lower_bounds.len() - 1
    }

    pub fn add_constraint(&mut self, form: LinearForm, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint { form, relation, rhs });
    }

    pub fn set_objective(&mut self, form: LinearForm) {
        self.objective = form;
    }

    pub fn num_vars(&self) -> usize {
        self.lower_bounds.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn lower_bounds(&self) -> &[Option<f64>] {
        &self.lower_bounds
    }

    pub fn objective(&self) -> &LinearForm {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        let check = |form: &LinearForm, what: &str| -> Result<(), LpError> {
            for &(v, c) in form {
                if v >= n {
                    return Err(LpError::MalformedProgram(format!("{what} references undeclared variable {v}")));
                }
                if !c.is_finite() {
                    return Err(LpError::MalformedProgram(format!("{what} has non-finite coefficient")));
                }
            }
            Ok(())
        };
        check(&self.objective, "objective")?;
        for (i, c) in self.constraints.iter().enumerate() {
            check(&c.form, &format!("constraint {i}"))?;
            if !c.rhs.is_finite() {
                return Err(LpError::MalformedProgram(format!("constraint {i} has non-finite rhs")));
            }
        }
        if self.lower_bounds.iter().flatten().any(|l| !l.is_finite()) {
            return Err(LpError::MalformedProgram("non-finite lower bound".into()));
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * x[v]).sum()
    }

    /// Largest violation of any constraint or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.constraints {
            let lhs: f64 = c.form.iter().map(|&(v, a)| a * x[v]).sum();
            let viol = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        for (v, l) in self.lower_bounds.iter().enumerate() {
            if let Some(l) = l {
                worst = worst.max(l - x[v]);
            }
        }
        worst
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    TimedOut,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub values: Vec<f64>,
    pub objective: f64,
}

impl LpSolution {
    pub(crate) fn without_values(status: LpStatus) -> Self {
        LpSolution { status, values: Vec::new(), objective: f64::NAN }
    }
}

pub trait LpSolver {
    fn solve(&self, lp: &LinearProgram, budget: Duration) -> Result<LpSolution, LpError>;
}

/// Solves with the default solver for large programs.
pub fn solve_lp(lp: &LinearProgram, budget: Duration) -> Result<LpSolution, LpError> {
    #[cfg(feature = "highs")]
    return HighsSimplex.solve(lp, budget);
    #[cfg(not(feature = "highs"))]
    SparseSimplex.solve(lp, budget)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BUDGET: Duration = Duration::from_secs(10);

    fn solvers() -> Vec<(&'static str, Box<dyn LpSolver>)> {
        vec![("dense", Box::new(DenseSimplex::default())), ("sparse", Box::new(SparseSimplex))]
    }

    #[test]
    fn slack_absorbs_infeasibility() {
        // min t  s.t. t >= 0, x - t <= -1, x >= 0
        for (name, s) in solvers() {
            let mut lp = LinearProgram::new();
            let x = lp.add_var(Some(0.0));
            let t = lp.add_var(Some(0.0));
            lp.add_constraint(vec![(x, 1.0), (t, -1.0)], Relation::Le, -1.0);
            lp.set_objective(vec![(t, 1.0)]);
            let sol = s.solve(&lp, BUDGET).unwrap();
            assert_eq!(sol.status, LpStatus::Optimal, "{name}");
            assert!((sol.objective - 1.0).abs() < 1e-9, "{name}");
            assert!(lp.max_violation(&sol.values) <= FEASIBILITY_TOL, "{name}");
        }
    }

    #[test]
    fn equality_pins_free_variable() {
        for (name, s) in solvers() {
            let mut lp = LinearProgram::new();
            let x = lp.add_var(None);
            lp.add_constraint(vec![(x, 1.0)], Relation::Eq, 1.0);
            let sol = s.solve(&lp, BUDGET).unwrap();
            assert_eq!(sol.status, LpStatus::Optimal, "{name}");
            assert!((sol.values[x] - 1.0).abs() < 1e-12, "{name}");
        }
    }

    #[test]
    fn contradictory_equalities_are_infeasible() {
        for (name, s) in solvers() {
            let mut lp = LinearProgram::new();
            let x = lp.add_var(None);
            lp.add_constraint(vec![(x, 1.0)], Relation::Eq, 0.0);
            lp.add_constraint(vec![(x, 1.0)], Relation::Eq, 1.0);
            let sol = s.solve(&lp, BUDGET).unwrap();
            assert_eq!(sol.status, LpStatus::Infeasible, "{name}");
        }
    }

    #[test]
    fn unbounded_detected() {
        for (name, s) in solvers() {
            let mut lp = LinearProgram::new();
            let x = lp.add_var(None);
            lp.add_constraint(vec![(x, 1.0)], Relation::Le, 3.0);
            lp.set_objective(vec![(x, 1.0)]);
            let sol = s.solve(&lp, BUDGET).unwrap();
            assert_eq!(sol.status, LpStatus::Unbounded, "{name}");
        }
    }

    #[test]
    fn undeclared_variable_is_malformed() {
        let mut lp = LinearProgram::new();
        lp.add_var(None);
        lp.add_constraint(vec![(3, 1.0)], Relation::Le, 0.0);
        assert!(matches!(lp.validate(), Err(LpError::MalformedProgram(_))));
        assert!(DenseSimplex::default().solve(&lp, BUDGET).is_err());
        assert!(SparseSimplex.solve(&lp, BUDGET).is_err());
    }

    #[test]
    fn textbook_program_agrees_across_solvers() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 (optimum 36 at (2, 6))
        for (name, s) in solvers() {
            let mut lp = LinearProgram::new();
            let x = lp.add_var(Some(0.0));
            let y = lp.add_var(Some(0.0));
            lp.add_constraint(vec![(x, 1.0)], Relation::Le, 4.0);
            lp.add_constraint(vec![(y, 2.0)], Relation::Le, 12.0);
            lp.add_constraint(vec![(x, 3.0), (y, 2.0)], Relation::Le, 18.0);
            lp.set_objective(vec![(x, -3.0), (y, -5.0)]);
            let sol = s.solve(&lp, BUDGET).unwrap();
            assert_eq!(sol.status, LpStatus::Optimal, "{name}");
            assert!((sol.objective + 36.0).abs() < 1e-9, "{name}");
            assert!((sol.values[x] - 2.0).abs() < 1e-9 && (sol.values[y] - 6.0).abs() < 1e-9, "{name}");
        }
    }
}

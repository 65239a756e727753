//! LP/MILP solving: bounded-variable primal simplex, best-first
//! branch-and-bound on binaries, an exhaustive-enumeration oracle, and
//! LP-format interchange with external solvers.

mod branch;
mod lu;
mod lp_file;
mod oracle;
mod presolve;
mod simplex;
mod solution_file;

pub use branch::solve_milp;
pub use lp_file::{export_lp_file, parse_lp_file, verify_lp_round_trip, ParsedLp};
pub use oracle::{brute_force_oracle, OracleError, DEFAULT_BINARY_LIMIT};
pub use simplex::{Basis, LpResult, LpStatus, Simplex};

/// Cumulative simplex counters.
pub fn simplex_stats() -> (usize, usize, f64, usize, usize, usize, usize) {
    use std::sync::atomic::Ordering;
    (
        simplex::REFACTOR_COUNT.load(Ordering::Relaxed),
        simplex::PIVOT_COUNT.load(Ordering::Relaxed),
        simplex::REFACTOR_NANOS.load(Ordering::Relaxed) as f64 / 1e9,
        simplex::RESTART_COUNT.load(Ordering::Relaxed),
        simplex::SOLVE_COUNT.load(Ordering::Relaxed),
        simplex::PHASE1_ITERS.load(Ordering::Relaxed),
        simplex::PHASE2_ITERS.load(Ordering::Relaxed),
    )
}
pub use solution_file::{import_external_solution, read_solution_values, write_solution_file};

use crate::error::{Error, Result};
use crate::model::{MilpModel, Plan, Sense, VarKind};

/// Numerical tolerances for the simplex.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Primal feasibility on scaled data.
    pub feasibility: f64,
    /// Reduced-cost threshold for optimality.
    pub optimality: f64,
    /// Smallest pivot magnitude accepted in the ratio test.
    pub pivot: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            feasibility: 1e-7,
            optimality: 1e-7,
            pivot: 1e-8,
        }
    }
}

/// A linear program in column form; the integrality of the originating
/// model is kept alongside as a mask.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub num_structural: usize,
    pub num_rows: usize,
    /// Sparse columns of the row matrix: (row, coefficient).
    pub cols: Vec<Vec<(u32, f64)>>,
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub row_sense: Vec<Sense>,
    pub rhs: Vec<f64>,
    pub integer: Vec<bool>,
}

impl LinearProgram {
    /// Extracts the LP data from a model (integrality recorded, not
    /// enforced).
    pub fn from_model(model: &MilpModel) -> Self {
        let n = model.num_variables();
        let mut cols: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for (i, row) in model.rows.iter().enumerate() {
            for &(j, a) in &row.coeffs {
                cols[j].push((i as u32, a));
            }
        }
        LinearProgram {
            num_structural: n,
            num_rows: model.rows.len(),
            cols,
            objective: model.objective.clone(),
            lower: model.variables.iter().map(|v| v.lower).collect(),
            upper: model.variables.iter().map(|v| v.upper).collect(),
            row_sense: model.rows.iter().map(|r| r.sense).collect(),
            rhs: model.rows.iter().map(|r| r.rhs).collect(),
            integer: model
                .variables
                .iter()
                .map(|v| v.kind == VarKind::Binary)
                .collect(),
        }
    }
}

/// Solves the LP relaxation of a model.
pub fn solve_lp(model: &MilpModel) -> LpResult {
    let lp = LinearProgram::from_model(model);
    let mut simplex = Simplex::new(&lp, Tolerances::default());
    simplex.solve_cold()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchRule {
    /// Branch on the binary closest to one half, ties to the lowest index.
    MostFractional,
    /// Track average objective degradation per variable and direction.
    PseudoCost,
}

/// Termination and search controls for [`solve_milp`].
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    /// Relative optimality gap at which the search may stop.
    pub gap: f64,
    /// Wall-clock budget in seconds.
    pub time_limit: f64,
    pub branching: BranchRule,
    pub node_limit: Option<u64>,
    /// Reserved for randomized components; the default solver is
    /// deterministic and ignores it beyond recording.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            gap: 1e-4,
            time_limit: 36_000.0,
            branching: BranchRule::MostFractional,
            node_limit: None,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.gap < 0.0 {
            return Err(Error::InvalidArgument("gap target must be >= 0".into()));
        }
        if !(self.time_limit > 0.0) {
            return Err(Error::InvalidArgument("time limit must be positive".into()));
        }
        if self.node_limit == Some(0) {
            return Err(Error::InvalidArgument("node limit must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MilpStatus {
    /// Proven optimal (search tree exhausted).
    Optimal,
    /// Stopped once the relative gap reached the configured target.
    GapLimit,
    TimeLimit,
    NodeLimit,
    Infeasible,
    Unbounded,
}

#[derive(Debug)]
pub struct MilpResult {
    pub status: MilpStatus,
    pub plan: Option<Plan>,
    pub objective: Option<f64>,
    /// Best proven lower bound on the optimum (minimization).
    pub best_bound: f64,
    /// Relative gap between incumbent and bound, when an incumbent exists.
    pub gap: Option<f64>,
    pub nodes: u64,
    pub wall_time: f64,
}

impl MilpResult {
    pub fn has_solution(&self) -> bool {
        self.plan.is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RowFamily;

    pub(crate) fn tiny_lp(
        objective: Vec<f64>,
        bounds: Vec<(f64, f64)>,
        rows: Vec<(Vec<(usize, f64)>, Sense, f64)>,
    ) -> LinearProgram {
        let n = objective.len();
        let mut cols: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for (i, (coeffs, _, _)) in rows.iter().enumerate() {
            for &(j, a) in coeffs {
                cols[j].push((i as u32, a));
            }
        }
        LinearProgram {
            num_structural: n,
            num_rows: rows.len(),
            cols,
            objective,
            lower: bounds.iter().map(|b| b.0).collect(),
            upper: bounds.iter().map(|b| b.1).collect(),
            row_sense: rows.iter().map(|r| r.1).collect(),
            rhs: rows.iter().map(|r| r.2).collect(),
            integer: vec![false; n],
        }
    }

    fn solve(lp: &LinearProgram) -> LpResult {
        let mut s = Simplex::new(lp, Tolerances::default());
        s.solve_cold()
    }

    #[test]
    fn minimizes_single_variable_over_lower_bounding_row() {
        // min x s.t. x >= 3, x in [0, 10] -> 3.
        let lp = tiny_lp(
            vec![1.0],
            vec![(0.0, 10.0)],
            vec![(vec![(0, 1.0)], Sense::Ge, 3.0)],
        );
        let r = solve(&lp);
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.objective - 3.0).abs() < 1e-9);
        assert!((r.values[0] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn detects_contradictory_rows() {
        // x >= 2 and x <= 1.
        let lp = tiny_lp(
            vec![0.0],
            vec![(0.0, 10.0)],
            vec![
                (vec![(0, 1.0)], Sense::Ge, 2.0),
                (vec![(0, 1.0)], Sense::Le, 1.0),
            ],
        );
        let r = solve(&lp);
        assert_eq!(r.status, LpStatus::Infeasible);
        assert!(r.certificate.is_some());
        assert!(r.infeasibility > 0.5);
    }

    #[test]
    fn detects_unbounded_direction() {
        // min -x with x free above and no binding row.
        let lp = tiny_lp(
            vec![-1.0],
            vec![(0.0, f64::INFINITY)],
            vec![(vec![(0, 1.0)], Sense::Ge, 0.0)],
        );
        let r = solve(&lp);
        assert_eq!(r.status, LpStatus::Unbounded);
    }

    #[test]
    fn solves_a_small_dense_program() {
        // min -2x - 3y s.t. x + y <= 4, x + 3y <= 6, x,y in [0, 10].
        // Optimum at (3, 1): objective -9.
        let lp = tiny_lp(
            vec![-2.0, -3.0],
            vec![(0.0, 10.0), (0.0, 10.0)],
            vec![
                (vec![(0, 1.0), (1, 1.0)], Sense::Le, 4.0),
                (vec![(0, 1.0), (1, 3.0)], Sense::Le, 6.0),
            ],
        );
        let r = solve(&lp);
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.objective + 9.0).abs() < 1e-8, "objective {}", r.objective);
        assert!((r.values[0] - 3.0).abs() < 1e-8);
        assert!((r.values[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn honors_upper_bounds_via_bound_flips() {
        // min -x - y s.t. x + y <= 1.5, x,y in [0,1]. Optimum 1.5.
        let lp = tiny_lp(
            vec![-1.0, -1.0],
            vec![(0.0, 1.0), (0.0, 1.0)],
            vec![(vec![(0, 1.0), (1, 1.0)], Sense::Le, 1.5)],
        );
        let r = solve(&lp);
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.objective + 1.5).abs() < 1e-8);
    }

    #[test]
    fn equality_rows_and_negative_lower_bounds() {
        // min x + y s.t. x + y = 1, x in [-5, 5], y in [0, 5]. Optimum 1
        // with many solutions; check feasibility and objective.
        let lp = tiny_lp(
            vec![1.0, 1.0],
            vec![(-5.0, 5.0), (0.0, 5.0)],
            vec![(vec![(0, 1.0), (1, 1.0)], Sense::Eq, 1.0)],
        );
        let r = solve(&lp);
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.objective - 1.0).abs() < 1e-8);
        assert!((r.values[0] + r.values[1] - 1.0).abs() < 1e-8);
    }

    pub(crate) fn row(coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> crate::model::Row {
        crate::model::Row {
            name: "r".into(),
            family: RowFamily::Capacity,
            coeffs,
            sense,
            rhs,
        }
    }

    #[test]
    fn warm_start_recovers_after_bound_change() {
        // Solve, then shrink a bound so the old basis is out of range; the
        // warm-started solve must repair and land on the new optimum.
        let lp = tiny_lp(
            vec![-2.0, -3.0],
            vec![(0.0, 10.0), (0.0, 10.0)],
            vec![
                (vec![(0, 1.0), (1, 1.0)], Sense::Le, 4.0),
                (vec![(0, 1.0), (1, 3.0)], Sense::Le, 6.0),
            ],
        );
        let mut s = Simplex::new(&lp, Tolerances::default());
        let first = s.solve_cold();
        assert_eq!(first.status, LpStatus::Optimal);
        // Now force x <= 1; optimum becomes (1, 5/3): -2 - 5 = -7.
        s.set_structural_bounds(&[0.0, 0.0], &[1.0, 10.0]);
        let second = s.solve_from_current();
        assert_eq!(second.status, LpStatus::Optimal);
        assert!((second.objective + 7.0).abs() < 1e-8, "{}", second.objective);
        assert!(second.iterations < first.iterations + 6);
    }
}

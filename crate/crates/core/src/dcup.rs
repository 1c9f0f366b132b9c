//! Deterministic cutting-plane solver: the single-scenario specialization
//! of the sampled forward machinery.
//!
//! With one realization per stage the scenario tree is a path, so every
//! "sampled" forward pass visits the whole tree and the algorithm is an
//! ordinary nested cutting-plane method. The code path is exactly
//! [`crate::stodcup::forward_pass`] on a trivial path; only initialization
//! and the stopping rule differ:
//!
//! - bundles start from one true linearization at the box midpoint, so an
//!   affine objective is represented exactly from iteration 1;
//! - the upper bound is the true cost of the current trial trajectory (no
//!   statistics), marked infeasible-trajectory when the worst constraint
//!   violation along it exceeds 1e-6;
//! - the run stops when ub - lb <= tol * max(1, |ub|).

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::model::Problem;
use crate::stodcup::{
    forward_pass, lower_bound, ForwardReport, InitCuts, SolveError, SolverState, EXACT_EPS,
};

/// Trajectory violations above this are flagged as infeasible.
pub const FEAS_TOL: f64 = 1e-6;

/// One row of the deterministic trace; field order is the CSV column
/// order. The infeasibility flag is derived data and stays out of the CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DcupRecord {
    pub iter: usize,
    pub lb: f64,
    pub ub: f64,
    pub max_violation: f64,
    pub time_s: f64,
    #[serde(skip)]
    pub infeasible_trajectory: bool,
}

pub struct DcupResult {
    pub records: Vec<DcupRecord>,
    /// Trial states x_1..x_T of the last iteration.
    pub trajectory: Vec<Vec<f64>>,
    pub state: SolverState,
    pub converged: bool,
}

/// Builds solver state for a deterministic problem (every stage must have
/// exactly one realization) with midpoint-linearization bundles.
pub fn dcup_init(problem: &Problem) -> Result<SolverState, SolveError> {
    for (t, stage) in problem.stages.iter().enumerate() {
        if stage.len() != 1 {
            return Err(SolveError::Config(format!(
                "deterministic solver requires a single realization per stage; \
                 stage {} has {}",
                t + 1,
                stage.len()
            )));
        }
    }
    Ok(SolverState::new(Arc::new(problem.clone()), 0, InitCuts::Midpoint))
}

/// One deterministic iteration: a forward pass over the single scenario
/// with tight subproblem solves.
pub fn dcup_iterate(state: &mut SolverState) -> Result<ForwardReport, SolveError> {
    let path = vec![0; state.problem.horizon];
    forward_pass(state, &path, EXACT_EPS)
}

pub fn dcup_run(
    problem: &Problem,
    max_iters: usize,
    tol: f64,
) -> Result<DcupResult, SolveError> {
    let mut state = dcup_init(problem)?;
    let started = Instant::now();
    let mut records = Vec::new();
    let mut trajectory = Vec::new();
    let mut converged = false;
    for k in 1..=max_iters {
        let report = dcup_iterate(&mut state)?;
        state.path_costs.push(report.scenario_cost);
        state.violations.push(report.max_violation);
        let lb = lower_bound(&state);
        let ub = report.scenario_cost;
        let record = DcupRecord {
            iter: k,
            lb,
            ub,
            max_violation: report.max_violation,
            time_s: started.elapsed().as_secs_f64(),
            infeasible_trajectory: report.max_violation > FEAS_TOL,
        };
        trajectory = report.states;
        records.push(record);
        if ub - lb <= tol * ub.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    Ok(DcupResult { records, trajectory, state, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        AffineOracle, ConvexOracle, Coupling, MaxOracle, Realization, StageRandomness, StateSet,
    };
    use crate::stodcup::InitCuts;

    struct Square;
    impl ConvexOracle for Square {
        fn eval(&self, x: &[f64], _p: &[f64]) -> f64 {
            x[0] * x[0]
        }
        fn subgrad(&self, x: &[f64], _p: &[f64]) -> (Vec<f64>, Vec<f64>) {
            (vec![2.0 * x[0]], vec![0.0])
        }
    }

    /// Squared distance of x_t to x_{t-1} - 1: forces a nontrivial chain.
    struct DriftSquare;
    impl ConvexOracle for DriftSquare {
        fn eval(&self, x: &[f64], p: &[f64]) -> f64 {
            let d = x[0] - p[0] + 1.0;
            d * d
        }
        fn subgrad(&self, x: &[f64], p: &[f64]) -> (Vec<f64>, Vec<f64>) {
            let d = x[0] - p[0] + 1.0;
            (vec![2.0 * d], vec![-2.0 * d])
        }
    }

    fn det_stage(f: MaxOracle) -> StageRandomness {
        StageRandomness::new(
            1,
            vec![Realization { prob: 1.0, xi: vec![], coupling: Coupling::none(1), f, g: vec![] }],
        )
        .unwrap()
    }

    #[test]
    fn single_stage_is_one_lp() {
        let p = Problem::new(
            vec![0.0],
            vec![det_stage(MaxOracle::single(Arc::new(AffineOracle {
                a: vec![1.0],
                b: vec![0.0],
                c: 0.5,
            })))],
            vec![StateSet::uniform(1, -1.0, 1.0)],
        )
        .unwrap();
        let res = dcup_run(&p, 50, 1e-9).unwrap();
        // Affine objective with a midpoint tangent is exact immediately.
        assert!(res.converged);
        assert_eq!(res.records.len(), 1);
        assert_eq!(res.state.lp_solves, 1);
        let r = &res.records[0];
        assert!((r.lb - (-0.5)).abs() < 1e-7, "lb {}", r.lb);
        assert!((r.ub - r.lb).abs() < 1e-7);
        assert!(!r.infeasible_trajectory);
    }

    #[test]
    fn infinite_tolerance_runs_exactly_one_iteration() {
        let p = Problem::new(
            vec![0.3],
            vec![det_stage(MaxOracle::single(Arc::new(Square)))],
            vec![StateSet::uniform(1, -1.0, 1.0)],
        )
        .unwrap();
        let res = dcup_run(&p, 100, f64::INFINITY).unwrap();
        assert!(res.converged);
        assert_eq!(res.records.len(), 1);
    }

    #[test]
    fn zero_iteration_budget_gives_empty_trace() {
        let p = Problem::new(
            vec![0.0],
            vec![det_stage(MaxOracle::single(Arc::new(Square)))],
            vec![StateSet::uniform(1, -1.0, 1.0)],
        )
        .unwrap();
        let res = dcup_run(&p, 0, 1e-6).unwrap();
        assert!(res.records.is_empty());
        assert!(!res.converged);
        assert!(res.trajectory.is_empty());
    }

    #[test]
    fn stochastic_instances_are_rejected() {
        let two = StageRandomness::new(
            2,
            vec![
                Realization {
                    prob: 0.5,
                    xi: vec![],
                    coupling: Coupling::none(1),
                    f: MaxOracle::single(Arc::new(Square)),
                    g: vec![],
                },
                Realization {
                    prob: 0.5,
                    xi: vec![],
                    coupling: Coupling::none(1),
                    f: MaxOracle::single(Arc::new(Square)),
                    g: vec![],
                },
            ],
        )
        .unwrap();
        let p = Problem::new(
            vec![0.0],
            vec![det_stage(MaxOracle::single(Arc::new(Square))), two],
            vec![StateSet::uniform(1, -1.0, 1.0); 2],
        )
        .unwrap();
        assert!(matches!(dcup_run(&p, 10, 1e-6), Err(SolveError::Config(_))));
    }

    #[test]
    fn two_stage_quadratic_converges_and_lb_is_monotone() {
        // Stage 1: x_1^2 over [-1,1]; stage 2: (x_2 - x_1 + 1)^2.
        // Optimum: min_x1 x_1^2 + min_x2 (x_2 - x_1 + 1)^2. For x_1 >= 0
        // the inner min is 0 (x_2 = x_1 - 1 stays in the box), so the
        // optimum is 0 at x_1 = 0, x_2 = -1.
        let p = Problem::new(
            vec![0.8],
            vec![
                det_stage(MaxOracle::single(Arc::new(Square))),
                det_stage(MaxOracle::single(Arc::new(DriftSquare))),
            ],
            vec![StateSet::uniform(1, -1.0, 1.0); 2],
        )
        .unwrap();
        let res = dcup_run(&p, 200, 1e-4).unwrap();
        assert!(res.converged, "no convergence in 200 iterations");
        for w in res.state.lbs.windows(2) {
            assert!(w[1] >= w[0] - 1e-8, "lb decreased: {w:?}");
        }
        let last = res.records.last().unwrap();
        assert!(last.lb <= 1e-4 && last.lb >= -1e-6, "lb {}", last.lb);
        assert!(last.ub <= 1e-3, "ub {}", last.ub);
        assert_eq!(res.trajectory.len(), 2);
        assert!((res.trajectory[1][0] - (res.trajectory[0][0] - 1.0)).abs() < 0.05);
    }

    #[test]
    fn iterate_matches_forward_pass_on_degenerate_tree() {
        let p = Problem::new(
            vec![0.1],
            vec![
                det_stage(MaxOracle::single(Arc::new(Square))),
                det_stage(MaxOracle::single(Arc::new(DriftSquare))),
            ],
            vec![StateSet::uniform(1, -1.0, 1.0); 2],
        )
        .unwrap();
        let mut a = dcup_init(&p).unwrap();
        let mut b = SolverState::new(Arc::new(p), 0, InitCuts::Midpoint);
        let ra = dcup_iterate(&mut a).unwrap();
        let rb = forward_pass(&mut b, &[0, 0], EXACT_EPS).unwrap();
        assert_eq!(ra.states, rb.states);
        assert_eq!(ra.scenario_cost.to_bits(), rb.scenario_cost.to_bits());
        assert_eq!(a.lp_solves, b.lp_solves);
    }
}

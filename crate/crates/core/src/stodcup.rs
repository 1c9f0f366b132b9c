//! Sampled forward cutting-plane solver: forward passes over a sampled
//! scenario, per-stage child solves, cut aggregation, inexactness
//! schedules, bounds, stopping, and policy simulation.
//!
//! One iteration samples a scenario, then walks stages 1..T. At stage t it
//! solves the stage LP of EVERY realization of that stage anchored at the
//! incoming trial state, appends a fresh objective and constraint
//! linearization to each realization's bundles at its solution, and (for
//! t >= 2) aggregates the children's repaired dual certificates into one
//! new cost-to-go cut. The trial state handed to stage t+1 is the solution
//! of the sampled realization. Stage-1 solves are always tight (their value
//! is the published lower bound); other stages solve to the inexactness
//! schedule's gap for the current iteration.
//!
//! The upper bound is statistical: from iteration `ub_start` on, the mean
//! and sample deviation of the last `ub_window` forward scenario costs
//! (true oracle costs, not model values) give a one-sided confidence bound.
//! The run stops when (ub - lb)/max(1,|ub|) falls below the threshold.

use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cuts::{
    aggregate_cuts, assemble_stage_lp, cut_from_duals, cut_select_oldest, BundleKind, CutBundle,
    QBundle, QCut,
};
use crate::lpcore::{LpError, LpSolution, SolveStatus, StageLp};
use crate::model::{oracle_linearize, streams, ConvexOracle, ModelError, Problem};
use crate::numeric::comp_sum;

/// Gap used wherever a solve must be effectively exact (first stage, lower
/// bounds, policy simulation).
pub const EXACT_EPS: f64 = 1e-9;

/// Smallest admissible subproblem gap.
pub const MIN_EPS: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("stage {t} realization {j}: subproblem reported infeasible (broken bundle?)")]
    StageInfeasible { t: usize, j: usize },
}

/// Piecewise-constant inexactness schedule: the gap used at iteration k is
/// the value of the first breakpoint whose upper iteration bound covers k,
/// else the terminal value. Values are floored at [`MIN_EPS`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsSchedule {
    /// (iter_upper_bound, eps) pairs, inclusive upper bounds, ascending.
    pub breakpoints: Vec<(usize, f64)>,
    pub terminal: f64,
}

impl EpsSchedule {
    pub fn constant(eps: f64) -> Self {
        EpsSchedule { breakpoints: Vec::new(), terminal: eps }
    }

    /// The built-in benchmark schedule (CLI name `builtin:table2`).
    pub fn benchmark() -> Self {
        EpsSchedule {
            breakpoints: vec![
                (10, 10.0),
                (20, 5.0),
                (40, 3.0),
                (140, 1.0),
                (240, 0.5),
                (350, 0.1),
            ],
            terminal: 1e-6,
        }
    }

    /// The benchmark schedule with every iteration threshold divided by 10
    /// (CLI name `builtin:table2/10`), for short desk-scale runs.
    pub fn benchmark_compressed() -> Self {
        EpsSchedule {
            breakpoints: vec![
                (1, 10.0),
                (2, 5.0),
                (4, 3.0),
                (14, 1.0),
                (24, 0.5),
                (35, 0.1),
            ],
            terminal: 1e-6,
        }
    }

    pub fn eps_at(&self, iter: usize) -> f64 {
        for (upper, eps) in &self.breakpoints {
            if iter <= *upper {
                return eps.max(MIN_EPS);
            }
        }
        self.terminal.max(MIN_EPS)
    }

    /// Checks the schedule; returns human-readable warnings (non-fatal
    /// oddities like increasing eps values).
    pub fn validate(&self) -> Result<Vec<String>, SolveError> {
        let mut warnings = Vec::new();
        let mut prev_upper = 0usize;
        let mut prev_eps = f64::INFINITY;
        for (upper, eps) in &self.breakpoints {
            if !eps.is_finite() || *eps < MIN_EPS {
                return Err(SolveError::Config(format!(
                    "schedule eps {eps} below the minimum {MIN_EPS}"
                )));
            }
            if *upper <= prev_upper && prev_upper != 0 {
                return Err(SolveError::Config(
                    "schedule breakpoints must have strictly increasing iteration bounds".into(),
                ));
            }
            if *eps > prev_eps {
                warnings.push(format!(
                    "schedule eps increases to {eps} at iteration bound {upper}; \
                     nonincreasing schedules are recommended"
                ));
            }
            prev_upper = *upper;
            prev_eps = *eps;
        }
        if !self.terminal.is_finite() || self.terminal < MIN_EPS {
            return Err(SolveError::Config(format!(
                "terminal eps {} below the minimum {MIN_EPS}",
                self.terminal
            )));
        }
        if self.terminal > prev_eps {
            warnings.push("terminal eps exceeds the last breakpoint value".into());
        }
        Ok(warnings)
    }

    /// Parses a schedule name: `builtin:table2`, `builtin:table2/10`, or
    /// `constant:<eps>`. Returns Ok(None) for strings that are none of
    /// these (the CLI then treats the string as a file path).
    pub fn parse_spec(s: &str) -> Result<Option<Self>, SolveError> {
        match s {
            "builtin:table2" => Ok(Some(Self::benchmark())),
            "builtin:table2/10" => Ok(Some(Self::benchmark_compressed())),
            _ => {
                if let Some(rest) = s.strip_prefix("constant:") {
                    let eps: f64 = rest.parse().map_err(|_| {
                        SolveError::Config(format!("bad constant schedule value {rest:?}"))
                    })?;
                    return Ok(Some(Self::constant(eps)));
                }
                if let Some(name) = s.strip_prefix("builtin:") {
                    return Err(SolveError::Config(format!(
                        "unknown builtin schedule {name:?}; known: table2, table2/10"
                    )));
                }
                Ok(None)
            }
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self, SolveError> {
        serde_json::from_str(s)
            .map_err(|e| SolveError::Config(format!("bad schedule JSON: {e}")))
    }
}

/// Hardcoded one-sided normal quantile z such that P(Z <= z) = 1 - alpha.
/// Returns None for alphas outside the table.
pub fn z_quantile(alpha: f64) -> Option<f64> {
    const TABLE: [(f64, f64); 8] = [
        (0.5, 0.0),
        (0.25, 0.6745),
        (0.1, 1.2816),
        (0.05, 1.6449),
        (0.025, 1.96),
        (0.01, 2.3263),
        (0.005, 2.5758),
        (0.001, 3.0902),
    ];
    TABLE
        .iter()
        .find(|(a, _)| (a - alpha).abs() <= 1e-12)
        .map(|(_, z)| *z)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    /// Exact sampled solver: every subproblem at gap 1e-10.
    StoDcup,
    /// Inexact solver driven by an eps schedule.
    IStoDcup,
    /// Inexact solver with oldest-first cost-to-go cut selection.
    IStoDcupCs,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub algo: Algo,
    /// Inexactness schedule; ignored by [`Algo::StoDcup`].
    pub schedule: EpsSchedule,
    /// Stop when (ub - lb)/max(1,|ub|) falls to this value.
    pub gap_threshold: f64,
    pub max_iters: usize,
    /// Linearizations per (stage, realization) bundle before iteration 1;
    /// 0 falls back to the loose initial plane.
    pub warm_start_count: usize,
    /// Number of most recent forward scenario costs in the upper bound.
    pub ub_window: usize,
    /// First iteration at which an upper bound is published.
    pub ub_start: usize,
    /// One-sided confidence level parameter; must be in the quantile table.
    pub alpha: f64,
    /// Cut-selection budget I (bundle size held during the window).
    pub cs_keep: usize,
    /// Cut-selection window length L.
    pub cs_window: usize,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(algo: Algo, seed: u64) -> Self {
        RunConfig {
            algo,
            schedule: EpsSchedule::benchmark(),
            gap_threshold: 0.1,
            max_iters: 2000,
            warm_start_count: 20,
            ub_window: 200,
            ub_start: 200,
            alpha: 0.05,
            cs_keep: 350,
            cs_window: 350,
            seed,
        }
    }

    pub fn validate(&self) -> Result<Vec<String>, SolveError> {
        if z_quantile(self.alpha).is_none() {
            return Err(SolveError::Config(format!(
                "alpha {} not in the quantile table (use one of 0.5, 0.25, 0.1, 0.05, \
                 0.025, 0.01, 0.005, 0.001)",
                self.alpha
            )));
        }
        if !(self.gap_threshold >= 0.0) {
            return Err(SolveError::Config("gap threshold must be >= 0".into()));
        }
        if self.algo == Algo::IStoDcupCs && self.cs_keep < 1 {
            return Err(SolveError::Config("cut selection requires keep >= 1".into()));
        }
        match self.algo {
            Algo::StoDcup => Ok(Vec::new()),
            _ => self.schedule.validate(),
        }
    }
}

/// How to seed the objective/constraint bundles before iteration 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitCuts {
    /// One loose plane per bundle.
    Loose,
    /// One true linearization at the box midpoint (deterministic).
    Midpoint,
    /// `count` true linearizations at random box points.
    Random { count: usize },
}

/// All mutable solver state: the bundles, counters, and the path RNG.
#[derive(Clone)]
pub struct SolverState {
    pub problem: Arc<Problem>,
    /// f_bundles[t-1][j]: objective bundle of stage t, realization j.
    pub f_bundles: Vec<Vec<CutBundle>>,
    /// g_bundles[t-1][j][i]: bundle of constraint i.
    pub g_bundles: Vec<Vec<Vec<CutBundle>>>,
    /// q_bundles[t-1] models the cost-to-go entering stage t's LPs (the
    /// recourse of stages t+1..T); the last entry is the exact zero bundle.
    pub q_bundles: Vec<QBundle>,
    pub iters_done: usize,
    pub lp_solves: usize,
    /// Cumulative interior-point iterations across all LP solves.
    pub ipm_iters: usize,
    /// First-stage LP value per iteration (the lower bound sequence).
    pub lbs: Vec<f64>,
    /// True oracle cost of each iteration's forward scenario.
    pub path_costs: Vec<f64>,
    /// Max true constraint violation along each iteration's trajectory.
    pub violations: Vec<f64>,
    rng_path: ChaCha8Rng,
}

impl SolverState {
    pub fn new(problem: Arc<Problem>, seed: u64, init: InitCuts) -> Self {
        let horizon = problem.horizon;
        let n = problem.dim;
        let mut warm_rng = streams::rng(seed, streams::WARM_START);
        let mut f_bundles = Vec::with_capacity(horizon);
        let mut g_bundles = Vec::with_capacity(horizon);
        for t in 1..=horizon {
            let stage = &problem.stages[t - 1];
            let mut f_row = Vec::with_capacity(stage.len());
            let mut g_row = Vec::with_capacity(stage.len());
            for real in &stage.realizations {
                let p = real.g.len();
                let anchors: Vec<(Vec<f64>, Vec<f64>)> = match init {
                    InitCuts::Loose => Vec::new(),
                    InitCuts::Midpoint => {
                        let mid = |t: usize| -> Vec<f64> {
                            let s = problem.state_set(t);
                            s.lo.iter().zip(&s.hi).map(|(l, h)| 0.5 * (l + h)).collect()
                        };
                        let prev = if t == 1 { problem.x0.clone() } else { mid(t - 1) };
                        vec![(mid(t), prev)]
                    }
                    InitCuts::Random { count } => (0..count)
                        .map(|_| {
                            let x = problem.state_set(t).sample(&mut warm_rng);
                            let prev = if t == 1 {
                                problem.x0.clone()
                            } else {
                                problem.state_set(t - 1).sample(&mut warm_rng)
                            };
                            (x, prev)
                        })
                        .collect(),
                };
                if anchors.is_empty() {
                    f_row.push(CutBundle::new_loose(n, BundleKind::Objective));
                    g_row.push(vec![CutBundle::new_loose(n, BundleKind::Constraint); p]);
                } else {
                    let mut fb = Vec::with_capacity(anchors.len());
                    let mut gb: Vec<Vec<crate::cuts::AffineCut>> = vec![Vec::new(); p];
                    for (x, prev) in &anchors {
                        let lin = oracle_linearize(&real.f, x, prev);
                        fb.push(crate::cuts::AffineCut {
                            a: lin.a,
                            b: lin.b,
                            c: lin.c,
                            birth_iter: 0,
                        });
                        for (i, g) in real.g.iter().enumerate() {
                            let lin = oracle_linearize(g, x, prev);
                            gb[i].push(crate::cuts::AffineCut {
                                a: lin.a,
                                b: lin.b,
                                c: lin.c,
                                birth_iter: 0,
                            });
                        }
                    }
                    f_row.push(CutBundle::from_cuts(BundleKind::Objective, fb));
                    g_row.push(
                        gb.into_iter()
                            .map(|cuts| CutBundle::from_cuts(BundleKind::Constraint, cuts))
                            .collect(),
                    );
                }
            }
            f_bundles.push(f_row);
            g_bundles.push(g_row);
        }
        let mut q_bundles: Vec<QBundle> =
            (0..horizon.saturating_sub(1)).map(|_| QBundle::new_loose(n)).collect();
        q_bundles.push(QBundle::zero(n));
        SolverState {
            problem,
            f_bundles,
            g_bundles,
            q_bundles,
            iters_done: 0,
            lp_solves: 0,
            ipm_iters: 0,
            lbs: Vec::new(),
            path_costs: Vec::new(),
            violations: Vec::new(),
            rng_path: streams::rng(seed, streams::PATH_SAMPLING),
        }
    }

    pub fn sample_next_path(&mut self) -> Vec<usize> {
        self.problem.sample_path(&mut self.rng_path)
    }

    /// Model of the cost-to-go after stage t-1 (valid for t in 2..=T+1).
    pub fn q_model(&self, t: usize) -> &QBundle {
        &self.q_bundles[t - 2]
    }
}

/// One solved child subproblem, kept for inspection by observers/tests.
#[derive(Debug, Clone)]
pub struct ChildSolve {
    pub j: usize,
    pub prob: f64,
    pub lp: StageLp,
    pub sol: LpSolution,
}

#[derive(Debug, Clone)]
pub struct StageReport {
    /// 1-based stage index.
    pub t: usize,
    /// Incoming trial state the children were anchored at.
    pub anchor: Vec<f64>,
    pub children: Vec<ChildSolve>,
    /// Realization index the scenario continues through.
    pub sampled: usize,
    /// The aggregated cost-to-go cut appended this stage (t >= 2 only).
    pub new_cut: Option<QCut>,
}

#[derive(Debug, Clone)]
pub struct ForwardReport {
    pub path: Vec<usize>,
    pub stages: Vec<StageReport>,
    /// True oracle cost along the sampled trajectory.
    pub scenario_cost: f64,
    /// Max true constraint violation along the trajectory (0 if feasible).
    pub max_violation: f64,
    /// Trial states x_1..x_T along the sampled scenario.
    pub states: Vec<Vec<f64>>,
}

/// One forward pass at inexactness `eps_k` along `path`. Mutates the
/// bundles (linearizations at every child, one cost-to-go cut per stage
/// t >= 2) and appends to the lower-bound log.
pub fn forward_pass(
    state: &mut SolverState,
    path: &[usize],
    eps_k: f64,
) -> Result<ForwardReport, SolveError> {
    let problem = Arc::clone(&state.problem);
    let horizon = problem.horizon;
    assert_eq!(path.len(), horizon, "path length must equal the horizon");
    let birth = state.iters_done + 1;
    let mut x_prev = problem.x0.clone();
    let mut stages_out = Vec::with_capacity(horizon);
    let mut states_out = Vec::with_capacity(horizon);
    let mut cost_terms = Vec::with_capacity(horizon);
    let mut max_violation = 0.0_f64;

    for t in 1..=horizon {
        let stage = &problem.stages[t - 1];
        let eps_t = if t == 1 { EXACT_EPS } else { eps_k.max(MIN_EPS) };
        let lps: Vec<StageLp> = (0..stage.len())
            .map(|j| {
                assemble_stage_lp(
                    &state.f_bundles[t - 1][j],
                    &state.g_bundles[t - 1][j],
                    &state.q_bundles[t - 1],
                    &stage.realizations[j].coupling,
                    problem.state_set(t),
                    &x_prev,
                )
            })
            .collect();
        let sols: Result<Vec<LpSolution>, LpError> =
            lps.par_iter().map(|lp| lp.solve(eps_t)).collect();
        let sols = sols?;
        for (j, sol) in sols.iter().enumerate() {
            if sol.status == SolveStatus::Infeasible {
                return Err(SolveError::StageInfeasible { t, j });
            }
        }
        state.lp_solves += sols.len();
        state.ipm_iters += sols.iter().map(|s| s.iters).sum::<usize>();

        for (j, sol) in sols.iter().enumerate() {
            let real = &stage.realizations[j];
            let lin = oracle_linearize(&real.f, &sol.x, &x_prev);
            state.f_bundles[t - 1][j].add_linearization(&lin, birth);
            for (i, g) in real.g.iter().enumerate() {
                let lin = oracle_linearize(g, &sol.x, &x_prev);
                state.g_bundles[t - 1][j][i].add_linearization(&lin, birth);
            }
        }

        let new_cut = if t >= 2 {
            let children: Vec<(f64, QCut)> = sols
                .iter()
                .zip(&lps)
                .zip(&stage.realizations)
                .map(|((sol, lp), real)| (real.prob, cut_from_duals(lp, &sol.duals, birth)))
                .collect();
            let cut = aggregate_cuts(&children, birth);
            state.q_bundles[t - 2].add(cut.clone());
            Some(cut)
        } else {
            None
        };

        if t == 1 {
            // The certified dual objective is a valid lower bound on the
            // first stage problem at any solve status, while the primal
            // value is only trustworthy when the gap closed. The running
            // max keeps the sequence monotone even when a later solve
            // terminates with a looser gap than an earlier one.
            let prev = state.lbs.last().copied().unwrap_or(f64::NEG_INFINITY);
            state.lbs.push(prev.max(sols[0].dual_value));
        }

        let m = path[t - 1];
        let real = &stage.realizations[m];
        let x_m = sols[m].x.clone();
        cost_terms.push(real.f.eval(&x_m, &x_prev));
        for g in &real.g {
            max_violation = max_violation.max(g.eval(&x_m, &x_prev));
        }
        states_out.push(x_m.clone());
        let children: Vec<ChildSolve> = lps
            .into_iter()
            .zip(sols)
            .enumerate()
            .map(|(j, (lp, sol))| ChildSolve {
                j,
                prob: stage.realizations[j].prob,
                lp,
                sol,
            })
            .collect();
        stages_out.push(StageReport { t, anchor: x_prev.clone(), children, sampled: m, new_cut });
        x_prev = x_m;
    }
    state.iters_done += 1;
    Ok(ForwardReport {
        path: path.to_vec(),
        stages: stages_out,
        scenario_cost: comp_sum(cost_terms),
        max_violation: max_violation.max(0.0),
        states: states_out,
    })
}

/// Latest first-stage LP value: the published lower bound. Requires at
/// least one completed iteration.
pub fn lower_bound(state: &SolverState) -> f64 {
    *state.lbs.last().expect("lower_bound requires a completed iteration")
}

#[derive(Debug, Clone, Copy)]
pub struct UpperBound {
    pub mean: f64,
    /// Sample standard deviation; NaN when the window has one element.
    pub std: f64,
    /// mean + z_{1-alpha} * std / sqrt(N).
    pub ub: f64,
    /// Set when the window was too small for a deviation estimate.
    pub low_confidence: bool,
}

/// One-sided confidence bound over a window of scenario costs. `alpha`
/// must be in the hardcoded quantile table (validated by RunConfig).
pub fn upper_bound(window: &[f64], alpha: f64) -> UpperBound {
    assert!(!window.is_empty(), "upper_bound needs a nonempty window");
    let n = window.len() as f64;
    let mean = comp_sum(window.iter().copied()) / n;
    if window.len() == 1 {
        return UpperBound { mean, std: f64::NAN, ub: mean, low_confidence: true };
    }
    let var = comp_sum(window.iter().map(|c| (c - mean) * (c - mean))) / (n - 1.0);
    let std = var.sqrt();
    let z = z_quantile(alpha).expect("alpha outside the quantile table");
    UpperBound { mean, std, ub: mean + z * std / n.sqrt(), low_confidence: false }
}

/// Relative optimality gap with a guarded denominator: (ub - lb) over
/// max(1, |ub|), so small-magnitude bounds cannot blow the ratio up.
pub fn stopping_gap(lb: f64, ub: f64) -> f64 {
    (ub - lb) / ub.abs().max(1.0)
}

/// One row of the run trace; field order is the CSV column order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundRecord {
    pub iter: usize,
    pub lb: f64,
    /// NaN until `ub_start` iterations have completed.
    pub ub: f64,
    pub ub_mean: f64,
    pub ub_std: f64,
    pub eps: f64,
    pub cuts_q_total: usize,
    pub lp_solves: usize,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    GapMet,
    MaxIters,
}

pub struct RunResult {
    pub records: Vec<BoundRecord>,
    pub stop: StopReason,
    pub state: SolverState,
}

pub fn run(problem: &Problem, config: &RunConfig) -> Result<RunResult, SolveError> {
    run_with(problem, config, |_, _, _| {})
}

/// Full solver loop with an observer invoked after every iteration. The
/// observer sees the post-iteration state, the trace record, and the
/// forward report (anchors, child solves, new cuts) before the latter is
/// dropped.
pub fn run_with<F>(
    problem: &Problem,
    config: &RunConfig,
    mut observer: F,
) -> Result<RunResult, SolveError>
where
    F: FnMut(&SolverState, &BoundRecord, &ForwardReport),
{
    config.validate()?;
    let init = if config.warm_start_count == 0 {
        InitCuts::Loose
    } else {
        InitCuts::Random { count: config.warm_start_count }
    };
    let mut state = SolverState::new(Arc::new(problem.clone()), config.seed, init);
    let started = Instant::now();
    let mut records = Vec::new();
    let mut stop = StopReason::MaxIters;
    for k in 1..=config.max_iters {
        let path = state.sample_next_path();
        let eps_k = match config.algo {
            Algo::StoDcup => MIN_EPS,
            _ => config.schedule.eps_at(k),
        };
        let report = forward_pass(&mut state, &path, eps_k)?;
        if config.algo == Algo::IStoDcupCs {
            for t in 2..=state.problem.horizon {
                cut_select_oldest(
                    &mut state.q_bundles[t - 2],
                    k,
                    config.cs_keep,
                    config.cs_window,
                );
            }
        }
        state.path_costs.push(report.scenario_cost);
        state.violations.push(report.max_violation);
        let lb = lower_bound(&state);
        let (ub_mean, ub_std, ub) = if k >= config.ub_start.max(1) {
            let costs = &state.path_costs;
            let from = costs.len().saturating_sub(config.ub_window.max(1));
            let est = upper_bound(&costs[from..], config.alpha);
            (est.mean, est.std, est.ub)
        } else {
            (f64::NAN, f64::NAN, f64::NAN)
        };
        let record = BoundRecord {
            iter: k,
            lb,
            ub,
            ub_mean,
            ub_std,
            eps: eps_k,
            cuts_q_total: state.q_bundles.iter().map(|q| q.len()).sum(),
            lp_solves: state.lp_solves,
            wall_time_s: started.elapsed().as_secs_f64(),
        };
        observer(&state, &record, &report);
        records.push(record);
        if ub.is_finite() && stopping_gap(lb, ub) <= config.gap_threshold {
            stop = StopReason::GapMet;
            break;
        }
    }
    Ok(RunResult { records, stop, state })
}

#[derive(Debug, Clone, Copy)]
pub struct PolicySample {
    pub cost: f64,
    pub max_violation: f64,
}

/// Rolls the current policy forward on fresh scenarios without touching
/// the bundles: each stage solves only the sampled realization's LP,
/// exactly. Returns true scenario costs and violations.
pub fn simulate_policy(
    state: &SolverState,
    n_scenarios: usize,
    rng: &mut impl Rng,
) -> Result<Vec<PolicySample>, SolveError> {
    let problem = Arc::clone(&state.problem);
    let paths: Vec<Vec<usize>> = (0..n_scenarios).map(|_| problem.sample_path(rng)).collect();
    paths
        .par_iter()
        .map(|path| {
            let mut x_prev = problem.x0.clone();
            let mut terms = Vec::with_capacity(problem.horizon);
            let mut viol = 0.0_f64;
            for t in 1..=problem.horizon {
                let j = path[t - 1];
                let real = &problem.stages[t - 1].realizations[j];
                let lp = assemble_stage_lp(
                    &state.f_bundles[t - 1][j],
                    &state.g_bundles[t - 1][j],
                    &state.q_bundles[t - 1],
                    &real.coupling,
                    problem.state_set(t),
                    &x_prev,
                );
                let sol = lp.solve(EXACT_EPS)?;
                if sol.status == SolveStatus::Infeasible {
                    return Err(SolveError::StageInfeasible { t, j });
                }
                terms.push(real.f.eval(&sol.x, &x_prev));
                for g in &real.g {
                    viol = viol.max(g.eval(&sol.x, &x_prev));
                }
                x_prev = sol.x;
            }
            Ok(PolicySample { cost: comp_sum(terms), max_violation: viol.max(0.0) })
        })
        .collect()
}

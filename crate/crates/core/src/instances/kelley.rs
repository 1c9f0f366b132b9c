//! Independent reference values over the full scenario tree.
//!
//! This solver deliberately shares no code path with the stagewise
//! decomposition: it builds the extensive form of the (sub)tree, keeps one
//! epigraph variable per node, and runs a plain outer cutting-plane loop,
//! adding linearization rows for every branch of every node's objective
//! and constraints at the incumbent. It reports a certified interval:
//!
//! - lower end: the master LP's dual bound (the master is an outer
//!   relaxation, so this never exceeds the true optimum);
//! - upper end: the true oracle cost of a feasibility-restored incumbent,
//!   obtained by shrinking the decision vector toward the origin until all
//!   true constraints hold (valid whenever the origin is strictly
//!   feasible, as it is for the generated benchmark family).
//!
//! Intended for small trees only; the node count is capped.

use thiserror::Error;

use crate::lpcore::ipm::{self, IpmOptions, IpmStatus, SparseLp, SparseRow};
use crate::model::{ConvexOracle, Problem};
use crate::numeric::{comp_dot, comp_sum};

/// Hard cap on extensive-form tree size.
pub const MAX_TREE_NODES: usize = 10_000;

/// Master solve budget per reference evaluation.
const MAX_MASTERS: usize = 2_000;

/// Certified bracket around a true optimal value.
#[derive(Debug, Clone, Copy)]
pub struct Certified {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Error)]
pub enum KelleyError {
    #[error("scenario tree has {nodes} nodes, above the {MAX_TREE_NODES} cap")]
    TreeTooLarge { nodes: usize },
    #[error("interval [{lower}, {upper}] did not close within {masters} master solves")]
    NonConvergence { masters: usize, lower: f64, upper: f64 },
    #[error("equality-coupled realizations are not supported by the reference solver")]
    UnsupportedCoupling,
    #[error("feasibility restoration failed: the origin does not satisfy all constraints")]
    Restoration,
    #[error("master LP solve failed: {0}")]
    Lp(String),
}

struct Node {
    /// 1-based stage.
    t: usize,
    /// Realization index within the stage.
    j: usize,
    parent: Option<usize>,
    /// Path probability from the (sub)tree root.
    prob: f64,
}

fn build_tree(problem: &Problem, t0: usize) -> Result<Vec<Node>, KelleyError> {
    let mut nodes: Vec<Node> = Vec::new();
    let stage0 = &problem.stages[t0 - 1];
    for (j, r) in stage0.realizations.iter().enumerate() {
        nodes.push(Node { t: t0, j, parent: None, prob: r.prob });
    }
    let mut frontier: Vec<usize> = (0..nodes.len()).collect();
    for t in (t0 + 1)..=problem.horizon {
        let stage = &problem.stages[t - 1];
        let mut next = Vec::new();
        for &pi in &frontier {
            for (j, r) in stage.realizations.iter().enumerate() {
                let prob = nodes[pi].prob * r.prob;
                nodes.push(Node { t, j, parent: Some(pi), prob });
                next.push(nodes.len() - 1);
                if nodes.len() > MAX_TREE_NODES {
                    return Err(KelleyError::TreeTooLarge { nodes: nodes.len() });
                }
            }
        }
        frontier = next;
    }
    Ok(nodes)
}

/// Reference bracket for the whole problem from its initial state.
pub fn kelley_reference_solve(problem: &Problem, tol: f64) -> Result<Certified, KelleyError> {
    let x0 = problem.x0.clone();
    q_ref(problem, 1, &x0, tol)
}

/// Reference bracket for the expected cost of stages `t0..=T` given the
/// state `x_prev` entering stage `t0`. `t0 = 1` reproduces the full solve.
pub fn q_ref(
    problem: &Problem,
    t0: usize,
    x_prev: &[f64],
    tol: f64,
) -> Result<Certified, KelleyError> {
    assert!(t0 >= 1 && t0 <= problem.horizon, "stage out of range");
    assert_eq!(x_prev.len(), problem.dim);
    for t in t0..=problem.horizon {
        for r in &problem.stages[t - 1].realizations {
            if r.coupling.q() > 0 {
                return Err(KelleyError::UnsupportedCoupling);
            }
        }
    }
    let nodes = build_tree(problem, t0)?;
    let n = problem.dim;
    let stride = n + 1;
    let nvars = nodes.len() * stride;
    let xcol = |node: usize, i: usize| node * stride + i;
    let wcol = |node: usize| node * stride + n;

    let mut c = vec![0.0; nvars];
    for (idx, node) in nodes.iter().enumerate() {
        c[wcol(idx)] = node.prob;
    }

    let mut rows: Vec<SparseRow> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    for (idx, node) in nodes.iter().enumerate() {
        let set = problem.state_set(node.t);
        for i in 0..n {
            let mut up = SparseRow::new();
            up.push(xcol(idx, i), 1.0);
            rows.push(up);
            rhs.push(set.hi[i]);
            let mut lo = SparseRow::new();
            lo.push(xcol(idx, i), -1.0);
            rows.push(lo);
            rhs.push(-set.lo[i]);
        }
    }

    // Linearization rows for one branch at one node, at anchor (ax, ap).
    // Objective rows bound the epigraph w; constraint rows bound 0.
    let add_branch_row = |rows: &mut Vec<SparseRow>,
                              rhs: &mut Vec<f64>,
                              idx: usize,
                              parent: Option<usize>,
                              value: f64,
                              gx: &[f64],
                              gp: &[f64],
                              ax: &[f64],
                              ap: &[f64],
                              epigraph: bool| {
        let mut row = SparseRow::new();
        for i in 0..n {
            row.push(xcol(idx, i), gx[i]);
        }
        let mut b = comp_sum([-value, comp_dot(gx, ax), comp_dot(gp, ap)]);
        match parent {
            Some(p) => {
                for i in 0..n {
                    row.push(xcol(p, i), gp[i]);
                }
            }
            None => {
                b = comp_sum([b, -comp_dot(gp, x_prev)]);
            }
        }
        if epigraph {
            row.push(wcol(idx), -1.0);
        }
        rows.push(row);
        rhs.push(b);
    };

    // Anchor points for the current incumbent, parent state included.
    let anchor_of = |zs: &[Vec<f64>], idx: usize| -> (Vec<f64>, Vec<f64>) {
        let ax = zs[idx].clone();
        let ap = match nodes[idx].parent {
            Some(p) => zs[p].clone(),
            None => x_prev.to_vec(),
        };
        (ax, ap)
    };

    let linearize_all = |rows: &mut Vec<SparseRow>, rhs: &mut Vec<f64>, zs: &[Vec<f64>]| {
        for (idx, node) in nodes.iter().enumerate() {
            let real = &problem.stages[node.t - 1].realizations[node.j];
            let (ax, ap) = anchor_of(zs, idx);
            for branch in &real.f.branches {
                let v = branch.eval(&ax, &ap);
                let (gx, gp) = branch.subgrad(&ax, &ap);
                add_branch_row(rows, rhs, idx, node.parent, v, &gx, &gp, &ax, &ap, true);
            }
            for g in &real.g {
                for branch in &g.branches {
                    let v = branch.eval(&ax, &ap);
                    let (gx, gp) = branch.subgrad(&ax, &ap);
                    add_branch_row(rows, rhs, idx, node.parent, v, &gx, &gp, &ax, &ap, false);
                }
            }
        }
    };

    // True worst constraint value over the tree with all decisions scaled
    // by (1 - s); the fixed entering state is never scaled.
    let tree_violation = |zs: &[Vec<f64>], s: f64| -> f64 {
        let mut worst = f64::NEG_INFINITY;
        let mut any = false;
        for (idx, node) in nodes.iter().enumerate() {
            let real = &problem.stages[node.t - 1].realizations[node.j];
            if real.g.is_empty() {
                continue;
            }
            any = true;
            let x: Vec<f64> = zs[idx].iter().map(|v| (1.0 - s) * v).collect();
            let xp: Vec<f64> = match nodes[idx].parent {
                Some(p) => zs[p].iter().map(|v| (1.0 - s) * v).collect(),
                None => x_prev.to_vec(),
            };
            for g in &real.g {
                worst = worst.max(g.eval(&x, &xp));
            }
        }
        if any {
            worst
        } else {
            f64::NEG_INFINITY
        }
    };

    let tree_cost = |zs: &[Vec<f64>], s: f64| -> f64 {
        let terms: Vec<f64> = nodes
            .iter()
            .enumerate()
            .map(|(idx, node)| {
                let real = &problem.stages[node.t - 1].realizations[node.j];
                let x: Vec<f64> = zs[idx].iter().map(|v| (1.0 - s) * v).collect();
                let xp: Vec<f64> = match node.parent {
                    Some(p) => zs[p].iter().map(|v| (1.0 - s) * v).collect(),
                    None => x_prev.to_vec(),
                };
                node.prob * real.f.eval(&x, &xp)
            })
            .collect();
        comp_sum(terms)
    };

    // Seed with midpoint linearizations so every epigraph is bounded.
    let midpoints: Vec<Vec<f64>> = nodes
        .iter()
        .map(|node| {
            let set = problem.state_set(node.t);
            set.lo.iter().zip(&set.hi).map(|(l, h)| 0.5 * (l + h)).collect()
        })
        .collect();
    linearize_all(&mut rows, &mut rhs, &midpoints);

    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    let mut z0: Option<Vec<f64>> = None;
    for _master in 0..MAX_MASTERS {
        let lp = SparseLp {
            nvars,
            c: c.clone(),
            g: rows.clone(),
            h: rhs.clone(),
            f_eq: Vec::new(),
            d: Vec::new(),
        };
        let opts = IpmOptions { eps_gap: 1e-9, max_iters: 300, z0: z0.clone() };
        let res = ipm::solve(&lp, &opts, None).map_err(|e| KelleyError::Lp(e.to_string()))?;
        if res.status == IpmStatus::Infeasible {
            return Err(KelleyError::Lp("master reported infeasible".into()));
        }
        lower = lower.max(res.dual_value);

        let zs: Vec<Vec<f64>> = (0..nodes.len())
            .map(|idx| (0..n).map(|i| res.z[xcol(idx, i)]).collect())
            .collect();
        // Restore feasibility by shrinking toward the origin.
        let s_feasible = if tree_violation(&zs, 0.0) <= 0.0 {
            Some(0.0)
        } else if tree_violation(&zs, 1.0) <= 0.0 {
            let (mut bad, mut good) = (0.0_f64, 1.0_f64);
            for _ in 0..100 {
                let mid = 0.5 * (bad + good);
                if tree_violation(&zs, mid) <= 0.0 {
                    good = mid;
                } else {
                    bad = mid;
                }
            }
            Some(good)
        } else {
            None
        };
        match s_feasible {
            Some(s) => upper = upper.min(tree_cost(&zs, s)),
            None => {
                if upper.is_infinite() {
                    return Err(KelleyError::Restoration);
                }
            }
        }

        if upper - lower <= tol * upper.abs().max(1.0) {
            return Ok(Certified { lower, upper });
        }
        linearize_all(&mut rows, &mut rhs, &zs);
        z0 = Some(res.z);
    }
    Err(KelleyError::NonConvergence { masters: MAX_MASTERS, lower, upper })
}

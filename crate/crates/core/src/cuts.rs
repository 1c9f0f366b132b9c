//! Cut bundles and the operations that connect them to stage LPs.
//!
//! Three bundle families exist. Objective and constraint bundles hold affine
//! minorants in (x, x_prev) of a stage function for one noise realization.
//! Cost-to-go bundles hold affine minorants in x of the expected recourse
//! value. Bundles are append-only logs (birth order equals append order) and
//! are never empty: before any real cut exists they carry a single loose
//! plane far below every value the true functions can take, so stage LPs
//! stay bounded and well formed from the first iteration on.
//!
//! `cut_from_duals` maps an exactly-feasible dual certificate of a child
//! stage LP into an affine minorant of that child's optimal value as a
//! function of the parent state; `aggregate_cuts` averages the children
//! into one cost-to-go cut. `cut_select_oldest` implements the bounded
//! memory variant: inside its window, every append evicts the oldest cut,
//! freezing the bundle size.

use crate::lpcore::{StageDuals, StageLp};
use crate::mat::RowMat;
use crate::model::{Coupling, Linearization, StateSet};
use crate::numeric::{comp_dot, comp_sum};

/// Constant term of the placeholder plane bundles start from. Far below any
/// value the benchmark functions reach, so it never binds once a real cut
/// exists, yet finite so LPs stay numerically sane.
pub const LOOSE_CUT_VALUE: f64 = -1e9;

/// Which function family a bundle models. Only used for bookkeeping and
/// snapshots; the algebra is identical.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BundleKind {
    Objective,
    Constraint,
}

/// Affine minorant a'x + b'x_prev + c of a stage function.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineCut {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: f64,
    /// Iteration that created the cut; 0 marks initialization (loose plane
    /// or warm start).
    pub birth_iter: usize,
}

impl AffineCut {
    pub fn eval(&self, x: &[f64], x_prev: &[f64]) -> f64 {
        comp_sum([comp_dot(&self.a, x), comp_dot(&self.b, x_prev), self.c])
    }
}

/// Affine minorant theta + beta'x of a cost-to-go function.
#[derive(Debug, Clone, PartialEq)]
pub struct QCut {
    pub beta: Vec<f64>,
    pub theta: f64,
    pub birth_iter: usize,
}

impl QCut {
    pub fn eval(&self, x: &[f64]) -> f64 {
        comp_sum([comp_dot(&self.beta, x), self.theta])
    }
}

/// Bundle of affine cuts for one stage function and noise realization.
#[derive(Debug, Clone)]
pub struct CutBundle {
    pub kind: BundleKind,
    pub cuts: Vec<AffineCut>,
}

impl CutBundle {
    /// Starts the bundle with the loose plane so it is never empty.
    pub fn new_loose(n: usize, kind: BundleKind) -> Self {
        CutBundle {
            kind,
            cuts: vec![AffineCut {
                a: vec![0.0; n],
                b: vec![0.0; n],
                c: LOOSE_CUT_VALUE,
                birth_iter: 0,
            }],
        }
    }

    /// Starts the bundle from explicit cuts (warm start). Must be nonempty.
    pub fn from_cuts(kind: BundleKind, cuts: Vec<AffineCut>) -> Self {
        assert!(!cuts.is_empty(), "bundles must never be empty");
        CutBundle { kind, cuts }
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    /// Pointwise maximum of the cuts: the current polyhedral model.
    pub fn eval(&self, x: &[f64], x_prev: &[f64]) -> f64 {
        assert!(!self.cuts.is_empty(), "bundles must never be empty");
        self.cuts
            .iter()
            .map(|c| c.eval(x, x_prev))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn add(&mut self, cut: AffineCut) {
        self.cuts.push(cut);
    }

    /// Appends the linearization of a stage function taken at a trial point.
    pub fn add_linearization(&mut self, lin: &Linearization, birth_iter: usize) {
        self.cuts.push(AffineCut {
            a: lin.a.clone(),
            b: lin.b.clone(),
            c: lin.c,
            birth_iter,
        });
    }
}

/// Bundle of cost-to-go cuts.
#[derive(Debug, Clone)]
pub struct QBundle {
    pub cuts: Vec<QCut>,
}

impl QBundle {
    /// Fresh bundle holding only the loose plane.
    pub fn new_loose(n: usize) -> Self {
        QBundle {
            cuts: vec![QCut { beta: vec![0.0; n], theta: LOOSE_CUT_VALUE, birth_iter: 0 }],
        }
    }

    /// Bundle pinned at exactly zero, for the cost-to-go beyond the horizon.
    pub fn zero(n: usize) -> Self {
        QBundle { cuts: vec![QCut { beta: vec![0.0; n], theta: 0.0, birth_iter: 0 }] }
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        assert!(!self.cuts.is_empty(), "bundles must never be empty");
        self.cuts.iter().map(|c| c.eval(x)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn add(&mut self, cut: QCut) {
        self.cuts.push(cut);
    }
}

/// Model value of an affine bundle at a point (maximum over its cuts).
pub fn bundle_eval(bundle: &CutBundle, x: &[f64], x_prev: &[f64]) -> f64 {
    bundle.eval(x, x_prev)
}

/// Assembles the stage LP for one (stage, realization) pair at anchor
/// `x_prev`: objective bundle rows, flattened constraint bundle rows,
/// cost-to-go rows from the next stage's bundle, the coupling equalities,
/// and the state box.
pub fn assemble_stage_lp(
    f: &CutBundle,
    gs: &[CutBundle],
    q_next: &QBundle,
    coupling: &Coupling,
    state_set: &StateSet,
    x_prev: &[f64],
) -> StageLp {
    let n = state_set.dim();
    assert!(!f.is_empty() && !q_next.is_empty(), "bundles must never be empty");
    let mut obj_a = RowMat::new(n);
    let mut obj_b = RowMat::new(n);
    let mut obj_c = Vec::with_capacity(f.len());
    for cut in &f.cuts {
        obj_a.push_row(&cut.a);
        obj_b.push_row(&cut.b);
        obj_c.push(cut.c);
    }
    let mut con_d = RowMat::new(n);
    let mut con_e = RowMat::new(n);
    let mut con_h = Vec::new();
    for g in gs {
        assert!(!g.is_empty(), "bundles must never be empty");
        for cut in &g.cuts {
            con_d.push_row(&cut.a);
            con_e.push_row(&cut.b);
            con_h.push(cut.c);
        }
    }
    let mut ctg_beta = RowMat::new(n);
    let mut ctg_theta = Vec::with_capacity(q_next.len());
    for cut in &q_next.cuts {
        ctg_beta.push_row(&cut.beta);
        ctg_theta.push(cut.theta);
    }
    StageLp {
        n,
        obj_a,
        obj_b,
        obj_c,
        con_d,
        con_e,
        con_h,
        ctg_beta,
        ctg_theta,
        eq_a: coupling.a.clone(),
        eq_b: coupling.b.clone(),
        eq_rhs: coupling.rhs.clone(),
        lo: state_set.lo.clone(),
        hi: state_set.hi.clone(),
        x_prev: x_prev.to_vec(),
    }
}

/// Turns a feasible dual certificate of a child stage LP into an affine
/// minorant of the child's optimal value as a function of the parent state:
///     beta  = obj_b' alpha + con_e' mu - eq_b' lam
///     theta = alpha'obj_c + mu'con_h + delta'ctg_theta + lam'eq_rhs
///             + nu_lo'lo - nu_hi'hi.
/// By construction theta + beta'x_prev equals the dual objective at the
/// anchor, so the cut is tight there whenever the duals close the gap.
pub fn cut_from_duals(lp: &StageLp, duals: &StageDuals, birth_iter: usize) -> QCut {
    let n = lp.n;
    let mut beta = Vec::with_capacity(n);
    for j in 0..n {
        let mut terms =
            Vec::with_capacity(duals.alpha.len() + duals.mu.len() + duals.lam.len());
        for (i, a) in duals.alpha.iter().enumerate() {
            terms.push(a * lp.obj_b.row(i)[j]);
        }
        for (i, m) in duals.mu.iter().enumerate() {
            terms.push(m * lp.con_e.row(i)[j]);
        }
        for (i, l) in duals.lam.iter().enumerate() {
            terms.push(-(l * lp.eq_b.row(i)[j]));
        }
        beta.push(comp_sum(terms));
    }
    let mut terms = Vec::with_capacity(
        duals.alpha.len() + duals.mu.len() + duals.delta.len() + duals.lam.len() + 2 * n,
    );
    for (i, a) in duals.alpha.iter().enumerate() {
        terms.push(a * lp.obj_c[i]);
    }
    for (i, m) in duals.mu.iter().enumerate() {
        terms.push(m * lp.con_h[i]);
    }
    for (i, d) in duals.delta.iter().enumerate() {
        terms.push(d * lp.ctg_theta[i]);
    }
    for (i, l) in duals.lam.iter().enumerate() {
        terms.push(l * lp.eq_rhs[i]);
    }
    for j in 0..n {
        terms.push(duals.nu[j] * lp.lo[j]);
        terms.push(-duals.nu[n + j] * lp.hi[j]);
    }
    QCut { beta, theta: comp_sum(terms), birth_iter }
}

/// Probability-weighted average of per-child cuts into one cost-to-go cut.
pub fn aggregate_cuts(children: &[(f64, QCut)], birth_iter: usize) -> QCut {
    assert!(!children.is_empty(), "cannot aggregate zero children");
    let n = children[0].1.beta.len();
    let beta: Vec<f64> = (0..n)
        .map(|j| comp_sum(children.iter().map(|(p, c)| p * c.beta[j])))
        .collect();
    let theta = comp_sum(children.iter().map(|(p, c)| p * c.theta));
    QCut { beta, theta, birth_iter }
}

/// Bounded-memory eviction: while iteration `iter` lies in
/// [start, start + window), remove the single oldest cut (smallest
/// birth_iter, first on ties). Called right after the iteration's append,
/// this freezes the bundle at the size it had when the window opened.
pub fn cut_select_oldest(bundle: &mut QBundle, iter: usize, start: usize, window: usize) {
    if window == 0 || iter < start || iter >= start + window {
        return;
    }
    let oldest = bundle
        .cuts
        .iter()
        .enumerate()
        .min_by_key(|(_, c)| c.birth_iter)
        .map(|(i, _)| i);
    if let Some(i) = oldest {
        bundle.cuts.remove(i);
    }
}

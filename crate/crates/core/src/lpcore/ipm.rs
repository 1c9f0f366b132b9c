//! Predictor corrector interior point engine for small dense linear programs.
//!
//! Problems come in inequality plus equality form: minimize c'z subject to
//! G z <= h and F z = d. Rows are stored sparsely because stage subproblems
//! touch few variables per row, but factorizations are dense: the normal
//! matrix G' W G stays small (state dimension plus two epigraph variables
//! per node) while the row count grows with the cut bundles.
//!
//! Design points:
//! * The caller guarantees G has full column rank (epigraph rows and state
//!   boxes provide it), so G' W G is positive definite and dense Cholesky
//!   applies. Equality rows are folded in by a Schur complement.
//! * Failed factorizations retry with escalating diagonal regularization.
//! * A step halving guard keeps the recorded complementarity sequence mu
//!   non increasing; after thirty halvings the step is taken anyway.
//! * Primal residuals are always driven tight, per row and in the scaled
//!   norm; only the duality gap test is relaxed by `eps_gap`. An inexact
//!   solve therefore returns early with a feasible point and a certified
//!   dual bound, never with a sloppy iterate.
//! * The gap test can consult a caller hook that turns the current duals
//!   into a certified (repaired) dual bound; without a hook the raw dual
//!   objective -h'y - d'lam is used.
//! * Two engines run in cascade. The default is Mehrotra predictor
//!   corrector with separate primal and dual steps: fastest when it works,
//!   but its corrector has no progress guarantee and rare iterates wedge
//!   (the affine step collapses, sigma tends to 1, and pure centering
//!   cannot reduce mu). Any non optimal outcome is retried with a long
//!   step path follower: fixed centering weight, one common step length,
//!   a product balanced start, and a weak centrality floor on every
//!   accepted step. Along its directions mu strictly decreases at rate
//!   (1 - sigma), so the trap above cannot form; it trades roughly twice
//!   the iterations for that guarantee. Work from both passes is reported
//!   in `iters`, and `mu_history` covers the pass that produced the
//!   returned iterate.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

/// One sparse row: parallel index and value lists.
#[derive(Debug, Clone, Default)]
pub struct SparseRow {
    pub idx: Vec<usize>,
    pub val: Vec<f64>,
}

impl SparseRow {
    pub fn new() -> Self {
        SparseRow { idx: Vec::new(), val: Vec::new() }
    }

    pub fn push(&mut self, i: usize, v: f64) {
        if v != 0.0 {
            self.idx.push(i);
            self.val.push(v);
        }
    }

    /// Builds a row from a dense slice, dropping exact zeros.
    pub fn from_dense(v: &[f64]) -> Self {
        let mut r = SparseRow::new();
        for (i, x) in v.iter().enumerate() {
            r.push(i, *x);
        }
        r
    }

    pub fn dot(&self, z: &[f64]) -> f64 {
        self.idx
            .iter()
            .zip(&self.val)
            .map(|(i, v)| v * z[*i])
            .sum()
    }

    /// out += coef * row, scattered.
    pub fn axpy_into(&self, coef: f64, out: &mut [f64]) {
        for (i, v) in self.idx.iter().zip(&self.val) {
            out[*i] += coef * v;
        }
    }
}

/// LP data in inequality plus equality form.
#[derive(Debug, Clone)]
pub struct SparseLp {
    pub nvars: usize,
    pub c: Vec<f64>,
    /// Inequality rows g_i' z <= h_i.
    pub g: Vec<SparseRow>,
    pub h: Vec<f64>,
    /// Equality rows f_j' z = d_j.
    pub f_eq: Vec<SparseRow>,
    pub d: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct IpmOptions {
    /// Relative duality gap below which the solve stops.
    pub eps_gap: f64,
    /// Hard iteration cap; hitting it is a status, not an error.
    pub max_iters: usize,
    /// Optional primal start; zeros otherwise. Slacks and duals are
    /// initialized internally.
    pub z0: Option<Vec<f64>>,
}

impl Default for IpmOptions {
    fn default() -> Self {
        IpmOptions { eps_gap: 1e-9, max_iters: 200, z0: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IpmStatus {
    Optimal,
    IterationLimit,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct IpmResult {
    pub z: Vec<f64>,
    /// Inequality multipliers, nonnegative.
    pub y: Vec<f64>,
    /// Equality multipliers for the stationarity form c + G'y + F'lam = 0.
    pub lam: Vec<f64>,
    pub s: Vec<f64>,
    pub status: IpmStatus,
    /// Factorization steps performed.
    pub iters: usize,
    /// Complementarity mu = s'y / m after each step, non increasing.
    pub mu_history: Vec<f64>,
    pub primal_value: f64,
    /// Certified dual bound if a hook was supplied, raw dual objective
    /// otherwise.
    pub dual_value: f64,
    pub rel_gap: f64,
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum IpmError {
    #[error("linear program has no inequality rows")]
    NoInequalities,
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// Relative duality gap (primal - dual) / max(1, |primal|).
pub fn duality_gap(primal: f64, dual: f64) -> f64 {
    (primal - dual) / primal.abs().max(1.0)
}

/// Cap on the row weights y/s so collapsed slacks cannot overflow the
/// normal matrix.
const W_CAP: f64 = 1e28;

/// Positivity floor for slacks and multipliers; keeps divisions finite
/// when a step lands on the boundary in floating point.
const POS_FLOOR: f64 = 1e-300;

/// Complementarity below this cannot correspond to any requested
/// tolerance; the solve stops rather than grind into underflow.
const MU_FLOOR: f64 = 1e-40;

struct Factored {
    chol: Cholesky<f64, Dyn>,
    /// M^{-1} F' (nvars x q) and the factored Schur complement F M^{-1} F',
    /// present only when equality rows exist.
    minv_ft: Option<DMatrix<f64>>,
    schur: Option<Cholesky<f64, Dyn>>,
}

fn chol_regularized(mut m: DMatrix<f64>) -> Result<Cholesky<f64, Dyn>, IpmError> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(IpmError::Numerical("non finite entries in normal matrix".into()));
    }
    let n = m.nrows();
    let scale = (0..n).map(|i| m[(i, i)].abs()).fold(1e-300, f64::max);
    let mut reg = 0.0_f64;
    loop {
        let attempt = if reg == 0.0 {
            m.clone()
        } else {
            let mut a = m.clone();
            for i in 0..n {
                a[(i, i)] += reg * scale;
            }
            a
        };
        if let Some(ch) = Cholesky::new(attempt) {
            return Ok(ch);
        }
        reg = if reg == 0.0 { 1e-14 } else { reg * 100.0 };
        if reg > 1e-2 {
            // Final resort: a heavy ridge always factors unless the data is
            // broken, in which case the caller sees the error.
            for i in 0..n {
                m[(i, i)] += scale;
            }
            return Cholesky::new(m)
                .ok_or_else(|| IpmError::Numerical("normal matrix not factorizable".into()));
        }
    }
}

fn factor(lp: &SparseLp, w: &[f64]) -> Result<Factored, IpmError> {
    let n = lp.nvars;
    let q = lp.d.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (row, wi) in lp.g.iter().zip(w) {
        let k = row.idx.len();
        for a in 0..k {
            let ia = row.idx[a];
            let va = wi * row.val[a];
            for b in 0..k {
                m[(ia, row.idx[b])] += va * row.val[b];
            }
        }
    }
    let chol = chol_regularized(m)?;
    if q == 0 {
        return Ok(Factored { chol, minv_ft: None, schur: None });
    }
    let mut ft = DMatrix::<f64>::zeros(n, q);
    for (j, row) in lp.f_eq.iter().enumerate() {
        for (i, v) in row.idx.iter().zip(&row.val) {
            ft[(*i, j)] = *v;
        }
    }
    let minv_ft = chol.solve(&ft);
    let mut schur = DMatrix::<f64>::zeros(q, q);
    for (j, row) in lp.f_eq.iter().enumerate() {
        for k in 0..q {
            let mut acc = 0.0;
            for (i, v) in row.idx.iter().zip(&row.val) {
                acc += v * minv_ft[(*i, k)];
            }
            schur[(j, k)] = acc;
        }
    }
    let schur = chol_regularized(schur)?;
    Ok(Factored { chol, minv_ft: Some(minv_ft), schur: Some(schur) })
}

struct Direction {
    dz: Vec<f64>,
    dy: Vec<f64>,
    ds: Vec<f64>,
    dlam: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
fn newton_direction(
    lp: &SparseLp,
    fac: &Factored,
    w: &[f64],
    s: &[f64],
    rp: &[f64],
    re: &[f64],
    rd: &[f64],
    rc: &[f64],
) -> Direction {
    let n = lp.nvars;
    let q = lp.d.len();
    // rhs = -rd - G'(w .* rp - rc ./ s)
    let mut rhs = vec![0.0; n];
    for (i, row) in lp.g.iter().enumerate() {
        let coef = -(w[i] * rp[i] - rc[i] / s[i]);
        row.axpy_into(coef, &mut rhs);
    }
    for (r, v) in rhs.iter_mut().zip(rd) {
        *r -= v;
    }
    let rhs_v = DVector::from_column_slice(&rhs);
    let (dz_v, dlam) = if q == 0 {
        (fac.chol.solve(&rhs_v), Vec::new())
    } else {
        let u = fac.chol.solve(&rhs_v);
        let mut rl = DVector::<f64>::zeros(q);
        for (j, row) in lp.f_eq.iter().enumerate() {
            rl[j] = row.dot(u.as_slice()) + re[j];
        }
        let dlam_v = fac.schur.as_ref().unwrap().solve(&rl);
        let dz = &u - fac.minv_ft.as_ref().unwrap() * &dlam_v;
        (dz, dlam_v.as_slice().to_vec())
    };
    let dz = dz_v.as_slice().to_vec();
    let m = lp.h.len();
    let mut dy = vec![0.0; m];
    let mut ds = vec![0.0; m];
    for i in 0..m {
        let gdz = lp.g[i].dot(&dz);
        // Primal row: G dz + ds = -rp, exact by construction. Recovering ds
        // from the complementarity row instead divides by y, which amplifies
        // cancellation error without bound on rows whose multiplier has
        // collapsed; the primal form keeps rp clean and pushes the
        // factorization error into rd, which is recomputed every iteration.
        ds[i] = -gdz - rp[i];
        // Complementarity row: y ds + s dy = -rc, with y = w s.
        dy[i] = (-rc[i] - (w[i] * s[i]) * ds[i]) / s[i].max(1e-300);
    }
    Direction { dz, dy, ds, dlam }
}

/// Largest step in [0, 1] keeping v + a*dv strictly positive up to `frac`.
fn max_step(v: &[f64], dv: &[f64]) -> f64 {
    let mut a = f64::INFINITY;
    for (x, d) in v.iter().zip(dv) {
        if *d < 0.0 {
            a = a.min(-x / d);
        }
    }
    a
}

/// Solves the LP. `certify` maps the current iterate (z, y, lam) to a
/// certified dual bound; when absent the raw dual objective is used for
/// the gap test.
///
/// Runs the predictor corrector engine first and, when that ends anything
/// other than `Optimal`, retries from scratch with the conservative long
/// step engine, which is slower per tolerance digit but cannot wedge on
/// centering. The returned `iters` counts the work of both passes.
pub fn solve(
    lp: &SparseLp,
    opts: &IpmOptions,
    mut certify: Option<&mut dyn FnMut(&[f64], &[f64], &[f64]) -> f64>,
) -> Result<IpmResult, IpmError> {
    if lp.h.is_empty() {
        return Err(IpmError::NoInequalities);
    }
    assert_eq!(lp.c.len(), lp.nvars);
    assert_eq!(lp.g.len(), lp.h.len());
    assert_eq!(lp.f_eq.len(), lp.d.len());

    let fast = mehrotra(lp, opts, &mut certify)?;
    if fast.status == IpmStatus::Optimal {
        return Ok(fast);
    }
    let mut slow = conservative(lp, opts, &mut certify)?;
    slow.iters += fast.iters;
    Ok(slow)
}

fn mehrotra(
    lp: &SparseLp,
    opts: &IpmOptions,
    certify: &mut Option<&mut dyn FnMut(&[f64], &[f64], &[f64]) -> f64>,
) -> Result<IpmResult, IpmError> {
    let n = lp.nvars;
    let m = lp.h.len();
    let q = lp.d.len();

    let mut z = opts.z0.clone().unwrap_or_else(|| vec![0.0; n]);
    assert_eq!(z.len(), n);
    // Slacks start at the true slack, floored at the worst violation of the
    // starting point (at least 1). A start that violates rows by v needs
    // slacks of order v: with s much smaller, the first Newton directions
    // are boundary-capped to steps near zero and the iteration freezes
    // before it can close the primal residual. When the start satisfies
    // every row the floor is 1 and nothing changes.
    let viol = lp
        .g
        .iter()
        .zip(&lp.h)
        .map(|(row, hi)| row.dot(&z) - hi)
        .fold(0.0_f64, f64::max);
    let slack_floor = viol.max(1.0);
    let mut s: Vec<f64> = lp
        .g
        .iter()
        .zip(&lp.h)
        .map(|(row, hi)| (hi - row.dot(&z)).max(slack_floor))
        .collect();
    let mut y = vec![1.0; m];
    let mut lam = vec![0.0; q];

    let hscale = 1.0 + lp.h.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let dscale = 1.0 + lp.d.iter().fold(0.0_f64, |a, v| a.max(v.abs()));

    let mut mu_history = Vec::new();
    let mut status = IpmStatus::IterationLimit;
    let mut best_feas = f64::INFINITY;
    let mut stall = 0usize;
    let mut primal_value = 0.0;
    let mut dual_value = f64::NEG_INFINITY;
    let mut rel_gap = f64::INFINITY;
    let tau = 0.99;

    for iter in 0..=opts.max_iters {
        let gz: Vec<f64> = lp.g.iter().map(|r| r.dot(&z)).collect();
        let rp: Vec<f64> = (0..m).map(|i| gz[i] + s[i] - lp.h[i]).collect();
        let re: Vec<f64> = lp.f_eq.iter().zip(&lp.d).map(|(r, d)| r.dot(&z) - d).collect();
        let mut rd = lp.c.clone();
        for (i, row) in lp.g.iter().enumerate() {
            row.axpy_into(y[i], &mut rd);
        }
        for (j, row) in lp.f_eq.iter().enumerate() {
            row.axpy_into(lam[j], &mut rd);
        }

        let rp_inf = rp.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let re_inf = re.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let rows_tight = rp
            .iter()
            .zip(&lp.h)
            .all(|(r, hi)| r.abs() <= 1e-9 * (1.0 + hi.abs()))
            && re
                .iter()
                .zip(&lp.d)
                .all(|(r, di)| r.abs() <= 1e-9 * (1.0 + di.abs()));
        let primal_ok =
            rp_inf <= 1e-10 * hscale && re_inf <= 1e-10 * dscale && rows_tight;

        primal_value = lp.c.iter().zip(&z).map(|(c, zi)| c * zi).sum();
        let raw_dual = -lp.h.iter().zip(&y).map(|(h, yi)| h * yi).sum::<f64>()
            - lp.d.iter().zip(&lam).map(|(d, li)| d * li).sum::<f64>();
        dual_value = raw_dual;
        rel_gap = duality_gap(primal_value, raw_dual);

        if primal_ok {
            // Only pay for certification when the raw gap is already close.
            let worth_certifying = rel_gap <= 4.0 * opts.eps_gap + 1e-6;
            if let (true, Some(cb)) = (worth_certifying, certify.as_mut()) {
                dual_value = cb(&z, &y, &lam);
                rel_gap = duality_gap(primal_value, dual_value);
            }
            if rel_gap <= opts.eps_gap {
                status = IpmStatus::Optimal;
                break;
            }
        }

        // Stall guard: primal feasibility stopped improving. Far from tight
        // that means inconsistent rows (a construction bug upstream, not a
        // property of the true problem); near tight it means the iterate
        // wedged short of the per-row tolerance, usually on nearly duplicate
        // cut rows, and further steps only grind complementarity toward
        // underflow. Stop either way. While the primal side already passes,
        // the gap test above is the live criterion, so the counter resets.
        let feas = rp_inf / hscale + re_inf / dscale;
        if primal_ok || feas < 0.999 * best_feas {
            best_feas = best_feas.min(feas);
            stall = 0;
        } else {
            stall += 1;
        }
        if stall >= 40 {
            if feas > 1e-6 {
                status = IpmStatus::Infeasible;
            }
            break;
        }

        if iter == opts.max_iters {
            if feas > 1e-6 {
                status = IpmStatus::Infeasible;
            }
            break;
        }

        // Scaling weights. Rows whose slack has collapsed act as equalities;
        // capping the weight keeps the normal matrix finite without changing
        // which rows dominate it.
        let w: Vec<f64> = (0..m)
            .map(|i| {
                let wi = y[i] / s[i];
                if wi.is_finite() {
                    wi.min(W_CAP)
                } else {
                    W_CAP
                }
            })
            .collect();
        let fac = factor(lp, &w)?;

        let mu = s.iter().zip(&y).map(|(si, yi)| si * yi).sum::<f64>() / m as f64;
        // Complementarity this small is far beyond any requested tolerance;
        // continuing only erodes the iterate, so stop with what we have.
        if mu < MU_FLOOR {
            if feas > 1e-6 {
                status = IpmStatus::Infeasible;
            }
            break;
        }
        let rc_aff: Vec<f64> = (0..m).map(|i| s[i] * y[i]).collect();
        let aff = newton_direction(lp, &fac, &w, &s, &rp, &re, &rd, &rc_aff);
        let ap_aff = max_step(&s, &aff.ds).min(1.0);
        let ad_aff = max_step(&y, &aff.dy).min(1.0);
        let mu_aff = (0..m)
            .map(|i| (s[i] + ap_aff * aff.ds[i]) * (y[i] + ad_aff * aff.dy[i]))
            .sum::<f64>()
            / m as f64;
        let sigma = if mu > 1e-300 { (mu_aff / mu).clamp(0.0, 1.0).powi(3) } else { 0.0 };
        // The second-order term predicts the product error of the step that
        // will actually be taken, so weight it by the affine step lengths.
        // At near-unit steps this is Mehrotra's corrector; at tiny steps the
        // unweighted term is wildly out of scale and would poison the
        // direction, and the weight fades it out in favor of pure centering.
        let corr_w = ap_aff * ad_aff;
        let rc: Vec<f64> = (0..m)
            .map(|i| s[i] * y[i] - sigma * mu + corr_w * aff.ds[i] * aff.dy[i])
            .collect();
        let dir = newton_direction(lp, &fac, &w, &s, &rp, &re, &rd, &rc);

        let mu_of = |dir: &Direction, ap: f64, ad: f64| {
            (0..m)
                .map(|i| (s[i] + ap * dir.ds[i]) * (y[i] + ad * dir.dy[i]))
                .sum::<f64>()
                / m as f64
        };
        let mut dir = dir;
        let mut ap = (tau * max_step(&s, &dir.ds)).min(1.0);
        let mut ad = (tau * max_step(&y, &dir.dy)).min(1.0);
        // Keep mu non increasing; give up shrinking after 30 halvings.
        let mut monotone = false;
        for _ in 0..30 {
            if mu_of(&dir, ap, ad) <= mu * (1.0 + 1e-12) {
                monotone = true;
                break;
            }
            ap *= 0.5;
            ad *= 0.5;
        }
        if !monotone {
            // The corrector cannot make complementarity progress at any
            // step length (typical with a strongly infeasible start). The
            // affine direction with a common step always can: there
            // d(s'y)/da = -s'y at a = 0. Halve until it shows.
            dir = aff;
            let mut a = (tau * max_step(&s, &dir.ds).min(max_step(&y, &dir.dy))).min(1.0);
            for _ in 0..60 {
                if mu_of(&dir, a, a) <= mu * (1.0 + 1e-12) {
                    break;
                }
                a *= 0.5;
            }
            ap = a;
            ad = a;
        }
        for (zi, d) in z.iter_mut().zip(&dir.dz) {
            *zi += ap * d;
        }
        for (si, d) in s.iter_mut().zip(&dir.ds) {
            *si = (*si + ap * d).max(POS_FLOOR);
        }
        for (yi, d) in y.iter_mut().zip(&dir.dy) {
            *yi = (*yi + ad * d).max(POS_FLOOR);
        }
        for (li, d) in lam.iter_mut().zip(&dir.dlam) {
            *li += ad * d;
        }
        mu_history.push(s.iter().zip(&y).map(|(si, yi)| si * yi).sum::<f64>() / m as f64);
    }

    let iters = mu_history.len();
    Ok(IpmResult {
        z,
        y,
        lam,
        s,
        status,
        iters,
        mu_history,
        primal_value,
        dual_value,
        rel_gap,
    })
}

/// Long step path following engine: fixed centering weight, one common
/// step length for the primal and dual blocks, and a weak centrality
/// floor (min product at least 1e-4 of the mean) enforced by backtracking
/// on every step. The dual start is chosen so every complementarity
/// product equals the same constant, which makes the first iterate
/// perfectly centered no matter how the slack scales are spread. Along
/// the centering direction d(s'y)/da = -(1 - sigma) s'y < 0, so mu makes
/// strict progress whenever any step is accepted; the stall guard is on
/// joint mu and feasibility stagnation rather than feasibility alone.
fn conservative(
    lp: &SparseLp,
    opts: &IpmOptions,
    certify: &mut Option<&mut dyn FnMut(&[f64], &[f64], &[f64]) -> f64>,
) -> Result<IpmResult, IpmError> {
    let n = lp.nvars;
    let m = lp.h.len();
    let q = lp.d.len();
    let sigma = 0.3;
    let gamma = 1e-4;
    let tau = 0.95;

    let mut z = opts.z0.clone().unwrap_or_else(|| vec![0.0; n]);
    assert_eq!(z.len(), n);
    let viol = lp
        .g
        .iter()
        .zip(&lp.h)
        .map(|(row, hi)| row.dot(&z) - hi)
        .fold(0.0_f64, f64::max);
    let slack_floor = viol.max(1.0);
    let mut s: Vec<f64> = lp
        .g
        .iter()
        .zip(&lp.h)
        .map(|(row, hi)| (hi - row.dot(&z)).max(slack_floor))
        .collect();
    let product = (s.iter().sum::<f64>() / m as f64).clamp(1.0, 1e6);
    let mut y: Vec<f64> = s.iter().map(|si| (product / si).clamp(1e-6, 1e6)).collect();
    let mut lam = vec![0.0; q];

    let hscale = 1.0 + lp.h.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let dscale = 1.0 + lp.d.iter().fold(0.0_f64, |a, v| a.max(v.abs()));

    let mut mu_history = Vec::new();
    let mut status = IpmStatus::IterationLimit;
    let mut best_feas = f64::INFINITY;
    let mut best_mu = f64::INFINITY;
    let mut stall = 0usize;
    let mut primal_value = 0.0;
    let mut dual_value = f64::NEG_INFINITY;
    let mut rel_gap = f64::INFINITY;

    for iter in 0..=opts.max_iters {
        let rp: Vec<f64> = (0..m).map(|i| lp.g[i].dot(&z) + s[i] - lp.h[i]).collect();
        let re: Vec<f64> = lp.f_eq.iter().zip(&lp.d).map(|(r, d)| r.dot(&z) - d).collect();
        let mut rd = lp.c.clone();
        for (i, row) in lp.g.iter().enumerate() {
            row.axpy_into(y[i], &mut rd);
        }
        for (j, row) in lp.f_eq.iter().enumerate() {
            row.axpy_into(lam[j], &mut rd);
        }

        let rp_inf = rp.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let re_inf = re.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let rows_tight = rp
            .iter()
            .zip(&lp.h)
            .all(|(r, hi)| r.abs() <= 1e-9 * (1.0 + hi.abs()))
            && re
                .iter()
                .zip(&lp.d)
                .all(|(r, di)| r.abs() <= 1e-9 * (1.0 + di.abs()));
        let primal_ok = rp_inf <= 1e-10 * hscale && re_inf <= 1e-10 * dscale && rows_tight;

        primal_value = lp.c.iter().zip(&z).map(|(c, zi)| c * zi).sum();
        let raw_dual = -lp.h.iter().zip(&y).map(|(h, yi)| h * yi).sum::<f64>()
            - lp.d.iter().zip(&lam).map(|(d, li)| d * li).sum::<f64>();
        dual_value = raw_dual;
        rel_gap = duality_gap(primal_value, raw_dual);

        if primal_ok {
            let worth_certifying = rel_gap <= 4.0 * opts.eps_gap + 1e-6;
            if let (true, Some(cb)) = (worth_certifying, certify.as_mut()) {
                dual_value = cb(&z, &y, &lam);
                rel_gap = duality_gap(primal_value, dual_value);
            }
            if rel_gap <= opts.eps_gap {
                status = IpmStatus::Optimal;
                break;
            }
        }

        let mu_now = s.iter().zip(&y).map(|(si, yi)| si * yi).sum::<f64>() / m as f64;
        let feas = rp_inf / hscale + re_inf / dscale;
        // Stagnation means neither residuals nor complementarity moved by
        // 0.1 percent against their best values. Healthy steps shrink mu
        // by percents per iteration, so forty stagnant iterations in a row
        // only happen when the iteration is genuinely stuck.
        if feas < 0.999 * best_feas || mu_now < 0.999 * best_mu {
            best_feas = best_feas.min(feas);
            best_mu = best_mu.min(mu_now);
            stall = 0;
        } else {
            stall += 1;
        }
        if stall >= 40 || iter == opts.max_iters {
            if feas > 1e-6 {
                status = IpmStatus::Infeasible;
            }
            break;
        }

        let w: Vec<f64> = (0..m)
            .map(|i| {
                let wi = y[i] / s[i];
                if wi.is_finite() {
                    wi.min(W_CAP)
                } else {
                    W_CAP
                }
            })
            .collect();
        let fac = factor(lp, &w)?;
        if mu_now < MU_FLOOR {
            if feas > 1e-6 {
                status = IpmStatus::Infeasible;
            }
            break;
        }
        let rc: Vec<f64> = (0..m).map(|i| s[i] * y[i] - sigma * mu_now).collect();
        let dir = newton_direction(lp, &fac, &w, &s, &rp, &re, &rd, &rc);

        let a0 = (tau * max_step(&s, &dir.ds).min(max_step(&y, &dir.dy))).min(1.0);
        let mut a = a0;
        for k in 0..=45 {
            let mut pmin = f64::INFINITY;
            let mut psum = 0.0;
            for i in 0..m {
                let p = (s[i] + a * dir.ds[i]) * (y[i] + a * dir.dy[i]);
                pmin = pmin.min(p);
                psum += p;
            }
            let mu_a = psum / m as f64;
            if pmin >= gamma * mu_a && mu_a <= mu_now * (1.0 - 0.005 * a) {
                break;
            }
            if k == 45 {
                // No acceptable step; take the residue and let the stall
                // guard decide whether the iteration is stuck.
                break;
            }
            a *= 0.5;
        }

        for (zi, d) in z.iter_mut().zip(&dir.dz) {
            *zi += a * d;
        }
        for (si, d) in s.iter_mut().zip(&dir.ds) {
            *si = (*si + a * d).max(POS_FLOOR);
        }
        for (yi, d) in y.iter_mut().zip(&dir.dy) {
            *yi = (*yi + a * d).max(POS_FLOOR);
        }
        for (li, d) in lam.iter_mut().zip(&dir.dlam) {
            *li += a * d;
        }
        mu_history.push(s.iter().zip(&y).map(|(si, yi)| si * yi).sum::<f64>() / m as f64);
    }

    let iters = mu_history.len();
    Ok(IpmResult {
        z,
        y,
        lam,
        s,
        status,
        iters,
        mu_history,
        primal_value,
        dual_value,
        rel_gap,
    })
}

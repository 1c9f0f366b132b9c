//! Stage subproblem LPs: assembly from cut bundles, the dual split, and
//! dual repair.
//!
//! A stage subproblem minimizes f + theta over z = (x, f, theta) subject to
//! * objective cuts     f >= a_i'x + b_i'x_prev + c_i          (k1 >= 1 rows)
//! * coupling equalities A x + B x_prev = rhs                  (q rows)
//! * constraint cuts    d_i'x + e_i'x_prev + h_i <= 0          (rows for all
//!   constraint bundles, flattened)
//! * cost to go cuts    theta >= theta_i + beta_i'x            (k3 >= 1 rows)
//! * the state box      lo <= x <= hi.
//!
//! The dual split follows the row order: alpha on objective cuts, mu on
//! constraint cuts, delta on cost to go cuts, nu on the box written as
//! [I; -I] x >= [lo; -hi] (so nu = (nu_lo, nu_hi)), and lam on the coupling
//! rows with the sign convention that stationarity in x reads
//!     A_cuts' alpha + D' mu + beta' delta - (nu_lo - nu_hi) - A' lam = 0.
//!
//! `dual_repair` turns any approximate dual iterate into an exactly feasible
//! one: clip the inequality multipliers at zero, rescale alpha and delta to
//! unit mass, then absorb the remaining x stationarity residual into the box
//! multipliers. Feasible duals give valid lower bounds, which is all cut
//! generation needs, so repaired duals certify cuts regardless of how
//! loosely the LP was solved.

pub mod enumerate;
pub mod ipm;

use thiserror::Error;

use crate::mat::RowMat;
use crate::numeric::{comp_dot, comp_sum};

pub use enumerate::brute_force_optimum;
pub use ipm::{duality_gap, IpmOptions, IpmStatus, SparseLp, SparseRow};

#[derive(Debug, Error)]
pub enum LpError {
    #[error("malformed stage LP: {0}")]
    Shape(String),
    #[error("dual repair failed: {0}")]
    RepairFailed(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// One stage subproblem in cut form. All blocks are row major; `x_prev` is
/// the parent state the subproblem is anchored at.
#[derive(Debug, Clone)]
pub struct StageLp {
    pub n: usize,
    /// Objective cuts: f >= obj_a_i'x + obj_b_i'x_prev + obj_c_i.
    pub obj_a: RowMat,
    pub obj_b: RowMat,
    pub obj_c: Vec<f64>,
    /// Constraint cuts: con_d_i'x + con_e_i'x_prev + con_h_i <= 0.
    pub con_d: RowMat,
    pub con_e: RowMat,
    pub con_h: Vec<f64>,
    /// Cost to go cuts: theta >= ctg_theta_i + ctg_beta_i'x.
    pub ctg_beta: RowMat,
    pub ctg_theta: Vec<f64>,
    /// Coupling equalities: eq_a x + eq_b x_prev = eq_rhs.
    pub eq_a: RowMat,
    pub eq_b: RowMat,
    pub eq_rhs: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub x_prev: Vec<f64>,
}

/// Multipliers split by row block. `nu` holds the 2n box multipliers, lower
/// bounds first. `lam` uses the stationarity sign documented on the module.
#[derive(Debug, Clone, PartialEq)]
pub struct StageDuals {
    pub alpha: Vec<f64>,
    pub mu: Vec<f64>,
    pub delta: Vec<f64>,
    pub nu: Vec<f64>,
    pub lam: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    IterationLimit,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    /// Optimal state, clipped into the box.
    pub x: Vec<f64>,
    pub f: f64,
    pub theta: f64,
    pub duals: StageDuals,
    /// f + theta at the returned iterate.
    pub primal_value: f64,
    /// Objective of the repaired dual, a valid lower bound.
    pub dual_value: f64,
    /// (primal_value - dual_value) / max(1, |primal_value|).
    pub rel_gap: f64,
    pub status: SolveStatus,
    /// Interior point iterations spent on this solve.
    pub iters: usize,
    pub mu_history: Vec<f64>,
}

impl StageLp {
    pub fn k1(&self) -> usize {
        self.obj_c.len()
    }

    pub fn k2(&self) -> usize {
        self.con_h.len()
    }

    pub fn k3(&self) -> usize {
        self.ctg_theta.len()
    }

    pub fn q(&self) -> usize {
        self.eq_rhs.len()
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.n;
        if self.k1() == 0 {
            return Err(LpError::Shape("objective bundle is empty".into()));
        }
        if self.k3() == 0 {
            return Err(LpError::Shape("cost to go bundle is empty".into()));
        }
        let blocks = [
            ("obj_a", self.obj_a.cols(), self.obj_a.rows(), self.k1()),
            ("obj_b", self.obj_b.cols(), self.obj_b.rows(), self.k1()),
            ("con_d", self.con_d.cols(), self.con_d.rows(), self.k2()),
            ("con_e", self.con_e.cols(), self.con_e.rows(), self.k2()),
            ("ctg_beta", self.ctg_beta.cols(), self.ctg_beta.rows(), self.k3()),
            ("eq_a", self.eq_a.cols(), self.eq_a.rows(), self.q()),
            ("eq_b", self.eq_b.cols(), self.eq_b.rows(), self.q()),
        ];
        for (name, cols, rows, want_rows) in blocks {
            if cols != n || rows != want_rows {
                return Err(LpError::Shape(format!(
                    "{name} is {rows}x{cols}, expected {want_rows}x{n}"
                )));
            }
        }
        if self.lo.len() != n || self.hi.len() != n || self.x_prev.len() != n {
            return Err(LpError::Shape("box or anchor dimension mismatch".into()));
        }
        for (l, h) in self.lo.iter().zip(&self.hi) {
            if !(l.is_finite() && h.is_finite() && l <= h) {
                return Err(LpError::Shape(format!("bad box interval [{l}, {h}]")));
            }
        }
        Ok(())
    }

    /// Value of the objective cut bundle at x (the model of f).
    pub fn f_model(&self, x: &[f64]) -> f64 {
        (0..self.k1())
            .map(|i| {
                comp_sum([
                    comp_dot(self.obj_a.row(i), x),
                    comp_dot(self.obj_b.row(i), &self.x_prev),
                    self.obj_c[i],
                ])
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Value of the cost to go cut bundle at x (the model of theta).
    pub fn theta_model(&self, x: &[f64]) -> f64 {
        (0..self.k3())
            .map(|i| comp_sum([comp_dot(self.ctg_beta.row(i), x), self.ctg_theta[i]]))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Lowers the stage LP into the raw inequality form the engine consumes.
    /// Row order: objective cuts, constraint cuts, cost to go cuts, box
    /// lower bounds, box upper bounds.
    pub fn to_sparse(&self) -> SparseLp {
        let n = self.n;
        let nv = n + 2;
        let mut c = vec![0.0; nv];
        c[n] = 1.0;
        c[n + 1] = 1.0;
        let mut g = Vec::with_capacity(self.k1() + self.k2() + self.k3() + 2 * n);
        let mut h = Vec::with_capacity(g.capacity());
        for i in 0..self.k1() {
            let mut row = SparseRow::from_dense(self.obj_a.row(i));
            row.push(n, -1.0);
            g.push(row);
            h.push(-comp_sum([comp_dot(self.obj_b.row(i), &self.x_prev), self.obj_c[i]]));
        }
        for i in 0..self.k2() {
            g.push(SparseRow::from_dense(self.con_d.row(i)));
            h.push(-comp_sum([comp_dot(self.con_e.row(i), &self.x_prev), self.con_h[i]]));
        }
        for i in 0..self.k3() {
            let mut row = SparseRow::from_dense(self.ctg_beta.row(i));
            row.push(n + 1, -1.0);
            g.push(row);
            h.push(-self.ctg_theta[i]);
        }
        for j in 0..n {
            let mut row = SparseRow::new();
            row.push(j, -1.0);
            g.push(row);
            h.push(-self.lo[j]);
        }
        for j in 0..n {
            let mut row = SparseRow::new();
            row.push(j, 1.0);
            g.push(row);
            h.push(self.hi[j]);
        }
        let mut f_eq = Vec::with_capacity(self.q());
        let mut d = Vec::with_capacity(self.q());
        for i in 0..self.q() {
            f_eq.push(SparseRow::from_dense(self.eq_a.row(i)));
            d.push(comp_sum([
                self.eq_rhs[i],
                -comp_dot(self.eq_b.row(i), &self.x_prev),
            ]));
        }
        SparseLp { nvars: nv, c, g, h, f_eq, d }
    }

    fn split_duals(&self, y: &[f64], lam_engine: &[f64]) -> StageDuals {
        let k1 = self.k1();
        let k2 = self.k2();
        let k3 = self.k3();
        let n = self.n;
        StageDuals {
            alpha: y[..k1].to_vec(),
            mu: y[k1..k1 + k2].to_vec(),
            delta: y[k1 + k2..k1 + k2 + k3].to_vec(),
            nu: y[k1 + k2 + k3..k1 + k2 + k3 + 2 * n].to_vec(),
            // Engine stationarity is c + G'y + F'lam_e = 0; our convention
            // carries the coupling term with a minus, so lam = -lam_e.
            lam: lam_engine.iter().map(|v| -v).collect(),
        }
    }

    /// Starting point used for the interior point solve: the box midpoint
    /// with epigraph values a safe margin above the bundle models.
    fn start_point(&self) -> Vec<f64> {
        let n = self.n;
        let mut z = vec![0.0; n + 2];
        for j in 0..n {
            z[j] = 0.5 * (self.lo[j] + self.hi[j]);
        }
        let fm = self.f_model(&z[..n]);
        let tm = self.theta_model(&z[..n]);
        z[n] = fm + 0.1 * fm.abs().max(1.0);
        z[n + 1] = tm + 0.1 * tm.abs().max(1.0);
        z
    }

    /// Solves the stage LP to relative duality gap `eps_gap` with the
    /// default iteration cap.
    pub fn solve(&self, eps_gap: f64) -> Result<LpSolution, LpError> {
        self.solve_with(eps_gap, 200)
    }

    pub fn solve_with(&self, eps_gap: f64, max_iters: usize) -> Result<LpSolution, LpError> {
        self.validate()?;
        let sparse = self.to_sparse();
        let opts = IpmOptions { eps_gap, max_iters, z0: Some(self.start_point()) };
        let mut certify = |_z: &[f64], y: &[f64], lam_e: &[f64]| -> f64 {
            let mut duals = self.split_duals(y, lam_e);
            match dual_repair(self, &mut duals) {
                Ok(v) => v,
                Err(_) => f64::NEG_INFINITY,
            }
        };
        let res = ipm::solve(&sparse, &opts, Some(&mut certify))
            .map_err(|e| LpError::Numerical(e.to_string()))?;

        let n = self.n;
        let mut x = res.z[..n].to_vec();
        for (v, (l, h)) in x.iter_mut().zip(self.lo.iter().zip(&self.hi)) {
            *v = v.clamp(*l, *h);
        }
        let f = res.z[n];
        let theta = res.z[n + 1];
        let mut duals = self.split_duals(&res.y, &res.lam);
        let dual_value = dual_repair(self, &mut duals)?;
        let primal_value = comp_sum([f, theta]);
        let status = match res.status {
            IpmStatus::Optimal => SolveStatus::Optimal,
            IpmStatus::IterationLimit => SolveStatus::IterationLimit,
            IpmStatus::Infeasible => SolveStatus::Infeasible,
        };
        Ok(LpSolution {
            x,
            f,
            theta,
            duals,
            primal_value,
            dual_value,
            rel_gap: duality_gap(primal_value, dual_value),
            status,
            iters: res.iters,
            mu_history: res.mu_history,
        })
    }
}

/// x block of the dual stationarity residual:
/// A_cuts'alpha + D'mu + beta'delta - nu_lo + nu_hi - A'lam.
pub fn stationarity_residual(lp: &StageLp, duals: &StageDuals) -> Vec<f64> {
    let n = lp.n;
    let mut terms: Vec<Vec<f64>> = vec![Vec::new(); n];
    for (i, a) in duals.alpha.iter().enumerate() {
        for (j, v) in lp.obj_a.row(i).iter().enumerate() {
            terms[j].push(a * v);
        }
    }
    for (i, m) in duals.mu.iter().enumerate() {
        for (j, v) in lp.con_d.row(i).iter().enumerate() {
            terms[j].push(m * v);
        }
    }
    for (i, d) in duals.delta.iter().enumerate() {
        for (j, v) in lp.ctg_beta.row(i).iter().enumerate() {
            terms[j].push(d * v);
        }
    }
    for (i, l) in duals.lam.iter().enumerate() {
        for (j, v) in lp.eq_a.row(i).iter().enumerate() {
            terms[j].push(-(l * v));
        }
    }
    (0..n)
        .map(|j| {
            terms[j].push(-duals.nu[j]);
            terms[j].push(duals.nu[n + j]);
            comp_sum(terms[j].iter().copied())
        })
        .collect()
}

/// Objective of a dual point: the lower bound it certifies on the stage LP.
pub fn dual_objective(lp: &StageLp, duals: &StageDuals) -> f64 {
    let n = lp.n;
    let mut terms = Vec::with_capacity(lp.k1() + lp.k2() + lp.k3() + lp.q() + 2 * n);
    for (i, a) in duals.alpha.iter().enumerate() {
        terms.push(a * comp_sum([comp_dot(lp.obj_b.row(i), &lp.x_prev), lp.obj_c[i]]));
    }
    for (i, m) in duals.mu.iter().enumerate() {
        terms.push(m * comp_sum([comp_dot(lp.con_e.row(i), &lp.x_prev), lp.con_h[i]]));
    }
    for (i, d) in duals.delta.iter().enumerate() {
        terms.push(d * lp.ctg_theta[i]);
    }
    for (i, l) in duals.lam.iter().enumerate() {
        terms.push(l * comp_sum([lp.eq_rhs[i], -comp_dot(lp.eq_b.row(i), &lp.x_prev)]));
    }
    for j in 0..n {
        terms.push(duals.nu[j] * lp.lo[j]);
        terms.push(-duals.nu[n + j] * lp.hi[j]);
    }
    comp_sum(terms)
}

/// Projects an approximate dual iterate onto exact dual feasibility and
/// returns the objective of the repaired point.
///
/// Steps, in order: clip the inequality multipliers at zero; rescale alpha
/// and delta to unit mass (failing if either mass is not positive); absorb
/// the x stationarity residual into the box multipliers, componentwise
/// (positive residual raises nu_lo, negative raises nu_hi). The coupling
/// multipliers are left untouched. After repair the stationarity equations
/// hold to machine precision and every sign constraint holds exactly, so
/// the returned objective is a valid lower bound on the LP value.
pub fn dual_repair(lp: &StageLp, duals: &mut StageDuals) -> Result<f64, LpError> {
    for v in duals
        .alpha
        .iter_mut()
        .chain(&mut duals.mu)
        .chain(&mut duals.delta)
        .chain(&mut duals.nu)
    {
        if !v.is_finite() {
            return Err(LpError::RepairFailed(format!("non finite multiplier {v}")));
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let sa = comp_sum(duals.alpha.iter().copied());
    if !(sa > 0.0) || !sa.is_finite() {
        return Err(LpError::RepairFailed(format!("objective multiplier mass {sa}")));
    }
    for v in &mut duals.alpha {
        *v /= sa;
    }
    let sd = comp_sum(duals.delta.iter().copied());
    if !(sd > 0.0) || !sd.is_finite() {
        return Err(LpError::RepairFailed(format!("cost to go multiplier mass {sd}")));
    }
    for v in &mut duals.delta {
        *v /= sd;
    }
    let r = stationarity_residual(lp, duals);
    let n = lp.n;
    for (j, rj) in r.into_iter().enumerate() {
        if rj > 0.0 {
            duals.nu[j] += rj;
        } else {
            duals.nu[n + j] -= rj;
        }
    }
    Ok(dual_objective(lp, duals))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// min x s.t. x >= 1, expressed as a stage LP: the objective bundle is
    /// f >= x, the cost to go bundle pins theta >= 0, and a constraint cut
    /// enforces 1 - x <= 0.
    fn min_x_geq_one() -> StageLp {
        StageLp {
            n: 1,
            obj_a: RowMat::from_rows(1, &[vec![1.0]]),
            obj_b: RowMat::from_rows(1, &[vec![0.0]]),
            obj_c: vec![0.0],
            con_d: RowMat::from_rows(1, &[vec![-1.0]]),
            con_e: RowMat::from_rows(1, &[vec![0.0]]),
            con_h: vec![1.0],
            ctg_beta: RowMat::from_rows(1, &[vec![0.0]]),
            ctg_theta: vec![0.0],
            eq_a: RowMat::new(1),
            eq_b: RowMat::new(1),
            eq_rhs: vec![],
            lo: vec![-10.0],
            hi: vec![10.0],
            x_prev: vec![0.0],
        }
    }

    #[test]
    fn scalar_stage_lp_attains_bound() {
        let lp = min_x_geq_one();
        let sol = lp.solve(1e-10).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.x[0] - 1.0).abs() < 1e-7, "x = {}", sol.x[0]);
        assert!((sol.primal_value - 1.0).abs() < 1e-7);
        assert!(sol.rel_gap <= 1e-10, "gap {}", sol.rel_gap);
        // The certified dual never exceeds the primal.
        assert!(sol.dual_value <= sol.primal_value + 1e-9);
    }

    #[test]
    fn repaired_duals_are_exactly_feasible() {
        let lp = min_x_geq_one();
        let sol = lp.solve(1e-10).unwrap();
        let d = &sol.duals;
        let r = stationarity_residual(&lp, d);
        assert!(r.iter().all(|v| v.abs() <= 1e-12), "residual {r:?}");
        assert!((comp_sum(d.alpha.iter().copied()) - 1.0).abs() <= 1e-12);
        assert!((comp_sum(d.delta.iter().copied()) - 1.0).abs() <= 1e-12);
        assert!(d.nu.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn repair_absorbs_residual_into_box_multipliers() {
        // Two dimensional LP whose only x terms come from one objective cut
        // with gradient (0.1, -0.2). With alpha = 1 and everything else
        // zero, the stationarity residual is exactly that gradient, so the
        // repair must raise nu_lo by (0.1, 0) and nu_hi by (0, 0.2).
        let lp = StageLp {
            n: 2,
            obj_a: RowMat::from_rows(2, &[vec![0.1, -0.2]]),
            obj_b: RowMat::from_rows(2, &[vec![0.0, 0.0]]),
            obj_c: vec![0.0],
            con_d: RowMat::new(2),
            con_e: RowMat::new(2),
            con_h: vec![],
            ctg_beta: RowMat::from_rows(2, &[vec![0.0, 0.0]]),
            ctg_theta: vec![0.0],
            eq_a: RowMat::new(2),
            eq_b: RowMat::new(2),
            eq_rhs: vec![],
            lo: vec![-1.0, -1.0],
            hi: vec![1.0, 1.0],
            x_prev: vec![0.0, 0.0],
        };
        let mut duals = StageDuals {
            alpha: vec![1.0],
            mu: vec![],
            delta: vec![1.0],
            nu: vec![0.0; 4],
            lam: vec![],
        };
        dual_repair(&lp, &mut duals).unwrap();
        assert_eq!(duals.nu, vec![0.1, 0.0, 0.0, 0.2]);
        let r = stationarity_residual(&lp, &duals);
        assert!(r.iter().all(|v| v.abs() == 0.0), "residual {r:?}");
    }

    #[test]
    fn repair_rescales_multiplier_mass() {
        let lp = min_x_geq_one();
        let mut duals = StageDuals {
            alpha: vec![0.98],
            mu: vec![0.98],
            delta: vec![0.49],
            nu: vec![0.0, 0.0],
            lam: vec![],
        };
        dual_repair(&lp, &mut duals).unwrap();
        assert_eq!(duals.alpha, vec![1.0]);
        assert_eq!(duals.delta, vec![1.0]);
        // mu is clipped but never rescaled.
        assert_eq!(duals.mu, vec![0.98]);
    }

    #[test]
    fn repair_fails_on_zero_objective_mass() {
        let lp = min_x_geq_one();
        let mut duals = StageDuals {
            alpha: vec![-0.5],
            mu: vec![0.0],
            delta: vec![1.0],
            nu: vec![0.0, 0.0],
            lam: vec![],
        };
        let err = dual_repair(&lp, &mut duals);
        assert!(matches!(err, Err(LpError::RepairFailed(_))));
    }

    #[test]
    fn loose_solve_keeps_primal_tight() {
        let lp = min_x_geq_one();
        let exact = lp.solve(1e-10).unwrap();
        let loose = lp.solve(0.5).unwrap();
        assert!(loose.iters <= exact.iters);
        // Constraint cut violation at the loose point stays tiny.
        let viol = (-loose.x[0] + 1.0).max(0.0);
        assert!(viol <= 1e-9, "violation {viol}");
        assert!(loose.rel_gap <= 0.5);
        // Weak duality holds for the certified bound.
        assert!(loose.dual_value <= loose.primal_value + 1e-9);
    }

    #[test]
    fn coupling_rows_shift_with_parent_state() {
        // x = 2 - x_prev via coupling; objective pushes x down but the
        // equality pins it.
        let lp = StageLp {
            n: 1,
            obj_a: RowMat::from_rows(1, &[vec![1.0]]),
            obj_b: RowMat::from_rows(1, &[vec![0.0]]),
            obj_c: vec![0.0],
            con_d: RowMat::new(1),
            con_e: RowMat::new(1),
            con_h: vec![],
            ctg_beta: RowMat::from_rows(1, &[vec![0.0]]),
            ctg_theta: vec![0.0],
            eq_a: RowMat::from_rows(1, &[vec![1.0]]),
            eq_b: RowMat::from_rows(1, &[vec![1.0]]),
            eq_rhs: vec![2.0],
            lo: vec![-10.0],
            hi: vec![10.0],
            x_prev: vec![0.5],
        };
        let sol = lp.solve(1e-10).unwrap();
        assert!((sol.x[0] - 1.5).abs() < 1e-7);
        assert!((sol.primal_value - 1.5).abs() < 1e-7);
        // Dual stationarity with the coupling multiplier still repairs to
        // an exact certificate.
        let r = stationarity_residual(&lp, &sol.duals);
        assert!(r.iter().all(|v| v.abs() <= 1e-12));
        assert!(sol.dual_value <= sol.primal_value + 1e-9);
        assert!((sol.dual_value - 1.5).abs() < 1e-6, "dual {}", sol.dual_value);
    }

    /// A two-variable stage LP with three objective cuts and two
    /// constraint cuts, pinned against basis enumeration.
    fn planar_lp() -> StageLp {
        StageLp {
            n: 2,
            obj_a: RowMat::from_rows(
                2,
                &[vec![1.0, 0.0], vec![-0.5, 1.0], vec![0.25, -0.75]],
            ),
            obj_b: RowMat::from_rows(
                2,
                &[vec![0.0, 0.0], vec![0.0, 0.0], vec![0.0, 0.0]],
            ),
            obj_c: vec![0.0, -0.5, 0.25],
            con_d: RowMat::from_rows(2, &[vec![1.0, 1.0], vec![-1.0, 0.5]]),
            con_e: RowMat::from_rows(2, &[vec![0.0, 0.0], vec![0.0, 0.0]]),
            con_h: vec![-3.0, -2.0],
            ctg_beta: RowMat::from_rows(2, &[vec![0.5, -0.25]]),
            ctg_theta: vec![0.1],
            eq_a: RowMat::new(2),
            eq_b: RowMat::new(2),
            eq_rhs: vec![],
            lo: vec![-4.0, -4.0],
            hi: vec![4.0, 4.0],
            x_prev: vec![0.0, 0.0],
        }
    }

    #[test]
    fn tight_solve_matches_basis_enumeration() {
        let lp = planar_lp();
        let (want, _) = brute_force_optimum(&lp.to_sparse(), 1e-9).unwrap();
        let sol = lp.solve(1e-8).unwrap();
        assert!(
            (sol.primal_value - want).abs() <= 1e-8 * (1.0 + want.abs()),
            "solver {} vs enumeration {want}",
            sol.primal_value
        );
    }

    #[test]
    fn loose_solve_brackets_the_enumerated_optimum() {
        let lp = planar_lp();
        let (want, _) = brute_force_optimum(&lp.to_sparse(), 1e-9).unwrap();
        let sol = lp.solve(0.5).unwrap();
        // Inexact solves stay primal feasible, so the primal value is an
        // upper bound within the relative gap, and the certified dual
        // value never exceeds the optimum.
        assert!(sol.primal_value >= want - 1e-9);
        assert!(sol.primal_value - want <= 0.5 * want.abs().max(1.0) + 1e-9);
        assert!(sol.dual_value <= want + 1e-9, "dual {} vs {want}", sol.dual_value);
    }
}

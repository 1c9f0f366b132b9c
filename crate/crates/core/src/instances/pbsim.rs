//! Oracles of the generated benchmark family: each objective and
//! constraint is the pointwise maximum of two smooth convex branches
//! built from a random direction `xi` and scalar offsets, so every
//! function is convex, nonsmooth on a hypersurface, and cheap to
//! evaluate through rank-one products.
//!
//! Objective branches (u is +10 or -10):
//!   1. (xi.(x - x_prev))^2 + xi.x + 1
//!   2. (xi.x)^2 + sum(x) + u
//! Constraint branches (psi is a large positive slack, absorbed as -psi):
//!   1. 4 |x - 1|^2 - psi
//!   2. (xi.x)^2 + xi.x + 1 - psi
//!
//! Evaluations and gradients use compensated products so linearization
//! constants stay accurate at the family's 1e4..1e6 magnitudes.

use std::sync::Arc;

use crate::model::{ConvexOracle, MaxOracle};
use crate::numeric::{comp_dot, comp_sum};

/// Objective branch 1: quadratic in the step xi.(x - x_prev), plus a
/// drift xi.x + 1. The only branch of the family that sees x_prev.
#[derive(Debug, Clone)]
pub struct StepQuadBranch {
    pub xi: Vec<f64>,
}

impl ConvexOracle for StepQuadBranch {
    fn eval(&self, x: &[f64], x_prev: &[f64]) -> f64 {
        let s = comp_sum([comp_dot(&self.xi, x), -comp_dot(&self.xi, x_prev)]);
        comp_sum([s * s, comp_dot(&self.xi, x), 1.0])
    }

    fn subgrad(&self, x: &[f64], x_prev: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let s = comp_sum([comp_dot(&self.xi, x), -comp_dot(&self.xi, x_prev)]);
        let gx = self.xi.iter().map(|v| 2.0 * s * v + v).collect();
        let gp = self.xi.iter().map(|v| -2.0 * s * v).collect();
        (gx, gp)
    }
}

/// Objective branch 2: quadratic in xi.x plus the coordinate sum and a
/// two-point offset u.
#[derive(Debug, Clone)]
pub struct LevelQuadBranch {
    pub xi: Vec<f64>,
    pub u: f64,
}

impl ConvexOracle for LevelQuadBranch {
    fn eval(&self, x: &[f64], _x_prev: &[f64]) -> f64 {
        let r = comp_dot(&self.xi, x);
        comp_sum([r * r, comp_sum(x.iter().copied()), self.u])
    }

    fn subgrad(&self, x: &[f64], _x_prev: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let r = comp_dot(&self.xi, x);
        let gx = self.xi.iter().map(|v| 2.0 * r * v + 1.0).collect();
        (gx, vec![0.0; x.len()])
    }
}

/// Constraint branch 1: scaled squared distance to the all-ones point,
/// shifted down by psi.
#[derive(Debug, Clone)]
pub struct BallBranch {
    pub psi: f64,
    pub dim: usize,
}

impl ConvexOracle for BallBranch {
    fn eval(&self, x: &[f64], _x_prev: &[f64]) -> f64 {
        let terms: Vec<f64> = x.iter().map(|v| 4.0 * (v - 1.0) * (v - 1.0)).collect();
        comp_sum([comp_sum(terms), -self.psi])
    }

    fn subgrad(&self, x: &[f64], _x_prev: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (x.iter().map(|v| 8.0 * (v - 1.0)).collect(), vec![0.0; self.dim])
    }
}

/// Constraint branch 2: quadratic in xi.x plus xi.x + 1, shifted by psi.
#[derive(Debug, Clone)]
pub struct RidgeBranch {
    pub xi: Vec<f64>,
    pub psi: f64,
}

impl ConvexOracle for RidgeBranch {
    fn eval(&self, x: &[f64], _x_prev: &[f64]) -> f64 {
        let r = comp_dot(&self.xi, x);
        comp_sum([r * r, r, 1.0, -self.psi])
    }

    fn subgrad(&self, x: &[f64], _x_prev: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let r = comp_dot(&self.xi, x);
        (self.xi.iter().map(|v| 2.0 * r * v + v).collect(), vec![0.0; x.len()])
    }
}

pub fn objective_oracle(xi: &[f64], u: f64) -> MaxOracle {
    MaxOracle::new(vec![
        Arc::new(StepQuadBranch { xi: xi.to_vec() }),
        Arc::new(LevelQuadBranch { xi: xi.to_vec(), u }),
    ])
}

pub fn constraint_oracle(xi: &[f64], psi: f64, dim: usize) -> MaxOracle {
    MaxOracle::new(vec![
        Arc::new(BallBranch { psi, dim }),
        Arc::new(RidgeBranch { xi: xi.to_vec(), psi }),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn objective_values_by_hand() {
        // xi = [2], u = 10, x = 1, x_prev = 0:
        // branch 1: (2)^2 + 2 + 1 = 7; branch 2: 4 + 1 + 10 = 15.
        let f = objective_oracle(&[2.0], 10.0);
        assert_eq!(f.eval(&[1.0], &[0.0]), 15.0);
        assert_eq!(f.active_branch(&[1.0], &[0.0]), 1);
        // x = 3, x_prev = 2: branch 1: 4 + 6 + 1 = 11; branch 2: 36+3+10.
        assert_eq!(f.eval(&[3.0], &[2.0]), 49.0);
        // Far step: x = 10, x_prev = 0: branch 1: 400+20+1 = 421;
        // branch 2: 400 + 10 + 10 = 420 so branch 1 wins.
        assert_eq!(f.eval(&[10.0], &[0.0]), 421.0);
        assert_eq!(f.active_branch(&[10.0], &[0.0]), 0);
    }

    #[test]
    fn constraint_values_by_hand() {
        // xi = [2], psi = 20000, x = 1: branch 1: 0 - psi;
        // branch 2: 4 + 2 + 1 - psi = 7 - psi.
        let g = constraint_oracle(&[2.0], 20000.0, 1);
        assert_eq!(g.eval(&[1.0], &[0.0]), 7.0 - 20000.0);
        // x = -3: branch 1: 4*16 - psi = 64 - psi;
        // branch 2: 36 - 6 + 1 - psi = 31 - psi.
        assert_eq!(g.eval(&[-3.0], &[0.0]), 64.0 - 20000.0);
    }

    #[test]
    fn subgradients_match_finite_differences() {
        let f = objective_oracle(&[1.5, -0.7], -10.0);
        let g = constraint_oracle(&[1.5, -0.7], 1e4, 2);
        let x = [3.0, -2.0];
        let xp = [1.0, 0.5];
        let h = 1e-6;
        for oracle in [&f, &g] {
            let (gx, gp) = oracle.subgrad(&x, &xp);
            for i in 0..2 {
                let mut xh = x;
                xh[i] += h;
                let fd = (oracle.eval(&xh, &xp) - oracle.eval(&x, &xp)) / h;
                assert!((fd - gx[i]).abs() < 1e-4, "gx[{i}]: fd {fd} vs {}", gx[i]);
                let mut xph = xp;
                xph[i] += h;
                let fd = (oracle.eval(&x, &xph) - oracle.eval(&x, &xp)) / h;
                assert!((fd - gp[i]).abs() < 1e-4, "gp[{i}]: fd {fd} vs {}", gp[i]);
            }
        }
    }

    #[test]
    fn branches_minorize_the_maximum() {
        let f = objective_oracle(&[0.8, 1.2], 10.0);
        for k in 0..50 {
            let t = k as f64 / 7.0;
            let x = [2.0 * (t).sin(), 1.5 * (t + 1.0).cos()];
            let xp = [(t * 0.7).cos(), (t * 1.3).sin()];
            let v = f.eval(&x, &xp);
            for b in &f.branches {
                assert!(b.eval(&x, &xp) <= v + 1e-12);
            }
        }
    }
}

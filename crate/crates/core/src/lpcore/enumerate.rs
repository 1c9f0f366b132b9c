//! Brute-force reference optimum for small LPs by basis enumeration.
//!
//! Entirely independent of the interior-point engine: every equality row
//! plus every size-completing subset of inequality rows is treated as a
//! candidate active set, the square system is solved densely, and the
//! best feasible solution wins. Exponential in the row count, so this is
//! test plumbing for LPs with a handful of rows, not a solver. The LP
//! must be bounded with a vertex optimum (stage LPs are: epigraph cuts
//! and state boxes pin every variable).

use nalgebra::{DMatrix, DVector};

use super::ipm::SparseLp;
use crate::numeric::comp_dot;

/// Candidate active sets above this count make the search refuse.
const MAX_BASES: u128 = 4_000_000;

fn binomial(m: usize, k: usize) -> u128 {
    if k > m {
        return 0;
    }
    let k = k.min(m - k);
    let mut out: u128 = 1;
    for i in 0..k {
        out = out.saturating_mul((m - i) as u128) / (i as u128 + 1);
    }
    out
}

/// Minimum of `c'z` over `Gz <= h`, `Fz = d` by enumerating vertices.
/// Returns the optimum and its point, or None when the LP has no feasible
/// vertex within tolerance or the search space is too large.
pub fn brute_force_optimum(lp: &SparseLp, feas_tol: f64) -> Option<(f64, Vec<f64>)> {
    let nv = lp.nvars;
    let q = lp.f_eq.len();
    if q > nv {
        return None;
    }
    let k = nv - q;
    let m = lp.g.len();
    if k > m || binomial(m, k) > MAX_BASES {
        return None;
    }

    let dense_g: Vec<Vec<f64>> = lp
        .g
        .iter()
        .map(|row| {
            let mut v = vec![0.0; nv];
            row.axpy_into(1.0, &mut v);
            v
        })
        .collect();
    let dense_f: Vec<Vec<f64>> = lp
        .f_eq
        .iter()
        .map(|row| {
            let mut v = vec![0.0; nv];
            row.axpy_into(1.0, &mut v);
            v
        })
        .collect();

    let feasible = |z: &[f64]| -> bool {
        for (row, h) in dense_g.iter().zip(&lp.h) {
            if comp_dot(row, z) > h + feas_tol * (1.0 + h.abs()) {
                return false;
            }
        }
        for (row, d) in dense_f.iter().zip(&lp.d) {
            if (comp_dot(row, z) - d).abs() > feas_tol * (1.0 + d.abs()) {
                return false;
            }
        }
        true
    };

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        let mut a = DMatrix::zeros(nv, nv);
        let mut b = DVector::zeros(nv);
        for (r, row) in dense_f.iter().enumerate() {
            for (cix, v) in row.iter().enumerate() {
                a[(r, cix)] = *v;
            }
            b[r] = lp.d[r];
        }
        for (r, &gi) in subset.iter().enumerate() {
            for (cix, v) in dense_g[gi].iter().enumerate() {
                a[(q + r, cix)] = *v;
            }
            b[q + r] = lp.h[gi];
        }
        if let Some(sol) = a.lu().solve(&b) {
            let z: Vec<f64> = sol.iter().copied().collect();
            if z.iter().all(|v| v.is_finite()) && feasible(&z) {
                let value = comp_dot(&lp.c, &z);
                if best.as_ref().map_or(true, |(bv, _)| value < *bv) {
                    best = Some((value, z));
                }
            }
        }
        // Advance to the next k-subset of 0..m in lexicographic order.
        if k == 0 {
            break;
        }
        let mut i = k;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if subset[i] != i + m - k {
                break;
            }
            if i == 0 {
                return best;
            }
        }
        subset[i] += 1;
        for j in i + 1..k {
            subset[j] = subset[j - 1] + 1;
        }
    }
    best
}

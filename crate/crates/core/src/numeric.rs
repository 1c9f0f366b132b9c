//! Compensated float accumulation.
//!
//! Linearization constants and bundle evaluations mix terms that span many
//! orders of magnitude (quadratic values near 1e6 against unit-scale
//! constants). Plain left-to-right summation loses enough bits that
//! tightness-at-anchor identities, which must hold to 1e-9 absolute, become
//! flaky. Neumaier's variant of Kahan summation keeps the error near one ulp
//! of the true value.

/// Neumaier compensated sum of a sequence of terms.
pub fn comp_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

/// Compensated dot product a·b. Panics on length mismatch.
pub fn comp_dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dot product length mismatch");
    // Each product is formed in f64; the compensation handles the summation
    // error, which dominates here.
    comp_sum(a.iter().zip(b).map(|(x, y)| x * y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_recovers_cancelled_tail() {
        // 1e16 + 1 - 1e16 loses the 1 in plain f64 order.
        let naive: f64 = [1e16, 1.0, -1e16].iter().sum();
        assert_eq!(naive, 0.0);
        assert_eq!(comp_sum([1e16, 1.0, -1e16]), 1.0);
    }

    #[test]
    fn dot_matches_exact_small_case() {
        let a = [2.0, -3.0, 0.5];
        let b = [4.0, 1.0, 8.0];
        assert_eq!(comp_dot(&a, &b), 9.0);
    }

    #[test]
    fn empty_dot_is_zero() {
        assert_eq!(comp_dot(&[], &[]), 0.0);
    }
}

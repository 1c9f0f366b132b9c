//! Problem definition layer: convex oracles, box state sets, per-stage
//! finite-support noise, and scenario sampling.
//!
//! Noise is interstage independent with finitely many realizations per stage,
//! so the scenario tree recombines and is represented implicitly as one
//! realization list per stage. Stage 1 is deterministic (a single
//! realization).

use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::mat::RowMat;
use crate::numeric::{comp_dot, comp_sum};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("stage {stage}: realization probabilities sum to {sum}, expected 1")]
    BadProbabilities { stage: usize, sum: f64 },
    #[error("stage {stage}: probability {p} outside (0, 1]")]
    ProbabilityOutOfRange { stage: usize, p: f64 },
    #[error("stage 1 must have exactly one realization, found {found}")]
    RandomFirstStage { found: usize },
    #[error("state box has lo > hi in component {index}")]
    EmptyBox { index: usize },
    #[error("dimension mismatch: {what}")]
    DimensionMismatch { what: String },
    #[error("stage index {t} out of range 1..={horizon}")]
    StageOutOfRange { t: usize, horizon: usize },
}

/// Value and one subgradient of a convex function of (x_t, x_prev), for a
/// fixed noise realization.
///
/// The subgradient contract is the usual one: for any pair of points,
/// `eval(y) >= eval(z) + s(z)·(y - z)`.
pub trait ConvexOracle: Send + Sync {
    fn eval(&self, x: &[f64], x_prev: &[f64]) -> f64;
    /// Returns (s_x, s_prev), a subgradient split by argument block.
    fn subgrad(&self, x: &[f64], x_prev: &[f64]) -> (Vec<f64>, Vec<f64>);
}

/// a·x + b·x_prev + c. Its linearization anywhere is itself.
#[derive(Debug, Clone)]
pub struct AffineOracle {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: f64,
}

impl ConvexOracle for AffineOracle {
    fn eval(&self, x: &[f64], x_prev: &[f64]) -> f64 {
        comp_sum([comp_dot(&self.a, x), comp_dot(&self.b, x_prev), self.c])
    }

    fn subgrad(&self, _x: &[f64], _x_prev: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (self.a.clone(), self.b.clone())
    }
}

/// Pointwise maximum of convex branches.
///
/// The subgradient comes from the branch with the largest value; ties break
/// to the lowest branch index so results are deterministic at kinks.
#[derive(Clone)]
pub struct MaxOracle {
    pub branches: Vec<Arc<dyn ConvexOracle>>,
}

impl MaxOracle {
    pub fn new(branches: Vec<Arc<dyn ConvexOracle>>) -> Self {
        assert!(!branches.is_empty(), "max oracle needs at least one branch");
        MaxOracle { branches }
    }

    pub fn single(branch: Arc<dyn ConvexOracle>) -> Self {
        MaxOracle { branches: vec![branch] }
    }

    /// Index of the active (largest-value) branch, lowest index on ties.
    pub fn active_branch(&self, x: &[f64], x_prev: &[f64]) -> usize {
        let mut best = 0;
        let mut best_val = self.branches[0].eval(x, x_prev);
        for (i, br) in self.branches.iter().enumerate().skip(1) {
            let v = br.eval(x, x_prev);
            if v > best_val {
                best_val = v;
                best = i;
            }
        }
        best
    }
}

impl ConvexOracle for MaxOracle {
    fn eval(&self, x: &[f64], x_prev: &[f64]) -> f64 {
        self.branches
            .iter()
            .map(|b| b.eval(x, x_prev))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn subgrad(&self, x: &[f64], x_prev: &[f64]) -> (Vec<f64>, Vec<f64>) {
        self.branches[self.active_branch(x, x_prev)].subgrad(x, x_prev)
    }
}

/// Box state set {x : lo <= x <= hi}, nonempty and compact.
#[derive(Debug, Clone)]
pub struct StateSet {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl StateSet {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, ModelError> {
        if lo.len() != hi.len() {
            return Err(ModelError::DimensionMismatch {
                what: format!("box lo len {} vs hi len {}", lo.len(), hi.len()),
            });
        }
        for (i, (l, h)) in lo.iter().zip(&hi).enumerate() {
            if l > h || !l.is_finite() || !h.is_finite() {
                return Err(ModelError::EmptyBox { index: i });
            }
        }
        Ok(StateSet { lo, hi })
    }

    pub fn uniform(n: usize, lo: f64, hi: f64) -> Self {
        StateSet::new(vec![lo; n], vec![hi; n]).expect("uniform box must satisfy lo <= hi")
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (l, h))| *v >= l - tol && *v <= h + tol)
    }

    pub fn clip(&self, x: &mut [f64]) {
        for (v, (l, h)) in x.iter_mut().zip(self.lo.iter().zip(&self.hi)) {
            *v = v.clamp(*l, *h);
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| rng.gen_range(*l..=*h))
            .collect()
    }
}

/// Linear coupling block A x + B x_prev = b (q rows; q = 0 means none).
#[derive(Debug, Clone)]
pub struct Coupling {
    pub a: RowMat,
    pub b: RowMat,
    pub rhs: Vec<f64>,
}

impl Coupling {
    pub fn none(n: usize) -> Self {
        Coupling { a: RowMat::new(n), b: RowMat::new(n), rhs: Vec::new() }
    }

    pub fn q(&self) -> usize {
        self.rhs.len()
    }
}

/// One noise realization of a stage: probability, raw noise vector, linear
/// coupling data, and the objective / constraint oracles it parameterizes.
#[derive(Clone)]
pub struct Realization {
    pub prob: f64,
    pub xi: Vec<f64>,
    pub coupling: Coupling,
    pub f: MaxOracle,
    pub g: Vec<MaxOracle>,
}

/// Finite-support noise of one stage.
#[derive(Clone)]
pub struct StageRandomness {
    pub realizations: Vec<Realization>,
}

impl StageRandomness {
    /// `stage` is 1-based and only used in error messages.
    pub fn new(stage: usize, realizations: Vec<Realization>) -> Result<Self, ModelError> {
        for r in &realizations {
            if !(r.prob > 0.0 && r.prob <= 1.0) {
                return Err(ModelError::ProbabilityOutOfRange { stage, p: r.prob });
            }
        }
        let sum = comp_sum(realizations.iter().map(|r| r.prob));
        if (sum - 1.0).abs() > 1e-12 {
            return Err(ModelError::BadProbabilities { stage, sum });
        }
        Ok(StageRandomness { realizations })
    }

    pub fn len(&self) -> usize {
        self.realizations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.realizations.is_empty()
    }
}

/// A complete multistage problem: horizon, state dimension, initial state,
/// per-stage noise and state boxes.
#[derive(Clone)]
pub struct Problem {
    pub horizon: usize,
    pub dim: usize,
    pub x0: Vec<f64>,
    pub stages: Vec<StageRandomness>,
    pub state_sets: Vec<StateSet>,
}

impl Problem {
    pub fn new(
        x0: Vec<f64>,
        stages: Vec<StageRandomness>,
        state_sets: Vec<StateSet>,
    ) -> Result<Self, ModelError> {
        let horizon = stages.len();
        if horizon == 0 {
            return Err(ModelError::DimensionMismatch { what: "no stages".into() });
        }
        if state_sets.len() != horizon {
            return Err(ModelError::DimensionMismatch {
                what: format!("{} stages but {} state sets", horizon, state_sets.len()),
            });
        }
        if stages[0].len() != 1 {
            return Err(ModelError::RandomFirstStage { found: stages[0].len() });
        }
        let dim = x0.len();
        for (t, s) in state_sets.iter().enumerate() {
            if s.dim() != dim {
                return Err(ModelError::DimensionMismatch {
                    what: format!("state set {} dim {} vs x0 dim {}", t + 1, s.dim(), dim),
                });
            }
        }
        for (t, stage) in stages.iter().enumerate() {
            for r in &stage.realizations {
                let q = r.coupling.q();
                if r.coupling.a.cols() != dim
                    || r.coupling.b.cols() != dim
                    || r.coupling.a.rows() != q
                    || r.coupling.b.rows() != q
                {
                    return Err(ModelError::DimensionMismatch {
                        what: format!("stage {} coupling block shapes", t + 1),
                    });
                }
            }
        }
        Ok(Problem { horizon, dim, x0, stages, state_sets })
    }

    /// Number of noise realizations of stage `t` (1-based).
    pub fn child_count(&self, t: usize) -> Result<usize, ModelError> {
        if t == 0 || t > self.horizon {
            return Err(ModelError::StageOutOfRange { t, horizon: self.horizon });
        }
        Ok(self.stages[t - 1].len())
    }

    /// Samples one scenario: a realization index per stage (0-based).
    ///
    /// Stage 1 is deterministic so the first index is always 0. Later stages
    /// draw independently from their probability vectors; one uniform is
    /// consumed per stage regardless of support size, so paths are a pure
    /// function of the generator state.
    pub fn sample_path(&self, rng: &mut impl Rng) -> Vec<usize> {
        let mut path = Vec::with_capacity(self.horizon);
        path.push(0);
        for stage in &self.stages[1..] {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut pick = stage.len() - 1;
            for (j, r) in stage.realizations.iter().enumerate() {
                acc += r.prob;
                if u < acc {
                    pick = j;
                    break;
                }
            }
            path.push(pick);
        }
        path
    }

    pub fn state_set(&self, t: usize) -> &StateSet {
        &self.state_sets[t - 1]
    }

    pub fn realization(&self, t: usize, j: usize) -> &Realization {
        &self.stages[t - 1].realizations[j]
    }
}

/// An affine minorant of a convex oracle, tight at its anchor point.
///
/// Represents a(x) + b(x_prev) + c. See [`oracle_linearize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Linearization {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: f64,
}

impl Linearization {
    pub fn eval(&self, x: &[f64], x_prev: &[f64]) -> f64 {
        comp_sum([comp_dot(&self.a, x), comp_dot(&self.b, x_prev), self.c])
    }
}

/// Linearizes `oracle` at (x, x_prev): the constant is chosen so the affine
/// function reproduces the oracle value at the anchor exactly, and convexity
/// makes it a global minorant.
pub fn oracle_linearize(oracle: &dyn ConvexOracle, x: &[f64], x_prev: &[f64]) -> Linearization {
    let value = oracle.eval(x, x_prev);
    let (a, b) = oracle.subgrad(x, x_prev);
    let c = comp_sum([value, -comp_dot(&a, x), -comp_dot(&b, x_prev)]);
    Linearization { a, b, c }
}

/// Seeded counter-based generator with one independent stream per purpose.
///
/// Stream ids are fixed constants so that adding a consumer never perturbs
/// the draws of existing ones.
pub mod streams {
    use super::*;

    pub const PATH_SAMPLING: u64 = 1;
    pub const UB_SIMULATION: u64 = 2;
    pub const INSTANCE_GEN: u64 = 3;
    pub const WARM_START: u64 = 4;

    pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        r.set_stream(stream);
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Square;
    impl ConvexOracle for Square {
        fn eval(&self, x: &[f64], _p: &[f64]) -> f64 {
            x[0] * x[0]
        }
        fn subgrad(&self, x: &[f64], _p: &[f64]) -> (Vec<f64>, Vec<f64>) {
            (vec![2.0 * x[0]], vec![0.0])
        }
    }

    fn two_point_problem(p1: f64) -> Problem {
        let real = |prob: f64| Realization {
            prob,
            xi: vec![],
            coupling: Coupling::none(1),
            f: MaxOracle::single(Arc::new(AffineOracle { a: vec![1.0], b: vec![0.0], c: 0.0 })),
            g: vec![],
        };
        Problem::new(
            vec![0.0],
            vec![
                StageRandomness::new(1, vec![real(1.0)]).unwrap(),
                StageRandomness::new(2, vec![real(p1), real(1.0 - p1)]).unwrap(),
            ],
            vec![StateSet::uniform(1, 0.0, 1.0), StateSet::uniform(1, 0.0, 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn linearize_affine_is_identity() {
        let o = AffineOracle { a: vec![2.0], b: vec![0.0], c: 1.0 };
        let cut = oracle_linearize(&o, &[0.7], &[0.0]);
        assert_eq!(cut.a, vec![2.0]);
        assert_eq!(cut.c, 1.0);
        for y in [-3.0, 0.0, 5.5] {
            assert_eq!(cut.eval(&[y], &[0.0]), o.eval(&[y], &[0.0]));
        }
    }

    #[test]
    fn linearize_square_at_three() {
        // x^2 at x=3 gives the tangent 6x - 9.
        let cut = oracle_linearize(&Square, &[3.0], &[0.0]);
        assert_eq!(cut.a, vec![6.0]);
        assert_eq!(cut.c, -9.0);
        for y in [-2.0, 0.0, 5.0] {
            let model = cut.eval(&[y], &[0.0]);
            assert!(model <= y * y + 1e-12, "tangent must minorize at {y}");
        }
        assert!((cut.eval(&[3.0], &[0.0]) - 9.0).abs() < 1e-12);
    }

    #[test]
    fn max_oracle_tie_breaks_to_lowest_index() {
        // Branches x and -x tie at 0; the subgradient must come from branch 0.
        let up = Arc::new(AffineOracle { a: vec![1.0], b: vec![0.0], c: 0.0 });
        let down = Arc::new(AffineOracle { a: vec![-1.0], b: vec![0.0], c: 0.0 });
        let m = MaxOracle::new(vec![up, down]);
        assert_eq!(m.active_branch(&[0.0], &[0.0]), 0);
        let (sx, _) = m.subgrad(&[0.0], &[0.0]);
        assert_eq!(sx, vec![1.0]);
        // Tightness still holds at the kink.
        let cut = oracle_linearize(&m, &[0.0], &[0.0]);
        assert_eq!(cut.eval(&[0.0], &[0.0]), 0.0);
    }

    #[test]
    fn max_oracle_minorization_random_points() {
        let up = Arc::new(AffineOracle { a: vec![1.0], b: vec![0.0], c: 0.0 });
        let sq: Arc<dyn ConvexOracle> = Arc::new(Square);
        let m = MaxOracle::new(vec![up, sq]);
        let mut rng = streams::rng(7, 0);
        for _ in 0..1000 {
            let z = vec![rng.gen_range(-2.0..2.0)];
            let cut = oracle_linearize(&m, &z, &[0.0]);
            assert!((cut.eval(&z, &[0.0]) - m.eval(&z, &[0.0])).abs() <= 1e-9);
            let y = vec![rng.gen_range(-2.0..2.0)];
            assert!(cut.eval(&y, &[0.0]) <= m.eval(&y, &[0.0]) + 1e-9);
        }
    }

    #[test]
    fn probabilities_must_sum_to_one() {
        let real = |prob: f64| Realization {
            prob,
            xi: vec![],
            coupling: Coupling::none(1),
            f: MaxOracle::single(Arc::new(AffineOracle { a: vec![0.0], b: vec![0.0], c: 0.0 })),
            g: vec![],
        };
        let err = StageRandomness::new(2, vec![real(0.5), real(0.6)]);
        assert!(matches!(err, Err(ModelError::BadProbabilities { .. })));
    }

    #[test]
    fn single_realization_paths_are_constant() {
        let p = {
            let real = || Realization {
                prob: 1.0,
                xi: vec![],
                coupling: Coupling::none(1),
                f: MaxOracle::single(Arc::new(AffineOracle {
                    a: vec![0.0],
                    b: vec![0.0],
                    c: 0.0,
                })),
                g: vec![],
            };
            Problem::new(
                vec![0.0],
                vec![
                    StageRandomness::new(1, vec![real()]).unwrap(),
                    StageRandomness::new(2, vec![real()]).unwrap(),
                    StageRandomness::new(3, vec![real()]).unwrap(),
                ],
                vec![StateSet::uniform(1, 0.0, 1.0); 3],
            )
            .unwrap()
        };
        let mut rng = streams::rng(123, streams::PATH_SAMPLING);
        for _ in 0..20 {
            assert_eq!(p.sample_path(&mut rng), vec![0, 0, 0]);
        }
    }

    #[test]
    fn degenerate_distribution_always_picks_first() {
        // p = (1.0, ~0) represented as (1-1e-13, 1e-13) to satisfy (0,1]:
        // the second index is drawn with negligible probability; with an
        // exact 1.0 head the tail can never be reached.
        let p = two_point_problem(1.0 - 1e-13);
        let mut rng = streams::rng(5, streams::PATH_SAMPLING);
        for _ in 0..1000 {
            assert_eq!(p.sample_path(&mut rng)[1], 0);
        }
    }

    #[test]
    fn sample_path_is_reproducible_and_balanced() {
        let p = two_point_problem(0.5);
        let mut a = streams::rng(42, streams::PATH_SAMPLING);
        let mut b = streams::rng(42, streams::PATH_SAMPLING);
        let first: Vec<_> = (0..100).map(|_| p.sample_path(&mut a)).collect();
        let second: Vec<_> = (0..100).map(|_| p.sample_path(&mut b)).collect();
        assert_eq!(first, second);

        let mut rng = streams::rng(42, streams::PATH_SAMPLING);
        let n = 100_000;
        let ones = (0..n).filter(|_| p.sample_path(&mut rng)[1] == 0).count();
        let freq = ones as f64 / n as f64;
        assert!((0.49..=0.51).contains(&freq), "freq {freq} outside [0.49, 0.51]");
    }

    #[test]
    fn child_count_matches_support_size() {
        let p = two_point_problem(0.5);
        assert_eq!(p.child_count(1).unwrap(), 1);
        assert_eq!(p.child_count(2).unwrap(), 2);
        assert!(p.child_count(3).is_err());
        assert!(p.child_count(0).is_err());
    }
}

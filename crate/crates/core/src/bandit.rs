//! Arm-elimination learner on top of the per-arm estimator.
//!
//! All agents pull the surviving candidates in the same round-robin order,
//! so every agent holds the same number of samples of every arm and the
//! system-wide sample count of arm `i` is always `M n(i)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimation::{CiParams, DoeArmState, ThresholdSchedule};

/// Surviving arms in ascending order plus the round-robin cursor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CandidateSet {
    arms: Vec<usize>,
    pointer: usize,
}

impl CandidateSet {
    pub fn full(k: usize) -> Self {
        assert!(k >= 1, "candidate set needs at least one arm");
        Self {
            arms: (0..k).collect(),
            pointer: 0,
        }
    }

    pub fn from_parts(arms: Vec<usize>, pointer: usize) -> Result<Self> {
        if arms.is_empty() || pointer >= arms.len() || arms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Internal(format!(
                "invalid candidate set {arms:?} @ {pointer}"
            )));
        }
        Ok(Self { arms, pointer })
    }

    pub fn arms(&self) -> &[usize] {
        &self.arms
    }

    pub fn pointer(&self) -> usize {
        self.pointer
    }

    pub fn len(&self) -> usize {
        self.arms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arms.is_empty()
    }

    pub fn contains(&self, arm: usize) -> bool {
        self.arms.binary_search(&arm).is_ok()
    }

    /// Returns the arm under the cursor and advances it cyclically.
    pub fn select_arm(&mut self) -> usize {
        let arm = self.arms[self.pointer];
        self.pointer = (self.pointer + 1) % self.arms.len();
        arm
    }

    /// Removes `arm`, shifting the cursor so the cyclic order of the
    /// remaining arms is unchanged.
    pub fn eliminate(&mut self, arm: usize) -> Result<()> {
        let q = self
            .arms
            .binary_search(&arm)
            .map_err(|_| Error::Internal(format!("arm {arm} is not a candidate")))?;
        if self.arms.len() == 1 {
            return Err(Error::Internal(format!(
                "eliminating arm {arm} would empty the candidate set"
            )));
        }
        self.arms.remove(q);
        if q < self.pointer {
            self.pointer -= 1;
        }
        self.pointer %= self.arms.len();
        Ok(())
    }
}

/// `(2 alpha beta + beta) * ci(M n, delta)`.
pub fn elimination_radius(n: u64, sched: &ThresholdSchedule) -> f64 {
    sched.elimination_radius(n)
}

#[derive(Debug, Clone, Serialize)]
pub struct AgentState {
    pub agent_id: usize,
    /// Indexed by arm id. Eliminated arms keep their final state.
    pub per_arm: Vec<DoeArmState>,
    pub candidates: CandidateSet,
    pub sched: ThresholdSchedule,
}

impl AgentState {
    pub fn new(agent_id: usize, k: usize, sched: ThresholdSchedule) -> Self {
        Self {
            agent_id,
            per_arm: (0..k).map(|_| DoeArmState::new(&sched)).collect(),
            candidates: CandidateSet::full(k),
            sched,
        }
    }

    pub fn ci_params(&self) -> &CiParams {
        self.sched.ci_params()
    }

    /// `(lower, upper)` confidence bounds around the local estimate of `arm`.
    pub fn confidence_bounds(&self, arm: usize) -> (f64, f64) {
        let st = &self.per_arm[arm];
        if st.n == 0 {
            return (f64::NEG_INFINITY, f64::INFINITY);
        }
        let mu = st.local_estimate(self.agent_id);
        let r = self.sched.elimination_radius(st.n);
        (mu - r, mu + r)
    }

    /// Candidates whose upper bound lies strictly below some other
    /// candidate's lower bound, ascending.
    ///
    /// The candidate with the largest lower bound can never qualify, so the
    /// result never empties the set.
    pub fn find_eliminations(&self) -> Vec<usize> {
        let arms = self.candidates.arms();
        if arms.len() < 2 {
            return Vec::new();
        }
        let bounds: Vec<(f64, f64)> = arms.iter().map(|&a| self.confidence_bounds(a)).collect();
        let best_lower = bounds.iter().map(|b| b.0).fold(f64::NEG_INFINITY, f64::max);
        arms.iter()
            .zip(&bounds)
            .filter(|(_, (_, upper))| *upper < best_lower)
            .map(|(&a, _)| a)
            .collect()
    }

    /// Applies another agent's elimination notice. Idempotent.
    pub fn handle_elimination_notice(&mut self, arm: usize) -> Result<()> {
        if !self.candidates.contains(arm) {
            return Ok(());
        }
        self.candidates.eliminate(arm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cands(arms: &[usize], pointer: usize) -> CandidateSet {
        CandidateSet::from_parts(arms.to_vec(), pointer).unwrap()
    }

    #[test]
    fn select_round_robin() {
        let mut c = cands(&[1, 2, 3], 0);
        assert_eq!(c.select_arm(), 1);
        assert_eq!(c.pointer(), 1);
        let mut c = cands(&[1, 2, 3], 2);
        assert_eq!(c.select_arm(), 3);
        assert_eq!(c.pointer(), 0);
        let mut c = cands(&[4], 0);
        assert_eq!(c.select_arm(), 4);
        assert_eq!(c.pointer(), 0);
    }

    #[test]
    fn eliminate_cursor_rules() {
        let mut c = cands(&[1, 2, 3], 2);
        c.eliminate(2).unwrap();
        assert_eq!((c.arms(), c.pointer()), (&[1, 3][..], 1));
        let mut c = cands(&[1, 2, 3], 0);
        c.eliminate(3).unwrap();
        assert_eq!((c.arms(), c.pointer()), (&[1, 2][..], 0));
        let mut c = cands(&[1, 2], 1);
        c.eliminate(1).unwrap();
        assert_eq!((c.arms(), c.pointer()), (&[2][..], 0));
    }

    #[test]
    fn eliminate_last_arm_is_an_error() {
        let mut c = cands(&[7], 0);
        assert!(matches!(c.eliminate(7), Err(Error::Internal(_))));
        let mut c = cands(&[1, 2], 0);
        assert!(c.eliminate(5).is_err());
    }

    #[test]
    fn invalid_candidate_sets_rejected() {
        assert!(CandidateSet::from_parts(vec![], 0).is_err());
        assert!(CandidateSet::from_parts(vec![2, 1], 0).is_err());
        assert!(CandidateSet::from_parts(vec![1, 2], 2).is_err());
    }

    fn sched(alpha: f64, beta: f64, m: usize, delta: f64) -> ThresholdSchedule {
        ThresholdSchedule::new(alpha, beta, m, CiParams::new(delta).unwrap()).unwrap()
    }

    #[test]
    fn radius_examples() {
        let s = sched(1.0, 2.0, 2, (-2.0f64).exp());
        assert_relative_eq!(
            elimination_radius(1, &s),
            4.242_640_687_119_285,
            epsilon = 1e-12
        );
        assert_eq!(elimination_radius(0, &s), f64::INFINITY);
        let s3 = sched(1.0, 3.0, 2, (-2.0f64).exp());
        assert_relative_eq!(
            elimination_radius(5, &s3),
            9.0 * s3.ci_params().radius(10),
            epsilon = 1e-15
        );
    }

    /// Agent with one synced state per arm: local estimate `mu`, radius set by `n`.
    fn agent_with(mus: &[f64], n: u64, s: ThresholdSchedule) -> AgentState {
        let mut a = AgentState::new(0, mus.len(), s);
        for (st, &mu) in a.per_arm.iter_mut().zip(mus) {
            *st = DoeArmState::from_parts(n, mu * n as f64, vec![mu * n as f64], n, 1.0);
        }
        a
    }

    /// M = 1, alpha = 1, beta = 2: factor 6; pick delta so that 6 ci(n) = r.
    fn sched_for_radius(r: f64, n: u64) -> ThresholdSchedule {
        // 6 sqrt(L / 2n) = r  =>  L = 2n (r/6)^2
        let l = 2.0 * n as f64 * (r / 6.0).powi(2);
        sched(1.0, 2.0, 1, (-l).exp())
    }

    #[test]
    fn find_eliminations_examples() {
        let n = 100;
        let a = agent_with(&[0.2, 0.9], n, sched_for_radius(0.3, n));
        assert_relative_eq!(a.sched.elimination_radius(n), 0.3, epsilon = 1e-12);
        assert_eq!(a.find_eliminations(), vec![0]);
        let a = agent_with(&[0.2, 0.9], n, sched_for_radius(0.4, n));
        assert!(a.find_eliminations().is_empty());
        let a = agent_with(&[0.2], n, sched_for_radius(0.01, n));
        assert!(a.find_eliminations().is_empty());
    }

    #[test]
    fn unsampled_arms_are_never_eliminated() {
        let s = sched(1.0, 3.0, 2, 0.01);
        let mut a = AgentState::new(0, 3, s);
        a.per_arm[0] =
            DoeArmState::from_parts(10_000, 9_000.0, vec![9_000.0, 9_000.0], 10_000, 0.1);
        assert!(a.find_eliminations().is_empty());
    }

    #[test]
    fn notices_are_idempotent() {
        let s = sched(1.0, 3.0, 2, 0.01);
        let mut a = AgentState::new(1, 4, s);
        a.handle_elimination_notice(2).unwrap();
        assert_eq!(a.candidates.arms(), &[0, 1, 3]);
        a.handle_elimination_notice(2).unwrap();
        a.handle_elimination_notice(9).unwrap();
        assert_eq!(a.candidates.arms(), &[0, 1, 3]);
        assert_eq!(a.per_arm.len(), 4);
    }

    proptest! {
        /// Round-robin with arbitrary eliminations keeps survivors' pull counts within one.
        #[test]
        fn balanced_exploration(k in 2usize..12, ops in proptest::collection::vec((any::<bool>(), 0usize..64), 1..300)) {
            let mut c = CandidateSet::full(k);
            let mut pulls = vec![0u64; k];
            for (elim, pick) in ops {
                if elim && c.len() > 1 {
                    let arm = c.arms()[pick % c.len()];
                    c.eliminate(arm).unwrap();
                } else {
                    pulls[c.select_arm()] += 1;
                }
                prop_assert!(c.pointer() < c.len());
                let live: Vec<u64> = c.arms().iter().map(|&a| pulls[a]).collect();
                let lo = *live.iter().min().unwrap();
                let hi = *live.iter().max().unwrap();
                prop_assert!(hi - lo <= 1);
            }
        }

        /// Eliminations never remove the arm with the best lower bound.
        #[test]
        fn never_empties(mus in proptest::collection::vec(0.0f64..1.0, 1..10), n in 1u64..5000) {
            let a = agent_with(&mus, n, sched(1.0, 3.0, 1, 0.05));
            let out = a.find_eliminations();
            prop_assert!(out.len() < mus.len());
            prop_assert!(out.windows(2).all(|w| w[0] < w[1]));
        }
    }
}

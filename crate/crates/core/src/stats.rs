use crate::error::{Error, Result};
use crate::mdp::Trajectory;
use crate::scalar::Real;

/// Running visit counts, reward sums and transition counts over completed episodes.
///
/// The empirical model `r̂ = reward_sum / N`, `P̂ = trans_count / N` is only
/// ever evaluated at pairs with `N > 0`; planners treat `N = 0` separately.
#[derive(Debug, Clone, PartialEq)]
pub struct VisitStats<R: Real = f64> {
    num_states: usize,
    num_actions: usize,
    counts: Vec<u64>,
    reward_sum: Vec<R>,
    trans_count: Vec<u64>,
    episodes_seen: u64,
}

impl<R: Real> VisitStats<R> {
    pub fn new(num_states: usize, num_actions: usize) -> Self {
        Self {
            num_states,
            num_actions,
            counts: vec![0; num_states * num_actions],
            reward_sum: vec![R::zero(); num_states * num_actions],
            trans_count: vec![0; num_states * num_actions * num_states],
            episodes_seen: 0,
        }
    }

    /// Builds statistics directly from tables; `counts` are derived from
    /// the transition counts so the conservation invariant holds.
    pub fn from_tables(
        num_states: usize,
        num_actions: usize,
        trans_count: Vec<u64>,
        reward_sum: Vec<R>,
        episodes_seen: u64,
    ) -> Result<Self> {
        let pairs = num_states * num_actions;
        if trans_count.len() != pairs * num_states || reward_sum.len() != pairs {
            return Err(Error::Dimension(
                "visit statistics tables have wrong sizes".into(),
            ));
        }
        let counts: Vec<u64> = trans_count
            .chunks(num_states)
            .map(|row| row.iter().sum())
            .collect();
        for (sa, (&n, &r)) in counts.iter().zip(&reward_sum).enumerate() {
            if (n == 0 && r != R::zero()) || r < R::zero() {
                return Err(Error::Parameter(format!(
                    "reward sum {r} inconsistent with count {n} at pair {sa}"
                )));
            }
        }
        Ok(Self {
            num_states,
            num_actions,
            counts,
            reward_sum,
            trans_count,
            episodes_seen,
        })
    }

    /// Folds one trajectory into the statistics.
    pub fn record(&mut self, tau: &Trajectory<R>) {
        for (h, step) in tau.steps.iter().enumerate() {
            let sa = step.state * self.num_actions + step.action;
            self.counts[sa] += 1;
            self.reward_sum[sa] = self.reward_sum[sa] + step.reward;
            self.trans_count[sa * self.num_states + tau.next_state(h)] += 1;
        }
        self.episodes_seen += 1;
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn episodes_seen(&self) -> u64 {
        self.episodes_seen
    }

    pub fn count(&self, s: usize, a: usize) -> u64 {
        self.counts[s * self.num_actions + a]
    }

    pub fn reward_sum(&self, s: usize, a: usize) -> R {
        self.reward_sum[s * self.num_actions + a]
    }

    pub fn transition_counts(&self, s: usize, a: usize) -> &[u64] {
        let base = (s * self.num_actions + a) * self.num_states;
        &self.trans_count[base..base + self.num_states]
    }

    pub fn total_steps(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Visits to state `s` summed over actions.
    pub fn state_count(&self, s: usize) -> u64 {
        self.counts[s * self.num_actions..(s + 1) * self.num_actions]
            .iter()
            .sum()
    }

    /// `r̂(s, a)`, or `None` for an unvisited pair.
    pub fn empirical_reward(&self, s: usize, a: usize) -> Option<R> {
        let n = self.count(s, a);
        (n > 0).then(|| self.reward_sum(s, a) / R::from_u64(n).unwrap())
    }

    /// `P̂(·|s, a)`, or `None` for an unvisited pair.
    pub fn empirical_transition(&self, s: usize, a: usize) -> Option<Vec<R>> {
        let n = self.count(s, a);
        (n > 0).then(|| {
            let n = R::from_u64(n).unwrap();
            self.transition_counts(s, a)
                .iter()
                .map(|&c| R::from_u64(c).unwrap() / n)
                .collect()
        })
    }

    /// `P̂ f(s, a)` for a visited pair, computed as `Σ count(s') f(s') / N`.
    pub fn empirical_expectation(&self, s: usize, a: usize, f: &[R]) -> R {
        let n = R::from_u64(self.count(s, a)).unwrap();
        let total: R = self
            .transition_counts(s, a)
            .iter()
            .zip(f)
            .filter(|(&c, _)| c > 0)
            .map(|(&c, &v)| R::from_u64(c).unwrap() * v)
            .sum();
        total / n
    }

    /// Every table scaled by `factor`, keeping the empirical model unchanged.
    pub fn scaled(&self, factor: u64) -> Self {
        Self {
            num_states: self.num_states,
            num_actions: self.num_actions,
            counts: self.counts.iter().map(|c| c * factor).collect(),
            reward_sum: self
                .reward_sum
                .iter()
                .map(|&r| r * R::from_u64(factor).unwrap())
                .collect(),
            trans_count: self.trans_count.iter().map(|c| c * factor).collect(),
            episodes_seen: self.episodes_seen * factor,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::Step;

    fn traj(steps: &[(usize, usize, f64)], terminal: usize) -> Trajectory<f64> {
        Trajectory {
            episode: 1,
            steps: steps
                .iter()
                .map(|&(state, action, reward)| Step {
                    state,
                    action,
                    reward,
                })
                .collect(),
            terminal_state: terminal,
        }
    }

    #[test]
    fn counts_are_conserved() {
        let mut stats = VisitStats::<f64>::new(2, 2);
        let tau = traj(&[(0, 1, 0.0), (1, 0, 1.0), (1, 0, 0.5)], 0);
        stats.record(&tau);
        assert_eq!(stats.total_steps(), 3);
        assert_eq!(stats.count(1, 0), 2);
        assert_eq!(stats.transition_counts(1, 0), &[1, 1]);
        assert_eq!(stats.transition_counts(0, 1), &[0, 1]);
        assert_eq!(stats.empirical_reward(1, 0), Some(0.75));
        assert_eq!(stats.empirical_reward(0, 0), None);
    }

    #[test]
    fn applying_twice_doubles_counts() {
        let tau = traj(&[(0, 0, 0.2), (0, 1, 0.0)], 1);
        let mut once = VisitStats::<f64>::new(2, 2);
        once.record(&tau);
        let mut twice = once.clone();
        twice.record(&tau);
        assert_eq!(twice, once.scaled(2));
    }

    #[test]
    fn from_tables_rejects_rewards_without_visits() {
        assert!(VisitStats::from_tables(1, 1, vec![0], vec![0.5], 0).is_err());
        let ok = VisitStats::from_tables(1, 2, vec![3, 0], vec![1.5, 0.0], 1).unwrap();
        assert_eq!(ok.count(0, 0), 3);
        assert_eq!(ok.empirical_transition(0, 0), Some(vec![1.0]));
    }
}

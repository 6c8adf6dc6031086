use rand::Rng;

use crate::error::Result;
use crate::mdp::{simulate_episode, Policy, TabularMdp, Trajectory};
use crate::scalar::Real;

/// A learner that only interacts with the environment through executed episodes.
pub trait Agent<R: Real> {
    /// Policy to execute in episode `k` (1-based), computed from past episodes only.
    fn policy(&mut self, k: usize) -> Policy;

    /// Feeds back the trajectory produced by the last returned policy.
    fn observe(&mut self, trajectory: &Trajectory<R>);
}

/// Runs `episodes` episodes of `agent` on `mdp`, calling `observer(k, policy, trajectory)`
/// after each one.
pub fn run_episodes<R, A, G, F>(
    mdp: &TabularMdp<R>,
    agent: &mut A,
    episodes: usize,
    rng: &mut G,
    mut observer: F,
) -> Result<()>
where
    R: Real,
    A: Agent<R> + ?Sized,
    G: Rng + ?Sized,
    F: FnMut(usize, &Policy, &Trajectory<R>),
{
    for k in 1..=episodes {
        let pi = agent.policy(k);
        let tau = simulate_episode(mdp, &pi, k, rng)?;
        agent.observe(&tau);
        observer(k, &pi, &tau);
    }
    Ok(())
}

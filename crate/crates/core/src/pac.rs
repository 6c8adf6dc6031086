//! (ε, δ)-PAC extension: the empirical upper-confidence recursion `Û`, the
//! `ε/8` certification test, and best-policy-identification / mistake-style drivers.

use rand::Rng;

use crate::agent::Agent;
use crate::eqo::{check_epsilon, BonusSchedule, EqoAgent, LogTerms};
use crate::error::{Error, Result};
use crate::mdp::{
    instant_regret, simulate_episode_from, value_iteration, Policy, StateValues, TabularMdp,
};
use crate::scalar::Real;
use crate::stats::VisitStats;

/// `β̂(n) = (99 H² ℓ₁ / ε + 31 H S log(12 S A log(e n) / δ)) / n`, with `log(e n)` taken as `1 + log n`.
pub fn beta_hat<R: Real>(
    n: u64,
    horizon: usize,
    states: usize,
    actions: usize,
    epsilon: R,
    delta: R,
) -> R {
    debug_assert!(n >= 1, "β̂ is only evaluated at visited pairs");
    let h = R::of_usize(horizon);
    let n = R::from_u64(n).unwrap();
    let ell1 = (R::of(24.0) * R::of_usize(horizon * states * actions) / delta).ln();
    let ell3 = (R::of(12.0) * R::of_usize(states * actions) * (R::one() + n.ln()) / delta).ln();
    (R::of(99.0) * h * h * ell1 / epsilon + R::of(31.0) * h * R::of_usize(states) * ell3) / n
}

/// Reporting-only bound `K₀` on the number of uncertified episodes.
pub fn k0_bound<R: Real>(
    horizon: usize,
    states: usize,
    actions: usize,
    epsilon: R,
    delta: R,
) -> Result<R> {
    check_epsilon(epsilon, horizon)?;
    let ell1 = LogTerms::new(horizon, states, actions, 1, delta)?.ell1;
    let (h, s, a) = (
        R::of_usize(horizon),
        R::of_usize(states),
        R::of_usize(actions),
    );
    let ell5 = R::one() + (h * R::one().exp() / epsilon).ln().ln();
    let ell4 = (R::one()
        + R::of(280.0)
            * (h * h * h * ell1 / (epsilon * epsilon)
                + h * h * s * (R::of(2.0) * ell1 + ell5) / epsilon))
        .ln();
    Ok(
        (R::of(12800.0) * h * h * s * a * ell1 * ell4 / (epsilon * epsilon)
            + R::of(4800.0) * h * s * s * a * (R::of(2.0) * ell1 + ell5) * ell4 / epsilon)
            .floor(),
    )
}

/// `Û_h(s)` along one policy; row `H` is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct UhatTable<R: Real = f64> {
    pub values: StateValues<R>,
}

impl<R: Real> UhatTable<R> {
    pub fn get(&self, h: usize, s: usize) -> R {
        self.values.get(h, s)
    }
}

/// Backward recursion `Û_h(s) = min{β̂(N(s,a)) + P̂ Û_{h+1}(s,a), H}` with `a = π_h(s)`;
/// unvisited pairs give `H`.
pub fn compute_u_hat<R: Real>(
    stats: &VisitStats<R>,
    pi: &Policy,
    horizon: usize,
    epsilon: R,
    delta: R,
) -> UhatTable<R> {
    let (states, actions) = (stats.num_states(), stats.num_actions());
    let h_real = R::of_usize(horizon);
    let mut values = StateValues::zeros(horizon, states);
    let mut next = vec![R::zero(); states];
    for h in (0..horizon).rev() {
        next.copy_from_slice(values.row(h + 1));
        for s in 0..states {
            let a = pi.action(h, s);
            let u = match stats.count(s, a) {
                0 => h_real,
                n => (beta_hat(n, horizon, states, actions, epsilon, delta)
                    + stats.empirical_expectation(s, a, &next))
                .min(h_real),
            };
            values.set(h, s, u);
        }
    }
    UhatTable { values }
}

/// Certified policies of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct CertState<R: Real = f64> {
    pub epsilon: R,
    pub delta: R,
    pub budget: usize,
    pub certified: Vec<(usize, Policy)>,
}

impl<R: Real> CertState<R> {
    pub fn new(epsilon: R, delta: R, budget: usize, horizon: usize) -> Result<Self> {
        check_epsilon(epsilon, horizon)?;
        if !(delta > R::zero() && delta <= R::one()) {
            return Err(Error::Parameter(format!("δ = {delta} must lie in (0, 1]")));
        }
        Ok(Self {
            epsilon,
            delta,
            budget,
            certified: Vec::new(),
        })
    }

    /// Records `pi` as certified iff `Û₁(s₁) ≤ ε/8`.
    pub fn certify_step(&mut self, k: usize, pi: &Policy, u1_at_s1: R) -> bool {
        let ok = u1_at_s1 <= self.epsilon / R::of(8.0);
        if ok {
            debug_assert!(self.certified.last().is_none_or(|(prev, _)| *prev < k));
            self.certified.push((k, pi.clone()));
        }
        ok
    }

    pub fn first(&self) -> Option<&(usize, Policy)> {
        self.certified.first()
    }
}

/// One episode of (ε, δ)-EQO as seen before execution.
#[derive(Debug)]
pub struct PacEpisode<'a> {
    pub k: usize,
    pub policy: &'a Policy,
    pub certified: bool,
}

/// Drives EQO with the PAC schedule, certifying each policy before it is executed.
/// Stops right after the first certification when `stop_at_first` is set.
/// Returns the final certification state.
pub fn run_pac_episodes<R, G, F>(
    mdp: &TabularMdp<R>,
    epsilon: R,
    delta: R,
    episodes: usize,
    stop_at_first: bool,
    rng: &mut G,
    mut observer: F,
) -> Result<CertState<R>>
where
    R: Real,
    G: Rng + ?Sized,
    F: FnMut(PacEpisode<'_>),
{
    let horizon = mdp.horizon();
    let mut cert = CertState::new(epsilon, delta, episodes, horizon)?;
    let mut agent = EqoAgent::for_mdp(mdp, BonusSchedule::Pac { epsilon, delta }, false)?;
    for k in 1..=episodes {
        let pi = agent.plan_episode(k).greedy;
        let start = mdp.sample_initial(rng);
        let u_hat = compute_u_hat(agent.stats(), &pi, horizon, epsilon, delta);
        let certified = cert.certify_step(k, &pi, u_hat.get(0, start));
        observer(PacEpisode {
            k,
            policy: &pi,
            certified,
        });
        if certified && stop_at_first {
            break;
        }
        let tau = simulate_episode_from(mdp, &pi, start, k, rng)?;
        agent.observe(&tau);
    }
    Ok(cert)
}

#[derive(Debug, Clone, PartialEq)]
pub enum BpiOutcome {
    Certified {
        policy: Policy,
        episode: usize,
    },
    /// Budget exhausted without a certification.
    Inconclusive {
        episodes_run: usize,
    },
}

/// Best-policy identification: the first certified policy within `budget` episodes.
pub fn run_bpi<R: Real, G: Rng + ?Sized>(
    mdp: &TabularMdp<R>,
    epsilon: R,
    delta: R,
    budget: usize,
    rng: &mut G,
) -> Result<BpiOutcome> {
    if budget == 0 {
        return Err(Error::Parameter("BPI budget must be at least 1".into()));
    }
    let cert = run_pac_episodes(mdp, epsilon, delta, budget, true, rng, |_| {})?;
    Ok(match cert.certified.into_iter().next() {
        Some((episode, policy)) => BpiOutcome::Certified { policy, episode },
        None => BpiOutcome::Inconclusive {
            episodes_run: budget,
        },
    })
}

/// Outcome of a mistake-style PAC run, with ground-truth regrets for audit.
#[derive(Debug, Clone, PartialEq)]
pub struct MistakeReport<R: Real = f64> {
    /// Episodes whose policy was not certified.
    pub uncertified: usize,
    pub certified: Vec<bool>,
    pub regrets: Vec<R>,
}

impl<R: Real> MistakeReport<R> {
    /// Certified episodes whose true regret exceeds `epsilon`.
    pub fn unsound(&self, epsilon: R) -> usize {
        self.certified
            .iter()
            .zip(&self.regrets)
            .filter(|(&c, &r)| c && r > epsilon)
            .count()
    }
}

/// Runs (ε, δ)-EQO for `episodes` episodes without stopping.
pub fn run_mistake_pac<R: Real, G: Rng + ?Sized>(
    mdp: &TabularMdp<R>,
    epsilon: R,
    delta: R,
    episodes: usize,
    rng: &mut G,
) -> Result<MistakeReport<R>> {
    let vstar = value_iteration(mdp);
    let mut certified = Vec::with_capacity(episodes);
    let mut regrets = Vec::with_capacity(episodes);
    let mut failure = None;
    run_pac_episodes(mdp, epsilon, delta, episodes, false, rng, |ep| {
        certified.push(ep.certified);
        match instant_regret(mdp, ep.policy, &vstar) {
            Ok(r) => regrets.push(r),
            Err(e) => failure = Some(e),
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(MistakeReport {
        uncertified: certified.iter().filter(|c| !**c).count(),
        certified,
        regrets,
    })
}

//! Exploration via quasi-optimism: optimistic planning with a `c_k / N(s, a)`
//! bonus, its uniform-reward variant, and the bonus-constant schedules.
//!
//! All logarithms are natural.

use rand::Rng;

use crate::agent::{run_episodes, Agent};
use crate::error::{Error, Result};
use crate::mdp::{backward_plan, Policy, TabularMdp, Trajectory, ValueTables};
use crate::scalar::Real;
use crate::stats::VisitStats;

/// How the bonus constant `c_k` is chosen for episode `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BonusSchedule<R: Real = f64> {
    /// Constant `c` tuned for a known number of episodes `K`.
    FixedK { episodes: usize, delta: R },
    /// `c_k` refreshed at powers of two; valid for every `K`.
    Anytime { delta: R },
    /// `c = 63 H² ℓ₁ / ε`, for the PAC tasks.
    Pac { epsilon: R, delta: R },
    /// A single hand-tuned constant.
    Manual { c: R },
}

impl<R: Real> BonusSchedule<R> {
    pub fn validate(&self, horizon: usize) -> Result<()> {
        match *self {
            BonusSchedule::FixedK { episodes, delta } => {
                check_delta(delta)?;
                if episodes == 0 {
                    return Err(Error::Parameter("fixed-K schedule needs K ≥ 1".into()));
                }
            }
            BonusSchedule::Anytime { delta } => check_delta(delta)?,
            BonusSchedule::Pac { epsilon, delta } => {
                check_delta(delta)?;
                check_epsilon(epsilon, horizon)?;
            }
            BonusSchedule::Manual { c } => {
                if !(c > R::zero() && c.is_finite()) {
                    return Err(Error::Parameter(format!(
                        "manual bonus c = {c} must be positive"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `c_k` for episode `k ≥ 1`.
    pub fn constant(&self, horizon: usize, states: usize, actions: usize, k: usize) -> Result<R> {
        match *self {
            BonusSchedule::FixedK { episodes, delta } => {
                c_fixed(horizon, states, actions, episodes, delta)
            }
            BonusSchedule::Anytime { delta } => c_anytime(horizon, states, actions, k, delta),
            BonusSchedule::Pac { epsilon, delta } => {
                c_pac(horizon, states, actions, epsilon, delta)
            }
            BonusSchedule::Manual { c } => {
                self.validate(horizon)?;
                Ok(c)
            }
        }
    }

    /// `λ_k = 7 H ℓ_{1,k} / c_k`, the slack in `V^k_h + (3/2) λ_k H ≥ V*_h`.
    /// Undefined for a manual schedule.
    pub fn lambda(
        &self,
        horizon: usize,
        states: usize,
        actions: usize,
        k: usize,
    ) -> Result<Option<R>> {
        let ell = match *self {
            BonusSchedule::FixedK { delta, .. } | BonusSchedule::Pac { delta, .. } => {
                LogTerms::new(horizon, states, actions, 1, delta)?.ell1
            }
            BonusSchedule::Anytime { delta } => {
                LogTerms::new(horizon, states, actions, k, delta)?.ell1_k
            }
            BonusSchedule::Manual { .. } => return Ok(None),
        };
        let c = self.constant(horizon, states, actions, k)?;
        Ok(Some(R::of(7.0) * R::of_usize(horizon) * ell / c))
    }
}

fn check_delta<R: Real>(delta: R) -> Result<()> {
    if delta > R::zero() && delta <= R::one() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("δ = {delta} must lie in (0, 1]")))
    }
}

pub(crate) fn check_epsilon<R: Real>(epsilon: R, horizon: usize) -> Result<()> {
    if epsilon > R::zero() && epsilon <= R::of_usize(horizon) {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "ε = {epsilon} must lie in (0, H = {horizon}]"
        )))
    }
}

/// Logarithmic factors shared by the schedules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogTerms<R: Real = f64> {
    /// `log(24 H S A / δ)`.
    pub ell1: R,
    /// `log(24 H S A (1 + ⌊log₂ k⌋)² / δ)`.
    pub ell1_k: R,
    /// `2^⌊log₂ k⌋`.
    pub k2: usize,
    sa: R,
    horizon: R,
}

impl<R: Real> LogTerms<R> {
    pub fn new(horizon: usize, states: usize, actions: usize, k: usize, delta: R) -> Result<Self> {
        check_delta(delta)?;
        if k == 0 {
            return Err(Error::Parameter("episode index k starts at 1".into()));
        }
        let base = R::of(24.0) * R::of_usize(horizon * states * actions) / delta;
        let floor_log2 = k.ilog2() as usize;
        let iota = R::of_usize(1 + floor_log2);
        Ok(Self {
            ell1: base.ln(),
            ell1_k: (base * iota * iota).ln(),
            k2: 1 << floor_log2,
            sa: R::of_usize(states * actions),
            horizon: R::of_usize(horizon),
        })
    }

    /// `ℓ_{2,m} = log(1 + m H / (S A))`.
    pub fn ell2_at(&self, m: usize) -> R {
        (R::one() + R::of_usize(m) * self.horizon / self.sa).ln()
    }
}

fn regret_constant<R: Real>(horizon: usize, sa: usize, ell1: R, m: usize, ell2: R) -> R {
    let h = R::of_usize(horizon);
    let first = R::of(7.0) * h * ell1;
    let second = R::of(1.4) * h * (R::of_usize(m) * ell1 / (R::of_usize(sa) * ell2)).sqrt();
    first.max(second)
}

/// `max{7 H ℓ₁, 1.4 H √(K ℓ₁ / (S A ℓ_{2,K}))}` for a known episode count `K`.
pub fn c_fixed<R: Real>(
    horizon: usize,
    states: usize,
    actions: usize,
    episodes: usize,
    delta: R,
) -> Result<R> {
    if episodes == 0 {
        return Err(Error::Parameter("K must be at least 1".into()));
    }
    let logs = LogTerms::new(horizon, states, actions, 1, delta)?;
    Ok(regret_constant(
        horizon,
        states * actions,
        logs.ell1,
        episodes,
        logs.ell2_at(episodes),
    ))
}

/// `max{7 H ℓ_{1,k}, 1.4 H √(k₂ ℓ_{1,k} / (S A ℓ_{2,k₂}))}`, constant between powers of two.
pub fn c_anytime<R: Real>(
    horizon: usize,
    states: usize,
    actions: usize,
    k: usize,
    delta: R,
) -> Result<R> {
    let logs = LogTerms::new(horizon, states, actions, k, delta)?;
    Ok(regret_constant(
        horizon,
        states * actions,
        logs.ell1_k,
        logs.k2,
        logs.ell2_at(logs.k2),
    ))
}

/// `63 H² ℓ₁ / ε`.
pub fn c_pac<R: Real>(
    horizon: usize,
    states: usize,
    actions: usize,
    epsilon: R,
    delta: R,
) -> Result<R> {
    check_epsilon(epsilon, horizon)?;
    let logs = LogTerms::new(horizon, states, actions, 1, delta)?;
    let h = R::of_usize(horizon);
    Ok(R::of(63.0) * h * h * logs.ell1 / epsilon)
}

/// Optimistic planning on the empirical model with bonus `c_k / N(s, a)`,
/// clipped at `H`. Unvisited pairs get `Q = H`.
pub fn plan<R: Real>(stats: &VisitStats<R>, c_k: R, horizon: usize) -> ValueTables<R> {
    let h_real = R::of_usize(horizon);
    backward_plan(
        horizon,
        stats.num_states(),
        stats.num_actions(),
        |_, s, a, next| match stats.count(s, a) {
            0 => h_real,
            n => {
                let n = R::from_u64(n).unwrap();
                let r_hat = stats.reward_sum(s, a) / n;
                (r_hat + c_k / n + stats.empirical_expectation(s, a, next)).min(h_real)
            }
        },
    )
}

/// Planning for per-step rewards in `[0, 1]`: the bonus at (0-based) step `h` is
/// `c' (H − h) / N(s, a)` and values are clipped at the remaining horizon `H − h`.
pub fn plan_uniform<R: Real>(stats: &VisitStats<R>, c_prime: R, horizon: usize) -> ValueTables<R> {
    backward_plan(
        horizon,
        stats.num_states(),
        stats.num_actions(),
        |h, s, a, next| {
            let remaining = R::of_usize(horizon - h);
            match stats.count(s, a) {
                0 => remaining,
                n => {
                    let n = R::from_u64(n).unwrap();
                    let r_hat = stats.reward_sum(s, a) / n;
                    (r_hat + c_prime * remaining / n + stats.empirical_expectation(s, a, next))
                        .min(remaining)
                }
            }
        },
    )
}

/// EQO as an [`Agent`]. In uniform-reward mode the schedule's `c_k` is
/// mapped to `c'_k = c_k / H`.
#[derive(Debug, Clone)]
pub struct EqoAgent<R: Real = f64> {
    schedule: BonusSchedule<R>,
    uniform: bool,
    horizon: usize,
    stats: VisitStats<R>,
}

impl<R: Real> EqoAgent<R> {
    pub fn new(
        schedule: BonusSchedule<R>,
        num_states: usize,
        num_actions: usize,
        horizon: usize,
        uniform: bool,
    ) -> Result<Self> {
        schedule.validate(horizon)?;
        Ok(Self {
            schedule,
            uniform,
            horizon,
            stats: VisitStats::new(num_states, num_actions),
        })
    }

    pub fn for_mdp(mdp: &TabularMdp<R>, schedule: BonusSchedule<R>, uniform: bool) -> Result<Self> {
        Self::new(
            schedule,
            mdp.num_states(),
            mdp.num_actions(),
            mdp.horizon(),
            uniform,
        )
    }

    pub fn stats(&self) -> &VisitStats<R> {
        &self.stats
    }

    pub fn schedule(&self) -> &BonusSchedule<R> {
        &self.schedule
    }

    /// `c_k` for episode `k`.
    pub fn bonus_constant(&self, k: usize) -> R {
        self.schedule
            .constant(
                self.horizon,
                self.stats.num_states(),
                self.stats.num_actions(),
                k,
            )
            .expect("schedule validated at construction")
    }

    /// Value tables the agent plans with in episode `k`.
    pub fn plan_episode(&self, k: usize) -> ValueTables<R> {
        let c = self.bonus_constant(k);
        if self.uniform {
            plan_uniform(&self.stats, c / R::of_usize(self.horizon), self.horizon)
        } else {
            plan(&self.stats, c, self.horizon)
        }
    }
}

impl<R: Real> Agent<R> for EqoAgent<R> {
    fn policy(&mut self, k: usize) -> Policy {
        self.plan_episode(k).greedy
    }

    fn observe(&mut self, trajectory: &Trajectory<R>) {
        self.stats.record(trajectory);
    }
}

/// Runs EQO for `episodes` episodes and returns every executed policy with its trajectory.
/// `observer(k, policy, trajectory)` is called after each episode.
pub fn eqo_run<R, G, F>(
    mdp: &TabularMdp<R>,
    schedule: BonusSchedule<R>,
    episodes: usize,
    uniform: bool,
    rng: &mut G,
    mut observer: F,
) -> Result<Vec<(Policy, Trajectory<R>)>>
where
    R: Real,
    G: Rng + ?Sized,
    F: FnMut(usize, &Policy, &Trajectory<R>),
{
    if let BonusSchedule::FixedK {
        episodes: planned, ..
    } = schedule
    {
        if planned != episodes {
            return Err(Error::Config(format!(
                "fixed-K schedule tuned for K = {planned} but the run has K = {episodes}"
            )));
        }
    }
    let mut agent = EqoAgent::for_mdp(mdp, schedule, uniform)?;
    let mut history = Vec::with_capacity(episodes);
    run_episodes(mdp, &mut agent, episodes, rng, |k, pi, tau| {
        observer(k, pi, tau);
        history.push((pi.clone(), tau.clone()));
    })?;
    Ok(history)
}

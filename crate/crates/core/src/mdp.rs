//! Finite-horizon, time-homogeneous tabular MDPs: validated construction,
//! exact backward planning and episode simulation.
//!
//! Steps are 0-based throughout the crate: step `h` in `0..H` is the
//! `(h+1)`-th action of an episode, and value tables carry an extra row
//! `h = H` that is identically zero.

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{argmax_first, Real};

/// How a realized reward is drawn around its conditional mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RewardNoise {
    /// `R = reward_mean(s, a, s')`.
    #[default]
    Deterministic,
    /// `R ∈ {0, H}` with `P(R = H) = reward_mean(s, a, s') / H`.
    BernoulliScaled,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState<R: Real = f64> {
    Fixed(usize),
    Categorical(Vec<R>),
}

/// Ground-truth environment. Rewards are conditioned on the next state;
/// the marginal `r(s, a)` is derived at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp<R: Real = f64> {
    num_states: usize,
    num_actions: usize,
    horizon: usize,
    transition: Vec<R>,
    reward_mean: Vec<R>,
    mean_reward: Vec<R>,
    initial: InitialState<R>,
    noise: RewardNoise,
}

/// Rows within this distance of summing to one are renormalized.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

fn row_tolerance<R: Real>(len: usize) -> R {
    R::of(ROW_SUM_TOLERANCE).max(R::epsilon() * R::of_usize(4 * len.max(1)))
}

impl<R: Real> TabularMdp<R> {
    /// Builds and validates an MDP.
    ///
    /// `transition` and `reward_mean` are dense `S × A × S` tables in
    /// `[s][a][s']` order. Rows within [`ROW_SUM_TOLERANCE`] of one are
    /// renormalized; anything else is rejected, as is any reward outside
    /// `[0, H]` or an optimal value outside `[0, H]`.
    pub fn new(
        num_states: usize,
        num_actions: usize,
        horizon: usize,
        mut transition: Vec<R>,
        reward_mean: Vec<R>,
        initial: InitialState<R>,
    ) -> Result<Self> {
        if num_states == 0 || num_actions == 0 || horizon == 0 {
            return Err(Error::Dimension(format!(
                "S={num_states}, A={num_actions}, H={horizon} must all be positive"
            )));
        }
        let table = num_states * num_actions * num_states;
        if transition.len() != table || reward_mean.len() != table {
            return Err(Error::Dimension(format!(
                "expected {table} entries in transition and reward tables, got {} and {}",
                transition.len(),
                reward_mean.len()
            )));
        }
        let h_real = R::of_usize(horizon);
        let tol = row_tolerance::<R>(num_states);
        for s in 0..num_states {
            for a in 0..num_actions {
                let base = (s * num_actions + a) * num_states;
                let row = &mut transition[base..base + num_states];
                if let Some(p) = row.iter().find(|p| !p.is_finite() || **p < R::zero()) {
                    return Err(Error::InvalidTransition {
                        state: s,
                        action: a,
                        reason: format!("has invalid entry {p}"),
                    });
                }
                let sum: R = row.iter().copied().sum();
                if (sum - R::one()).abs() > tol {
                    return Err(Error::InvalidTransition {
                        state: s,
                        action: a,
                        reason: format!("sums to {sum}, not 1"),
                    });
                }
                // sums already equal to one up to rounding are kept bit-for-bit
                if (sum - R::one()).abs() > R::epsilon() * R::of_usize(num_states) {
                    row.iter_mut().for_each(|p| *p = *p / sum);
                }
                for (next, &m) in reward_mean[base..base + num_states].iter().enumerate() {
                    if !m.is_finite() || m < R::zero() || m > h_real {
                        return Err(Error::InvalidReward {
                            state: s,
                            action: a,
                            reason: format!("to s'={next} is {m}, outside [0, {horizon}]"),
                        });
                    }
                }
            }
        }
        match &initial {
            InitialState::Fixed(s) if *s >= num_states => {
                return Err(Error::Dimension(format!(
                    "initial state {s} out of range for S={num_states}"
                )))
            }
            InitialState::Categorical(dist) => {
                if dist.len() != num_states || dist.iter().any(|p| !p.is_finite() || *p < R::zero())
                {
                    return Err(Error::Dimension(
                        "initial distribution must be a nonnegative vector of length S".into(),
                    ));
                }
                let sum: R = dist.iter().copied().sum();
                if (sum - R::one()).abs() > tol {
                    return Err(Error::Parameter(format!(
                        "initial distribution sums to {sum}, not 1"
                    )));
                }
            }
            _ => {}
        }
        let initial = match initial {
            InitialState::Categorical(dist) => {
                let sum: R = dist.iter().copied().sum();
                InitialState::Categorical(dist.into_iter().map(|p| p / sum).collect())
            }
            fixed => fixed,
        };

        let mean_reward = (0..num_states * num_actions)
            .map(|sa| {
                let base = sa * num_states;
                (0..num_states)
                    .map(|n| transition[base + n] * reward_mean[base + n])
                    .sum()
            })
            .collect::<Vec<R>>();
        for (sa, &r) in mean_reward.iter().enumerate() {
            if r > h_real {
                return Err(Error::InvalidReward {
                    state: sa / num_actions,
                    action: sa % num_actions,
                    reason: format!("has marginal mean {r} above H = {horizon}"),
                });
            }
        }

        let mdp = Self {
            num_states,
            num_actions,
            horizon,
            transition,
            reward_mean,
            mean_reward,
            initial,
            noise: RewardNoise::Deterministic,
        };
        mdp.check_bounded_values()?;
        Ok(mdp)
    }

    /// Optimal values must lie in `[0, H]` for every step and state.
    fn check_bounded_values(&self) -> Result<()> {
        let tables = value_iteration(self);
        let h_real = R::of_usize(self.horizon);
        let slack = R::of(1e-9) * h_real;
        for h in 0..self.horizon {
            for s in 0..self.num_states {
                let v = tables.v(h, s);
                if v < -slack || v > h_real + slack {
                    return Err(Error::ValueOutOfRange {
                        step: h + 1,
                        state: s,
                        value: v.as_f64(),
                        horizon: self.horizon,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn with_noise(mut self, noise: RewardNoise) -> Self {
        self.noise = noise;
        self
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn noise(&self) -> RewardNoise {
        self.noise
    }

    pub fn initial(&self) -> &InitialState<R> {
        &self.initial
    }

    /// `P(·|s, a)`.
    pub fn transition_row(&self, s: usize, a: usize) -> &[R] {
        let base = (s * self.num_actions + a) * self.num_states;
        &self.transition[base..base + self.num_states]
    }

    /// Conditional reward means `reward_mean(s, a, ·)`.
    pub fn reward_row(&self, s: usize, a: usize) -> &[R] {
        let base = (s * self.num_actions + a) * self.num_states;
        &self.reward_mean[base..base + self.num_states]
    }

    /// Marginal reward mean `r(s, a) = Σ_{s'} P(s'|s,a) reward_mean(s,a,s')`.
    pub fn mean_reward(&self, s: usize, a: usize) -> R {
        self.mean_reward[s * self.num_actions + a]
    }

    /// Expected value of `values` (indexed by state) under the initial state distribution.
    pub fn initial_value(&self, values: &[R]) -> R {
        match &self.initial {
            InitialState::Fixed(s) => values[*s],
            InitialState::Categorical(dist) => dist.iter().zip(values).map(|(&p, &v)| p * v).sum(),
        }
    }

    pub fn sample_initial<G: Rng + ?Sized>(&self, rng: &mut G) -> usize {
        match &self.initial {
            InitialState::Fixed(s) => *s,
            InitialState::Categorical(dist) => sample_categorical(dist, rng),
        }
    }

    fn expect(&self, s: usize, a: usize, values: &[R]) -> R {
        self.transition_row(s, a)
            .iter()
            .zip(values)
            .map(|(&p, &v)| p * v)
            .sum()
    }
}

/// Draws an index from a probability vector by inversion.
pub(crate) fn sample_categorical<R: Real, G: Rng + ?Sized>(probs: &[R], rng: &mut G) -> usize {
    let u = R::of(rng.random::<f64>());
    let mut acc = R::zero();
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > R::zero() {
            last_positive = i;
            acc = acc + p;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

/// Deterministic non-stationary policy: one action per (step, state).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Policy {
    horizon: usize,
    num_states: usize,
    actions: Vec<usize>,
}

impl Policy {
    pub fn from_fn(horizon: usize, num_states: usize, f: impl Fn(usize, usize) -> usize) -> Self {
        let actions = (0..horizon)
            .flat_map(|h| (0..num_states).map(move |s| (h, s)))
            .map(|(h, s)| f(h, s))
            .collect();
        Self {
            horizon,
            num_states,
            actions,
        }
    }

    /// The same action everywhere.
    pub fn constant(horizon: usize, num_states: usize, action: usize) -> Self {
        Self::from_fn(horizon, num_states, |_, _| action)
    }

    /// Builds a policy from a flat `H × S` table, rejecting out-of-range actions.
    pub fn from_table(
        horizon: usize,
        num_states: usize,
        num_actions: usize,
        actions: Vec<usize>,
    ) -> Result<Self> {
        if actions.len() != horizon * num_states {
            return Err(Error::Dimension(format!(
                "policy table has {} entries, expected {}",
                actions.len(),
                horizon * num_states
            )));
        }
        if let Some(a) = actions.iter().find(|&&a| a >= num_actions) {
            return Err(Error::Dimension(format!(
                "action {a} out of range for A={num_actions}"
            )));
        }
        Ok(Self {
            horizon,
            num_states,
            actions,
        })
    }

    pub fn action(&self, h: usize, s: usize) -> usize {
        self.actions[h * self.num_states + s]
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.actions
    }

    /// Checks dimensions and action range against `mdp`.
    pub fn check<R: Real>(&self, mdp: &TabularMdp<R>) -> Result<()> {
        if self.horizon != mdp.horizon || self.num_states != mdp.num_states {
            return Err(Error::Dimension(format!(
                "policy is {}×{}, MDP has H={} S={}",
                self.horizon, self.num_states, mdp.horizon, mdp.num_states
            )));
        }
        if let Some(a) = self.actions.iter().find(|&&a| a >= mdp.num_actions) {
            return Err(Error::Dimension(format!(
                "policy action {a} out of range for A={}",
                mdp.num_actions
            )));
        }
        Ok(())
    }
}

/// `(H+1) × S` table of state values; row `H` is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct StateValues<R: Real = f64> {
    num_states: usize,
    values: Vec<R>,
}

impl<R: Real> StateValues<R> {
    pub fn zeros(horizon: usize, num_states: usize) -> Self {
        Self {
            num_states,
            values: vec![R::zero(); (horizon + 1) * num_states],
        }
    }

    pub fn get(&self, h: usize, s: usize) -> R {
        self.values[h * self.num_states + s]
    }

    pub fn set(&mut self, h: usize, s: usize, v: R) {
        self.values[h * self.num_states + s] = v;
    }

    /// All states' values at step `h`.
    pub fn row(&self, h: usize) -> &[R] {
        &self.values[h * self.num_states..(h + 1) * self.num_states]
    }

    pub fn horizon(&self) -> usize {
        self.values.len() / self.num_states - 1
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }
}

/// Output of a planner: values, action values and the greedy policy.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTables<R: Real = f64> {
    num_actions: usize,
    pub values: StateValues<R>,
    q: Vec<R>,
    pub greedy: Policy,
}

impl<R: Real> ValueTables<R> {
    pub fn v(&self, h: usize, s: usize) -> R {
        self.values.get(h, s)
    }

    pub fn q(&self, h: usize, s: usize, a: usize) -> R {
        self.q[(h * self.values.num_states + s) * self.num_actions + a]
    }

    pub fn horizon(&self) -> usize {
        self.greedy.horizon
    }

    pub fn num_states(&self) -> usize {
        self.values.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }
}

/// Backward induction shared by every planner: `q_fn(h, s, a, next_values)`
/// returns `Q_h(s, a)` given the step-`h+1` state values.
pub(crate) fn backward_plan<R: Real>(
    horizon: usize,
    num_states: usize,
    num_actions: usize,
    mut q_fn: impl FnMut(usize, usize, usize, &[R]) -> R,
) -> ValueTables<R> {
    let mut values = StateValues::zeros(horizon, num_states);
    let mut q = vec![R::zero(); horizon * num_states * num_actions];
    let mut greedy = vec![0usize; horizon * num_states];
    let mut next = vec![R::zero(); num_states];
    for h in (0..horizon).rev() {
        next.copy_from_slice(values.row(h + 1));
        for s in 0..num_states {
            let base = (h * num_states + s) * num_actions;
            for a in 0..num_actions {
                q[base + a] = q_fn(h, s, a, &next);
            }
            let (best, best_val) = argmax_first(&q[base..base + num_actions]);
            greedy[h * num_states + s] = best;
            values.set(h, s, best_val);
        }
    }
    ValueTables {
        num_actions,
        values,
        q,
        greedy: Policy {
            horizon,
            num_states,
            actions: greedy,
        },
    }
}

/// Exact finite-horizon Bellman optimality recursion,
/// `Q*_h(s,a) = r(s,a) + P V*_{h+1}(s,a)`.
pub fn value_iteration<R: Real>(mdp: &TabularMdp<R>) -> ValueTables<R> {
    backward_plan(
        mdp.horizon,
        mdp.num_states,
        mdp.num_actions,
        |_, s, a, next| mdp.mean_reward(s, a) + mdp.expect(s, a, next),
    )
}

/// `V^π_h(s) = r(s, π_h(s)) + P V^π_{h+1}(s, π_h(s))`.
pub fn policy_evaluation<R: Real>(mdp: &TabularMdp<R>, pi: &Policy) -> Result<StateValues<R>> {
    pi.check(mdp)?;
    let mut values = StateValues::zeros(mdp.horizon, mdp.num_states);
    let mut next = vec![R::zero(); mdp.num_states];
    for h in (0..mdp.horizon).rev() {
        next.copy_from_slice(values.row(h + 1));
        for s in 0..mdp.num_states {
            let a = pi.action(h, s);
            values.set(h, s, mdp.mean_reward(s, a) + mdp.expect(s, a, &next));
        }
    }
    Ok(values)
}

/// `V*_1(s_1) − V^π_1(s_1)`, averaged over the initial distribution when it is not fixed.
pub fn instant_regret<R: Real>(
    mdp: &TabularMdp<R>,
    pi: &Policy,
    vstar: &ValueTables<R>,
) -> Result<R> {
    if vstar.horizon() != mdp.horizon
        || vstar.num_states() != mdp.num_states
        || vstar.num_actions() != mdp.num_actions
    {
        return Err(Error::Dimension(
            "optimal value tables do not match the MDP".into(),
        ));
    }
    let vpi = policy_evaluation(mdp, pi)?;
    Ok(mdp.initial_value(vstar.values.row(0)) - mdp.initial_value(vpi.row(0)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step<R: Real = f64> {
    pub state: usize,
    pub action: usize,
    pub reward: R,
}

/// One episode: exactly `H` steps plus the state reached after the last action.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<R: Real = f64> {
    pub episode: usize,
    pub steps: Vec<Step<R>>,
    pub terminal_state: usize,
}

impl<R: Real> Trajectory<R> {
    /// State after step `h`; `next_state(H-1)` is the terminal state.
    pub fn next_state(&self, h: usize) -> usize {
        self.steps
            .get(h + 1)
            .map_or(self.terminal_state, |step| step.state)
    }

    pub fn initial_state(&self) -> usize {
        self.steps[0].state
    }

    pub fn total_reward(&self) -> R {
        self.steps.iter().map(|s| s.reward).sum()
    }
}

/// Executes `pi` for one episode starting from a sampled initial state.
pub fn simulate_episode<R: Real, G: Rng + ?Sized>(
    mdp: &TabularMdp<R>,
    pi: &Policy,
    episode: usize,
    rng: &mut G,
) -> Result<Trajectory<R>> {
    pi.check(mdp)?;
    let start = mdp.sample_initial(rng);
    Ok(rollout(mdp, pi, start, episode, rng))
}

/// Executes `pi` from a given initial state.
pub fn simulate_episode_from<R: Real, G: Rng + ?Sized>(
    mdp: &TabularMdp<R>,
    pi: &Policy,
    start: usize,
    episode: usize,
    rng: &mut G,
) -> Result<Trajectory<R>> {
    pi.check(mdp)?;
    if start >= mdp.num_states {
        return Err(Error::Dimension(format!(
            "start state {start} out of range"
        )));
    }
    Ok(rollout(mdp, pi, start, episode, rng))
}

fn rollout<R: Real, G: Rng + ?Sized>(
    mdp: &TabularMdp<R>,
    pi: &Policy,
    start: usize,
    episode: usize,
    rng: &mut G,
) -> Trajectory<R> {
    let mut steps = Vec::with_capacity(mdp.horizon);
    let mut state = start;
    for h in 0..mdp.horizon {
        let action = pi.action(h, state);
        let next = sample_categorical(mdp.transition_row(state, action), rng);
        let mean = mdp.reward_row(state, action)[next];
        let reward = match mdp.noise {
            RewardNoise::Deterministic => mean,
            RewardNoise::BernoulliScaled => {
                let h_real = R::of_usize(mdp.horizon);
                if R::of(rng.random::<f64>()) * h_real < mean {
                    h_real
                } else {
                    R::zero()
                }
            }
        };
        steps.push(Step {
            state,
            action,
            reward,
        });
        state = next;
    }
    Trajectory {
        episode,
        steps,
        terminal_state: state,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Best initial value over every deterministic policy, by enumeration.
    pub(crate) fn brute_force_optimum(mdp: &TabularMdp<f64>) -> f64 {
        let (h, s, a) = (mdp.horizon(), mdp.num_states(), mdp.num_actions());
        let cells = h * s;
        let total = a.pow(cells as u32);
        (0..total)
            .map(|mut code| {
                let table = (0..cells)
                    .map(|_| {
                        let act = code % a;
                        code /= a;
                        act
                    })
                    .collect();
                let pi = Policy::from_table(h, s, a, table).unwrap();
                mdp.initial_value(policy_evaluation(mdp, &pi).unwrap().row(0))
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// s0 --a0--> s0 (reward 0), s0 --a1--> s1 (reward 0), s1 --any--> s1 (reward 1).
    fn two_state_chain() -> TabularMdp<f64> {
        let t = vec![1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0];
        let r = vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0];
        TabularMdp::new(2, 2, 2, t, r, InitialState::Fixed(0)).unwrap()
    }

    #[test]
    fn zero_reward_values_are_zero() {
        let t = vec![0.5, 0.5, 1.0, 0.0, 0.0, 1.0, 0.3, 0.7];
        let mdp = TabularMdp::new(2, 2, 3, t, vec![0.0; 8], InitialState::Fixed(0)).unwrap();
        let vi = value_iteration(&mdp);
        for h in 0..=3 {
            for s in 0..2 {
                assert_eq!(vi.v(h, s), 0.0);
            }
        }
        let pi = Policy::constant(3, 2, 1);
        let vpi = policy_evaluation(&mdp, &pi).unwrap();
        assert!(vpi.row(0).iter().all(|&v| v == 0.0));
        assert_eq!(instant_regret(&mdp, &pi, &vi).unwrap(), 0.0);
    }

    #[test]
    fn chain_optimum_matches_enumeration() {
        let mdp = two_state_chain();
        let vi = value_iteration(&mdp);
        assert_eq!(vi.v(0, 0), brute_force_optimum(&mdp));
        assert_eq!(vi.v(0, 0), 1.0);
        assert_eq!(vi.greedy.action(0, 0), 1);
    }

    #[test]
    fn greedy_policy_evaluates_to_optimum() {
        let mdp = two_state_chain();
        let vi = value_iteration(&mdp);
        let vpi = policy_evaluation(&mdp, &vi.greedy).unwrap();
        for h in 0..=2 {
            for s in 0..2 {
                assert!((vpi.get(h, s) - vi.v(h, s)).abs() < 1e-12);
            }
        }
        assert!(instant_regret(&mdp, &vi.greedy, &vi).unwrap().abs() < 1e-12);
    }

    #[test]
    fn rows_near_one_are_renormalized_and_far_rows_rejected() {
        let ok = TabularMdp::new(
            1,
            1,
            1,
            vec![1.0 - 5e-10],
            vec![0.0],
            InitialState::Fixed(0),
        )
        .unwrap();
        assert_eq!(ok.transition_row(0, 0), &[1.0]);
        let err = TabularMdp::new(
            2,
            1,
            1,
            vec![0.5, 0.4, 0.0, 1.0],
            vec![0.0; 4],
            InitialState::Fixed(0),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::InvalidTransition {
                state: 0,
                action: 0,
                ..
            }
        ));
    }

    #[test]
    fn negative_rewards_and_unbounded_values_rejected() {
        let err =
            TabularMdp::new(1, 1, 2, vec![1.0], vec![-0.1], InitialState::Fixed(0)).unwrap_err();
        assert!(matches!(err, Error::InvalidReward { .. }));
        // reward 2 per step over H = 2 steps gives V* = 4 > H
        let err =
            TabularMdp::new(1, 1, 2, vec![1.0], vec![2.0], InitialState::Fixed(0)).unwrap_err();
        assert!(matches!(err, Error::ValueOutOfRange { step: 1, .. }));
    }

    #[test]
    fn deterministic_mdp_trajectory_ignores_rng() {
        let mdp = two_state_chain();
        let pi = Policy::constant(2, 2, 1);
        let a = simulate_episode(&mdp, &pi, 1, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = simulate_episode(&mdp, &pi, 1, &mut ChaCha8Rng::seed_from_u64(99)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.steps.len(), 2);
        assert_eq!(a.total_reward(), 1.0);
        assert_eq!(a.terminal_state, 1);
    }

    #[test]
    fn bernoulli_scaled_noise_has_right_mean() {
        let mdp = TabularMdp::new(1, 1, 4, vec![1.0], vec![0.7], InitialState::Fixed(0))
            .unwrap()
            .with_noise(RewardNoise::BernoulliScaled);
        let pi = Policy::constant(4, 1, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut sum = 0.0;
        let mut n = 0.0;
        while n < 100_000.0 {
            let traj = simulate_episode(&mdp, &pi, 1, &mut rng).unwrap();
            for step in &traj.steps {
                assert!(step.reward == 0.0 || step.reward == 4.0);
                sum += step.reward;
                n += 1.0;
            }
        }
        let p: f64 = 0.7 / 4.0;
        let se = 4.0 * (p * (1.0 - p) / n).sqrt();
        assert!((sum / n - 0.7).abs() < 3.0 * se, "mean {}", sum / n);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let mdp = two_state_chain();
        assert!(policy_evaluation(&mdp, &Policy::constant(3, 2, 0)).is_err());
        assert!(policy_evaluation(&mdp, &Policy::constant(2, 2, 5)).is_err());
    }

    #[test]
    fn categorical_initial_state_is_averaged() {
        let t = vec![1.0, 0.0, 0.0, 1.0];
        let r = vec![0.0, 0.0, 0.0, 1.0];
        let mdp =
            TabularMdp::<f64>::new(2, 1, 1, t, r, InitialState::Categorical(vec![0.25, 0.75]))
                .unwrap();
        let vi = value_iteration(&mdp);
        assert!((mdp.initial_value(vi.values.row(0)) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn works_in_single_precision() {
        let t = vec![0.5f32, 0.5, 0.0, 1.0];
        let r = vec![0.0f32, 1.0, 0.0, 1.0];
        let mdp = TabularMdp::new(2, 1, 2, t, r, InitialState::Fixed(0)).unwrap();
        let vi = value_iteration(&mdp);
        assert!((vi.v(0, 0) - 1.25).abs() < 1e-6);
    }
}

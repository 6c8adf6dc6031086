//! Comparison agents sharing the [`Agent`] loop: UCBVI-style optimism,
//! posterior sampling and a uniformly random policy.
//!
//! UCBVI constants (declared deviation surface, natural logs,
//! `L = log(5 S A T / δ)`, `T` the step budget or the running step count):
//!
//! * Hoeffding: `b = 7 H √(L / N)`.
//! * Bernstein: `b = √(8 L Var̂(V_{h+1}) / N) + 14 H L / (3 N)
//!   + √(8 Σ_y P̂(y) min{10⁴ H³ S² A L² / N(y), H²} / N)`, where `N(y)` counts
//!   visits to state `y` over all actions.
//!
//! The whole bonus is multiplied by `bonus_scale`. In uniform-reward mode
//! factors of `H` become the number of remaining steps after the current one
//! and values are clipped at the remaining horizon.
//!
//! PSRL samples `P̃(·|s,a) ~ Dirichlet(counts + 1)` and
//! `r̃(s,a) ~ Normal((H/2 + Σ R) / (1 + N), 1 / (1 + N))` clipped to `[0, H]`,
//! then plans exactly on the sample.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::agent::Agent;
use crate::error::{Error, Result};
use crate::mdp::{backward_plan, Policy, Trajectory, ValueTables};
use crate::scalar::Real;
use crate::stats::VisitStats;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    UcbviHoeffding,
    UcbviBernstein,
    Psrl,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineConfig<R: Real = f64> {
    pub kind: BaselineKind,
    pub delta: R,
    pub bonus_scale: R,
}

impl<R: Real> BaselineConfig<R> {
    pub fn new(kind: BaselineKind, delta: R) -> Self {
        Self {
            kind,
            delta,
            bonus_scale: R::one(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > R::zero() && self.delta <= R::one()) {
            return Err(Error::Parameter(format!(
                "δ = {} must lie in (0, 1]",
                self.delta
            )));
        }
        if !(self.bonus_scale > R::zero() && self.bonus_scale.is_finite()) {
            return Err(Error::Parameter(format!(
                "bonus scale {} must be positive",
                self.bonus_scale
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UcbviVariant {
    Hoeffding,
    Bernstein,
}

/// `L = log(5 S A T / δ)`.
pub fn ucbvi_log_term<R: Real>(states: usize, actions: usize, steps: u64, delta: R) -> R {
    let t = R::from_u64(steps.max(1)).unwrap();
    (R::of(5.0) * R::of_usize(states * actions) * t / delta).ln()
}

/// Exploration bonus for a visited pair given next-step values. `scale_h` is
/// the horizon factor (`H`, or the remaining steps in uniform mode).
pub fn ucbvi_bonus<R: Real>(
    stats: &VisitStats<R>,
    s: usize,
    a: usize,
    next: &[R],
    scale_h: R,
    log_term: R,
    variant: UcbviVariant,
) -> R {
    let n = R::from_u64(stats.count(s, a)).unwrap();
    match variant {
        UcbviVariant::Hoeffding => R::of(7.0) * scale_h * (log_term / n).sqrt(),
        UcbviVariant::Bernstein => {
            let mean = stats.empirical_expectation(s, a, next);
            let squares: Vec<R> = next.iter().map(|&v| v * v).collect();
            let var = (stats.empirical_expectation(s, a, &squares) - mean * mean).max(R::zero());
            let (states, actions) = (
                R::of_usize(stats.num_states()),
                R::of_usize(stats.num_actions()),
            );
            let h2 = scale_h * scale_h;
            let numerator =
                R::of(1e4) * h2 * scale_h * states * states * actions * log_term * log_term;
            let correction: Vec<R> = (0..stats.num_states())
                .map(|y| match stats.state_count(y) {
                    0 => h2,
                    ny => (numerator / R::from_u64(ny).unwrap()).min(h2),
                })
                .collect();
            let spread = stats.empirical_expectation(s, a, &correction);
            (R::of(8.0) * log_term * var / n).sqrt()
                + R::of(14.0) * scale_h * log_term / (R::of(3.0) * n)
                + (R::of(8.0) * spread / n).sqrt()
        }
    }
}

/// UCBVI planning on the empirical model. `total_steps` is the `T` inside the log term.
#[allow(clippy::too_many_arguments)]
pub fn ucbvi_plan<R: Real>(
    stats: &VisitStats<R>,
    horizon: usize,
    delta: R,
    variant: UcbviVariant,
    bonus_scale: R,
    total_steps: u64,
    uniform: bool,
) -> ValueTables<R> {
    let log_term = ucbvi_log_term(stats.num_states(), stats.num_actions(), total_steps, delta);
    backward_plan(
        horizon,
        stats.num_states(),
        stats.num_actions(),
        |h, s, a, next| {
            let (clip, scale_h) = if uniform {
                (R::of_usize(horizon - h), R::of_usize(horizon - h - 1))
            } else {
                (R::of_usize(horizon), R::of_usize(horizon))
            };
            match stats.count(s, a) {
                0 => clip,
                n => {
                    let n_real = R::from_u64(n).unwrap();
                    let bonus = ucbvi_bonus(stats, s, a, next, scale_h, log_term, variant);
                    (stats.reward_sum(s, a) / n_real
                        + bonus_scale * bonus
                        + stats.empirical_expectation(s, a, next))
                    .min(clip)
                }
            }
        },
    )
}

/// A model drawn from the PSRL posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledModel<R: Real = f64> {
    pub num_states: usize,
    pub num_actions: usize,
    /// `S × A × S`, rows sum to one.
    pub transition: Vec<R>,
    /// `S × A`, each in `[0, H]`.
    pub reward: Vec<R>,
}

impl<R: Real> SampledModel<R> {
    pub fn transition_row(&self, s: usize, a: usize) -> &[R] {
        let base = (s * self.num_actions + a) * self.num_states;
        &self.transition[base..base + self.num_states]
    }
}

pub fn sample_posterior<R: Real, G: Rng + ?Sized>(
    stats: &VisitStats<R>,
    horizon: usize,
    rng: &mut G,
) -> SampledModel<R> {
    let (states, actions) = (stats.num_states(), stats.num_actions());
    let h = horizon as f64;
    let mut transition = Vec::with_capacity(states * actions * states);
    let mut reward = Vec::with_capacity(states * actions);
    let mut row = vec![0.0f64; states];
    for s in 0..states {
        for a in 0..actions {
            for (slot, &c) in row.iter_mut().zip(stats.transition_counts(s, a)) {
                let gamma = Gamma::new(c as f64 + 1.0, 1.0).expect("shape is positive");
                *slot = gamma.sample(rng);
            }
            let total: f64 = row.iter().sum();
            transition.extend(row.iter().map(|&g| R::of(g / total)));

            let n = stats.count(s, a) as f64;
            let mean = (h / 2.0 + stats.reward_sum(s, a).as_f64()) / (1.0 + n);
            let z: f64 = StandardNormal.sample(rng);
            reward.push(R::of((mean + z / (1.0 + n).sqrt()).clamp(0.0, h)));
        }
    }
    SampledModel {
        num_states: states,
        num_actions: actions,
        transition,
        reward,
    }
}

/// Exact planning on one posterior sample.
pub fn psrl_plan<R: Real, G: Rng + ?Sized>(
    stats: &VisitStats<R>,
    horizon: usize,
    rng: &mut G,
) -> ValueTables<R> {
    let model = sample_posterior(stats, horizon, rng);
    backward_plan(
        horizon,
        model.num_states,
        model.num_actions,
        |_, s, a, next| {
            model.reward[s * model.num_actions + a]
                + model
                    .transition_row(s, a)
                    .iter()
                    .zip(next)
                    .map(|(&p, &v)| p * v)
                    .sum::<R>()
        },
    )
}

/// Uniformly random action for every (step, state).
pub fn random_plan<G: Rng + ?Sized>(
    states: usize,
    actions: usize,
    horizon: usize,
    rng: &mut G,
) -> Policy {
    let table = (0..horizon * states)
        .map(|_| rng.random_range(0..actions))
        .collect();
    Policy::from_table(horizon, states, actions, table).expect("actions drawn in range")
}

#[derive(Debug, Clone)]
pub struct UcbviAgent<R: Real = f64> {
    variant: UcbviVariant,
    delta: R,
    bonus_scale: R,
    horizon: usize,
    step_budget: Option<u64>,
    uniform: bool,
    stats: VisitStats<R>,
}

impl<R: Real> UcbviAgent<R> {
    /// `episode_budget` fixes `T = K H` when known; otherwise `T` is the running step count.
    pub fn new(
        config: &BaselineConfig<R>,
        states: usize,
        actions: usize,
        horizon: usize,
        episode_budget: Option<usize>,
        uniform: bool,
    ) -> Result<Self> {
        config.validate()?;
        let variant = match config.kind {
            BaselineKind::UcbviHoeffding => UcbviVariant::Hoeffding,
            BaselineKind::UcbviBernstein => UcbviVariant::Bernstein,
            other => {
                return Err(Error::Config(format!("{other:?} is not a UCBVI variant")));
            }
        };
        Ok(Self {
            variant,
            delta: config.delta,
            bonus_scale: config.bonus_scale,
            horizon,
            step_budget: episode_budget.map(|k| (k * horizon) as u64),
            uniform,
            stats: VisitStats::new(states, actions),
        })
    }
}

impl<R: Real> Agent<R> for UcbviAgent<R> {
    fn policy(&mut self, _k: usize) -> Policy {
        let steps = self.step_budget.unwrap_or(self.stats.total_steps());
        ucbvi_plan(
            &self.stats,
            self.horizon,
            self.delta,
            self.variant,
            self.bonus_scale,
            steps,
            self.uniform,
        )
        .greedy
    }

    fn observe(&mut self, trajectory: &Trajectory<R>) {
        self.stats.record(trajectory);
    }
}

#[derive(Debug, Clone)]
pub struct PsrlAgent<R: Real = f64> {
    horizon: usize,
    stats: VisitStats<R>,
    rng: ChaCha8Rng,
}

impl<R: Real> PsrlAgent<R> {
    pub fn new(states: usize, actions: usize, horizon: usize, seed: u64) -> Self {
        Self {
            horizon,
            stats: VisitStats::new(states, actions),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl<R: Real> Agent<R> for PsrlAgent<R> {
    fn policy(&mut self, _k: usize) -> Policy {
        psrl_plan(&self.stats, self.horizon, &mut self.rng).greedy
    }

    fn observe(&mut self, trajectory: &Trajectory<R>) {
        self.stats.record(trajectory);
    }
}

#[derive(Debug, Clone)]
pub struct RandomAgent {
    states: usize,
    actions: usize,
    horizon: usize,
    rng: ChaCha8Rng,
}

impl RandomAgent {
    pub fn new(states: usize, actions: usize, horizon: usize, seed: u64) -> Self {
        Self {
            states,
            actions,
            horizon,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl<R: Real> Agent<R> for RandomAgent {
    fn policy(&mut self, _k: usize) -> Policy {
        random_plan(self.states, self.actions, self.horizon, &mut self.rng)
    }

    fn observe(&mut self, _trajectory: &Trajectory<R>) {}
}

#[cfg(test)]
mod tests {
    use super::*;

    fn visited_stats() -> VisitStats<f64> {
        // 2 states, 2 actions, moderately visited
        VisitStats::from_tables(
            2,
            2,
            vec![30, 10, 5, 5, 0, 20, 8, 2],
            vec![4.0, 0.0, 10.0, 3.0],
            20,
        )
        .unwrap()
    }

    #[test]
    fn unvisited_pairs_are_optimistic() {
        let stats = VisitStats::<f64>::new(3, 2);
        for variant in [UcbviVariant::Hoeffding, UcbviVariant::Bernstein] {
            let t = ucbvi_plan(&stats, 5, 0.1, variant, 1.0, 100, false);
            assert!((0..5).all(|h| (0..3).all(|s| t.v(h, s) == 5.0)));
        }
    }

    #[test]
    fn bernstein_below_hoeffding_when_variance_vanishes() {
        let n = 1_000_000;
        // deterministic self-loop: Var̂ = 0
        let stats = VisitStats::from_tables(1, 1, vec![n], vec![0.0], n / 10).unwrap();
        let log_term = ucbvi_log_term(1, 1, n, 0.1);
        let next = [3.0];
        let hoeff = ucbvi_bonus(&stats, 0, 0, &next, 10.0, log_term, UcbviVariant::Hoeffding);
        let bern = ucbvi_bonus(&stats, 0, 0, &next, 10.0, log_term, UcbviVariant::Bernstein);
        assert!(bern < hoeff, "{bern} vs {hoeff}");
    }

    #[test]
    fn ucbvi_is_deterministic() {
        let stats = visited_stats();
        let a = ucbvi_plan(&stats, 4, 0.05, UcbviVariant::Bernstein, 1.0, 400, false);
        let b = ucbvi_plan(&stats, 4, 0.05, UcbviVariant::Bernstein, 1.0, 400, false);
        assert_eq!(a, b);
    }

    #[test]
    fn vanishing_scale_plans_on_the_empirical_model() {
        let stats = visited_stats();
        let t = ucbvi_plan(&stats, 3, 0.05, UcbviVariant::Hoeffding, 1e-300, 300, false);
        let greedy_empirical = crate::eqo::plan(&stats, 1e-300, 3);
        for h in 0..3 {
            for s in 0..2 {
                assert!((t.v(h, s) - greedy_empirical.v(h, s)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn flat_prior_rows_sum_to_one() {
        let stats = VisitStats::<f64>::new(4, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let m = sample_posterior(&stats, 3, &mut rng);
            for s in 0..4 {
                for a in 0..2 {
                    let sum: f64 = m.transition_row(s, a).iter().sum();
                    assert!((sum - 1.0).abs() < 1e-12);
                }
            }
            assert!(m.reward.iter().all(|&r| (0.0..=3.0).contains(&r)));
        }
    }

    #[test]
    fn posterior_concentrates_with_counts() {
        let n = 100_000u64;
        let counts = vec![n * 3 / 10, n * 7 / 10];
        let stats =
            VisitStats::<f64>::from_tables(2, 1, [counts, vec![0, 0]].concat(), vec![0.0, 0.0], 1)
                .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let worst = (0..100)
            .map(|_| {
                let m = sample_posterior(&stats, 2, &mut rng);
                (m.transition_row(0, 0)[0] - 0.3).abs()
            })
            .fold(0.0f64, f64::max);
        assert!(worst <= 0.02, "max deviation {worst}");
    }

    #[test]
    fn psrl_is_reproducible_from_rng_state() {
        let stats = visited_stats();
        let a = psrl_plan(&stats, 4, &mut ChaCha8Rng::seed_from_u64(3));
        let b = psrl_plan(&stats, 4, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
    }

    #[test]
    fn random_policies_are_reproducible_and_uniform() {
        for seed in 0..3 {
            let a = random_plan(5, 3, 4, &mut ChaCha8Rng::seed_from_u64(seed));
            let b = random_plan(5, 3, 4, &mut ChaCha8Rng::seed_from_u64(seed));
            assert_eq!(a, b);
        }
        let only = random_plan(3, 1, 2, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(only, Policy::constant(2, 3, 0));

        // 10⁴ draws over 4 actions: each frequency within 3σ of 1/4
        let p = random_plan(10_000, 4, 1, &mut ChaCha8Rng::seed_from_u64(9));
        let mut freq = [0usize; 4];
        p.as_slice().iter().for_each(|&a| freq[a] += 1);
        let sigma = (10_000.0f64 * 0.25 * 0.75).sqrt();
        for f in freq {
            assert!((f as f64 - 2500.0).abs() < 3.0 * sigma, "{freq:?}");
        }
    }
}

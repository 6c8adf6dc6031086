mod common;

use common::{all_policies, best_value, delta_at, forward_value};
use eqo_core::envs::{gap_mdp, random_mdp, riverswim, GapLayout};
use eqo_core::{instant_regret, policy_evaluation, value_iteration, Policy};
use proptest::prelude::*;

fn small_mdp() -> impl Strategy<Value = (usize, usize, usize, u64)> {
    (1usize..=3, 1usize..=2, 1usize..=3, any::<u64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn value_iteration_matches_enumeration((s, a, h, seed) in small_mdp()) {
        let mdp = random_mdp::<f64>(s, a, h, seed).unwrap();
        let vi = value_iteration(&mdp);
        for start in 0..s {
            let brute = best_value(&mdp, &delta_at(s, start));
            prop_assert!((vi.v(0, start) - brute).abs() <= 1e-10);
        }
    }

    #[test]
    fn policy_evaluation_matches_forward_pass((s, a, h, seed) in small_mdp(), pick in any::<u64>()) {
        let mdp = random_mdp::<f64>(s, a, h, seed).unwrap();
        let pols = all_policies(h, s, a);
        let pi = &pols[(pick % pols.len() as u64) as usize];
        let v = policy_evaluation(&mdp, pi).unwrap();
        for start in 0..s {
            prop_assert!((v.get(0, start) - forward_value(&mdp, pi, &delta_at(s, start))).abs() <= 1e-12);
        }
    }

    #[test]
    fn regret_is_nonnegative((s, a, h, seed) in small_mdp(), pick in any::<u64>()) {
        let mdp = random_mdp::<f64>(s, a, h, seed).unwrap();
        let vi = value_iteration(&mdp);
        let pols = all_policies(h, s, a);
        let pi = &pols[(pick % pols.len() as u64) as usize];
        prop_assert!(instant_regret(&mdp, pi, &vi).unwrap() >= -1e-10);
        prop_assert!(instant_regret(&mdp, &vi.greedy, &vi).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn optimal_values_shrink_with_remaining_steps((s, a, h, seed) in small_mdp()) {
        // rewards are nonnegative, so more remaining steps never hurt
        let mdp = random_mdp::<f64>(s, a, h, seed).unwrap();
        let vi = value_iteration(&mdp);
        for step in 0..h {
            for st in 0..s {
                prop_assert!(vi.v(step, st) + 1e-12 >= vi.v(step + 1, st));
                prop_assert!(vi.v(step, st) <= (h - step) as f64 + 1e-12);
            }
        }
    }
}

#[test]
fn riverswim_small_matches_enumeration() {
    let mdp = riverswim::<f64>(3, 3).unwrap();
    let vi = value_iteration(&mdp);
    let brute = best_value(&mdp, &delta_at(3, 0));
    assert!((vi.v(0, 0) - brute).abs() <= 1e-12);
}

#[test]
fn riverswim_right_bank_reward_needs_the_stay_transition() {
    // one step at the right bank: reward 1 only on the 0.6 stay
    let mdp = riverswim::<f64>(4, 1).unwrap();
    let vi = value_iteration(&mdp);
    assert!((vi.q(0, 3, 1) - 0.6).abs() < 1e-15);
    assert!((vi.q(0, 0, 0) - 0.005).abs() < 1e-15);
}

#[test]
fn gap_mdp_is_deterministic_with_half_value() {
    let depth = 5;
    let mdp = gap_mdp::<f64>(depth, 0.02).unwrap();
    let layout = GapLayout { depth };
    assert_eq!(mdp.num_states(), layout.num_states());
    for s in 0..mdp.num_states() {
        for a in 0..2 {
            let row = mdp.transition_row(s, a);
            assert_eq!(row.iter().filter(|&&p| p == 1.0).count(), 1);
            assert_eq!(row.iter().filter(|&&p| p == 0.0).count(), row.len() - 1);
        }
    }
    let vi = value_iteration(&mdp);
    assert_eq!(vi.v(0, 0), 0.5);
    // deviating at any step before the last leaves at most the gap
    for dev in 0..depth - 1 {
        let pi = Policy::from_fn(depth, mdp.num_states(), |h, s| {
            let on = h == dev && s == layout.on_path(h);
            let best = layout.optimal_action(h);
            if on {
                1 - best
            } else if s == layout.on_path(h) {
                best
            } else {
                0
            }
        });
        let r = instant_regret(&mdp, &pi, &vi).unwrap();
        assert!((r - 0.48).abs() < 1e-12, "deviation at {dev}: regret {r}");
    }
}

//! Brute-force reference computations, independent of the backward recursions
//! under test: policies are enumerated and evaluated by pushing the state
//! distribution forward through time.

#![allow(dead_code, clippy::needless_range_loop)]

use eqo_core::{Policy, TabularMdp};

/// Expected total reward of `pi` from the start distribution `init`.
pub fn forward_value(mdp: &TabularMdp<f64>, pi: &Policy, init: &[f64]) -> f64 {
    let s_count = mdp.num_states();
    let mut dist = init.to_vec();
    let mut total = 0.0;
    for h in 0..mdp.horizon() {
        let mut next = vec![0.0; s_count];
        for s in 0..s_count {
            if dist[s] == 0.0 {
                continue;
            }
            let a = pi.action(h, s);
            let row = mdp.transition_row(s, a);
            let rew = mdp.reward_row(s, a);
            for y in 0..s_count {
                let mass = dist[s] * row[y];
                total += mass * rew[y];
                next[y] += mass;
            }
        }
        dist = next;
    }
    total
}

/// Point mass on `s`.
pub fn delta_at(s_count: usize, s: usize) -> Vec<f64> {
    let mut v = vec![0.0; s_count];
    v[s] = 1.0;
    v
}

/// Every deterministic Markov policy, as an `H × S` action table.
pub fn all_policies(horizon: usize, s_count: usize, a_count: usize) -> Vec<Policy> {
    let cells = horizon * s_count;
    let total = a_count.pow(cells as u32);
    (0..total)
        .map(|mut code| {
            let mut table = Vec::with_capacity(cells);
            for _ in 0..cells {
                table.push(code % a_count);
                code /= a_count;
            }
            Policy::from_table(horizon, s_count, a_count, table).unwrap()
        })
        .collect()
}

/// `max_π V^π_1(init)` by exhaustive enumeration.
pub fn best_value(mdp: &TabularMdp<f64>, init: &[f64]) -> f64 {
    all_policies(mdp.horizon(), mdp.num_states(), mdp.num_actions())
        .iter()
        .map(|pi| forward_value(mdp, pi, init))
        .fold(f64::NEG_INFINITY, f64::max)
}

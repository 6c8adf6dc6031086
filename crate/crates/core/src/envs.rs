//! Benchmark environments and the line-oriented MDP file format.
//!
//! File format (UTF-8, `#` starts a comment, blank lines ignored):
//!
//! ```text
//! mdp S A H initial_state
//! t s a p_0 p_1 ... p_{S-1}      # exactly one per (s, a)
//! r s a s' mean                  # optional; unlisted rewards are 0
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::mdp::{InitialState, TabularMdp};
use crate::scalar::Real;

/// RiverSwim actions.
pub const LEFT: usize = 0;
pub const RIGHT: usize = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum EnvSpec {
    RiverSwim {
        states: usize,
        horizon: usize,
    },
    /// Horizon equals `depth`.
    GapMdp {
        depth: usize,
        gap: f64,
    },
    FromFile {
        path: PathBuf,
    },
    RandomMdp {
        states: usize,
        actions: usize,
        horizon: usize,
        seed: u64,
    },
    TwoState {
        horizon: usize,
    },
}

impl EnvSpec {
    pub fn build<R: Real>(&self) -> Result<TabularMdp<R>> {
        match self {
            EnvSpec::RiverSwim { states, horizon } => riverswim(*states, *horizon),
            EnvSpec::GapMdp { depth, gap } => gap_mdp(*depth, R::of(*gap)),
            EnvSpec::FromFile { path } => load_mdp(path),
            EnvSpec::RandomMdp {
                states,
                actions,
                horizon,
                seed,
            } => random_mdp(*states, *actions, *horizon, *seed),
            EnvSpec::TwoState { horizon } => two_state(*horizon),
        }
    }
}

type Q = Ratio<i64>;

fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

/// RiverSwim with `n ≥ 3` states (left = 0, right = 1), starting at the leftmost state.
///
/// Left moves one state left deterministically; at the left bank it self-loops with
/// reward 0.005. Right succeeds with 0.6 from the left bank, 0.35 from the middle
/// (0.6 stay, 0.05 back), and at the right bank stays w.p. 0.6 earning reward 1
/// on that transition (0.4 back).
pub fn riverswim<R: Real>(n: usize, horizon: usize) -> Result<TabularMdp<R>> {
    if n < 3 {
        return Err(Error::Parameter(format!(
            "RiverSwim needs n ≥ 3 states, got {n}"
        )));
    }
    let zero = q(0, 1);
    let mut trans = vec![zero; n * 2 * n];
    let mut reward = vec![zero; n * 2 * n];
    let idx = |s: usize, a: usize, t: usize| (s * 2 + a) * n + t;
    for s in 0..n {
        trans[idx(s, LEFT, s.saturating_sub(1))] = q(1, 1);
        if s == 0 {
            trans[idx(s, RIGHT, 0)] = q(2, 5);
            trans[idx(s, RIGHT, 1)] = q(3, 5);
        } else if s == n - 1 {
            trans[idx(s, RIGHT, s - 1)] = q(2, 5);
            trans[idx(s, RIGHT, s)] = q(3, 5);
            reward[idx(s, RIGHT, s)] = q(1, 1);
        } else {
            trans[idx(s, RIGHT, s - 1)] = q(1, 20);
            trans[idx(s, RIGHT, s)] = q(3, 5);
            trans[idx(s, RIGHT, s + 1)] = q(7, 20);
        }
    }
    reward[idx(0, LEFT, 0)] = q(1, 200);
    for row in trans.chunks(n) {
        debug_assert_eq!(row.iter().sum::<Q>(), q(1, 1));
    }
    let to_real = |x: &Q| R::of(*x.numer() as f64 / *x.denom() as f64);
    TabularMdp::new(
        n,
        2,
        horizon,
        trans.iter().map(to_real).collect(),
        reward.iter().map(to_real).collect(),
        InitialState::Fixed(0),
    )
}

/// Layout of [`gap_mdp`] states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GapLayout {
    pub depth: usize,
}

impl GapLayout {
    /// On-path state at step `h`.
    pub fn on_path(&self, h: usize) -> usize {
        h
    }

    /// Off-path state at step `h ≥ 1`.
    pub fn off_path(&self, h: usize) -> usize {
        self.depth + h - 1
    }

    pub fn sink(&self) -> usize {
        2 * self.depth - 1
    }

    pub fn num_states(&self) -> usize {
        2 * self.depth
    }

    /// The single rewarding action sequence alternates 1, 0, 1, ... so it
    /// never coincides with the lowest-index tie break.
    pub fn optimal_action(&self, h: usize) -> usize {
        usize::from(h.is_multiple_of(2))
    }
}

/// Deterministic layered chain with horizon `depth` where only the last action pays.
///
/// Following the optimal action sequence reaches the last on-path state, whose
/// actions pay 0.5 or 0. Any earlier deviation drops to an off-path layer whose
/// final actions pay `gap` (action 0) or 0. All states at the last layer lead to
/// an absorbing sink.
pub fn gap_mdp<R: Real>(depth: usize, gap: R) -> Result<TabularMdp<R>> {
    if depth < 2 {
        return Err(Error::Parameter(format!(
            "gap MDP needs depth ≥ 2, got {depth}"
        )));
    }
    if !(gap >= R::zero() && gap < R::of(0.5)) {
        return Err(Error::Parameter(format!("gap {gap} must lie in [0, 0.5)")));
    }
    let layout = GapLayout { depth };
    let s_count = layout.num_states();
    let mut trans = vec![R::zero(); s_count * 2 * s_count];
    let mut reward = vec![R::zero(); s_count * 2 * s_count];
    let idx = |s: usize, a: usize, t: usize| (s * 2 + a) * s_count + t;
    let last = depth - 1;
    for h in 0..depth {
        let on = layout.on_path(h);
        for a in 0..2 {
            let next = if h == last {
                layout.sink()
            } else if a == layout.optimal_action(h) {
                layout.on_path(h + 1)
            } else {
                layout.off_path(h + 1)
            };
            trans[idx(on, a, next)] = R::one();
            if h >= 1 {
                let off = layout.off_path(h);
                let next = if h == last {
                    layout.sink()
                } else {
                    layout.off_path(h + 1)
                };
                trans[idx(off, a, next)] = R::one();
            }
        }
    }
    for a in 0..2 {
        trans[idx(layout.sink(), a, layout.sink())] = R::one();
    }
    reward[idx(
        layout.on_path(last),
        layout.optimal_action(last),
        layout.sink(),
    )] = R::of(0.5);
    reward[idx(layout.off_path(last), 0, layout.sink())] = gap;
    TabularMdp::new(s_count, 2, depth, trans, reward, InitialState::Fixed(0))
}

/// Random MDP with Dirichlet(1) transition rows and uniform `[0, 1]` rewards,
/// so every optimal value is at most `H`. Deterministic per seed.
pub fn random_mdp<R: Real>(
    states: usize,
    actions: usize,
    horizon: usize,
    seed: u64,
) -> Result<TabularMdp<R>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trans = Vec::with_capacity(states * actions * states);
    for _ in 0..states * actions {
        let row: Vec<f64> = (0..states).map(|_| rng.sample(Exp1)).collect();
        let total: f64 = row.iter().sum();
        trans.extend(row.iter().map(|&x| R::of(x / total)));
    }
    let reward = (0..states * actions * states)
        .map(|_| R::of(rng.random::<f64>()))
        .collect();
    TabularMdp::new(
        states,
        actions,
        horizon,
        trans,
        reward,
        InitialState::Fixed(0),
    )
}

/// Small two-state, two-action MDP starting in state 0, used for PAC checks.
///
/// State 0: action 0 earns 1 and stays w.p. 0.9 (else drifts to state 1);
/// action 1 moves to state 1 for nothing. State 1: action 0 is a fair coin
/// between the states with no reward, action 1 self-loops earning 0.3.
pub fn two_state<R: Real>(horizon: usize) -> Result<TabularMdp<R>> {
    let t = [0.9, 0.1, 0.0, 1.0, 0.5, 0.5, 0.0, 1.0];
    let r = [1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.3];
    TabularMdp::new(
        2,
        2,
        horizon,
        t.iter().map(|&x| R::of(x)).collect(),
        r.iter().map(|&x| R::of(x)).collect(),
        InitialState::Fixed(0),
    )
}

/// Serializes `mdp` in the text format. Only fixed initial states can be written.
pub fn mdp_to_text<R: Real>(mdp: &TabularMdp<R>) -> Result<String> {
    let start = match mdp.initial() {
        InitialState::Fixed(s) => *s,
        InitialState::Categorical(_) => {
            return Err(Error::Parameter(
                "the MDP file format only supports a fixed initial state".into(),
            ))
        }
    };
    let (s_count, a_count) = (mdp.num_states(), mdp.num_actions());
    let mut out = format!("mdp {s_count} {a_count} {} {start}\n", mdp.horizon());
    for s in 0..s_count {
        for a in 0..a_count {
            write!(out, "t {s} {a}").unwrap();
            for p in mdp.transition_row(s, a) {
                write!(out, " {p}").unwrap();
            }
            out.push('\n');
        }
    }
    for s in 0..s_count {
        for a in 0..a_count {
            for (next, &m) in mdp.reward_row(s, a).iter().enumerate() {
                if m != R::zero() {
                    writeln!(out, "r {s} {a} {next} {m}").unwrap();
                }
            }
        }
    }
    Ok(out)
}

pub fn save_mdp<R: Real>(mdp: &TabularMdp<R>, path: impl AsRef<Path>) -> Result<()> {
    let text = mdp_to_text(mdp)?;
    std::fs::write(path.as_ref(), text).map_err(|e| Error::io(path, e))
}

pub fn load_mdp<R: Real>(path: impl AsRef<Path>) -> Result<TabularMdp<R>> {
    let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path, e))?;
    parse_mdp(&text)
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("invalid {what} '{tok}'")))
}

pub fn parse_mdp<R: Real>(text: &str) -> Result<TabularMdp<R>> {
    let mut header: Option<(usize, usize, usize, usize)> = None;
    let mut trans: Vec<Option<Vec<R>>> = Vec::new();
    let mut reward: Vec<R> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut toks = content.split_whitespace();
        let kind = toks.next().unwrap();
        match (kind, header) {
            ("mdp", None) => {
                let s: usize = field(toks.next(), line, "S")?;
                let a: usize = field(toks.next(), line, "A")?;
                let h: usize = field(toks.next(), line, "H")?;
                let start: usize = field(toks.next(), line, "initial_state")?;
                if s == 0 || a == 0 || h == 0 {
                    return Err(parse_err(line, "S, A and H must be positive"));
                }
                trans = vec![None; s * a];
                reward = vec![R::zero(); s * a * s];
                header = Some((s, a, h, start));
            }
            ("mdp", Some(_)) => return Err(parse_err(line, "duplicate header")),
            (_, None) => return Err(parse_err(line, "expected header 'mdp S A H initial_state'")),
            ("t", Some((s_count, a_count, _, _))) => {
                let s: usize = field(toks.next(), line, "state")?;
                let a: usize = field(toks.next(), line, "action")?;
                if s >= s_count || a >= a_count {
                    return Err(parse_err(line, format!("pair ({s}, {a}) out of range")));
                }
                let row = toks
                    .map(|t| {
                        t.parse::<f64>()
                            .map(R::of)
                            .map_err(|_| parse_err(line, format!("invalid probability '{t}'")))
                    })
                    .collect::<Result<Vec<R>>>()?;
                if row.len() != s_count {
                    return Err(parse_err(
                        line,
                        format!(
                            "row for ({s}, {a}) has {} entries, expected {s_count}",
                            row.len()
                        ),
                    ));
                }
                let slot = &mut trans[s * a_count + a];
                if slot.is_some() {
                    return Err(parse_err(line, format!("duplicate row for ({s}, {a})")));
                }
                *slot = Some(row);
            }
            ("r", Some((s_count, a_count, _, _))) => {
                let s: usize = field(toks.next(), line, "state")?;
                let a: usize = field(toks.next(), line, "action")?;
                let next: usize = field(toks.next(), line, "next state")?;
                let mean: f64 = field(toks.next(), line, "reward mean")?;
                if s >= s_count || a >= a_count || next >= s_count {
                    return Err(parse_err(
                        line,
                        format!("reward index ({s}, {a}, {next}) out of range"),
                    ));
                }
                if toks.next().is_some() {
                    return Err(parse_err(line, "trailing tokens after reward mean"));
                }
                reward[(s * a_count + a) * s_count + next] = R::of(mean);
            }
            (other, Some(_)) => return Err(parse_err(line, format!("unknown record '{other}'"))),
        }
    }
    let (s_count, a_count, horizon, start) =
        header.ok_or_else(|| parse_err(1, "missing header"))?;
    let mut flat = Vec::with_capacity(s_count * a_count * s_count);
    for (sa, row) in trans.into_iter().enumerate() {
        let row = row.ok_or_else(|| {
            parse_err(
                text.lines().count(),
                format!(
                    "missing transition row for ({}, {})",
                    sa / a_count,
                    sa % a_count
                ),
            )
        })?;
        flat.extend(row);
    }
    TabularMdp::new(
        s_count,
        a_count,
        horizon,
        flat,
        reward,
        InitialState::Fixed(start),
    )
}

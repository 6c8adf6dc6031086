//! Finite-horizon tabular reinforcement learning with a `1/N` exploration bonus.
//!
//! The numeric core is generic over [`Real`]; the aliases below fix the
//! scalar type for the common cases.

pub mod agent;
pub mod baselines;
pub mod concentration;
pub mod envs;
pub mod eqo;
pub mod error;
pub mod harness;
pub mod mdp;
pub mod pac;
pub mod scalar;
pub mod stats;

pub use agent::{run_episodes, Agent};
pub use error::{Error, Result};
pub use mdp::{
    instant_regret, policy_evaluation, simulate_episode, value_iteration, InitialState, Policy,
    RewardNoise, StateValues, Step, TabularMdp, Trajectory, ValueTables,
};
pub use scalar::Real;
pub use stats::VisitStats;

pub type Mdp = TabularMdp<f64>;
pub type MdpF32 = TabularMdp<f32>;
pub type Values = ValueTables<f64>;
pub type Stats = VisitStats<f64>;
pub type Schedule = eqo::BonusSchedule<f64>;
pub type Eqo = eqo::EqoAgent<f64>;
pub type EqoF32 = eqo::EqoAgent<f32>;

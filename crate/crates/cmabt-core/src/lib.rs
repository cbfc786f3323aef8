//! Simulation laboratory for combinatorial multi-armed bandits with
//! probabilistically triggered arms (CMAB-T).
//!
//! The crate provides:
//! - the CMAB-T abstractions (arms, actions, environments, regret accounting,
//!   gaps, triggering-probability diagnostics) in [`framework`],
//! - the CUCB learner in [`cucb`],
//! - three environment families: cascading bandits ([`cascade`]), influence
//!   maximization under independent cascade ([`influence`]), and the
//!   fixed-triggering-probability instance ([`ftp`]),
//! - numerical verifiers for monotonicity and triggering-probability-modulated
//!   bounded smoothness in [`conditions`],
//! - closed-form evaluators for the upper and lower regret bounds in
//!   [`bounds`],
//! - a reproducible experiment harness in [`experiment`] driven by TOML
//!   configs ([`config`]).

pub mod bounds;
pub mod cascade;
pub mod conditions;
pub mod config;
pub mod cucb;
pub mod experiment;
pub mod framework;
pub mod ftp;
pub mod influence;
pub mod rng;

pub use framework::{
    compute_diagnostics, compute_gap_profile, record_round, tp_group, Action, CmabError,
    Diagnostics, Environment, GapProfile, OutcomeVector, RegretLedger, RoundRecord, StepOutcome,
    TpGroupCounters, TriggeredSet,
};

pub use cucb::{confidence_radius, LearnerState, UcbVector};

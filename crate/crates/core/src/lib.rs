//! Contrast-set evaluation workbench for language-guided robot policies.
//!
//! Two desk-scale environments ([`tabletop`] block pushing and [`navworld`]
//! grid-apartment navigation) plug into a shared [`env::Environment`] trait.
//! [`strategies`] executes standard, limited-intervention and budget-bounded
//! contrast-set evaluations with exact scene-reset cost accounting, and
//! [`stats`] turns the resulting logs into cost-vs-error curves, trials-per-
//! budget series and per-perturbation breakdowns.

pub mod config;
pub mod cost;
pub mod env;
pub mod error;
pub mod model;
pub mod navworld;
pub mod pipeline;
pub mod policies;
pub mod rng;
pub mod stats;
pub mod strategies;
pub mod tabletop;

pub use cost::{scene_diff, scene_diff_cost, time_proxy_cost, CostModel, Layout, SceneDiff};
pub use env::{sample_evaluation_set, Environment, Infeasible, Skip};
pub use error::{Error, Result};
pub use model::{
    Behavior, CostLedger, EnvKind, EvaluationSet, Instruction, PerturbationKind, PerturbationTag,
    Phrasing, TestInstance, TrialRecord,
};
pub use policies::{DefectKnobs, PolicyConfig, PolicyKind};
pub use strategies::{
    estimate_metric, run_contrast, run_limited_intervention, run_standard, RunLog, StrategyKind,
    StrategyPlan, StrategyRun,
};

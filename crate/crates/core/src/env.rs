//! The contract every simulated environment implements for the strategy runner.

use std::fmt::Debug;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::cost::Layout;
use crate::error::{Error, Result};
use crate::model::{Behavior, EnvKind, EvaluationSet, Instruction, PerturbationTag, TestInstance};
use crate::policies::PolicyConfig;
use crate::rng;

/// The planner found no way to realise an instruction in a scene.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct Infeasible(pub String);

impl Infeasible {
    pub fn new(msg: impl Into<String>) -> Self {
        Self(msg.into())
    }
}

/// Why a perturbation produced no instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Skip {
    /// The operator's precondition does not hold for this instance.
    Inapplicable(String),
    /// The operator ran but every candidate failed the validity check.
    Invalid(String),
}

impl std::fmt::Display for Skip {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Skip::Inapplicable(m) => write!(f, "inapplicable: {m}"),
            Skip::Invalid(m) => write!(f, "invalid: {m}"),
        }
    }
}

/// Outcome of executing one trial.
#[derive(Clone, Debug, PartialEq)]
pub struct Rollout<S> {
    pub end_scene: S,
    pub metric: f64,
    pub success: bool,
    pub path_length: f64,
    pub timeout: bool,
}

pub type BehaviorOf<E> = Behavior<<E as Environment>::Waypoint, <E as Environment>::Goal>;
pub type InstructionOf<E> = Instruction<<E as Environment>::Frame>;

pub trait Environment: Send + Sync + Sized + 'static {
    const KIND: EnvKind;

    type Scene: Layout + Clone + PartialEq + Debug + Serialize + DeserializeOwned + Send + Sync;
    type Frame: Clone + PartialEq + Debug + Serialize + DeserializeOwned + Send + Sync;
    type Waypoint: Clone + PartialEq + Debug + Serialize + DeserializeOwned + Send + Sync;
    type Goal: Clone + PartialEq + Debug + Serialize + DeserializeOwned + Send + Sync;

    /// Scene before the first trial of a run: nothing set up.
    fn staging_scene(&self) -> Self::Scene;

    /// `n` feasible original instances, deterministic in `seed`.
    fn sample_set(&self, n: usize, seed: u64) -> Result<EvaluationSet<Self>>;

    /// Optimal behavior for `instruction` starting from `scene`.
    fn plan(&self, scene: &Self::Scene, instruction: &InstructionOf<Self>)
        -> Result<BehaviorOf<Self>, Infeasible>;

    /// Whether a state goal already holds in `scene`. Environments whose goals
    /// are defined over trajectories return false.
    fn goal_satisfied(&self, scene: &Self::Scene, goal: &Self::Goal) -> bool;

    fn referents_present(&self, scene: &Self::Scene, frame: &Self::Frame) -> bool;

    fn supported_perturbations(&self) -> &'static [PerturbationTag];

    fn perturb(
        &self,
        tag: PerturbationTag,
        base: &TestInstance<Self>,
        seed: u64,
    ) -> std::result::Result<TestInstance<Self>, Skip>;

    /// Execute `policy` on `instruction` starting from `scene`. `expected` is the
    /// optimal behavior for this exact start scene.
    fn rollout(
        &self,
        policy: &PolicyConfig,
        scene: &Self::Scene,
        instruction: &InstructionOf<Self>,
        expected: &BehaviorOf<Self>,
        seed: u64,
    ) -> Rollout<Self::Scene>;

    /// Feasibility oracle used by limited intervention: referents present, goal
    /// not yet achieved, and a plan exists from this scene.
    fn replan_in(
        &self,
        scene: &Self::Scene,
        instruction: &InstructionOf<Self>,
    ) -> Result<BehaviorOf<Self>, Infeasible> {
        if !self.referents_present(scene, &instruction.frame) {
            return Err(Infeasible::new("referents missing"));
        }
        let behavior = self.plan(scene, instruction)?;
        if self.goal_satisfied(scene, &behavior.goal) {
            return Err(Infeasible::new("goal already satisfied"));
        }
        Ok(behavior)
    }

    /// Re-plan an instance from its own start scene and check the stored
    /// expected behavior matches.
    fn check_instance(&self, inst: &TestInstance<Self>) -> Result<(), Infeasible> {
        inst.check_provenance()
            .map_err(|e| Infeasible::new(e.to_string()))?;
        let b = self.plan(&inst.scene, &inst.instruction)?;
        if b != inst.expected {
            return Err(Infeasible::new(format!(
                "stored behavior of {} does not match the planner",
                inst.id
            )));
        }
        Ok(())
    }
}

/// Seed handed to a perturbation operator. Derived from the evaluation set so a
/// contrast set is a fixed function of the evaluation set.
pub fn perturbation_seed(set_seed: u64, base_index: usize, tag: PerturbationTag) -> u64 {
    rng::derive(
        set_seed,
        &[rng::label("perturb"), base_index as u64, rng::label(&tag.to_string())],
    )
}

pub fn sample_evaluation_set<E: Environment>(env: &E, n: usize, seed: u64) -> Result<EvaluationSet<E>> {
    if n == 0 {
        return Err(Error::InvalidArgument("evaluation set size must be >= 1".into()));
    }
    let set = env.sample_set(n, seed)?;
    debug_assert_eq!(set.instances.len(), n);
    set.validate()?;
    Ok(set)
}

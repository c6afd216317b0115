//! Environment-agnostic data model: instructions, behaviors, test instances,
//! evaluation sets, trial records and the cost ledger.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cost::CostModel;
use crate::env::Environment;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvKind {
    Tabletop,
    Nav,
}

impl EnvKind {
    /// Distance charged for bringing an object in from (or returning it to)
    /// off-scene storage.
    pub fn staging_distance(self) -> f64 {
        match self {
            EnvKind::Tabletop => 1.0,
            EnvKind::Nav => 3.0,
        }
    }

    pub fn default_repetitions(self) -> u32 {
        match self {
            EnvKind::Tabletop => 1,
            EnvKind::Nav => 3,
        }
    }
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnvKind::Tabletop => "tabletop",
            EnvKind::Nav => "nav",
        })
    }
}

/// Perturbation axis. `B` variants change the expected behavior.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PerturbationKind {
    Original,
    L,
    LB,
    S,
    SB,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct PerturbationTag {
    pub kind: PerturbationKind,
    pub variant: Option<u8>,
}

impl PerturbationTag {
    pub const ORIGINAL: Self = Self::new(PerturbationKind::Original, None);
    pub const L: Self = Self::new(PerturbationKind::L, None);
    pub const LB: Self = Self::new(PerturbationKind::LB, None);
    pub const LB1: Self = Self::new(PerturbationKind::LB, Some(1));
    pub const LB2: Self = Self::new(PerturbationKind::LB, Some(2));
    pub const S: Self = Self::new(PerturbationKind::S, None);
    pub const SB: Self = Self::new(PerturbationKind::SB, None);
    pub const SB1: Self = Self::new(PerturbationKind::SB, Some(1));
    pub const SB2: Self = Self::new(PerturbationKind::SB, Some(2));

    pub const fn new(kind: PerturbationKind, variant: Option<u8>) -> Self {
        Self { kind, variant }
    }

    pub fn is_original(self) -> bool {
        self.kind == PerturbationKind::Original
    }

    /// Language-axis perturbations leave the scene untouched.
    pub fn is_language(self) -> bool {
        matches!(self.kind, PerturbationKind::L | PerturbationKind::LB)
    }

    pub fn is_scene(self) -> bool {
        matches!(self.kind, PerturbationKind::S | PerturbationKind::SB)
    }

    pub fn changes_behavior(self) -> bool {
        matches!(self.kind, PerturbationKind::LB | PerturbationKind::SB)
    }
}

impl fmt::Display for PerturbationTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = match self.kind {
            PerturbationKind::Original => return f.write_str("Original"),
            PerturbationKind::L => "L",
            PerturbationKind::LB => "LB",
            PerturbationKind::S => "S",
            PerturbationKind::SB => "SB",
        };
        match self.variant {
            Some(v) => write!(f, "{base}{v}"),
            None => f.write_str(base),
        }
    }
}

impl FromStr for PerturbationTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "Original" {
            return Ok(Self::ORIGINAL);
        }
        let split = s.find(|c: char| c.is_ascii_digit()).unwrap_or(s.len());
        let (base, digits) = s.split_at(split);
        let kind = match base {
            "L" => PerturbationKind::L,
            "LB" => PerturbationKind::LB,
            "S" => PerturbationKind::S,
            "SB" => PerturbationKind::SB,
            _ => return Err(Error::InvalidArgument(format!("unknown perturbation tag {s:?}"))),
        };
        let variant = if digits.is_empty() {
            None
        } else {
            match digits.parse::<u8>() {
                Ok(v) if (1..=9).contains(&v) && digits.len() == 1 => Some(v),
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "bad perturbation variant in {s:?}"
                    )))
                }
            }
        };
        Ok(Self { kind, variant })
    }
}

impl From<PerturbationTag> for String {
    fn from(t: PerturbationTag) -> Self {
        t.to_string()
    }
}

impl TryFrom<String> for PerturbationTag {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// How an instruction's surface form was produced. Paraphrase 0 with no
/// synonyms is the canonical wording of a template.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Phrasing {
    pub template: u16,
    pub paraphrase: u16,
    /// Bit `i` set: referent `i` is named by a synonym.
    pub synonyms: u8,
}

impl Phrasing {
    pub fn is_canonical(&self) -> bool {
        self.paraphrase == 0 && self.synonyms == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instruction<F> {
    pub surface: String,
    pub frame: F,
    pub phrasing: Phrasing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Behavior<W, G> {
    pub trajectory: Vec<W>,
    pub goal: G,
    /// Optimal path length in meters.
    pub optimal_length: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TestInstance<E: Environment> {
    pub id: String,
    pub instruction: Instruction<E::Frame>,
    pub scene: E::Scene,
    pub expected: Behavior<E::Waypoint, E::Goal>,
    pub perturbation: PerturbationTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_id: Option<String>,
}

impl<E: Environment> Clone for TestInstance<E> {
    fn clone(&self) -> Self {
        Self {
            id: self.id.clone(),
            instruction: self.instruction.clone(),
            scene: self.scene.clone(),
            expected: self.expected.clone(),
            perturbation: self.perturbation,
            parent_id: self.parent_id.clone(),
        }
    }
}

impl<E: Environment> fmt::Debug for TestInstance<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestInstance")
            .field("id", &self.id)
            .field("surface", &self.instruction.surface)
            .field("perturbation", &self.perturbation)
            .field("parent_id", &self.parent_id)
            .finish_non_exhaustive()
    }
}

impl<E: Environment> PartialEq for TestInstance<E> {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
            && self.instruction == other.instruction
            && self.scene == other.scene
            && self.expected == other.expected
            && self.perturbation == other.perturbation
            && self.parent_id == other.parent_id
    }
}

impl<E: Environment> TestInstance<E> {
    /// Original instances have no parent; perturbed ones always do.
    pub fn check_provenance(&self) -> Result<()> {
        match (self.perturbation.is_original(), &self.parent_id) {
            (true, None) | (false, Some(_)) => Ok(()),
            _ => Err(Error::InvalidArgument(format!(
                "instance {} has tag {} but parent {:?}",
                self.id, self.perturbation, self.parent_id
            ))),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "")]
pub struct EvaluationSet<E: Environment> {
    pub environment: EnvKind,
    pub seed: u64,
    pub instances: Vec<TestInstance<E>>,
}

impl<E: Environment> Clone for EvaluationSet<E> {
    fn clone(&self) -> Self {
        Self {
            environment: self.environment,
            seed: self.seed,
            instances: self.instances.clone(),
        }
    }
}

impl<E: Environment> fmt::Debug for EvaluationSet<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EvaluationSet")
            .field("environment", &self.environment)
            .field("seed", &self.seed)
            .field("instances", &self.instances.len())
            .finish()
    }
}

impl<E: Environment> EvaluationSet<E> {
    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Structural checks that do not need the environment: kind, unique ids,
    /// all instances original.
    pub fn validate(&self) -> Result<()> {
        if self.environment != E::KIND {
            return Err(Error::EnvMismatch {
                left: self.environment,
                right: E::KIND,
            });
        }
        let mut ids = std::collections::BTreeSet::new();
        for inst in &self.instances {
            if !inst.perturbation.is_original() || inst.parent_id.is_some() {
                return Err(Error::InvalidArgument(format!(
                    "evaluation set instance {} is not an original",
                    inst.id
                )));
            }
            if !ids.insert(inst.id.as_str()) {
                return Err(Error::InvalidArgument(format!("duplicate instance id {}", inst.id)));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let set: Self = serde_json::from_str(s)?;
        set.validate()?;
        Ok(set)
    }
}

/// One executed trial. Field order is the JSONL column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub instance_id: String,
    pub perturbation: PerturbationTag,
    pub repetition: u32,
    pub metric: f64,
    pub success: bool,
    /// Reset cost in the run's cost-model unit (meters or seconds).
    pub reset_cost: f64,
    /// Raw object displacement behind `reset_cost`, meters.
    pub reset_distance: f64,
    pub objects_touched: u32,
    /// True when the strategy reset the scene to the instance's nominal start.
    pub scene_reset: bool,
    pub path_length: f64,
    pub optimal_length: f64,
    pub timeout: bool,
    pub seed: u64,
}

/// Running scene-reset cost against a budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostLedger {
    pub budget: Option<f64>,
    pub total: f64,
    pub model: CostModel,
}

impl CostLedger {
    pub fn new(model: CostModel, budget: Option<f64>) -> Self {
        Self {
            budget,
            total: 0.0,
            model,
        }
    }

    pub fn charge(&mut self, cost: f64) {
        debug_assert!(cost >= 0.0);
        self.total += cost.max(0.0);
    }

    /// True once the running total has gone past the budget.
    pub fn exhausted(&self) -> bool {
        self.budget.is_some_and(|k| self.total > k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tag_display_roundtrip() {
        for t in [
            PerturbationTag::ORIGINAL,
            PerturbationTag::L,
            PerturbationTag::LB,
            PerturbationTag::LB1,
            PerturbationTag::LB2,
            PerturbationTag::S,
            PerturbationTag::SB,
            PerturbationTag::SB1,
            PerturbationTag::SB2,
        ] {
            assert_eq!(t.to_string().parse::<PerturbationTag>().unwrap(), t);
        }
        assert!("LB0".parse::<PerturbationTag>().is_err());
        assert!("LB12".parse::<PerturbationTag>().is_err());
        assert!("X".parse::<PerturbationTag>().is_err());
        assert!("".parse::<PerturbationTag>().is_err());
    }

    #[test]
    fn ledger_exhaustion_is_strict() {
        let mut l = CostLedger::new(CostModel::DistanceMoved, Some(1.0));
        l.charge(1.0);
        assert!(!l.exhausted());
        l.charge(1e-9);
        assert!(l.exhausted());
        assert!(!CostLedger::new(CostModel::DistanceMoved, None).exhausted());
    }
}

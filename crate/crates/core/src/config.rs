//! Declarative experiment configuration. One JSON file fixes every scientific
//! parameter of a gen → run → report pipeline; its hash stamps all outputs.

use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cost::CostModel;
use crate::error::{Error, Result};
use crate::model::{EnvKind, PerturbationTag};
use crate::navworld::NavWorld;
use crate::policies::{DefectKnobs, PolicyConfig};
use crate::strategies::{StrategyKind, StrategyPlan};
use crate::tabletop::Tabletop;
use crate::Environment;

/// Hex digits of the config hash used to name the output directory.
pub const STAMP_LEN: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    pub preset: String,
    /// Replace individual knobs of the preset.
    #[serde(default, skip_serializing_if = "KnobOverrides::is_empty")]
    pub overrides: KnobOverrides,
    #[serde(default)]
    pub seed_stream: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnobOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_fail: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_direction_invert: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_referent_swap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_paraphrase_fail: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distractor_penalty: Option<f64>,
}

impl KnobOverrides {
    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }

    fn apply(&self, k: &mut DefectKnobs) {
        let pairs = [
            (self.p_fail, &mut k.p_fail),
            (self.p_direction_invert, &mut k.p_direction_invert),
            (self.p_referent_swap, &mut k.p_referent_swap),
            (self.p_paraphrase_fail, &mut k.p_paraphrase_fail),
            (self.distractor_penalty, &mut k.distractor_penalty),
        ];
        for (v, slot) in pairs {
            if let Some(v) = v {
                *slot = v;
            }
        }
    }
}

impl PolicySpec {
    pub fn preset(name: &str) -> Self {
        Self {
            preset: name.into(),
            overrides: KnobOverrides::default(),
            seed_stream: 0,
        }
    }

    pub fn resolve(&self) -> Result<PolicyConfig> {
        let mut p = PolicyConfig::preset(&self.preset).ok_or_else(|| {
            Error::Config(format!(
                "unknown policy preset {:?}; known: {}",
                self.preset,
                PolicyConfig::PRESETS.join(", ")
            ))
        })?;
        self.overrides.apply(&mut p.knobs);
        p.seed_stream = self.seed_stream;
        p.validate()?;
        Ok(p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetKeyword {
    /// Total cost of the standard evaluation of the same seed.
    Standard,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Budget {
    Fixed(f64),
    Keyword(BudgetKeyword),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySpec {
    /// Directory-safe name: lowercase ASCII letters, digits, `-` and `_`.
    pub id: String,
    pub kind: StrategyKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub perturbations: Vec<PerturbationTag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<Budget>,
    /// Defaults to the environment's repetition count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repetitions: Option<u32>,
}

impl StrategySpec {
    pub fn needs_standard_cost(&self) -> bool {
        self.budget == Some(Budget::Keyword(BudgetKeyword::Standard))
    }

    /// Concrete plan; `standard_cost` is required when the budget is `"standard"`.
    pub fn plan(&self, env: EnvKind, cost_model: CostModel, standard_cost: Option<f64>) -> Result<StrategyPlan> {
        let budget = match self.budget {
            None => None,
            Some(Budget::Fixed(k)) => Some(k),
            Some(Budget::Keyword(BudgetKeyword::Standard)) => Some(standard_cost.ok_or_else(|| {
                Error::InvalidArgument(format!("strategy {} needs the standard-run cost", self.id))
            })?),
        };
        let plan = StrategyPlan {
            kind: self.kind,
            perturbations: self.perturbations.clone(),
            budget,
            repetitions: self.repetitions.unwrap_or(env.default_repetitions()),
            cost_model,
        };
        plan.validate()?;
        Ok(plan)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub environment: EnvKind,
    pub set_size: usize,
    pub seeds: Vec<u64>,
    pub policy: PolicySpec,
    #[serde(default = "default_cost_model")]
    pub cost_model: CostModel,
    pub strategies: Vec<StrategySpec>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_cost_model() -> CostModel {
    CostModel::DistanceMoved
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

fn supported(env: EnvKind) -> &'static [PerturbationTag] {
    match env {
        EnvKind::Tabletop => Tabletop::default().supported_perturbations(),
        EnvKind::Nav => NavWorld::default().supported_perturbations(),
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if self.seeds.iter().collect::<BTreeSet<_>>().len() != self.seeds.len() {
            return Err(Error::Config("seeds must be distinct".into()));
        }
        if self.set_size == 0 {
            return Err(Error::Config("set_size must be >= 1".into()));
        }
        if self.strategies.is_empty() {
            return Err(Error::Config("at least one strategy is required".into()));
        }
        self.policy.resolve()?;
        self.cost_model.validate()?;
        let mut ids = BTreeSet::new();
        for s in &self.strategies {
            let ok_id = !s.id.is_empty()
                && s.id
                    .bytes()
                    .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-' || b == b'_');
            if !ok_id {
                return Err(Error::Config(format!("bad strategy id {:?}", s.id)));
            }
            if !ids.insert(s.id.as_str()) {
                return Err(Error::Config(format!("duplicate strategy id {}", s.id)));
            }
            s.plan(self.environment, self.cost_model, Some(1.0))
                .map_err(|e| Error::Config(format!("strategy {}: {e}", s.id)))?;
            if let Some(t) = s
                .perturbations
                .iter()
                .find(|t| !supported(self.environment).contains(t))
            {
                return Err(Error::Config(format!(
                    "strategy {}: {t} is not available in the {} environment",
                    s.id, self.environment
                )));
            }
        }
        Ok(())
    }

    pub fn strategy(&self, id: &str) -> Result<&StrategySpec> {
        self.strategies
            .iter()
            .find(|s| s.id == id)
            .ok_or_else(|| Error::Config(format!("no strategy with id {id:?}")))
    }

    /// SHA-256 of the canonical JSON form with the output directory cleared,
    /// so moving a run does not change its identity.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        let canonical = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))
    }

    pub fn stamp(&self) -> String {
        self.hash()[..STAMP_LEN].to_string()
    }

    /// Directory holding every artifact of this config.
    pub fn run_dir(&self) -> PathBuf {
        self.output_dir.join(self.stamp())
    }

    /// The shipped tabletop scenario: standard, limited intervention, full
    /// contrast at the standard cost, language-only contrast at the standard
    /// cost, and full contrast capped at 300 m.
    pub fn default_tabletop(preset: &str) -> Self {
        let full = vec![
            PerturbationTag::LB1,
            PerturbationTag::LB2,
            PerturbationTag::SB1,
            PerturbationTag::SB2,
        ];
        let standard_budget = Some(Budget::Keyword(BudgetKeyword::Standard));
        Self {
            environment: EnvKind::Tabletop,
            set_size: 250,
            seeds: vec![0, 1, 2],
            policy: PolicySpec::preset(preset),
            cost_model: CostModel::DistanceMoved,
            strategies: vec![
                StrategySpec {
                    id: "standard".into(),
                    kind: StrategyKind::Standard,
                    perturbations: vec![],
                    budget: None,
                    repetitions: None,
                },
                StrategySpec {
                    id: "limited".into(),
                    kind: StrategyKind::LimitedIntervention,
                    perturbations: vec![],
                    budget: None,
                    repetitions: None,
                },
                StrategySpec {
                    id: "contrast".into(),
                    kind: StrategyKind::ContrastSet,
                    perturbations: full.clone(),
                    budget: standard_budget,
                    repetitions: None,
                },
                StrategySpec {
                    id: "contrast-language".into(),
                    kind: StrategyKind::ContrastSet,
                    perturbations: vec![PerturbationTag::LB1, PerturbationTag::LB2],
                    budget: standard_budget,
                    repetitions: None,
                },
                StrategySpec {
                    id: "contrast-300".into(),
                    kind: StrategyKind::ContrastSet,
                    perturbations: full,
                    budget: Some(Budget::Fixed(300.0)),
                    repetitions: None,
                },
            ],
            output_dir: default_output_dir(),
        }
    }

    /// The shipped navigation scenario: five bases, four perturbations, three
    /// repetitions each.
    pub fn default_nav(preset: &str) -> Self {
        Self {
            environment: EnvKind::Nav,
            set_size: 5,
            seeds: vec![0, 1, 2],
            policy: PolicySpec::preset(preset),
            cost_model: CostModel::DistanceMoved,
            strategies: vec![
                StrategySpec {
                    id: "standard".into(),
                    kind: StrategyKind::Standard,
                    perturbations: vec![],
                    budget: None,
                    repetitions: None,
                },
                StrategySpec {
                    id: "contrast".into(),
                    kind: StrategyKind::ContrastSet,
                    perturbations: vec![
                        PerturbationTag::L,
                        PerturbationTag::LB,
                        PerturbationTag::S,
                        PerturbationTag::SB,
                    ],
                    budget: Some(Budget::Fixed(1.0e6)),
                    repetitions: None,
                },
            ],
            output_dir: default_output_dir(),
        }
    }
}

//! Scripted stand-in policies: the environment's optimal planner, a noisy
//! variant with a uniform failure rate, and a defect policy whose failure modes
//! act on the instruction's semantic frame.
//!
//! Environment-specific execution lives in [`tabletop`] and [`nav`]; this module
//! owns the configuration and the per-trial random draws.

pub mod nav;
pub mod tabletop;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Actions taken by a failing policy before it stops.
pub const RANDOM_WALK_STEPS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Oracle,
    NoisyOracle,
    Defect,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DefectKnobs {
    pub p_fail: f64,
    pub p_direction_invert: f64,
    pub p_referent_swap: f64,
    pub p_paraphrase_fail: f64,
    /// Extra failure probability per distractor near the task.
    pub distractor_penalty: f64,
}

impl DefectKnobs {
    fn fields(&self) -> [(&'static str, f64); 5] {
        [
            ("p_fail", self.p_fail),
            ("p_direction_invert", self.p_direction_invert),
            ("p_referent_swap", self.p_referent_swap),
            ("p_paraphrase_fail", self.p_paraphrase_fail),
            ("distractor_penalty", self.distractor_penalty),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.fields() {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} = {v} is outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Failure probability after adding the distractor penalty.
    pub fn effective_failure(&self, distractors: usize) -> f64 {
        (self.p_fail + self.distractor_penalty * distractors as f64).clamp(0.0, 1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    #[serde(default)]
    pub knobs: DefectKnobs,
    /// Separates the noise streams of policies evaluated on the same trials.
    #[serde(default)]
    pub seed_stream: u64,
}

impl PolicyConfig {
    pub fn oracle() -> Self {
        Self {
            kind: PolicyKind::Oracle,
            knobs: DefectKnobs::default(),
            seed_stream: 0,
        }
    }

    pub fn noisy(p_fail: f64) -> Self {
        Self {
            kind: PolicyKind::NoisyOracle,
            knobs: DefectKnobs {
                p_fail,
                ..DefectKnobs::default()
            },
            seed_stream: 0,
        }
    }

    pub fn defect(knobs: DefectKnobs) -> Self {
        Self {
            kind: PolicyKind::Defect,
            knobs,
            seed_stream: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.knobs.validate()?;
        let k = &self.knobs;
        match self.kind {
            PolicyKind::Oracle if *k != DefectKnobs::default() => {
                Err(Error::Config("the oracle policy takes no knobs".into()))
            }
            PolicyKind::NoisyOracle
                if k.p_direction_invert != 0.0
                    || k.p_referent_swap != 0.0
                    || k.p_paraphrase_fail != 0.0
                    || k.distractor_penalty != 0.0 =>
            {
                Err(Error::Config("the noisy oracle only takes p_fail".into()))
            }
            _ => Ok(()),
        }
    }

    /// Named knob sets used by the shipped experiment configs.
    pub fn preset(name: &str) -> Option<Self> {
        let d = DefectKnobs::default();
        Some(match name {
            "oracle" => Self::oracle(),
            "noisy-oracle" => Self::noisy(0.2),
            "direction-overfit" => Self::defect(DefectKnobs {
                p_direction_invert: 1.0,
                ..d
            }),
            "referent-confused" => Self::defect(DefectKnobs {
                p_referent_swap: 0.5,
                ..d
            }),
            "paraphrase-brittle" => Self::defect(DefectKnobs {
                p_paraphrase_fail: 0.7,
                ..d
            }),
            "clutter-sensitive" => Self::defect(DefectKnobs {
                p_fail: 0.05,
                distractor_penalty: 0.3,
                ..d
            }),
            "distractor-sensitive" => Self::defect(DefectKnobs {
                distractor_penalty: 0.5,
                ..d
            }),
            _ => return None,
        })
    }

    pub const PRESETS: &'static [&'static str] = &[
        "oracle",
        "noisy-oracle",
        "direction-overfit",
        "referent-confused",
        "paraphrase-brittle",
        "clutter-sensitive",
        "distractor-sensitive",
    ];
}

/// Uniform draws for one trial, always taken in the same order so that raising
/// a single knob only ever adds failures on a fixed seed.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Draws {
    pub fail: f64,
    pub direction: f64,
    pub swap: f64,
    pub paraphrase: f64,
    pub walk_seed: u64,
}

impl Draws {
    pub fn new(policy: &PolicyConfig, trial_seed: u64) -> Self {
        let mut r = rng::stream(trial_seed, &[rng::label("policy"), policy.seed_stream]);
        Self {
            fail: r.gen(),
            direction: r.gen(),
            swap: r.gen(),
            paraphrase: r.gen(),
            walk_seed: r.gen(),
        }
    }
}

/// What a policy decided to do on a trial before any motion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Intent {
    /// Follow the optimal plan for the frame, possibly after the listed edits.
    Plan { invert_direction: bool, swap_referents: bool },
    /// Wander for [`RANDOM_WALK_STEPS`] and stop.
    Wander,
    /// Stop without moving.
    Halt,
}

pub(crate) fn decide(
    policy: &PolicyConfig,
    draws: &Draws,
    has_direction: bool,
    has_two_referents: bool,
    canonical_surface: bool,
    distractors: usize,
) -> Intent {
    let k = &policy.knobs;
    match policy.kind {
        PolicyKind::Oracle => Intent::Plan {
            invert_direction: false,
            swap_referents: false,
        },
        PolicyKind::NoisyOracle => {
            if draws.fail < k.p_fail {
                Intent::Wander
            } else {
                Intent::Plan {
                    invert_direction: false,
                    swap_referents: false,
                }
            }
        }
        PolicyKind::Defect => {
            if !canonical_surface && draws.paraphrase < k.p_paraphrase_fail {
                return Intent::Halt;
            }
            if draws.fail < k.effective_failure(distractors) {
                return Intent::Wander;
            }
            Intent::Plan {
                invert_direction: has_direction && draws.direction < k.p_direction_invert,
                swap_referents: has_two_referents && draws.swap < k.p_referent_swap,
            }
        }
    }
}

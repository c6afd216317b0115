//! Tabletop block pushing: a 0.60 m x 0.40 m board, disc-shaped blocks, a disc
//! pusher with kinematic quasi-static contact, a five-category instruction
//! grammar, an optimal straight-line push planner and the ΔLB/ΔSB operators.

pub mod dynamics;
pub mod perturb;
pub mod planner;
pub mod sampler;
pub mod task;
pub mod templates;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cost::{Layout, Placement};
use crate::env::{BehaviorOf, Environment, Infeasible, InstructionOf, Rollout, Skip};
use crate::error::Result;
use crate::model::{EnvKind, EvaluationSet, PerturbationTag, TestInstance};
use crate::policies::PolicyConfig;

pub use dynamics::{execute, step_dynamics, StepOutcome};
pub use planner::{optimal_plan, spl};
pub use task::{Category, Direction, Magnitude, Region, TabletopGoal, TabletopTask};
pub use templates::TemplateBook;

pub const BOARD_WIDTH: f64 = 0.60;
pub const BOARD_HEIGHT: f64 = 0.40;
pub const PUSHER_RADIUS: f64 = 0.01;
pub const BLOCK_RADIUS: f64 = 0.02;
/// Maximum pusher displacement per dynamics step.
pub const STEP: f64 = 0.005;
/// Success tolerance around a goal point.
pub const EPSILON: f64 = 0.05;
pub const SEPARATION: f64 = 0.15;
/// Minimum relocation distance for ΔSB operators.
pub const RELOCATE_MIN: f64 = 0.10;
/// Per-trial step cap; longer executions are flagged as timeouts.
pub const STEP_LIMIT: usize = 1000;
/// Retry limit for samplers and relocations.
pub const RETRIES: usize = 100;

pub type Point = [f64; 2];

pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

pub(crate) fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

pub(crate) fn scale(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s]
}

pub(crate) fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Unit vector, or `None` for (near-)zero input.
pub(crate) fn unit(a: Point) -> Option<Point> {
    let n = norm(a);
    (n > 1e-12).then(|| scale(a, 1.0 / n))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Cube,
    Moon,
    Star,
    Pentagon,
}

impl Shape {
    pub const ALL: [Shape; 4] = [Shape::Cube, Shape::Moon, Shape::Star, Shape::Pentagon];

    pub fn name(self) -> &'static str {
        match self {
            Shape::Cube => "cube",
            Shape::Moon => "moon",
            Shape::Star => "star",
            Shape::Pentagon => "pentagon",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Red,
    Blue,
    Green,
    Yellow,
    Purple,
    Orange,
}

impl Color {
    pub const ALL: [Color; 6] = [
        Color::Red,
        Color::Blue,
        Color::Green,
        Color::Yellow,
        Color::Purple,
        Color::Orange,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Color::Red => "red",
            Color::Blue => "blue",
            Color::Green => "green",
            Color::Yellow => "yellow",
            Color::Purple => "purple",
            Color::Orange => "orange",
        }
    }
}

/// Identity of a physical block; also its referring expression.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlockRef {
    pub color: Color,
    pub shape: Shape,
}

impl BlockRef {
    pub fn new(color: Color, shape: Shape) -> Self {
        Self { color, shape }
    }

    pub fn id(&self) -> String {
        format!("{}-{}", self.color.name(), self.shape.name())
    }
}

impl fmt::Display for BlockRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.color.name(), self.shape.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub shape: Shape,
    pub color: Color,
    pub position: Point,
}

impl Block {
    pub fn new(r: BlockRef, position: Point) -> Self {
        Self {
            shape: r.shape,
            color: r.color,
            position,
        }
    }

    pub fn referent(&self) -> BlockRef {
        BlockRef::new(self.color, self.shape)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Board {
    pub pusher: Point,
    pub blocks: Vec<Block>,
}

/// Bounds of a disc center of radius `r` inside the board.
pub(crate) fn inside(p: Point, r: f64) -> bool {
    const TOL: f64 = 1e-12;
    p[0] >= r - TOL && p[0] <= BOARD_WIDTH - r + TOL && p[1] >= r - TOL && p[1] <= BOARD_HEIGHT - r + TOL
}

pub(crate) fn clamp_inside(p: Point, r: f64) -> Point {
    [
        p[0].clamp(r, BOARD_WIDTH - r),
        p[1].clamp(r, BOARD_HEIGHT - r),
    ]
}

impl Board {
    pub fn empty() -> Self {
        Self {
            pusher: [BOARD_WIDTH / 2.0, BOARD_HEIGHT / 2.0],
            blocks: Vec::new(),
        }
    }

    pub fn find(&self, r: BlockRef) -> Option<usize> {
        self.blocks.iter().position(|b| b.referent() == r)
    }

    pub fn position(&self, r: BlockRef) -> Option<Point> {
        self.find(r).map(|i| self.blocks[i].position)
    }

    /// Checks the board invariants; returns a description of the first violation.
    pub fn check(&self) -> std::result::Result<(), String> {
        if !inside(self.pusher, PUSHER_RADIUS) {
            return Err(format!("pusher {:?} outside workspace", self.pusher));
        }
        for (i, a) in self.blocks.iter().enumerate() {
            if !inside(a.position, BLOCK_RADIUS) {
                return Err(format!("{} outside workspace", a.referent()));
            }
            for b in &self.blocks[i + 1..] {
                if a.referent() == b.referent() {
                    return Err(format!("duplicate block {}", a.referent()));
                }
                if dist(a.position, b.position) <= 2.0 * BLOCK_RADIUS - 1e-9 {
                    return Err(format!("{} overlaps {}", a.referent(), b.referent()));
                }
            }
        }
        Ok(())
    }
}

impl Layout for Board {
    fn env_kind(&self) -> EnvKind {
        EnvKind::Tabletop
    }

    fn placements(&self) -> Vec<Placement> {
        self.blocks
            .iter()
            .map(|b| Placement {
                id: b.referent().id(),
                position: b.position,
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct Tabletop {
    pub templates: TemplateBook,
    /// Blocks on the board in every scene of a set.
    pub blocks_per_scene: usize,
}

impl Default for Tabletop {
    fn default() -> Self {
        Self {
            templates: TemplateBook::builtin(),
            blocks_per_scene: sampler::DEFAULT_BLOCKS,
        }
    }
}

pub type TabletopInstance = TestInstance<Tabletop>;

impl Environment for Tabletop {
    const KIND: EnvKind = EnvKind::Tabletop;

    type Scene = Board;
    type Frame = TabletopTask;
    type Waypoint = Point;
    type Goal = TabletopGoal;

    fn staging_scene(&self) -> Board {
        Board::empty()
    }

    fn sample_set(&self, n: usize, seed: u64) -> Result<EvaluationSet<Self>> {
        sampler::sample_set(self, n, seed)
    }

    fn plan(
        &self,
        scene: &Board,
        instruction: &InstructionOf<Self>,
    ) -> std::result::Result<BehaviorOf<Self>, Infeasible> {
        optimal_plan(scene, &instruction.frame)
    }

    fn goal_satisfied(&self, scene: &Board, goal: &TabletopGoal) -> bool {
        goal.satisfied(scene)
    }

    fn referents_present(&self, scene: &Board, frame: &TabletopTask) -> bool {
        frame.referents().all(|r| scene.find(r).is_some())
    }

    fn supported_perturbations(&self) -> &'static [PerturbationTag] {
        &[
            PerturbationTag::LB1,
            PerturbationTag::LB2,
            PerturbationTag::SB1,
            PerturbationTag::SB2,
        ]
    }

    fn perturb(
        &self,
        tag: PerturbationTag,
        base: &TestInstance<Self>,
        seed: u64,
    ) -> std::result::Result<TestInstance<Self>, Skip> {
        perturb::apply(self, tag, base, seed)
    }

    fn rollout(
        &self,
        policy: &PolicyConfig,
        scene: &Board,
        instruction: &InstructionOf<Self>,
        expected: &BehaviorOf<Self>,
        seed: u64,
    ) -> Rollout<Board> {
        crate::policies::tabletop::rollout(policy, scene, instruction, expected, seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::scene_diff_cost;

    #[test]
    fn layout_ids_follow_block_identity() {
        let r = BlockRef::new(Color::Red, Shape::Moon);
        let b = Board {
            pusher: [0.1, 0.1],
            blocks: vec![Block::new(r, [0.3, 0.2])],
        };
        assert_eq!(b.placements()[0].id, "red-moon");
        assert_eq!(r.to_string(), "red moon");
        // Staging scene is empty: setting up one block costs the staging distance.
        assert_eq!(scene_diff_cost(&Board::empty(), &b).unwrap(), 1.0);
    }

    #[test]
    fn board_check_catches_overlap_and_bounds() {
        let a = BlockRef::new(Color::Red, Shape::Moon);
        let c = BlockRef::new(Color::Blue, Shape::Cube);
        let mut b = Board {
            pusher: [0.1, 0.1],
            blocks: vec![Block::new(a, [0.3, 0.2]), Block::new(c, [0.33, 0.2])],
        };
        assert!(b.check().is_err());
        b.blocks[1].position = [0.35, 0.2];
        assert!(b.check().is_ok());
        b.blocks[1].position = [0.59, 0.2];
        assert!(b.check().is_err());
    }
}

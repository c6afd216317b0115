//! Grid-apartment navigation: furniture on a grid of 0.25 m cells, a robot with
//! twelve 30° headings, two-subgoal instructions, a breadth-first shortest-path
//! oracle, the ordered-subgoal progress metric, and the ΔL/ΔLB/ΔS/ΔSB operators.

pub mod grid;
pub mod perturb;
pub mod phrasebook;
pub mod planner;
pub mod render;
pub mod sampler;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cost::{Layout, Placement};
use crate::env::{BehaviorOf, Environment, Infeasible, InstructionOf, Rollout, Skip};
use crate::error::Result;
use crate::model::{Behavior, EnvKind, EvaluationSet, PerturbationTag, TestInstance};
use crate::policies::PolicyConfig;

pub use grid::{Action, Pose};
pub use phrasebook::Phrasebook;
pub use planner::{progress_to_goal, shortest_path};

pub const CELL: f64 = 0.25;
pub const DEFAULT_SIZE: i32 = 20;
pub const HEADINGS: u8 = 12;
/// Action cap per rollout.
pub const STEP_LIMIT: usize = 200;
pub const RETRIES: usize = 100;
/// Minimum relocation of g₂ for the goal-moving ΔSB variant, in cells.
pub const SB_MIN_SHIFT: i32 = 2;
/// Largest accepted grid side, in cells.
pub const MAX_SIDE: i32 = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FurnitureClass {
    Bed,
    Couch,
    Table,
    Bookshelf,
    Lamp,
    Plant,
    Chair,
}

impl FurnitureClass {
    pub const ALL: [FurnitureClass; 7] = [
        FurnitureClass::Bed,
        FurnitureClass::Couch,
        FurnitureClass::Table,
        FurnitureClass::Bookshelf,
        FurnitureClass::Lamp,
        FurnitureClass::Plant,
        FurnitureClass::Chair,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FurnitureClass::Bed => "bed",
            FurnitureClass::Couch => "couch",
            FurnitureClass::Table => "table",
            FurnitureClass::Bookshelf => "bookshelf",
            FurnitureClass::Lamp => "lamp",
            FurnitureClass::Plant => "plant",
            FurnitureClass::Chair => "chair",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }

    /// Map symbol used by the ASCII renderer.
    pub fn symbol(self) -> char {
        match self {
            FurnitureClass::Bed => 'B',
            FurnitureClass::Couch => 'C',
            FurnitureClass::Table => 'T',
            FurnitureClass::Bookshelf => 'S',
            FurnitureClass::Lamp => 'L',
            FurnitureClass::Plant => 'P',
            FurnitureClass::Chair => 'H',
        }
    }
}

impl fmt::Display for FurnitureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    GoalCandidate,
    Passive,
}

/// Axis-aligned footprint in cells: `x..x+w`, `y..y+h`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x: i32,
    pub y: i32,
    pub w: i32,
    pub h: i32,
}

impl Rect {
    pub fn contains(&self, x: i32, y: i32) -> bool {
        x >= self.x && x < self.x + self.w && y >= self.y && y < self.y + self.h
    }

    pub fn overlaps(&self, o: &Rect) -> bool {
        self.x < o.x + o.w && o.x < self.x + self.w && self.y < o.y + o.h && o.y < self.y + self.h
    }

    /// Chebyshev distance from a cell to the nearest footprint cell.
    pub fn chebyshev(&self, x: i32, y: i32) -> i32 {
        let dx = (self.x - x).max(x - (self.x + self.w - 1)).max(0);
        let dy = (self.y - y).max(y - (self.y + self.h - 1)).max(0);
        dx.max(dy)
    }

    pub fn cells(&self) -> impl Iterator<Item = (i32, i32)> + '_ {
        (self.y..self.y + self.h).flat_map(move |y| (self.x..self.x + self.w).map(move |x| (x, y)))
    }

    pub fn center_m(&self) -> [f64; 2] {
        [
            (f64::from(self.x) + f64::from(self.w) / 2.0) * CELL,
            (f64::from(self.y) + f64::from(self.h) / 2.0) * CELL,
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Furniture {
    pub id: String,
    pub class: FurnitureClass,
    pub footprint: Rect,
    pub role: Role,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NavMap {
    pub width: i32,
    pub height: i32,
    pub furniture: Vec<Furniture>,
    pub start: Pose,
}

impl NavMap {
    pub fn empty(width: i32, height: i32) -> Self {
        Self {
            width,
            height,
            furniture: Vec::new(),
            start: Pose {
                x: 0,
                y: 0,
                heading: 0,
            },
        }
    }

    pub fn get(&self, id: &str) -> Option<&Furniture> {
        self.furniture.iter().find(|f| f.id == id)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.furniture.iter().position(|f| f.id == id)
    }

    pub fn in_bounds(&self, x: i32, y: i32) -> bool {
        x >= 0 && y >= 0 && x < self.width && y < self.height
    }

    pub fn blocked(&self, x: i32, y: i32) -> bool {
        !self.in_bounds(x, y) || self.furniture.iter().any(|f| f.footprint.contains(x, y))
    }

    pub fn occupancy(&self) -> grid::Occupancy {
        grid::Occupancy::of(self)
    }

    /// Checks the map invariants; returns a description of the first violation.
    pub fn check(&self) -> std::result::Result<(), String> {
        if self.width < 1 || self.height < 1 {
            return Err("empty grid".into());
        }
        if self.width > MAX_SIDE || self.height > MAX_SIDE {
            return Err(format!("grid larger than {MAX_SIDE} cells per side"));
        }
        if self.start.heading >= HEADINGS {
            return Err(format!("heading {} out of range", self.start.heading));
        }
        for (i, f) in self.furniture.iter().enumerate() {
            let r = f.footprint;
            if r.w < 1 || r.h < 1 {
                return Err(format!("{} has an empty footprint", f.id));
            }
            if r.x < 0 || r.y < 0 || r.x + r.w > self.width || r.y + r.h > self.height {
                return Err(format!("{} is out of bounds", f.id));
            }
            for g in &self.furniture[i + 1..] {
                if g.id == f.id {
                    return Err(format!("duplicate furniture id {}", f.id));
                }
                if g.footprint.overlaps(&r) {
                    return Err(format!("{} overlaps {}", f.id, g.id));
                }
            }
        }
        if self.blocked(self.start.x, self.start.y) {
            return Err("start cell is occupied".into());
        }
        Ok(())
    }
}

impl Layout for NavMap {
    fn env_kind(&self) -> EnvKind {
        EnvKind::Nav
    }

    fn placements(&self) -> Vec<Placement> {
        self.furniture
            .iter()
            .map(|f| Placement {
                id: f.id.clone(),
                position: f.footprint.center_m(),
            })
            .collect()
    }
}

/// Two ordered subgoals, by furniture id.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NavFrame {
    pub g1: String,
    pub g2: String,
}

impl NavFrame {
    pub fn new(g1: impl Into<String>, g2: impl Into<String>) -> Self {
        Self {
            g1: g1.into(),
            g2: g2.into(),
        }
    }

    pub fn swapped(&self) -> Self {
        Self::new(self.g2.clone(), self.g1.clone())
    }
}

pub type NavGoal = NavFrame;
pub type NavBehavior = Behavior<Pose, NavGoal>;
pub type NavInstance = TestInstance<NavWorld>;

#[derive(Clone, Debug)]
pub struct NavWorld {
    pub phrasebook: Phrasebook,
    pub width: i32,
    pub height: i32,
}

impl Default for NavWorld {
    fn default() -> Self {
        Self {
            phrasebook: Phrasebook::builtin(),
            width: DEFAULT_SIZE,
            height: DEFAULT_SIZE,
        }
    }
}

impl Environment for NavWorld {
    const KIND: EnvKind = EnvKind::Nav;

    type Scene = NavMap;
    type Frame = NavFrame;
    type Waypoint = Pose;
    type Goal = NavGoal;

    fn staging_scene(&self) -> NavMap {
        NavMap::empty(self.width, self.height)
    }

    fn sample_set(&self, n: usize, seed: u64) -> Result<EvaluationSet<Self>> {
        sampler::sample_set(self, n, seed)
    }

    fn plan(
        &self,
        scene: &NavMap,
        instruction: &InstructionOf<Self>,
    ) -> std::result::Result<BehaviorOf<Self>, Infeasible> {
        shortest_path(scene, &instruction.frame)
    }

    fn goal_satisfied(&self, _scene: &NavMap, _goal: &NavGoal) -> bool {
        false
    }

    fn referents_present(&self, scene: &NavMap, frame: &NavFrame) -> bool {
        frame.g1 != frame.g2 && scene.get(&frame.g1).is_some() && scene.get(&frame.g2).is_some()
    }

    fn supported_perturbations(&self) -> &'static [PerturbationTag] {
        &[
            PerturbationTag::L,
            PerturbationTag::LB,
            PerturbationTag::S,
            PerturbationTag::SB,
        ]
    }

    fn perturb(
        &self,
        tag: PerturbationTag,
        base: &NavInstance,
        seed: u64,
    ) -> std::result::Result<NavInstance, Skip> {
        perturb::apply(self, tag, base, seed)
    }

    fn rollout(
        &self,
        policy: &PolicyConfig,
        scene: &NavMap,
        instruction: &InstructionOf<Self>,
        expected: &BehaviorOf<Self>,
        seed: u64,
    ) -> Rollout<NavMap> {
        crate::policies::nav::rollout(policy, scene, instruction, expected, seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::scene_diff_cost;

    #[test]
    fn rect_geometry() {
        let r = Rect { x: 2, y: 3, w: 2, h: 1 };
        assert!(r.contains(3, 3) && !r.contains(4, 3));
        assert_eq!(r.chebyshev(1, 2), 1);
        assert_eq!(r.chebyshev(5, 3), 2);
        assert_eq!(r.chebyshev(2, 3), 0);
        assert_eq!(r.cells().count(), 2);
        assert!(r.overlaps(&Rect { x: 3, y: 3, w: 1, h: 1 }));
        assert!(!r.overlaps(&Rect { x: 4, y: 3, w: 1, h: 1 }));
    }

    #[test]
    fn adding_furniture_costs_staging_distance() {
        let mut a = NavMap::empty(10, 10);
        let b = a.clone();
        a.furniture.push(Furniture {
            id: "chair-1".into(),
            class: FurnitureClass::Chair,
            footprint: Rect { x: 1, y: 1, w: 1, h: 1 },
            role: Role::Passive,
        });
        assert_eq!(scene_diff_cost(&a, &b).unwrap(), 3.0);
        let mut c = a.clone();
        c.furniture[0].footprint.x = 3;
        assert!((scene_diff_cost(&a, &c).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn oversized_grids_are_rejected() {
        assert!(NavMap::empty(MAX_SIDE, 1).check().is_ok());
        assert!(NavMap::empty(MAX_SIDE + 1, 1).check().is_err());
        assert!(NavMap::empty(0, 3).check().is_err());
    }
}

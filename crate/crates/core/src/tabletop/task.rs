//! Semantic frames for the five tabletop task categories and the goal
//! predicates they induce on a concrete board.

use serde::{Deserialize, Serialize};

use super::{add, dist, inside, scale, sub, unit, BlockRef, Board, Point, BLOCK_RADIUS, BOARD_HEIGHT,
    BOARD_WIDTH, EPSILON, SEPARATION};
use crate::env::Infeasible;

/// Offset of a block-to-block goal point from the target, toward the source.
pub const ADJACENT_OFFSET: f64 = 0.05;
/// Offset of a relative-placement goal from the target block.
pub const RELATION_OFFSET: f64 = 0.10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Block2Block,
    Block2Abs,
    Block2Rel,
    Block2BlockRel,
    Separate,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::Block2Block,
        Category::Block2Abs,
        Category::Block2Rel,
        Category::Block2BlockRel,
        Category::Separate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Block2Block => "block2block",
            Category::Block2Abs => "block2abs",
            Category::Block2Rel => "block2rel",
            Category::Block2BlockRel => "block2blockrel",
            Category::Separate => "separate",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }

    pub fn has_target(self) -> bool {
        matches!(
            self,
            Category::Block2Block | Category::Block2BlockRel | Category::Separate
        )
    }
}

/// Cells of the 3x3 board grid. "Top" is +y.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    TopLeft,
    Top,
    TopRight,
    Left,
    Center,
    Right,
    BottomLeft,
    Bottom,
    BottomRight,
}

impl Region {
    pub const ALL: [Region; 9] = [
        Region::TopLeft,
        Region::Top,
        Region::TopRight,
        Region::Left,
        Region::Center,
        Region::Right,
        Region::BottomLeft,
        Region::Bottom,
        Region::BottomRight,
    ];

    /// (column, row) with column 0 = left, row 0 = top.
    fn cell(self) -> (u8, u8) {
        let i = Self::ALL.iter().position(|r| *r == self).unwrap_or(4) as u8;
        (i % 3, i / 3)
    }

    pub fn center(self) -> Point {
        let (c, r) = self.cell();
        [
            BOARD_WIDTH * (2.0 * f64::from(c) + 1.0) / 6.0,
            BOARD_HEIGHT * (5.0 - 2.0 * f64::from(r)) / 6.0,
        ]
    }

    /// Point reflection through the board center; the center has no inverse.
    pub fn inverted(self) -> Option<Self> {
        let (c, r) = self.cell();
        if (c, r) == (1, 1) {
            return None;
        }
        Some(Self::ALL[usize::from((2 - r) * 3 + (2 - c))])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::Up, Direction::Down, Direction::Left, Direction::Right];

    pub fn vector(self) -> Point {
        match self {
            Direction::Up => [0.0, 1.0],
            Direction::Down => [0.0, -1.0],
            Direction::Left => [-1.0, 0.0],
            Direction::Right => [1.0, 0.0],
        }
    }

    pub fn inverted(self) -> Self {
        match self {
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Magnitude {
    Slightly,
    Somewhat,
}

impl Magnitude {
    pub fn meters(self) -> f64 {
        match self {
            Magnitude::Slightly => 0.05,
            Magnitude::Somewhat => 0.10,
        }
    }

    /// Goal tolerance for relative moves. Half the magnitude, so the start
    /// position never already satisfies the goal.
    pub fn tolerance(self) -> f64 {
        self.meters() / 2.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TabletopTask {
    pub category: Category,
    pub source: BlockRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<BlockRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<Region>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub magnitude: Option<Magnitude>,
}

impl TabletopTask {
    pub fn block2block(source: BlockRef, target: BlockRef) -> Self {
        Self::bare(Category::Block2Block, source).with_target(target)
    }

    pub fn block2abs(source: BlockRef, region: Region) -> Self {
        Self {
            region: Some(region),
            ..Self::bare(Category::Block2Abs, source)
        }
    }

    pub fn block2rel(source: BlockRef, direction: Direction, magnitude: Magnitude) -> Self {
        Self {
            direction: Some(direction),
            magnitude: Some(magnitude),
            ..Self::bare(Category::Block2Rel, source)
        }
    }

    pub fn block2blockrel(source: BlockRef, target: BlockRef, direction: Direction) -> Self {
        Self {
            direction: Some(direction),
            ..Self::bare(Category::Block2BlockRel, source).with_target(target)
        }
    }

    pub fn separate(source: BlockRef, target: BlockRef) -> Self {
        Self::bare(Category::Separate, source).with_target(target)
    }

    fn bare(category: Category, source: BlockRef) -> Self {
        Self {
            category,
            source,
            target: None,
            region: None,
            direction: None,
            magnitude: None,
        }
    }

    fn with_target(mut self, target: BlockRef) -> Self {
        self.target = Some(target);
        self
    }

    /// Whether the optional fields match what the category requires.
    pub fn is_well_formed(&self) -> bool {
        let shape = (
            self.target.is_some(),
            self.region.is_some(),
            self.direction.is_some(),
            self.magnitude.is_some(),
        );
        let ok = match self.category {
            Category::Block2Block | Category::Separate => shape == (true, false, false, false),
            Category::Block2Abs => shape == (false, true, false, false),
            Category::Block2Rel => shape == (false, false, true, true),
            Category::Block2BlockRel => shape == (true, false, true, false),
        };
        ok && self.target != Some(self.source)
    }

    pub fn referents(&self) -> impl Iterator<Item = BlockRef> {
        std::iter::once(self.source).chain(self.target)
    }

    pub fn has_direction(&self) -> bool {
        self.direction.is_some() || self.region.is_some_and(|r| r.inverted().is_some())
    }

    /// Exchange source and target referents; `None` for single-referent tasks.
    pub fn swapped(&self) -> Option<Self> {
        let target = self.target?;
        Some(Self {
            source: target,
            target: Some(self.source),
            ..self.clone()
        })
    }

    /// Flip the direction word or absolute region; `None` when there is none
    /// or the region is the center.
    pub fn inverted(&self) -> Option<Self> {
        if let Some(d) = self.direction {
            return Some(Self {
                direction: Some(d.inverted()),
                ..self.clone()
            });
        }
        let r = self.region?.inverted()?;
        Some(Self {
            region: Some(r),
            ..self.clone()
        })
    }

    /// Goal predicate on `board`, resolved against the current block positions.
    pub fn goal(&self, board: &Board) -> Result<TabletopGoal, Infeasible> {
        if !self.is_well_formed() {
            return Err(Infeasible::new(format!("malformed {} frame", self.category.name())));
        }
        let src = board
            .position(self.source)
            .ok_or_else(|| Infeasible::new(format!("{} missing", self.source)))?;
        let target_pos = match self.target {
            Some(t) => Some(
                board
                    .position(t)
                    .ok_or_else(|| Infeasible::new(format!("{t} missing")))?,
            ),
            None => None,
        };
        let near = |point: Point, tolerance: f64| {
            if inside(point, BLOCK_RADIUS) {
                Ok(TabletopGoal::Near {
                    block: self.source,
                    point,
                    tolerance,
                })
            } else {
                Err(Infeasible::new("goal outside workspace"))
            }
        };
        match self.category {
            Category::Block2Block => {
                let tgt = target_pos.expect("well-formed");
                let u = unit(sub(src, tgt)).unwrap_or([1.0, 0.0]);
                near(add(tgt, scale(u, ADJACENT_OFFSET)), EPSILON)
            }
            Category::Block2Abs => near(self.region.expect("well-formed").center(), EPSILON),
            Category::Block2Rel => {
                let m = self.magnitude.expect("well-formed");
                let d = self.direction.expect("well-formed");
                near(add(src, scale(d.vector(), m.meters())), m.tolerance())
            }
            Category::Block2BlockRel => {
                let tgt = target_pos.expect("well-formed");
                let d = self.direction.expect("well-formed");
                near(add(tgt, scale(d.vector(), RELATION_OFFSET)), EPSILON)
            }
            Category::Separate => Ok(TabletopGoal::Apart {
                block: self.source,
                other: self.target.expect("well-formed"),
                min_distance: SEPARATION,
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TabletopGoal {
    /// `block` ends within `tolerance` of `point`.
    Near {
        block: BlockRef,
        point: Point,
        tolerance: f64,
    },
    /// `block` ends at least `min_distance` from `other`.
    Apart {
        block: BlockRef,
        other: BlockRef,
        min_distance: f64,
    },
}

const PREDICATE_TOL: f64 = 1e-9;

impl TabletopGoal {
    pub fn block(&self) -> BlockRef {
        match self {
            TabletopGoal::Near { block, .. } | TabletopGoal::Apart { block, .. } => *block,
        }
    }

    pub fn satisfied(&self, board: &Board) -> bool {
        match *self {
            TabletopGoal::Near {
                block,
                point,
                tolerance,
            } => board
                .position(block)
                .is_some_and(|p| dist(p, point) <= tolerance + PREDICATE_TOL),
            TabletopGoal::Apart {
                block,
                other,
                min_distance,
            } => match (board.position(block), board.position(other)) {
                (Some(a), Some(b)) => dist(a, b) >= min_distance - PREDICATE_TOL,
                _ => false,
            },
        }
    }

    /// Push direction and distance that satisfy the goal from `board`.
    pub fn push(&self, board: &Board) -> Option<(Point, f64)> {
        match *self {
            TabletopGoal::Near {
                block,
                point,
                tolerance,
            } => {
                let p = board.position(block)?;
                let d = dist(point, p);
                let u = unit(sub(point, p)).unwrap_or([1.0, 0.0]);
                Some((u, (d - tolerance).max(0.0)))
            }
            TabletopGoal::Apart {
                block,
                other,
                min_distance,
            } => {
                let p = board.position(block)?;
                let q = board.position(other)?;
                let d = dist(p, q);
                let u = unit(sub(p, q)).unwrap_or([1.0, 0.0]);
                Some((u, (min_distance - d).max(0.0)))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabletop::{Color, Shape};

    fn r(c: Color, s: Shape) -> BlockRef {
        BlockRef::new(c, s)
    }

    #[test]
    fn region_geometry_and_inversion() {
        assert_eq!(Region::TopLeft.inverted(), Some(Region::BottomRight));
        assert_eq!(Region::Top.inverted(), Some(Region::Bottom));
        assert_eq!(Region::Left.inverted(), Some(Region::Right));
        assert_eq!(Region::TopRight.inverted(), Some(Region::BottomLeft));
        assert_eq!(Region::Center.inverted(), None);
        for reg in Region::ALL {
            if let Some(i) = reg.inverted() {
                assert_eq!(i.inverted(), Some(reg));
            }
        }
        let tl = Region::TopLeft.center();
        assert!((tl[0] - 0.1).abs() < 1e-12 && (tl[1] - 0.4 * 5.0 / 6.0).abs() < 1e-12);
        let c = Region::Center.center();
        assert!((c[0] - 0.3).abs() < 1e-12 && (c[1] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn swap_and_invert_preconditions() {
        let a = r(Color::Red, Shape::Moon);
        let b = r(Color::Blue, Shape::Cube);
        assert!(TabletopTask::block2abs(a, Region::Top).swapped().is_none());
        assert!(TabletopTask::block2block(a, b).inverted().is_none());
        assert!(TabletopTask::block2abs(a, Region::Center).inverted().is_none());
        let t = TabletopTask::block2rel(a, Direction::Right, Magnitude::Slightly);
        assert_eq!(t.inverted().unwrap().direction, Some(Direction::Left));
        assert_eq!(t.inverted().unwrap().magnitude, Some(Magnitude::Slightly));
        let s = TabletopTask::block2blockrel(a, b, Direction::Up);
        assert_eq!(s.swapped().unwrap().swapped().unwrap(), s);
        assert_eq!(s.inverted().unwrap().inverted().unwrap(), s);
    }

    #[test]
    fn goals_resolve_against_board() {
        let a = r(Color::Red, Shape::Moon);
        let b = r(Color::Blue, Shape::Cube);
        let board = Board {
            pusher: [0.05, 0.05],
            blocks: vec![
                crate::tabletop::Block::new(a, [0.3, 0.2]),
                crate::tabletop::Block::new(b, [0.5, 0.2]),
            ],
        };
        let g = TabletopTask::block2block(a, b).goal(&board).unwrap();
        match g {
            TabletopGoal::Near { point, tolerance, .. } => {
                assert!((point[0] - 0.45).abs() < 1e-12);
                assert_eq!(tolerance, EPSILON);
            }
            _ => panic!(),
        }
        assert!(!g.satisfied(&board));
        // Source already far enough apart.
        let sep = TabletopTask::separate(a, b).goal(&board).unwrap();
        assert!(sep.satisfied(&board));
        let missing = TabletopTask::block2abs(r(Color::Green, Shape::Star), Region::Top);
        assert!(missing.goal(&board).is_err());
        // Relative goal off the board.
        let off = TabletopTask::block2blockrel(a, b, Direction::Left);
        assert!(off.goal(&board).is_ok());
        let mut edge = board.clone();
        edge.blocks[1].position = [0.08, 0.2];
        assert!(off.goal(&edge).is_err());
    }
}

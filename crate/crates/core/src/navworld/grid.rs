//! Motion model: poses, actions, occupancy and subgoal halos.

use serde::{Deserialize, Serialize};

use super::{NavMap, HEADINGS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pose {
    pub x: i32,
    pub y: i32,
    /// Multiples of 30°, counter-clockwise from +x.
    pub heading: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Forward,
    Left,
    Right,
    Stop,
}

impl Action {
    pub const MOVES: [Action; 3] = [Action::Forward, Action::Left, Action::Right];
}

/// Cell offset of one forward move for each heading. Off-axis headings snap
/// to the nearest diagonal.
pub const FORWARD: [(i32, i32); HEADINGS as usize] = [
    (1, 0),
    (1, 1),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, -1),
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Occupancy {
    pub width: i32,
    pub height: i32,
    cells: Vec<bool>,
}

impl Occupancy {
    pub fn of(map: &NavMap) -> Self {
        let mut cells = vec![false; (map.width.max(0) * map.height.max(0)) as usize];
        for f in &map.furniture {
            for (x, y) in f.footprint.cells() {
                if map.in_bounds(x, y) {
                    cells[(y * map.width + x) as usize] = true;
                }
            }
        }
        Self {
            width: map.width,
            height: map.height,
            cells,
        }
    }

    pub fn blocked(&self, x: i32, y: i32) -> bool {
        x < 0 || y < 0 || x >= self.width || y >= self.height || self.cells[(y * self.width + x) as usize]
    }

    pub fn index(&self, x: i32, y: i32) -> usize {
        (y * self.width + x) as usize
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// Apply one action. Returns the new pose and whether a forward move was
/// blocked (the pose is then unchanged).
pub fn step(occ: &Occupancy, pose: Pose, action: Action) -> (Pose, bool) {
    match action {
        Action::Stop => (pose, false),
        Action::Left => (
            Pose {
                heading: (pose.heading + 1) % HEADINGS,
                ..pose
            },
            false,
        ),
        Action::Right => (
            Pose {
                heading: (pose.heading + HEADINGS - 1) % HEADINGS,
                ..pose
            },
            false,
        ),
        Action::Forward => {
            let (dx, dy) = FORWARD[pose.heading as usize];
            let (nx, ny) = (pose.x + dx, pose.y + dy);
            let corner_cut = dx != 0 && dy != 0 && (occ.blocked(pose.x + dx, pose.y) || occ.blocked(pose.x, pose.y + dy));
            if occ.blocked(nx, ny) || corner_cut {
                (pose, true)
            } else {
                (Pose { x: nx, y: ny, ..pose }, false)
            }
        }
    }
}

/// Free cells at Chebyshev distance exactly 1 from a piece of furniture.
pub fn halo(map: &NavMap, occ: &Occupancy, id: &str) -> Option<Vec<bool>> {
    let f = map.get(id)?;
    let mut mask = vec![false; occ.len()];
    let r = f.footprint;
    for y in (r.y - 1)..=(r.y + r.h) {
        for x in (r.x - 1)..=(r.x + r.w) {
            if !occ.blocked(x, y) && r.chebyshev(x, y) == 1 {
                mask[occ.index(x, y)] = true;
            }
        }
    }
    Some(mask)
}

/// Subgoal progress after arriving in a cell: 0 = none, 1 = g₁, 2 = g₁ then g₂.
pub fn advance(phase: u8, cell: usize, h1: &[bool], h2: &[bool]) -> u8 {
    let mut p = phase;
    if p == 0 && h1[cell] {
        p = 1;
    }
    if p == 1 && h2[cell] {
        p = 2;
    }
    p
}

/// Actions that turn consecutive poses of a trajectory into each other,
/// followed by a final stop.
pub fn actions_of(trajectory: &[Pose]) -> Vec<Action> {
    let mut out: Vec<Action> = trajectory
        .windows(2)
        .map(|w| {
            if (w[0].x, w[0].y) != (w[1].x, w[1].y) {
                Action::Forward
            } else if w[1].heading == (w[0].heading + 1) % HEADINGS {
                Action::Left
            } else {
                Action::Right
            }
        })
        .collect();
    out.push(Action::Stop);
    out
}

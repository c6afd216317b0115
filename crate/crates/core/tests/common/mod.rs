//! Independent oracles shared by the integration tests. Nothing here calls the
//! crate's planners, cost functions or metric code.
#![allow(dead_code)]

use std::collections::BTreeMap;

use contrastbench::navworld::{NavMap, Pose, Rect};
use contrastbench::tabletop::task::TabletopGoal;
use contrastbench::tabletop::Board;

/// Forward offset for heading `h` (multiples of 30°): each axis moves when
/// the heading's component along it exceeds a quarter.
pub fn forward_offset(h: u8) -> (i32, i32) {
    let a = f64::from(h) * std::f64::consts::PI / 6.0;
    let snap = |v: f64| if v > 0.25 { 1 } else if v < -0.25 { -1 } else { 0 };
    (snap(a.cos()), snap(a.sin()))
}

fn occupied(map: &NavMap, x: i32, y: i32) -> bool {
    x < 0
        || y < 0
        || x >= map.width
        || y >= map.height
        || map.furniture.iter().any(|f| {
            let r = f.footprint;
            x >= r.x && x < r.x + r.w && y >= r.y && y < r.y + r.h
        })
}

fn ring(map: &NavMap, r: &Rect, x: i32, y: i32) -> bool {
    if occupied(map, x, y) {
        return false;
    }
    let dx = if x < r.x { r.x - x } else if x >= r.x + r.w { x - (r.x + r.w - 1) } else { 0 };
    let dy = if y < r.y { r.y - y } else if y >= r.y + r.h { y - (r.y + r.h - 1) } else { 0 };
    dx.max(dy) == 1
}

/// Free cell touching the footprint of furniture `id` (8-neighbourhood).
pub fn in_halo(map: &NavMap, id: &str, x: i32, y: i32) -> bool {
    map.furniture
        .iter()
        .find(|f| f.id == id)
        .is_some_and(|f| ring(map, &f.footprint, x, y))
}

fn phase_after(map: &NavMap, g1: &str, g2: &str, phase: u8, x: i32, y: i32) -> u8 {
    let mut p = phase;
    if p == 0 && in_halo(map, g1, x, y) {
        p = 1;
    }
    if p == 1 && in_halo(map, g2, x, y) {
        p = 2;
    }
    p
}

/// Successor states of one pose under forward, left and right.
pub fn successors(map: &NavMap, p: Pose) -> Vec<Pose> {
    let mut out = vec![
        Pose { heading: (p.heading + 1) % 12, ..p },
        Pose { heading: (p.heading + 11) % 12, ..p },
    ];
    let (dx, dy) = forward_offset(p.heading);
    let (nx, ny) = (p.x + dx, p.y + dy);
    let diagonal_clear = dx == 0 || dy == 0 || (!occupied(map, p.x + dx, p.y) && !occupied(map, p.x, p.y + dy));
    if !occupied(map, nx, ny) && diagonal_clear {
        out.push(Pose { x: nx, y: ny, ..p });
    }
    out
}

/// Fewest actions (excluding the final stop) that visit g1's halo and then
/// g2's halo, by Bellman-Ford relaxation over (x, y, heading, phase).
pub fn exhaustive_action_count(map: &NavMap, g1: &str, g2: &str) -> Option<usize> {
    let (w, h) = (map.width, map.height);
    let idx = |p: &Pose, ph: u8| ((((p.y * w + p.x) * 12 + i32::from(p.heading)) * 3) + i32::from(ph)) as usize;
    let n = (w * h * 12 * 3) as usize;
    let mut dist = vec![usize::MAX; n];
    let start = map.start;
    let ph0 = phase_after(map, g1, g2, 0, start.x, start.y);
    dist[idx(&start, ph0)] = 0;
    let mut edges = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if occupied(map, x, y) {
                continue;
            }
            for heading in 0..12u8 {
                let p = Pose { x, y, heading };
                for ph in 0..3u8 {
                    if ph == 2 {
                        continue;
                    }
                    for q in successors(map, p) {
                        let qp = phase_after(map, g1, g2, ph, q.x, q.y);
                        edges.push((idx(&p, ph), idx(&q, qp)));
                    }
                }
            }
        }
    }
    loop {
        let mut changed = false;
        for &(a, b) in &edges {
            if dist[a] != usize::MAX && dist[a] + 1 < dist[b] {
                dist[b] = dist[a] + 1;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut best = usize::MAX;
    for y in 0..h {
        for x in 0..w {
            for heading in 0..12u8 {
                let p = Pose { x, y, heading };
                if !occupied(map, x, y) {
                    best = best.min(dist[idx(&p, 2)]);
                }
            }
        }
    }
    (best != usize::MAX).then_some(best)
}

/// Poses of a trajectory up to and including the first one in g1's halo.
pub fn g1_prefix(map: &NavMap, g1: &str, traj: &[Pose]) -> Vec<Pose> {
    match traj.iter().position(|p| in_halo(map, g1, p.x, p.y)) {
        Some(i) => traj[..=i].to_vec(),
        None => traj.to_vec(),
    }
}

/// Total block displacement between two boards, with one meter per block that
/// appears in only one of them.
pub fn board_reset_distance(from: &Board, to: &Board) -> f64 {
    let key = |b: &Board| -> BTreeMap<String, [f64; 2]> {
        b.blocks.iter().map(|x| (x.referent().id(), x.position)).collect()
    };
    let (a, b) = (key(from), key(to));
    let mut d = 0.0;
    for (id, p) in &a {
        match b.get(id) {
            Some(q) => d += ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt(),
            None => d += 1.0,
        }
    }
    d + b.keys().filter(|k| !a.contains_key(*k)).count() as f64
}

/// Goal predicate evaluated from raw block coordinates.
pub fn tabletop_goal_holds(goal: &TabletopGoal, board: &Board) -> bool {
    let pos = |r| board.blocks.iter().find(|b| b.referent() == r).map(|b| b.position);
    let d = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    match *goal {
        TabletopGoal::Near { block, point, tolerance } => pos(block).is_some_and(|p| d(p, point) <= tolerance + 1e-9),
        TabletopGoal::Apart { block, other, min_distance } => match (pos(block), pos(other)) {
            (Some(a), Some(b)) => d(a, b) >= min_distance - 1e-9,
            _ => false,
        },
    }
}

/// Success-weighted path length from its definition.
pub fn spl(success: bool, optimal: f64, taken: f64) -> f64 {
    if !success {
        0.0
    } else if optimal <= 0.0 && taken <= 0.0 {
        1.0
    } else {
        optimal / optimal.max(taken)
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

//! Breadth-first shortest path over (cell, heading, subgoal phase) and the
//! ordered-subgoal progress metric.

use std::collections::VecDeque;

use super::grid::{advance, halo, step, Action, Occupancy, Pose};
use super::{NavBehavior, NavFrame, NavMap, CELL, HEADINGS};
use crate::env::Infeasible;

struct Halos {
    occ: Occupancy,
    h1: Vec<bool>,
    h2: Vec<bool>,
}

fn halos(map: &NavMap, frame: &NavFrame) -> Result<Halos, Infeasible> {
    if frame.g1 == frame.g2 {
        return Err(Infeasible::new("subgoals must differ"));
    }
    let occ = map.occupancy();
    let h1 = halo(map, &occ, &frame.g1).ok_or_else(|| Infeasible::new(format!("{} missing", frame.g1)))?;
    let h2 = halo(map, &occ, &frame.g2).ok_or_else(|| Infeasible::new(format!("{} missing", frame.g2)))?;
    Ok(Halos { occ, h1, h2 })
}

/// Minimum-action trajectory that enters g₁'s halo, then g₂'s, then stops.
/// Ties break by action order forward, left, right.
pub fn shortest_path(map: &NavMap, frame: &NavFrame) -> Result<NavBehavior, Infeasible> {
    map.check().map_err(Infeasible::new)?;
    let Halos { occ, h1, h2 } = halos(map, frame)?;
    let start = map.start;
    let h = usize::from(HEADINGS);
    let state = |p: &Pose, phase: u8| (occ.index(p.x, p.y) * h + usize::from(p.heading)) * 3 + usize::from(phase);
    let phase0 = advance(0, occ.index(start.x, start.y), &h1, &h2);

    let mut parent: Vec<Option<usize>> = vec![None; occ.len() * h * 3];
    let mut seen = vec![false; parent.len()];
    let mut pose_of: Vec<Pose> = vec![start; parent.len()];
    let s0 = state(&start, phase0);
    seen[s0] = true;
    let mut queue = VecDeque::from([(start, phase0)]);
    let mut goal = None;
    while let Some((p, phase)) = queue.pop_front() {
        let s = state(&p, phase);
        if phase == 2 {
            goal = Some(s);
            break;
        }
        for a in Action::MOVES {
            let (q, collided) = step(&occ, p, a);
            if collided {
                continue;
            }
            let qp = advance(phase, occ.index(q.x, q.y), &h1, &h2);
            let t = state(&q, qp);
            if !seen[t] {
                seen[t] = true;
                parent[t] = Some(s);
                pose_of[t] = q;
                queue.push_back((q, qp));
            }
        }
    }
    let mut s = goal.ok_or_else(|| Infeasible::new("subgoals unreachable from the start pose"))?;
    let mut trajectory = vec![pose_of[s]];
    while let Some(prev) = parent[s] {
        s = prev;
        trajectory.push(pose_of[s]);
    }
    trajectory.reverse();
    let forwards = trajectory
        .windows(2)
        .filter(|w| (w[0].x, w[0].y) != (w[1].x, w[1].y))
        .count();
    Ok(NavBehavior {
        trajectory,
        goal: frame.clone(),
        optimal_length: CELL * forwards as f64,
    })
}

fn phases(map: &NavMap, frame: &NavFrame, visited: &[Pose]) -> Option<Vec<u8>> {
    let Halos { occ, h1, h2 } = halos(map, frame).ok()?;
    let mut phase = 0;
    Some(
        visited
            .iter()
            .filter(|p| map.in_bounds(p.x, p.y))
            .map(|p| {
                phase = advance(phase, occ.index(p.x, p.y), &h1, &h2);
                phase
            })
            .collect(),
    )
}

/// 0 if g₁ was never reached, 0.5 if only g₁, 1.0 if g₁ then g₂.
pub fn progress_to_goal(map: &NavMap, frame: &NavFrame, visited: &[Pose]) -> f64 {
    match phases(map, frame, visited).and_then(|p| p.last().copied()) {
        Some(2) => 1.0,
        Some(1) => 0.5,
        _ => 0.0,
    }
}

/// Leading part of a trajectory up to and including first entry into g₁'s halo.
pub fn g1_prefix<'a>(map: &NavMap, frame: &NavFrame, trajectory: &'a [Pose]) -> &'a [Pose] {
    let end = phases(map, frame, trajectory)
        .and_then(|p| p.iter().position(|ph| *ph >= 1))
        .map_or(trajectory.len(), |i| i + 1);
    &trajectory[..end]
}

//! Optimal push planner and the SPL metric.
//!
//! The plan drives the pusher to the approach point one contact distance behind
//! the source block on the goal ray, going around the block on a tangent-arc
//! path when it is in the way, then pushes straight until the goal holds.

use std::f64::consts::{PI, TAU};

use super::dynamics::execute;
use super::task::{TabletopGoal, TabletopTask};
use super::{add, dist, dot, inside, scale, sub, unit, Board, Point, BLOCK_RADIUS, PUSHER_RADIUS,
    STEP, STEP_LIMIT};
use crate::env::Infeasible;
use crate::model::Behavior;

/// Clearance kept from the source block while detouring around it.
pub const DETOUR_MARGIN: f64 = 1e-3;
/// Below this length, zero-length optimal paths count as fully efficient.
pub const LENGTH_EPS: f64 = 1e-9;

pub type PushBehavior = Behavior<Point, TabletopGoal>;

/// Success weighted by path length.
pub fn spl(success: bool, optimal_length: f64, taken_length: f64) -> f64 {
    if !success {
        return 0.0;
    }
    let denom = optimal_length.max(taken_length);
    if denom <= LENGTH_EPS {
        return 1.0;
    }
    (optimal_length / denom).clamp(0.0, 1.0)
}

/// Waypoints strictly after `from`, ending exactly at `to`, spaced <= STEP.
fn segment(from: Point, to: Point, out: &mut Vec<Point>) {
    let len = dist(from, to);
    if len == 0.0 {
        return;
    }
    let n = (len / STEP).ceil().max(1.0) as usize;
    for k in 1..n {
        out.push(add(from, scale(sub(to, from), k as f64 / n as f64)));
    }
    out.push(to);
}

fn on_circle(c: Point, r: f64, theta: f64) -> Point {
    [c[0] + r * theta.cos(), c[1] + r * theta.sin()]
}

fn arc(c: Point, r: f64, start: f64, sweep: f64, out: &mut Vec<Point>) {
    let n = (sweep.abs() * r / STEP).ceil().max(1.0) as usize;
    for k in 1..=n {
        out.push(on_circle(c, r, start + sweep * k as f64 / n as f64));
    }
}

fn angle(v: Point) -> f64 {
    v[1].atan2(v[0])
}

/// Wrap into [0, 2π).
fn wrap_pos(a: f64) -> f64 {
    a.rem_euclid(TAU)
}

/// Wrap into (-π, π].
fn wrap_signed(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// Pusher path from `p` to the approach point `a` on the contact circle of the
/// block centred at `c`. Returned waypoints exclude `p`.
pub fn approach_path(p: Point, c: Point, a: Point) -> Vec<Point> {
    let contact = PUSHER_RADIUS + BLOCK_RADIUS;
    let detour = contact + DETOUR_MARGIN;
    let mut out = Vec::new();
    if dist(p, a) == 0.0 {
        return out;
    }
    // `a` is visible from `p` when `p` lies on the outer side of the tangent at `a`.
    if dot(sub(p, a), sub(a, c)) >= 0.0 {
        segment(p, a, &mut out);
        return out;
    }
    let theta_a = angle(sub(a, c));
    let dpc = dist(p, c);
    let (start_theta, sweep) = if dpc < detour {
        let u = unit(sub(p, c)).unwrap_or_else(|| scale(sub(a, c), -1.0 / contact));
        let theta_s = angle(u);
        segment(p, on_circle(c, detour, theta_s), &mut out);
        (theta_s, wrap_signed(theta_a - theta_s))
    } else {
        let alpha = (detour / dpc).acos();
        let phi = angle(sub(p, c));
        let ccw_start = phi + alpha;
        let cw_start = phi - alpha;
        let ccw = wrap_pos(theta_a - ccw_start);
        let cw = wrap_pos(cw_start - theta_a);
        if ccw <= cw {
            segment(p, on_circle(c, detour, ccw_start), &mut out);
            (ccw_start, ccw)
        } else {
            segment(p, on_circle(c, detour, cw_start), &mut out);
            (cw_start, -cw)
        }
    };
    arc(c, detour, start_theta, sweep, &mut out);
    let last = *out.last().expect("arc emits points");
    segment(last, a, &mut out);
    out
}

fn path_length(traj: &[Point]) -> f64 {
    traj.windows(2).map(|w| dist(w[0], w[1])).sum()
}

/// Optimal push for `task` on `board`, verified by running it through the
/// dynamics. The trajectory starts at the current pusher position.
pub fn optimal_plan(board: &Board, task: &TabletopTask) -> Result<PushBehavior, Infeasible> {
    let goal = task.goal(board)?;
    plan_for_goal(board, goal)
}

pub(crate) fn plan_for_goal(board: &Board, goal: TabletopGoal) -> Result<PushBehavior, Infeasible> {
    let (dir, push) = goal
        .push(board)
        .ok_or_else(|| Infeasible::new("goal block missing"))?;
    let c = board.position(goal.block()).expect("push() resolved the block");
    let contact = PUSHER_RADIUS + BLOCK_RADIUS;
    let a = sub(c, scale(dir, contact));
    if !inside(a, PUSHER_RADIUS) {
        return Err(Infeasible::new("approach point outside workspace"));
    }
    if !inside(add(c, scale(dir, push)), BLOCK_RADIUS) {
        return Err(Infeasible::new("push leaves the workspace"));
    }
    let mut trajectory = vec![board.pusher];
    trajectory.extend(approach_path(board.pusher, c, a));
    if trajectory.iter().any(|p| !inside(*p, PUSHER_RADIUS)) {
        return Err(Infeasible::new("approach path leaves the workspace"));
    }
    let push_start = *trajectory.last().expect("non-empty");
    segment(push_start, add(push_start, scale(dir, push)), &mut trajectory);

    let exec = execute(board, &trajectory, STEP_LIMIT);
    if exec.timeout || exec.blocked_steps > 0 || !goal.satisfied(&exec.board) {
        return Err(Infeasible::new("plan does not reach the goal under the dynamics"));
    }
    let optimal_length = path_length(&trajectory);
    Ok(PushBehavior {
        trajectory,
        goal,
        optimal_length,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabletop::task::Region;
    use crate::tabletop::{Block, BlockRef, Color, Shape};

    fn r(c: Color, s: Shape) -> BlockRef {
        BlockRef::new(c, s)
    }

    #[test]
    fn spl_examples() {
        assert_eq!(spl(true, 0.32, 0.32), 1.0);
        assert_eq!(spl(false, 0.32, 0.32), 0.0);
        assert!((spl(true, 0.32, 0.64) - 0.5).abs() < 1e-15);
        assert_eq!(spl(true, 0.0, 0.0), 1.0);
        assert_eq!(spl(true, 0.5, 0.1), 1.0);
    }

    #[test]
    fn hand_geometry_plan() {
        // Pusher (0.1, 0.2), block (0.3, 0.2), goal point (0.5, 0.2): approach
        // at (0.27, 0.2), L = 0.17 + (0.2 - 0.05) = 0.32.
        let src = r(Color::Red, Shape::Moon);
        let board = Board {
            pusher: [0.1, 0.2],
            blocks: vec![Block::new(src, [0.3, 0.2])],
        };
        let goal = TabletopGoal::Near {
            block: src,
            point: [0.5, 0.2],
            tolerance: 0.05,
        };
        let b = plan_for_goal(&board, goal.clone()).unwrap();
        assert!((b.optimal_length - 0.32).abs() < 1e-12, "{}", b.optimal_length);
        assert!(b.trajectory.iter().any(|p| dist(*p, [0.27, 0.2]) < 1e-12));
        let exec = execute(&board, &b.trajectory, STEP_LIMIT);
        assert!(goal.satisfied(&exec.board));
        assert!((exec.path_length - b.optimal_length).abs() < 1e-6);
    }

    #[test]
    fn degenerate_goal_needs_only_the_approach() {
        let src = r(Color::Red, Shape::Moon);
        let board = Board {
            pusher: [0.1, 0.2],
            blocks: vec![Block::new(src, [0.3, 0.2])],
        };
        let goal = TabletopGoal::Near {
            block: src,
            point: [0.32, 0.2],
            tolerance: 0.05,
        };
        let b = plan_for_goal(&board, goal).unwrap();
        assert!((b.optimal_length - 0.17).abs() < 1e-12);
    }

    #[test]
    fn detour_goes_around_the_block() {
        let src = r(Color::Red, Shape::Moon);
        // Pusher on the goal side: must travel around the block.
        let board = Board {
            pusher: [0.45, 0.2],
            blocks: vec![Block::new(src, [0.3, 0.2])],
        };
        let task = TabletopTask::block2abs(src, Region::Right);
        let b = optimal_plan(&board, &task).unwrap();
        let approach = b
            .trajectory
            .iter()
            .position(|p| dist(*p, [0.27, 0.2]) < 1e-12)
            .unwrap();
        for p in &b.trajectory[..=approach] {
            assert!(dist(*p, [0.3, 0.2]) >= PUSHER_RADIUS + BLOCK_RADIUS - 1e-9);
        }
        for w in b.trajectory.windows(2) {
            assert!(dist(w[0], w[1]) <= STEP + 1e-12);
        }
        let exec = execute(&board, &b.trajectory, STEP_LIMIT);
        assert!(b.goal.satisfied(&exec.board));
        assert!((exec.path_length - b.optimal_length).abs() < 1e-9);
        // Straight-line distance lower bound: 0.45 -> 0.27 plus the half circle.
        assert!(b.optimal_length > 0.18);
    }

    #[test]
    fn separate_pushes_until_threshold() {
        let a = r(Color::Red, Shape::Moon);
        let t = r(Color::Blue, Shape::Cube);
        // 0.03 m gap between the discs.
        let board = Board {
            pusher: [0.5, 0.1],
            blocks: vec![Block::new(a, [0.37, 0.2]), Block::new(t, [0.3, 0.2])],
        };
        let b = optimal_plan(&board, &TabletopTask::separate(a, t)).unwrap();
        let exec = execute(&board, &b.trajectory, STEP_LIMIT);
        let pa = exec.board.position(a).unwrap();
        let pt = exec.board.position(t).unwrap();
        assert!(dist(pa, pt) >= 0.15 - 1e-9);
    }

    #[test]
    fn approach_outside_workspace_is_infeasible() {
        let src = r(Color::Red, Shape::Moon);
        let board = Board {
            pusher: [0.3, 0.2],
            blocks: vec![Block::new(src, [0.025, 0.2])],
        };
        let task = TabletopTask::block2abs(src, Region::Right);
        assert!(optimal_plan(&board, &task).is_err());
    }
}

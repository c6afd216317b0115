//! Kinematic quasi-static pushing. The pusher displaces any block it
//! penetrates along the contact normal by the penetration depth, and pushed
//! blocks displace their neighbours by the same rule.

use super::{add, clamp_inside, dist, norm, scale, sub, unit, Board, Point, BLOCK_RADIUS,
    PUSHER_RADIUS, STEP};

/// Resolution passes for block-block contacts per step.
pub const RESOLUTION_PASSES: usize = 10;
const CONTACT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub board: Board,
    /// False when contacts could not be resolved (a block pinned against a
    /// wall); the board is then returned unchanged.
    pub moved: bool,
}

/// Advance the board by one pusher displacement of at most [`STEP`].
///
/// Oversized moves are scaled down to [`STEP`]; the pusher is clamped to the
/// workspace and blocks are clamped to the board. If the resulting contacts
/// cannot be separated the pusher is stopped in place.
pub fn step_dynamics(board: &Board, pusher_move: Point) -> StepOutcome {
    let len = norm(pusher_move);
    let mv = if len > STEP {
        scale(pusher_move, STEP / len)
    } else {
        pusher_move
    };
    let mut next = board.clone();
    next.pusher = clamp_inside(add(board.pusher, mv), PUSHER_RADIUS);
    let fallback = unit(mv).unwrap_or([1.0, 0.0]);

    let reach = PUSHER_RADIUS + BLOCK_RADIUS;
    let mut active = vec![false; next.blocks.len()];
    for (i, b) in next.blocks.iter_mut().enumerate() {
        let d = dist(b.position, next.pusher);
        if d < reach {
            let n = unit(sub(b.position, next.pusher)).unwrap_or(fallback);
            b.position = clamp_inside(add(b.position, scale(n, reach - d)), BLOCK_RADIUS);
            active[i] = true;
        }
    }

    let contact = 2.0 * BLOCK_RADIUS;
    for _ in 0..RESOLUTION_PASSES {
        let mut changed = false;
        for i in 0..next.blocks.len() {
            for j in (i + 1)..next.blocks.len() {
                let (pi, pj) = (next.blocks[i].position, next.blocks[j].position);
                let d = dist(pi, pj);
                if d >= contact - CONTACT_TOL || !(active[i] || active[j]) {
                    continue;
                }
                // The block further from the pusher gives way.
                let (pusher_side, mover) = match (active[i], active[j]) {
                    (true, false) => (i, j),
                    (false, true) => (j, i),
                    _ if dist(pi, next.pusher) <= dist(pj, next.pusher) => (i, j),
                    _ => (j, i),
                };
                let from = next.blocks[pusher_side].position;
                let to = next.blocks[mover].position;
                let n = unit(sub(to, from)).unwrap_or(fallback);
                next.blocks[mover].position =
                    clamp_inside(add(to, scale(n, contact - d)), BLOCK_RADIUS);
                active[mover] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    if has_overlap(&next) {
        return StepOutcome {
            board: board.clone(),
            moved: false,
        };
    }
    StepOutcome {
        board: next,
        moved: true,
    }
}

fn has_overlap(b: &Board) -> bool {
    let reach = PUSHER_RADIUS + BLOCK_RADIUS;
    let contact = 2.0 * BLOCK_RADIUS;
    b.blocks.iter().enumerate().any(|(i, a)| {
        dist(a.position, b.pusher) < reach - CONTACT_TOL
            || b.blocks[i + 1..]
                .iter()
                .any(|c| dist(a.position, c.position) < contact - CONTACT_TOL)
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Execution {
    pub board: Board,
    /// Distance the pusher actually travelled, meters.
    pub path_length: f64,
    pub steps: usize,
    pub blocked_steps: usize,
    pub timeout: bool,
}

/// Drive the pusher through `waypoints` (the first may equal the current
/// pusher position). Each waypoint must be within [`STEP`] of its predecessor.
pub fn execute(board: &Board, waypoints: &[Point], step_limit: usize) -> Execution {
    let mut cur = board.clone();
    let mut path_length = 0.0;
    let mut steps = 0;
    let mut blocked_steps = 0;
    for wp in waypoints {
        let mv = sub(*wp, cur.pusher);
        if norm(mv) == 0.0 {
            continue;
        }
        if steps == step_limit {
            return Execution {
                board: cur,
                path_length,
                steps,
                blocked_steps,
                timeout: true,
            };
        }
        let out = step_dynamics(&cur, mv);
        steps += 1;
        if out.moved {
            path_length += dist(out.board.pusher, cur.pusher);
        } else {
            blocked_steps += 1;
        }
        cur = out.board;
    }
    Execution {
        board: cur,
        path_length,
        steps,
        blocked_steps,
        timeout: false,
    }
}

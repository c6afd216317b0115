use rand::Rng;

use super::{decide, Draws, Intent, PolicyConfig, RANDOM_WALK_STEPS};
use crate::env::Rollout;
use crate::model::Instruction;
use crate::rng;
use crate::tabletop::planner::{optimal_plan, spl, PushBehavior};
use crate::tabletop::{dist, execute, step_dynamics, Board, TabletopTask, STEP, STEP_LIMIT};

/// Non-referent blocks closer than this to the source count as clutter.
pub const CLUTTER_RADIUS: f64 = 0.10;

/// Blocks other than the task's referents within [`CLUTTER_RADIUS`] of the
/// source block.
pub fn clutter(scene: &Board, frame: &TabletopTask) -> usize {
    let Some(src) = scene.position(frame.source) else {
        return 0;
    };
    scene
        .blocks
        .iter()
        .filter(|b| !frame.referents().any(|r| r == b.referent()))
        .filter(|b| dist(b.position, src) < CLUTTER_RADIUS)
        .count()
}

fn random_walk(scene: &Board, seed: u64) -> (Board, f64) {
    let mut r = rng::stream(seed, &[rng::label("walk")]);
    let mut board = scene.clone();
    let mut length = 0.0;
    for _ in 0..RANDOM_WALK_STEPS {
        let a: f64 = r.gen_range(0.0..std::f64::consts::TAU);
        let out = step_dynamics(&board, [STEP * a.cos(), STEP * a.sin()]);
        if out.moved {
            length += dist(out.board.pusher, board.pusher);
        }
        board = out.board;
    }
    (board, length)
}

pub fn rollout(
    policy: &PolicyConfig,
    scene: &Board,
    instruction: &Instruction<TabletopTask>,
    expected: &PushBehavior,
    seed: u64,
) -> Rollout<Board> {
    let frame = &instruction.frame;
    let draws = Draws::new(policy, seed);
    let intent = decide(
        policy,
        &draws,
        frame.has_direction(),
        frame.target.is_some(),
        instruction.phrasing.is_canonical(),
        clutter(scene, frame),
    );
    let finish = |end_scene: Board, path_length: f64, timeout: bool, failed: bool| {
        let success = !failed && !timeout && expected.goal.satisfied(&end_scene);
        Rollout {
            metric: spl(success, expected.optimal_length, path_length),
            end_scene,
            success,
            path_length,
            timeout,
        }
    };
    match intent {
        Intent::Halt => finish(scene.clone(), 0.0, false, false),
        Intent::Wander => {
            let (end, len) = random_walk(scene, draws.walk_seed);
            finish(end, len, false, true)
        }
        Intent::Plan {
            invert_direction,
            swap_referents,
        } => {
            let mut believed = frame.clone();
            if swap_referents {
                believed = believed.swapped().unwrap_or(believed);
            }
            if invert_direction {
                believed = believed.inverted().unwrap_or(believed);
            }
            let trajectory = if believed == *frame {
                expected.trajectory.clone()
            } else {
                match optimal_plan(scene, &believed) {
                    Ok(b) => b.trajectory,
                    Err(_) => return finish(scene.clone(), 0.0, false, false),
                }
            };
            let exec = execute(scene, &trajectory, STEP_LIMIT);
            finish(exec.board, exec.path_length, exec.timeout, false)
        }
    }
}

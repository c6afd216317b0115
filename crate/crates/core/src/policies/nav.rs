use rand::Rng;

use super::{decide, Draws, Intent, PolicyConfig, RANDOM_WALK_STEPS};
use crate::env::Rollout;
use crate::model::Instruction;
use crate::navworld::grid::{actions_of, step, Action, Pose};
use crate::navworld::sampler::familiar_classes;
use crate::navworld::{progress_to_goal, shortest_path, NavBehavior, NavFrame, NavMap, Role, CELL,
    STEP_LIMIT};
use crate::rng;

/// Passive furniture of a class absent from the default layouts.
pub fn distractors(scene: &NavMap) -> usize {
    let familiar = familiar_classes();
    scene
        .furniture
        .iter()
        .filter(|f| f.role == Role::Passive && !familiar.contains(&f.class))
        .count()
}

struct Run {
    visited: Vec<Pose>,
    path_length: f64,
    timeout: bool,
}

fn run_actions(scene: &NavMap, actions: &[Action]) -> Run {
    let occ = scene.occupancy();
    let mut pose = scene.start;
    let mut visited = vec![pose];
    let mut forwards = 0usize;
    let mut timeout = false;
    for (i, &a) in actions.iter().enumerate() {
        if a == Action::Stop {
            break;
        }
        if i >= STEP_LIMIT {
            timeout = true;
            break;
        }
        let (next, collided) = step(&occ, pose, a);
        if a == Action::Forward && !collided {
            forwards += 1;
        }
        pose = next;
        visited.push(pose);
    }
    Run {
        visited,
        path_length: CELL * forwards as f64,
        timeout,
    }
}

fn random_actions(seed: u64) -> Vec<Action> {
    let mut r = rng::stream(seed, &[rng::label("walk")]);
    (0..RANDOM_WALK_STEPS)
        .map(|_| Action::MOVES[r.gen_range(0..Action::MOVES.len())])
        .collect()
}

pub fn rollout(
    policy: &PolicyConfig,
    scene: &NavMap,
    instruction: &Instruction<NavFrame>,
    expected: &NavBehavior,
    seed: u64,
) -> Rollout<NavMap> {
    let frame = &instruction.frame;
    let draws = Draws::new(policy, seed);
    let intent = decide(policy, &draws, false, true, instruction.phrasing.is_canonical(), distractors(scene));
    let finish = |run: Run, failed: bool| {
        let metric = if failed || run.timeout {
            0.0
        } else {
            progress_to_goal(scene, frame, &run.visited)
        };
        let mut end_scene = scene.clone();
        end_scene.start = *run.visited.last().unwrap_or(&scene.start);
        Rollout {
            end_scene,
            metric,
            success: metric == 1.0,
            path_length: run.path_length,
            timeout: run.timeout,
        }
    };
    match intent {
        Intent::Halt => finish(run_actions(scene, &[Action::Stop]), false),
        Intent::Wander => finish(run_actions(scene, &random_actions(draws.walk_seed)), true),
        Intent::Plan { swap_referents, .. } => {
            let trajectory = if swap_referents {
                match shortest_path(scene, &frame.swapped()) {
                    Ok(b) => b.trajectory,
                    Err(_) => return finish(run_actions(scene, &[Action::Stop]), false),
                }
            } else {
                expected.trajectory.clone()
            };
            finish(run_actions(scene, &actions_of(&trajectory)), false)
        }
    }
}

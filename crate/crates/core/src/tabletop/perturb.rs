//! ΔLB₁ (swap referents), ΔLB₂ (invert direction), ΔSB₁ (move target) and
//! ΔSB₂ (move source). Every emitted instance is re-planned from scratch.

use super::planner::optimal_plan;
use super::sampler::uniform_point;
use super::task::TabletopTask;
use super::{dist, BlockRef, Board, Tabletop, TabletopInstance, BLOCK_RADIUS, PUSHER_RADIUS,
    RELOCATE_MIN, RETRIES};
use crate::env::Skip;
use crate::model::{Instruction, PerturbationTag};
use crate::rng;

pub fn apply(
    env: &Tabletop,
    tag: PerturbationTag,
    base: &TabletopInstance,
    seed: u64,
) -> Result<TabletopInstance, Skip> {
    let frame = &base.instruction.frame;
    match tag {
        PerturbationTag::LB1 => {
            let swapped = frame
                .swapped()
                .ok_or_else(|| Skip::Inapplicable("instruction has a single referent".into()))?;
            emit(env, tag, base, base.scene.clone(), swapped)
        }
        PerturbationTag::LB2 => {
            let inverted = frame
                .inverted()
                .ok_or_else(|| Skip::Inapplicable("no direction word or invertible region".into()))?;
            emit(env, tag, base, base.scene.clone(), inverted)
        }
        PerturbationTag::SB1 => {
            let target = frame
                .target
                .ok_or_else(|| Skip::Inapplicable("instruction has no target block".into()))?;
            relocate(env, tag, base, target, seed)
        }
        PerturbationTag::SB2 => relocate(env, tag, base, frame.source, seed),
        other => Err(Skip::Inapplicable(format!("{other} is not defined for tabletop"))),
    }
}

fn emit(
    env: &Tabletop,
    tag: PerturbationTag,
    base: &TabletopInstance,
    scene: Board,
    frame: TabletopTask,
) -> Result<TabletopInstance, Skip> {
    let expected = optimal_plan(&scene, &frame).map_err(|e| Skip::Invalid(e.to_string()))?;
    if expected.goal.satisfied(&scene) {
        return Err(Skip::Invalid("goal already satisfied at start".into()));
    }
    Ok(TabletopInstance {
        id: format!("{}:{}", base.id, tag),
        instruction: Instruction {
            surface: env.templates.render(&frame),
            frame,
            phrasing: base.instruction.phrasing,
        },
        scene,
        expected,
        perturbation: tag,
        parent_id: Some(base.id.clone()),
    })
}

/// Whether `block` may sit at `p` on `board` without overlapping anything.
fn free_spot(board: &Board, block: BlockRef, p: [f64; 2]) -> bool {
    dist(p, board.pusher) > PUSHER_RADIUS + BLOCK_RADIUS
        && board
            .blocks
            .iter()
            .filter(|b| b.referent() != block)
            .all(|b| dist(b.position, p) > 2.0 * BLOCK_RADIUS)
}

fn relocate(
    env: &Tabletop,
    tag: PerturbationTag,
    base: &TabletopInstance,
    block: BlockRef,
    seed: u64,
) -> Result<TabletopInstance, Skip> {
    let idx = base
        .scene
        .find(block)
        .ok_or_else(|| Skip::Invalid(format!("{block} missing from scene")))?;
    let origin = base.scene.blocks[idx].position;
    let mut r = rng::stream(seed, &[rng::label("relocate")]);
    let mut placed = 0usize;
    let mut last = String::new();
    for _ in 0..RETRIES {
        let p = uniform_point(&mut r, BLOCK_RADIUS);
        if dist(p, origin) < RELOCATE_MIN || !free_spot(&base.scene, block, p) {
            continue;
        }
        placed += 1;
        let mut scene = base.scene.clone();
        scene.blocks[idx].position = p;
        match emit(env, tag, base, scene, base.instruction.frame.clone()) {
            Ok(inst) => return Ok(inst),
            Err(Skip::Invalid(m) | Skip::Inapplicable(m)) => last = m,
        }
    }
    if placed == 0 {
        Err(Skip::Inapplicable(format!(
            "no collision-free spot for {block} after {RETRIES} retries"
        )))
    } else {
        Err(Skip::Invalid(format!(
            "{placed} relocations of {block} all infeasible; last: {last}"
        )))
    }
}

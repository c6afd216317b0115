//! Navigation perturbations. ΔL rewords, ΔLB swaps the final goal, ΔS moves or
//! adds a passive object without changing the optimal actions, and ΔSB moves
//! the final goal or blocks the path so the optimal actions change.

use rand::seq::SliceRandom;
use rand::Rng;

use super::grid::actions_of;
use super::planner::{g1_prefix, shortest_path};
use super::sampler::class_of;
use super::{Furniture, FurnitureClass, NavBehavior, NavFrame, NavInstance, NavMap, NavWorld, Rect,
    Role, RETRIES, SB_MIN_SHIFT};
use crate::env::Skip;
use crate::model::{Instruction, PerturbationTag, Phrasing};
use crate::rng::{self, Rng as ChaRng};

/// Id given to furniture brought in by ΔS.
pub const ADDED_ID: &str = "chair-1";

pub fn apply(env: &NavWorld, tag: PerturbationTag, base: &NavInstance, seed: u64) -> Result<NavInstance, Skip> {
    let mut r = rng::stream(seed, &[rng::label("nav-perturb")]);
    match tag {
        PerturbationTag::L => reword(env, base, &mut r),
        PerturbationTag::LB => change_goal(env, base, &mut r),
        PerturbationTag::S => move_passive(env, base, &mut r),
        PerturbationTag::SB => alter_path(env, base, &mut r),
        other => Err(Skip::Inapplicable(format!("{other} is not defined for navigation"))),
    }
}

fn emit(
    env: &NavWorld,
    tag: PerturbationTag,
    base: &NavInstance,
    scene: NavMap,
    frame: NavFrame,
    phrasing: Phrasing,
    expected: NavBehavior,
) -> Result<NavInstance, Skip> {
    let surface = env
        .phrasebook
        .render(phrasing, class_of(&scene, &frame.g1), class_of(&scene, &frame.g2))
        .ok_or_else(|| Skip::Invalid("phrasing not renderable".into()))?;
    Ok(NavInstance {
        id: format!("{}:{}", base.id, tag),
        instruction: Instruction {
            surface,
            frame,
            phrasing,
        },
        scene,
        expected,
        perturbation: tag,
        parent_id: Some(base.id.clone()),
    })
}

fn reword(env: &NavWorld, base: &NavInstance, r: &mut ChaRng) -> Result<NavInstance, Skip> {
    let p = base.instruction.phrasing;
    let count = env.phrasebook.paraphrase_count(p.template);
    let options: Vec<u16> = (1..count as u16).filter(|q| *q != p.paraphrase).collect();
    let &paraphrase = options
        .choose(r)
        .ok_or_else(|| Skip::Inapplicable("template has no alternative paraphrase".into()))?;
    let frame = &base.instruction.frame;
    let mut mask = 0u8;
    for (bit, id) in [(1u8, &frame.g1), (2u8, &frame.g2)] {
        if env.phrasebook.synonym(class_of(&base.scene, id)).is_some() && r.gen_bool(0.5) {
            mask |= bit;
        }
    }
    let phrasing = Phrasing {
        template: p.template,
        paraphrase,
        synonyms: mask,
    };
    emit(env, PerturbationTag::L, base, base.scene.clone(), frame.clone(), phrasing, base.expected.clone())
}

fn change_goal(env: &NavWorld, base: &NavInstance, r: &mut ChaRng) -> Result<NavInstance, Skip> {
    let frame = &base.instruction.frame;
    let mut candidates: Vec<&Furniture> = base
        .scene
        .furniture
        .iter()
        .filter(|f| f.role == Role::GoalCandidate && f.id != frame.g1 && f.id != frame.g2)
        .collect();
    if candidates.is_empty() {
        return Err(Skip::Inapplicable("no other goal candidate in the scene".into()));
    }
    candidates.shuffle(r);
    let old_prefix = g1_prefix(&base.scene, frame, &base.expected.trajectory);
    for c in candidates {
        let new_frame = NavFrame::new(frame.g1.clone(), c.id.clone());
        let Ok(b) = shortest_path(&base.scene, &new_frame) else {
            continue;
        };
        if g1_prefix(&base.scene, &new_frame, &b.trajectory) == old_prefix {
            return emit(env, PerturbationTag::LB, base, base.scene.clone(), new_frame, base.instruction.phrasing, b);
        }
    }
    Err(Skip::Invalid("no alternative final goal keeps the path to the first goal".into()))
}

/// Footprint `r` fits on `map` without overlapping anything but `ignore`
/// and leaves the start cell free.
fn fits(map: &NavMap, r: &Rect, ignore: Option<&str>) -> bool {
    r.x >= 0
        && r.y >= 0
        && r.x + r.w <= map.width
        && r.y + r.h <= map.height
        && !r.contains(map.start.x, map.start.y)
        && map
            .furniture
            .iter()
            .filter(|f| Some(f.id.as_str()) != ignore)
            .all(|f| !f.footprint.overlaps(r))
}

fn random_rect(r: &mut ChaRng, map: &NavMap, w: i32, h: i32) -> Rect {
    Rect {
        x: r.gen_range(0..=map.width - w),
        y: r.gen_range(0..=map.height - h),
        w,
        h,
    }
}

fn same_actions(a: &NavBehavior, b: &NavBehavior) -> bool {
    actions_of(&a.trajectory) == actions_of(&b.trajectory)
}

fn relocate_passive(base: &NavInstance, r: &mut ChaRng) -> Option<(NavMap, NavBehavior)> {
    let passives: Vec<usize> = (0..base.scene.furniture.len())
        .filter(|&i| base.scene.furniture[i].role == Role::Passive)
        .collect();
    if passives.is_empty() {
        return None;
    }
    for _ in 0..RETRIES {
        let &i = passives.choose(r)?;
        let f = &base.scene.furniture[i];
        let rect = random_rect(r, &base.scene, f.footprint.w, f.footprint.h);
        if rect == f.footprint || !fits(&base.scene, &rect, Some(&f.id)) {
            continue;
        }
        let mut scene = base.scene.clone();
        scene.furniture[i].footprint = rect;
        if let Ok(b) = shortest_path(&scene, &base.instruction.frame) {
            if same_actions(&b, &base.expected) {
                return Some((scene, b));
            }
        }
    }
    None
}

fn add_chair(base: &NavInstance, r: &mut ChaRng) -> Option<(NavMap, NavBehavior)> {
    if base.scene.get(ADDED_ID).is_some() {
        return None;
    }
    for _ in 0..RETRIES {
        let rect = random_rect(r, &base.scene, 1, 1);
        if !fits(&base.scene, &rect, None) {
            continue;
        }
        let mut scene = base.scene.clone();
        scene.furniture.push(Furniture {
            id: ADDED_ID.into(),
            class: FurnitureClass::Chair,
            footprint: rect,
            role: Role::Passive,
        });
        if let Ok(b) = shortest_path(&scene, &base.instruction.frame) {
            if same_actions(&b, &base.expected) {
                return Some((scene, b));
            }
        }
    }
    None
}

fn move_passive(env: &NavWorld, base: &NavInstance, r: &mut ChaRng) -> Result<NavInstance, Skip> {
    let add_first = r.gen_bool(0.5);
    let found = if add_first {
        add_chair(base, r).or_else(|| relocate_passive(base, r))
    } else {
        relocate_passive(base, r).or_else(|| add_chair(base, r))
    };
    let (scene, b) = found.ok_or_else(|| {
        Skip::Inapplicable(format!("no trajectory-preserving placement in {RETRIES} retries"))
    })?;
    emit(env, PerturbationTag::S, base, scene, base.instruction.frame.clone(), base.instruction.phrasing, b)
}

fn move_goal(base: &NavInstance, r: &mut ChaRng) -> Option<(NavMap, NavBehavior)> {
    let frame = &base.instruction.frame;
    let i = base.scene.index_of(&frame.g2)?;
    let old = base.scene.furniture[i].footprint;
    for _ in 0..RETRIES {
        let rect = random_rect(r, &base.scene, old.w, old.h);
        if (rect.x - old.x).abs().max((rect.y - old.y).abs()) < SB_MIN_SHIFT || !fits(&base.scene, &rect, Some(&frame.g2)) {
            continue;
        }
        let mut scene = base.scene.clone();
        scene.furniture[i].footprint = rect;
        if let Ok(b) = shortest_path(&scene, frame) {
            if !same_actions(&b, &base.expected) {
                return Some((scene, b));
            }
        }
    }
    None
}

fn block_path(base: &NavInstance, r: &mut ChaRng) -> Option<(NavMap, NavBehavior)> {
    let frame = &base.instruction.frame;
    let passives: Vec<usize> = (0..base.scene.furniture.len())
        .filter(|&i| base.scene.furniture[i].role == Role::Passive)
        .collect();
    let path: Vec<(i32, i32)> = base.expected.trajectory.iter().map(|p| (p.x, p.y)).skip(1).collect();
    if passives.is_empty() || path.is_empty() {
        return None;
    }
    for _ in 0..RETRIES {
        let &i = passives.choose(r)?;
        let &(x, y) = path.choose(r)?;
        let f = &base.scene.furniture[i];
        let rect = Rect {
            x,
            y,
            w: f.footprint.w,
            h: f.footprint.h,
        };
        if !fits(&base.scene, &rect, Some(&f.id)) {
            continue;
        }
        let mut scene = base.scene.clone();
        scene.furniture[i].footprint = rect;
        if let Ok(b) = shortest_path(&scene, frame) {
            if !same_actions(&b, &base.expected) {
                return Some((scene, b));
            }
        }
    }
    None
}

fn alter_path(env: &NavWorld, base: &NavInstance, r: &mut ChaRng) -> Result<NavInstance, Skip> {
    let goal_first = r.gen_bool(0.5);
    let found = if goal_first {
        move_goal(base, r).or_else(|| block_path(base, r))
    } else {
        block_path(base, r).or_else(|| move_goal(base, r))
    };
    let (scene, b) = found.ok_or_else(|| {
        Skip::Inapplicable(format!("no feasible path-changing edit in {RETRIES} retries"))
    })?;
    emit(env, PerturbationTag::SB, base, scene, base.instruction.frame.clone(), base.instruction.phrasing, b)
}

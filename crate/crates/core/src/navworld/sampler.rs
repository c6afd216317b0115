//! Seeded apartment layouts and two-subgoal instructions.
//!
//! Five layouts share one furniture roster; instance `i` of a set lives in
//! layout `i mod 5`. Every sampled instance is checked to admit all four
//! perturbations under the seeds the contrast runner will use.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;

use super::grid::{halo, Pose};
use super::planner::shortest_path;
use super::{Furniture, FurnitureClass, NavFrame, NavInstance, NavMap, NavWorld, Rect, Role, HEADINGS,
    RETRIES};
use crate::env::{perturbation_seed, Environment};
use crate::error::{Error, Result};
use crate::model::{EnvKind, EvaluationSet, Instruction, PerturbationTag, Phrasing};
use crate::rng::{self, Rng as ChaRng};

pub const LAYOUTS: usize = 5;

/// (id, class, long side, short side, role)
pub const ROSTER: [(&str, FurnitureClass, i32, i32, Role); 7] = [
    ("bed", FurnitureClass::Bed, 3, 2, Role::GoalCandidate),
    ("couch", FurnitureClass::Couch, 3, 1, Role::GoalCandidate),
    ("table", FurnitureClass::Table, 2, 2, Role::GoalCandidate),
    ("bookshelf", FurnitureClass::Bookshelf, 2, 1, Role::GoalCandidate),
    ("lamp", FurnitureClass::Lamp, 1, 1, Role::GoalCandidate),
    ("plant-1", FurnitureClass::Plant, 1, 1, Role::Passive),
    ("plant-2", FurnitureClass::Plant, 1, 1, Role::Passive),
];

/// Classes that appear in the default layouts.
pub fn familiar_classes() -> Vec<FurnitureClass> {
    let mut v: Vec<FurnitureClass> = ROSTER.iter().map(|r| r.1).collect();
    v.dedup();
    v
}

/// Free cells form one 4-connected region.
pub fn free_space_connected(map: &NavMap) -> bool {
    let occ = map.occupancy();
    let free: Vec<(i32, i32)> = (0..map.height)
        .flat_map(|y| (0..map.width).map(move |x| (x, y)))
        .filter(|&(x, y)| !occ.blocked(x, y))
        .collect();
    let Some(&first) = free.first() else {
        return false;
    };
    let mut seen = vec![false; occ.len()];
    seen[occ.index(first.0, first.1)] = true;
    let mut queue = VecDeque::from([first]);
    let mut count = 0;
    while let Some((x, y)) = queue.pop_front() {
        count += 1;
        for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let (nx, ny) = (x + dx, y + dy);
            if !occ.blocked(nx, ny) && !seen[occ.index(nx, ny)] {
                seen[occ.index(nx, ny)] = true;
                queue.push_back((nx, ny));
            }
        }
    }
    count == free.len()
}

fn grown(r: &Rect) -> Rect {
    Rect {
        x: r.x - 1,
        y: r.y - 1,
        w: r.w + 2,
        h: r.h + 2,
    }
}

/// Place the roster with at least one free cell between pieces.
pub fn sample_layout(rng: &mut ChaRng, width: i32, height: i32) -> Option<NavMap> {
    for _ in 0..RETRIES {
        let mut map = NavMap::empty(width, height);
        let mut ok = true;
        for (id, class, long, short, role) in ROSTER {
            let (w, h) = if rng.gen_bool(0.5) { (long, short) } else { (short, long) };
            if w > width || h > height {
                return None;
            }
            let placed = (0..RETRIES).find_map(|_| {
                let r = Rect {
                    x: rng.gen_range(0..=width - w),
                    y: rng.gen_range(0..=height - h),
                    w,
                    h,
                };
                map.furniture
                    .iter()
                    .all(|f| !grown(&f.footprint).overlaps(&r))
                    .then_some(r)
            });
            match placed {
                Some(footprint) => map.furniture.push(Furniture {
                    id: id.to_string(),
                    class,
                    footprint,
                    role,
                }),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok && free_space_connected(&map) {
            let occ = map.occupancy();
            let (x, y) = (0..height)
                .flat_map(|y| (0..width).map(move |x| (x, y)))
                .find(|&(x, y)| !occ.blocked(x, y))?;
            map.start = Pose { x, y, heading: 0 };
            return Some(map);
        }
    }
    None
}

/// A free start pose outside both subgoal halos.
pub fn sample_start(rng: &mut ChaRng, map: &NavMap, frame: &NavFrame) -> Option<Pose> {
    let occ = map.occupancy();
    let h1 = halo(map, &occ, &frame.g1)?;
    let h2 = halo(map, &occ, &frame.g2)?;
    let cells: Vec<(i32, i32)> = (0..map.height)
        .flat_map(|y| (0..map.width).map(move |x| (x, y)))
        .filter(|&(x, y)| {
            let i = occ.index(x, y);
            !occ.blocked(x, y) && !h1[i] && !h2[i]
        })
        .collect();
    let &(x, y) = cells.choose(rng)?;
    Some(Pose {
        x,
        y,
        heading: rng.gen_range(0..HEADINGS),
    })
}

fn goal_ids(map: &NavMap) -> Vec<&str> {
    map.furniture
        .iter()
        .filter(|f| f.role == Role::GoalCandidate)
        .map(|f| f.id.as_str())
        .collect()
}

pub(crate) fn class_of(map: &NavMap, id: &str) -> FurnitureClass {
    map.get(id).map_or(FurnitureClass::Chair, |f| f.class)
}

fn draw_instance(env: &NavWorld, rng: &mut ChaRng, layout: &NavMap, id: &str) -> Option<NavInstance> {
    let mut goals = goal_ids(layout);
    goals.shuffle(rng);
    let frame = NavFrame::new(goals[0], goals[1]);
    let template = rng.gen_range(0..env.phrasebook.templates.len()) as u16;
    let mut scene = layout.clone();
    scene.start = sample_start(rng, &scene, &frame)?;
    let expected = shortest_path(&scene, &frame).ok()?;
    let phrasing = Phrasing {
        template,
        ..Phrasing::default()
    };
    let surface = env
        .phrasebook
        .render(phrasing, class_of(&scene, &frame.g1), class_of(&scene, &frame.g2))?;
    Some(NavInstance {
        id: id.to_string(),
        instruction: Instruction {
            surface,
            frame,
            phrasing,
        },
        scene,
        expected,
        perturbation: PerturbationTag::ORIGINAL,
        parent_id: None,
    })
}

pub fn sample_set(env: &NavWorld, n: usize, seed: u64) -> Result<EvaluationSet<NavWorld>> {
    let layouts: Vec<NavMap> = (0..LAYOUTS.min(n))
        .map(|k| {
            let mut r = rng::stream(seed, &[rng::label("nav-layout"), k as u64]);
            sample_layout(&mut r, env.width, env.height).ok_or_else(|| Error::Sampling {
                index: k,
                retries: RETRIES,
                reason: format!("no valid layout fits a {}x{} grid", env.width, env.height),
            })
        })
        .collect::<Result<_>>()?;
    let mut instances = Vec::with_capacity(n);
    for i in 0..n {
        let layout = &layouts[i % LAYOUTS];
        let mut r = rng::stream(seed, &[rng::label("nav-instance"), i as u64]);
        let id = format!("nav-{seed}-{i:03}");
        let mut reason = String::from("no start pose with reachable subgoals");
        let mut found = None;
        for _ in 0..RETRIES {
            let Some(inst) = draw_instance(env, &mut r, layout, &id) else {
                continue;
            };
            let failed = env.supported_perturbations().iter().find_map(|&tag| {
                env.perturb(tag, &inst, perturbation_seed(seed, i, tag))
                    .err()
                    .map(|e| format!("{tag}: {e}"))
            });
            match failed {
                None => {
                    found = Some(inst);
                    break;
                }
                Some(m) => reason = m,
            }
        }
        instances.push(found.ok_or(Error::Sampling {
            index: i,
            retries: RETRIES,
            reason,
        })?);
    }
    Ok(EvaluationSet {
        environment: EnvKind::Nav,
        seed,
        instances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layouts_are_valid_and_connected() {
        for k in 0..20u64 {
            let mut r = rng::stream(k, &[]);
            let m = sample_layout(&mut r, 20, 20).unwrap();
            assert!(m.check().is_ok());
            assert!(free_space_connected(&m));
            assert_eq!(m.furniture.len(), ROSTER.len());
        }
    }

    #[test]
    fn five_instances_over_five_layouts() {
        let env = NavWorld::default();
        let set = env.sample_set(5, 1).unwrap();
        assert_eq!(set.len(), 5);
        let mut layouts: Vec<String> = set
            .instances
            .iter()
            .map(|i| serde_json::to_string(&i.scene.furniture).unwrap())
            .collect();
        layouts.dedup();
        assert_eq!(layouts.len(), 5);
        for inst in &set.instances {
            env.check_instance(inst).unwrap();
        }
        assert_eq!(
            set.to_json().unwrap(),
            env.sample_set(5, 1).unwrap().to_json().unwrap()
        );
    }

    #[test]
    fn chair_is_unfamiliar() {
        let f = familiar_classes();
        assert!(!f.contains(&FurnitureClass::Chair));
        assert!(f.contains(&FurnitureClass::Plant));
    }
}

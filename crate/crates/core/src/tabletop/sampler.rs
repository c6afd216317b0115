//! Seeded scene and instruction sampler for tabletop evaluation sets.
//!
//! Every scene of a set uses the same roster of blocks at fresh positions, so
//! resetting between instances is a matter of moving blocks rather than
//! swapping them.

use rand::seq::SliceRandom;
use rand::Rng;

use super::planner::optimal_plan;
use super::task::{Category, Direction, Magnitude, Region, TabletopTask};
use super::{dist, Block, BlockRef, Board, Color, Point, Shape, Tabletop, TabletopInstance,
    BLOCK_RADIUS, BOARD_HEIGHT, BOARD_WIDTH, PUSHER_RADIUS, RETRIES};
use crate::env::Infeasible;
use crate::error::{Error, Result};
use crate::model::{EnvKind, EvaluationSet, Instruction, PerturbationTag, Phrasing};
use crate::rng::{self, Rng as ChaRng};

/// Blocks per scene in the default sampler.
pub const DEFAULT_BLOCKS: usize = 5;
pub const MIN_BLOCKS: usize = 2;
pub const MAX_BLOCKS: usize = 8;
/// Extra clearance between sampled blocks and the pusher.
const CLEARANCE: f64 = 0.005;

pub fn all_block_refs() -> Vec<BlockRef> {
    Color::ALL
        .iter()
        .flat_map(|c| Shape::ALL.iter().map(move |s| BlockRef::new(*c, *s)))
        .collect()
}

/// `k` distinct blocks.
pub fn sample_roster(rng: &mut ChaRng, k: usize) -> Vec<BlockRef> {
    let mut all = all_block_refs();
    all.shuffle(rng);
    all.truncate(k);
    all.sort();
    all
}

pub(crate) fn uniform_point(rng: &mut ChaRng, r: f64) -> Point {
    [
        rng.gen_range(r..=BOARD_WIDTH - r),
        rng.gen_range(r..=BOARD_HEIGHT - r),
    ]
}

/// Non-overlapping placement of `roster` plus a free pusher position.
pub fn sample_board(rng: &mut ChaRng, roster: &[BlockRef]) -> Option<Board> {
    let mut blocks: Vec<Block> = Vec::with_capacity(roster.len());
    for r in roster {
        let mut placed = false;
        for _ in 0..RETRIES {
            let p = uniform_point(rng, BLOCK_RADIUS);
            if blocks
                .iter()
                .all(|b| dist(b.position, p) > 2.0 * BLOCK_RADIUS + CLEARANCE)
            {
                blocks.push(Block::new(*r, p));
                placed = true;
                break;
            }
        }
        if !placed {
            return None;
        }
    }
    for _ in 0..RETRIES {
        let p = uniform_point(rng, PUSHER_RADIUS);
        if blocks
            .iter()
            .all(|b| dist(b.position, p) > PUSHER_RADIUS + BLOCK_RADIUS + CLEARANCE)
        {
            return Some(Board { pusher: p, blocks });
        }
    }
    None
}

pub fn sample_task(rng: &mut ChaRng, category: Category, roster: &[BlockRef]) -> TabletopTask {
    let mut pick = roster.to_vec();
    pick.shuffle(rng);
    let (src, tgt) = (pick[0], pick[1]);
    let dir = Direction::ALL[rng.gen_range(0..Direction::ALL.len())];
    match category {
        Category::Block2Block => TabletopTask::block2block(src, tgt),
        Category::Block2Abs => {
            TabletopTask::block2abs(src, Region::ALL[rng.gen_range(0..Region::ALL.len())])
        }
        Category::Block2Rel => {
            let m = if rng.gen_bool(0.5) {
                Magnitude::Slightly
            } else {
                Magnitude::Somewhat
            };
            TabletopTask::block2rel(src, dir, m)
        }
        Category::Block2BlockRel => TabletopTask::block2blockrel(src, tgt, dir),
        Category::Separate => TabletopTask::separate(src, tgt),
    }
}

/// Draw one feasible original instance of `category`: the plan exists, passes
/// simulation, and the goal does not already hold at the start.
pub fn sample_instance(
    env: &Tabletop,
    rng: &mut ChaRng,
    category: Category,
    roster: &[BlockRef],
    id: String,
) -> std::result::Result<TabletopInstance, Infeasible> {
    let mut last = Infeasible::new("no attempt made");
    for _ in 0..RETRIES {
        let Some(board) = sample_board(rng, roster) else {
            last = Infeasible::new("could not place blocks without overlap");
            continue;
        };
        let frame = sample_task(rng, category, roster);
        match optimal_plan(&board, &frame) {
            Ok(expected) if !expected.goal.satisfied(&board) => {
                return Ok(TabletopInstance {
                    id,
                    instruction: Instruction {
                        surface: env.templates.render(&frame),
                        frame,
                        phrasing: Phrasing {
                            template: category_index(category),
                            ..Phrasing::default()
                        },
                    },
                    scene: board,
                    expected,
                    perturbation: PerturbationTag::ORIGINAL,
                    parent_id: None,
                });
            }
            Ok(_) => last = Infeasible::new("goal already satisfied at start"),
            Err(e) => last = e,
        }
    }
    Err(last)
}

pub(crate) fn category_index(c: Category) -> u16 {
    Category::ALL.iter().position(|x| *x == c).unwrap_or(0) as u16
}

/// Categories for `n` instances: each appears `n / 5` or `n / 5 + 1` times,
/// in seeded order.
pub fn balanced_categories(rng: &mut ChaRng, n: usize) -> Vec<Category> {
    let mut extra = Category::ALL.to_vec();
    extra.shuffle(rng);
    let mut cats: Vec<Category> = (0..n / 5).flat_map(|_| Category::ALL).collect();
    cats.extend(extra.into_iter().take(n % 5));
    cats.shuffle(rng);
    cats
}

pub fn sample_set(env: &Tabletop, n: usize, seed: u64) -> Result<EvaluationSet<Tabletop>> {
    let k = env.blocks_per_scene;
    if !(MIN_BLOCKS..=MAX_BLOCKS).contains(&k) {
        return Err(Error::InvalidArgument(format!(
            "blocks per scene must be in {MIN_BLOCKS}..={MAX_BLOCKS}, got {k}"
        )));
    }
    let mut set_rng = rng::stream(seed, &[rng::label("tabletop-set")]);
    let roster = sample_roster(&mut set_rng, k);
    let categories = balanced_categories(&mut set_rng, n);
    let mut instances = Vec::with_capacity(n);
    for (i, cat) in categories.into_iter().enumerate() {
        let mut r = rng::stream(seed, &[rng::label("tabletop-instance"), i as u64]);
        let id = format!("tt-{seed}-{i:04}");
        let inst = sample_instance(env, &mut r, cat, &roster, id).map_err(|e| Error::Sampling {
            index: i,
            retries: RETRIES,
            reason: e.to_string(),
        })?;
        instances.push(inst);
    }
    Ok(EvaluationSet {
        environment: EnvKind::Tabletop,
        seed,
        instances,
    })
}

//! The three evaluation strategies: standard i.i.d. evaluation, limited
//! intervention, and budget-bounded contrast sets.
//!
//! Every strategy walks a single simulated scene forward. Before each trial the
//! experimenter must turn the current scene into the trial's start scene; that
//! diff is the trial's reset cost. Runs are pure functions of
//! `(set, policy, plan, seed)`.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::cost::{scene_diff, CostModel};
use crate::env::{perturbation_seed, BehaviorOf, Environment};
use crate::error::{Error, Result};
use crate::model::{CostLedger, EnvKind, EvaluationSet, PerturbationTag, TestInstance, TrialRecord};
use crate::policies::PolicyConfig;
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Standard,
    LimitedIntervention,
    ContrastSet,
}

impl StrategyKind {
    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Standard => "standard",
            StrategyKind::LimitedIntervention => "limited_intervention",
            StrategyKind::ContrastSet => "contrast_set",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyPlan {
    pub kind: StrategyKind,
    #[serde(default)]
    pub perturbations: Vec<PerturbationTag>,
    /// Cap on cumulative reset cost, in the cost model's unit.
    #[serde(default)]
    pub budget: Option<f64>,
    pub repetitions: u32,
    pub cost_model: CostModel,
}

impl StrategyPlan {
    pub fn standard(repetitions: u32) -> Self {
        Self {
            kind: StrategyKind::Standard,
            perturbations: Vec::new(),
            budget: None,
            repetitions,
            cost_model: CostModel::DistanceMoved,
        }
    }

    pub fn limited_intervention(repetitions: u32) -> Self {
        Self {
            kind: StrategyKind::LimitedIntervention,
            ..Self::standard(repetitions)
        }
    }

    pub fn contrast(perturbations: Vec<PerturbationTag>, budget: f64, repetitions: u32) -> Self {
        Self {
            kind: StrategyKind::ContrastSet,
            perturbations,
            budget: Some(budget),
            repetitions,
            cost_model: CostModel::DistanceMoved,
        }
    }

    pub fn with_cost_model(mut self, model: CostModel) -> Self {
        self.cost_model = model;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be >= 1".into()));
        }
        if let Some(k) = self.budget {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::Config(format!("budget must be positive, got {k}")));
            }
        }
        self.cost_model.validate()?;
        match self.kind {
            StrategyKind::ContrastSet => {
                if self.perturbations.is_empty() {
                    return Err(Error::Config("contrast set needs at least one perturbation".into()));
                }
                if self.budget.is_none() {
                    return Err(Error::Config("contrast set needs a budget".into()));
                }
                if let Some(t) = self.perturbations.iter().find(|t| t.is_original()) {
                    return Err(Error::Config(format!("{t} is not a perturbation")));
                }
            }
            _ if !self.perturbations.is_empty() => {
                return Err(Error::Config(format!(
                    "{} takes no perturbations",
                    self.kind.name()
                )))
            }
            _ => {}
        }
        Ok(())
    }
}

/// A perturbation that produced no trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkipRecord {
    pub base_id: String,
    pub perturbation: PerturbationTag,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub plan: StrategyPlan,
    pub seed: u64,
    pub environment: EnvKind,
    pub records: Vec<TrialRecord>,
    /// Prefix sums of `reset_cost`.
    pub cumulative_cost: Vec<f64>,
    pub skipped: Vec<SkipRecord>,
    /// True when the run stopped because the budget was exceeded.
    pub halted: bool,
}

impl RunLog {
    fn new(plan: &StrategyPlan, seed: u64, environment: EnvKind) -> Self {
        Self {
            plan: plan.clone(),
            seed,
            environment,
            records: Vec::new(),
            cumulative_cost: Vec::new(),
            skipped: Vec::new(),
            halted: false,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn total_cost(&self) -> f64 {
        self.cumulative_cost.last().copied().unwrap_or(0.0)
    }

    /// Cumulative cost paid before trial `i` was executed.
    pub fn cost_before(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.cumulative_cost[i - 1]
        }
    }

    /// One record per line, fields in declaration order.
    pub fn to_jsonl(&self) -> Result<String> {
        records_to_jsonl(&self.records)
    }
}

pub fn records_to_jsonl(records: &[TrialRecord]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

/// Parse a JSONL trial log. Blank lines are ignored.
pub fn records_from_jsonl(text: &str) -> Result<Vec<TrialRecord>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let r: TrialRecord = serde_json::from_str(line).map_err(|e| Error::Resource {
            line: i + 1,
            message: e.to_string(),
        })?;
        if !(0.0..=1.0).contains(&r.metric) || r.reset_cost.is_nan() || r.reset_cost < 0.0 {
            return Err(Error::Resource {
                line: i + 1,
                message: "metric outside [0, 1] or negative reset cost".into(),
            });
        }
        out.push(r);
    }
    Ok(out)
}

pub fn cumulative(records: &[TrialRecord]) -> Vec<f64> {
    records
        .iter()
        .scan(0.0, |acc, r| {
            *acc += r.reset_cost;
            Some(*acc)
        })
        .collect()
}

/// The scenes around one executed trial, for replay checks.
pub struct TrialTrace<E: Environment> {
    /// The nominal instance behind the trial.
    pub instance: TestInstance<E>,
    /// Scene the trial actually started from.
    pub start: E::Scene,
    pub end: E::Scene,
}

pub struct StrategyRun<E: Environment> {
    pub log: RunLog,
    pub trace: Vec<TrialTrace<E>>,
}

/// Sample mean of the executed trials' metric.
pub fn estimate_metric(log: &RunLog) -> Result<f64> {
    if log.records.is_empty() {
        return Err(Error::EmptyLog);
    }
    Ok(log.records.iter().map(|r| r.metric).sum::<f64>() / log.records.len() as f64)
}

/// Trials whose cost was paid within `budget`.
pub fn trials_within(log: &RunLog, budget: f64) -> usize {
    (0..log.len())
        .take_while(|&i| log.cost_before(i) + log.records[i].reset_cost <= budget)
        .count()
}

pub fn trial_seed(run_seed: u64, trial: usize) -> u64 {
    rng::derive(run_seed, &[rng::label("trial"), trial as u64])
}

struct Runner<'a, E: Environment> {
    env: &'a E,
    policy: &'a PolicyConfig,
    ledger: CostLedger,
    current: E::Scene,
    run: StrategyRun<E>,
}

impl<'a, E: Environment> Runner<'a, E> {
    fn new(env: &'a E, policy: &'a PolicyConfig, plan: &StrategyPlan, seed: u64) -> Self {
        Self {
            env,
            policy,
            ledger: CostLedger::new(plan.cost_model, plan.budget),
            current: env.staging_scene(),
            run: StrategyRun {
                log: RunLog::new(plan, seed, E::KIND),
                trace: Vec::new(),
            },
        }
    }

    /// Execute one trial from `start`; returns false once the budget is spent.
    fn trial(
        &mut self,
        inst: &TestInstance<E>,
        start: E::Scene,
        expected: &BehaviorOf<E>,
        repetition: u32,
        scene_reset: bool,
    ) -> Result<bool> {
        let diff = scene_diff(&self.current, &start)?;
        let cost = self.ledger.model.apply(diff)?;
        self.ledger.charge(cost);
        let index = self.run.log.records.len();
        let seed = trial_seed(self.run.log.seed, index);
        let out = self
            .env
            .rollout(self.policy, &start, &inst.instruction, expected, seed);
        let metric = if out.timeout { 0.0 } else { out.metric };
        self.run.log.records.push(TrialRecord {
            instance_id: inst.id.clone(),
            perturbation: inst.perturbation,
            repetition,
            metric,
            success: out.success && !out.timeout,
            reset_cost: cost,
            reset_distance: diff.distance,
            objects_touched: diff.objects_touched,
            scene_reset,
            path_length: out.path_length,
            optimal_length: expected.optimal_length,
            timeout: out.timeout,
            seed,
        });
        self.run.log.cumulative_cost.push(self.ledger.total);
        self.current = out.end_scene.clone();
        self.run.trace.push(TrialTrace {
            instance: inst.clone(),
            start,
            end: out.end_scene,
        });
        if self.ledger.exhausted() {
            self.run.log.halted = true;
            return Ok(false);
        }
        Ok(true)
    }

    /// All repetitions of `inst`, each reset to its nominal start.
    fn repeat(&mut self, inst: &TestInstance<E>, repetitions: u32) -> Result<bool> {
        for rep in 0..repetitions {
            if !self.trial(inst, inst.scene.clone(), &inst.expected, rep, true)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn check_inputs<E: Environment>(set: &EvaluationSet<E>, policy: &PolicyConfig, plan: &StrategyPlan, kind: StrategyKind) -> Result<()> {
    if plan.kind != kind {
        return Err(Error::InvalidArgument(format!(
            "plan is {} but runner is {}",
            plan.kind.name(),
            kind.name()
        )));
    }
    plan.validate()?;
    policy.validate()?;
    set.validate()?;
    if set.is_empty() {
        return Err(Error::InvalidArgument("evaluation set is empty".into()));
    }
    Ok(())
}

fn shuffled_order(n: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::stream(seed, &[rng::label("order")]));
    order
}

/// Instances in seed-shuffled order, each reset to its start scene.
pub fn run_standard<E: Environment>(
    env: &E,
    set: &EvaluationSet<E>,
    policy: &PolicyConfig,
    plan: &StrategyPlan,
    seed: u64,
) -> Result<StrategyRun<E>> {
    check_inputs(set, policy, plan, StrategyKind::Standard)?;
    let mut r = Runner::new(env, policy, plan, seed);
    for i in shuffled_order(set.len(), seed) {
        if !r.repeat(&set.instances[i], plan.repetitions)? {
            break;
        }
    }
    Ok(r.run)
}

/// Instructions in seed-shuffled order against whatever scene the previous
/// trial left; the scene is reset only when the instruction is infeasible there.
pub fn run_limited_intervention<E: Environment>(
    env: &E,
    set: &EvaluationSet<E>,
    policy: &PolicyConfig,
    plan: &StrategyPlan,
    seed: u64,
) -> Result<StrategyRun<E>> {
    check_inputs(set, policy, plan, StrategyKind::LimitedIntervention)?;
    let mut r = Runner::new(env, policy, plan, seed);
    'outer: for i in shuffled_order(set.len(), seed) {
        let inst = &set.instances[i];
        for rep in 0..plan.repetitions {
            let go = match env.replan_in(&r.current, &inst.instruction) {
                Ok(behavior) => {
                    let start = r.current.clone();
                    r.trial(inst, start, &behavior, rep, false)?
                }
                Err(_) => r.trial(inst, inst.scene.clone(), &inst.expected, rep, true)?,
            };
            if !go {
                break 'outer;
            }
        }
    }
    Ok(r.run)
}

/// For each base instance in set order: the instance itself, then each
/// perturbation of its nominal definition, until the budget is exceeded.
pub fn run_contrast<E: Environment>(
    env: &E,
    set: &EvaluationSet<E>,
    policy: &PolicyConfig,
    plan: &StrategyPlan,
    seed: u64,
) -> Result<StrategyRun<E>> {
    check_inputs(set, policy, plan, StrategyKind::ContrastSet)?;
    let mut r = Runner::new(env, policy, plan, seed);
    'outer: for (b, base) in set.instances.iter().enumerate() {
        if !r.repeat(base, plan.repetitions)? {
            break;
        }
        for &tag in &plan.perturbations {
            let pseed = perturbation_seed(set.seed, b, tag);
            match env.perturb(tag, base, pseed) {
                Ok(inst) => {
                    if !r.repeat(&inst, plan.repetitions)? {
                        break 'outer;
                    }
                }
                Err(skip) => r.run.log.skipped.push(SkipRecord {
                    base_id: base.id.clone(),
                    perturbation: tag,
                    reason: skip.to_string(),
                }),
            }
        }
    }
    Ok(r.run)
}

pub fn run_strategy<E: Environment>(
    env: &E,
    set: &EvaluationSet<E>,
    policy: &PolicyConfig,
    plan: &StrategyPlan,
    seed: u64,
) -> Result<StrategyRun<E>> {
    match plan.kind {
        StrategyKind::Standard => run_standard(env, set, policy, plan, seed),
        StrategyKind::LimitedIntervention => run_limited_intervention(env, set, policy, plan, seed),
        StrategyKind::ContrastSet => run_contrast(env, set, policy, plan, seed),
    }
}

//! File-backed gen → run → report pipeline.
//!
//! ```text
//! <run dir>/config.json
//! <run dir>/sets/manifest.json          config hash, environment, seeds
//! <run dir>/sets/seed-<s>.json          one evaluation set per seed
//! <run dir>/logs/<id>/seed-<s>.jsonl    one trial record per line
//! <run dir>/logs/<id>/seed-<s>.manifest.json
//! <run dir>/report/*.csv
//! ```
//!
//! The run dir defaults to `<output_dir>/<first 12 hex digits of the config
//! hash>`. Every manifest carries the full hash and is checked on read.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, StrategySpec};
use crate::env::{sample_evaluation_set, Environment};
use crate::error::{Error, Result};
use crate::model::{EnvKind, EvaluationSet, PerturbationTag, TestInstance};
use crate::navworld::NavWorld;
use crate::stats::{self, BINS};
use crate::strategies::{
    cumulative, estimate_metric, records_from_jsonl, run_standard, run_strategy, RunLog, SkipRecord, StrategyKind,
    StrategyPlan,
};
use crate::tabletop::task::Category;
use crate::tabletop::Tabletop;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingArtifact(path.to_path_buf())
        } else {
            Error::io(path, e)
        }
    })
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write(path, &s)
}

fn check_hash(path: &Path, expected: &str, found: &str) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::StaleArtifact {
            path: path.to_path_buf(),
            expected: expected.into(),
            found: found.into(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetsManifest {
    pub config_hash: String,
    pub environment: EnvKind,
    pub set_size: usize,
    pub seeds: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub strategy: String,
    pub plan: StrategyPlan,
    pub seed: u64,
    pub environment: EnvKind,
    pub trials: usize,
    pub total_cost: f64,
    pub halted: bool,
    pub skipped: Vec<SkipRecord>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SetSummary {
    pub seed: u64,
    pub instances: usize,
    /// Instances per template or task category.
    pub categories: BTreeMap<String, usize>,
    /// Instances whose stored behavior the planner reproduced.
    pub confirmed: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub strategy: String,
    pub seed: u64,
    pub trials: usize,
    pub total_cost: f64,
    pub halted: bool,
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportSummary {
    pub files: Vec<PathBuf>,
    pub rows: Vec<SummaryRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub strategy: String,
    pub seed: u64,
    pub trials: usize,
    pub total_cost: f64,
    pub halted: bool,
    pub estimate: f64,
    pub reference: f64,
    pub abs_error: f64,
}

pub struct Pipeline {
    pub config: ExperimentConfig,
    pub dir: PathBuf,
    hash: String,
}

impl Pipeline {
    /// Validate the config and fix the run dir (the stamped default unless
    /// `dir` is given).
    pub fn new(config: ExperimentConfig, dir: Option<PathBuf>) -> Result<Self> {
        config.validate()?;
        let hash = config.hash();
        let dir = dir.unwrap_or_else(|| config.run_dir());
        Ok(Self { config, dir, hash })
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn set_path(&self, seed: u64) -> PathBuf {
        self.dir.join("sets").join(format!("seed-{seed}.json"))
    }

    pub fn log_path(&self, strategy: &str, seed: u64) -> PathBuf {
        self.dir.join("logs").join(strategy).join(format!("seed-{seed}.jsonl"))
    }

    pub fn manifest_path(&self, strategy: &str, seed: u64) -> PathBuf {
        self.dir
            .join("logs")
            .join(strategy)
            .join(format!("seed-{seed}.manifest.json"))
    }

    pub fn report_dir(&self) -> PathBuf {
        self.dir.join("report")
    }

    pub fn gen(&self) -> Result<Vec<SetSummary>> {
        match self.config.environment {
            EnvKind::Tabletop => self.gen_with(&Tabletop::default(), |i| {
                Category::ALL
                    .get(usize::from(i.instruction.phrasing.template))
                    .map_or("unknown", |c| c.name())
                    .to_string()
            }),
            EnvKind::Nav => {
                let env = NavWorld::default();
                let names: Vec<String> = env.phrasebook.templates.iter().map(|t| t.name.clone()).collect();
                self.gen_with(&env, |i| {
                    names
                        .get(usize::from(i.instruction.phrasing.template))
                        .cloned()
                        .unwrap_or_else(|| "unknown".into())
                })
            }
        }
    }

    fn gen_with<E: Environment>(&self, env: &E, category: impl Fn(&TestInstance<E>) -> String + Sync) -> Result<Vec<SetSummary>> {
        let c = &self.config;
        let sets: Vec<(EvaluationSet<E>, SetSummary)> = c
            .seeds
            .par_iter()
            .map(|&seed| {
                let set = sample_evaluation_set(env, c.set_size, seed)?;
                let mut categories = BTreeMap::new();
                for inst in &set.instances {
                    *categories.entry(category(inst)).or_insert(0) += 1;
                }
                let confirmed = set.instances.iter().filter(|i| env.check_instance(i).is_ok()).count();
                let summary = SetSummary {
                    seed,
                    instances: set.len(),
                    categories,
                    confirmed,
                };
                Ok((set, summary))
            })
            .collect::<Result<_>>()?;
        write(&self.dir.join("config.json"), &(c.to_json()? + "\n"))?;
        for (set, _) in &sets {
            write(&self.set_path(set.seed), &(set.to_json()? + "\n"))?;
        }
        write_json(
            &self.dir.join("sets").join("manifest.json"),
            &SetsManifest {
                config_hash: self.hash.clone(),
                environment: c.environment,
                set_size: c.set_size,
                seeds: c.seeds.clone(),
            },
        )?;
        Ok(sets.into_iter().map(|(_, s)| s).collect())
    }

    fn load_sets<E: Environment>(&self) -> Result<Vec<EvaluationSet<E>>> {
        let path = self.dir.join("sets").join("manifest.json");
        let m: SetsManifest = serde_json::from_str(&read(&path)?)?;
        check_hash(&path, &self.hash, &m.config_hash)?;
        self.config
            .seeds
            .iter()
            .map(|&seed| {
                let set = EvaluationSet::<E>::from_json(&read(&self.set_path(seed))?)?;
                if set.seed != seed || set.len() != self.config.set_size {
                    return Err(Error::StaleArtifact {
                        path: self.set_path(seed),
                        expected: format!("seed {seed}, {} instances", self.config.set_size),
                        found: format!("seed {}, {} instances", set.seed, set.len()),
                    });
                }
                Ok(set)
            })
            .collect()
    }

    /// Execute one strategy (or all) on every seed, in parallel over
    /// (seed, strategy) pairs.
    pub fn run(&self, strategy: Option<&str>) -> Result<Vec<RunSummary>> {
        let specs: Vec<&StrategySpec> = match strategy {
            Some(id) => vec![self.config.strategy(id)?],
            None => self.config.strategies.iter().collect(),
        };
        match self.config.environment {
            EnvKind::Tabletop => self.run_with(&Tabletop::default(), &specs),
            EnvKind::Nav => self.run_with(&NavWorld::default(), &specs),
        }
    }

    fn standard_plan(&self) -> StrategyPlan {
        let c = &self.config;
        c.strategies
            .iter()
            .find(|s| s.kind == StrategyKind::Standard)
            .and_then(|s| s.plan(c.environment, c.cost_model, None).ok())
            .unwrap_or_else(|| {
                StrategyPlan::standard(c.environment.default_repetitions()).with_cost_model(c.cost_model)
            })
    }

    fn run_with<E: Environment>(&self, env: &E, specs: &[&StrategySpec]) -> Result<Vec<RunSummary>> {
        let sets = self.load_sets::<E>()?;
        let policy = self.config.policy.resolve()?;
        let jobs: Vec<(&EvaluationSet<E>, &StrategySpec)> =
            sets.iter().flat_map(|s| specs.iter().map(move |&p| (s, p))).collect();
        let logs: Vec<(String, RunLog)> = jobs
            .par_iter()
            .map(|&(set, spec)| {
                let standard_cost = if spec.needs_standard_cost() {
                    let s = run_standard(env, set, &policy, &self.standard_plan(), set.seed)?;
                    Some(s.log.total_cost())
                } else {
                    None
                };
                let plan = spec.plan(self.config.environment, self.config.cost_model, standard_cost)?;
                let run = run_strategy(env, set, &policy, &plan, set.seed)?;
                log::info!(
                    "{} seed {}: {} trials, cost {:.3}",
                    spec.id,
                    set.seed,
                    run.log.len(),
                    run.log.total_cost()
                );
                Ok((spec.id.clone(), run.log))
            })
            .collect::<Result<_>>()?;
        let mut out = Vec::with_capacity(logs.len());
        for (id, log) in logs {
            write(&self.log_path(&id, log.seed), &log.to_jsonl()?)?;
            write_json(
                &self.manifest_path(&id, log.seed),
                &RunManifest {
                    config_hash: self.hash.clone(),
                    strategy: id.clone(),
                    plan: log.plan.clone(),
                    seed: log.seed,
                    environment: log.environment,
                    trials: log.len(),
                    total_cost: log.total_cost(),
                    halted: log.halted,
                    skipped: log.skipped.clone(),
                },
            )?;
            out.push(RunSummary {
                strategy: id,
                seed: log.seed,
                trials: log.len(),
                total_cost: log.total_cost(),
                halted: log.halted,
                skipped: log.skipped.len(),
            });
        }
        Ok(out)
    }

    /// Read back one log, checking its manifest against this config.
    pub fn load_log(&self, strategy: &str, seed: u64) -> Result<RunLog> {
        let mpath = self.manifest_path(strategy, seed);
        let m: RunManifest = serde_json::from_str(&read(&mpath)?)?;
        check_hash(&mpath, &self.hash, &m.config_hash)?;
        if m.environment != self.config.environment {
            return Err(Error::EnvMismatch {
                left: m.environment,
                right: self.config.environment,
            });
        }
        let lpath = self.log_path(strategy, seed);
        let records = records_from_jsonl(&read(&lpath)?)?;
        if records.len() != m.trials || m.strategy != strategy || m.seed != seed {
            return Err(Error::StaleArtifact {
                path: lpath,
                expected: format!("{} trials of {strategy} seed {seed}", m.trials),
                found: format!("{} trials of {} seed {}", records.len(), m.strategy, m.seed),
            });
        }
        Ok(RunLog {
            plan: m.plan,
            seed,
            environment: m.environment,
            cumulative_cost: cumulative(&records),
            records,
            skipped: m.skipped,
            halted: m.halted,
        })
    }

    /// Curves, step series, breakdowns and completion differences for every
    /// strategy, against the standard strategy of each seed.
    pub fn report(&self) -> Result<ReportSummary> {
        let c = &self.config;
        let reference_id = c
            .strategies
            .iter()
            .find(|s| s.kind == StrategyKind::Standard)
            .map(|s| s.id.clone())
            .ok_or_else(|| Error::Config("report needs a standard strategy as the reference".into()))?;
        let mut logs: BTreeMap<&str, Vec<RunLog>> = BTreeMap::new();
        for s in &c.strategies {
            let v = c
                .seeds
                .iter()
                .map(|&seed| self.load_log(&s.id, seed))
                .collect::<Result<Vec<_>>>()?;
            logs.insert(s.id.as_str(), v);
        }
        let references: Vec<f64> = logs[reference_id.as_str()]
            .iter()
            .map(estimate_metric)
            .collect::<Result<_>>()?;
        let upper = stats::max_cost(logs.values().flatten());
        let dir = self.report_dir();
        let mut files = Vec::new();
        let mut emit = |name: String, body: String| -> Result<()> {
            let p = dir.join(name);
            write(&p, &body)?;
            files.push(p);
            Ok(())
        };

        let mut rows = Vec::new();
        let mut series = Vec::new();
        let mut breakdown_rows = Vec::new();
        let mut diffs = Vec::new();
        for s in &c.strategies {
            let group = &logs[s.id.as_str()];
            let curve = stats::cost_error_curve(group, &references, BINS, upper)?;
            emit(format!("curve-{}.csv", s.id), curve.to_csv()?)?;
            for (log, &reference) in group.iter().zip(&references) {
                let estimate = estimate_metric(log)?;
                rows.push(SummaryRow {
                    strategy: s.id.clone(),
                    seed: log.seed,
                    trials: log.len(),
                    total_cost: log.total_cost(),
                    halted: log.halted,
                    estimate,
                    reference,
                    abs_error: (estimate - reference).abs(),
                });
                series.push((s.id.as_str(), log));
            }
            let table = stats::breakdown(group)?;
            for r in table.rows.iter().chain(std::iter::once(&table.aggregate)) {
                breakdown_rows.push(BreakdownCsvRow {
                    strategy: &s.id,
                    tag: r.tag.clone(),
                    trials: r.trials,
                    mean_metric: r.mean_metric,
                    success_rate: r.success_rate,
                });
            }
            let original = stats::metrics_for(group, PerturbationTag::ORIGINAL);
            for &tag in &s.perturbations {
                let perturbed = stats::metrics_for(group, tag);
                if perturbed.is_empty() || original.is_empty() {
                    continue;
                }
                let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
                diffs.push(DiffRow {
                    strategy: &s.id,
                    perturbation: tag.to_string(),
                    perturbed_trials: perturbed.len(),
                    original_trials: original.len(),
                    perturbed_mean: mean(&perturbed),
                    original_mean: mean(&original),
                    difference_points: stats::percent_completion_difference(&perturbed, &original)?,
                });
            }
        }
        emit("trials_per_cost.csv".into(), stats::trials_per_cost_csv(&series)?)?;
        emit("breakdown.csv".into(), to_csv(&breakdown_rows)?)?;
        emit("completion_difference.csv".into(), to_csv_with_header(&diffs, DiffRow::HEADER)?)?;
        emit("summary.csv".into(), to_csv(&rows)?)?;
        Ok(ReportSummary { files, rows })
    }
}

#[derive(Serialize)]
struct BreakdownCsvRow<'a> {
    strategy: &'a str,
    tag: String,
    trials: usize,
    mean_metric: f64,
    success_rate: f64,
}

#[derive(Serialize)]
struct DiffRow<'a> {
    strategy: &'a str,
    perturbation: String,
    perturbed_trials: usize,
    original_trials: usize,
    perturbed_mean: f64,
    original_mean: f64,
    difference_points: f64,
}

impl DiffRow<'_> {
    const HEADER: &'static [&'static str] = &[
        "strategy",
        "perturbation",
        "perturbed_trials",
        "original_trials",
        "perturbed_mean",
        "original_mean",
        "difference_points",
    ];
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidArgument(format!("csv flush: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Like [`to_csv`], but still writes the header when there are no rows.
fn to_csv_with_header<T: Serialize>(rows: &[T], header: &[&str]) -> Result<String> {
    if rows.is_empty() {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        let bytes = w
            .into_inner()
            .map_err(|e| Error::InvalidArgument(format!("csv flush: {e}")))?;
        return Ok(String::from_utf8(bytes).expect("csv output is utf-8"));
    }
    to_csv(rows)
}

//! Analyses over run logs: binned cost-vs-error curves, trials-per-cost step
//! series, per-perturbation breakdowns and percent-completion differences.
//!
//! The error of a run at cost `c` is `|running mean − reference|` after the
//! last trial whose cumulative cost is at most `c`. The reference is the final
//! sample mean of the standard evaluation of the same seed.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{PerturbationTag, TrialRecord};
use crate::strategies::RunLog;

pub const BINS: usize = 50;

/// Mean metric after each trial.
pub fn running_estimate(log: &RunLog) -> Vec<f64> {
    let mut sum = 0.0;
    log.records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            sum += r.metric;
            sum / (i + 1) as f64
        })
        .collect()
}

/// `(cumulative cost, |running estimate − reference|)` after each trial.
pub fn error_series(log: &RunLog, reference: f64) -> Result<Vec<(f64, f64)>> {
    if log.is_empty() {
        return Err(Error::EmptyLog);
    }
    Ok(log
        .cumulative_cost
        .iter()
        .zip(running_estimate(log))
        .map(|(&c, e)| (c, (e - reference).abs()))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveBin {
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub mean_err: Option<f64>,
    pub std_err: Option<f64>,
    /// Seeds with at least one trial at or before `bin_hi`.
    pub seeds: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CostErrorCurve {
    pub upper: f64,
    pub bins: Vec<CurveBin>,
}

/// Largest total cost over a group of logs; the shared upper edge when
/// several strategies are compared on one axis.
pub fn max_cost<'a>(logs: impl IntoIterator<Item = &'a RunLog>) -> f64 {
    logs.into_iter().map(RunLog::total_cost).fold(0.0, f64::max)
}

/// Bin the error series of each log (one per seed) over `[0, upper]` and
/// aggregate across seeds with the population standard deviation.
/// `references[i]` is the reference value for `logs[i]`.
pub fn cost_error_curve(logs: &[RunLog], references: &[f64], bins: usize, upper: f64) -> Result<CostErrorCurve> {
    if logs.is_empty() {
        return Err(Error::EmptyLog);
    }
    if references.len() != logs.len() {
        return Err(Error::InvalidArgument(format!(
            "{} references for {} logs",
            references.len(),
            logs.len()
        )));
    }
    if bins == 0 {
        return Err(Error::InvalidArgument("curve needs at least one bin".into()));
    }
    if let Some(r) = references.iter().find(|r| !(0.0..=1.0).contains(*r)) {
        return Err(Error::InvalidArgument(format!("reference {r} is outside [0, 1]")));
    }
    if !upper.is_finite() || upper < max_cost(logs) {
        return Err(Error::InvalidArgument(format!(
            "upper edge {upper} is below the largest run cost"
        )));
    }
    let series: Vec<Vec<(f64, f64)>> = logs
        .iter()
        .zip(references)
        .map(|(l, &r)| error_series(l, r))
        .collect::<Result<_>>()?;
    let width = upper / bins as f64;
    let mut out = Vec::with_capacity(bins);
    for k in 0..bins {
        let lo = width * k as f64;
        let hi = if k + 1 == bins { upper } else { width * (k + 1) as f64 };
        let errs: Vec<f64> = series
            .iter()
            .filter_map(|s| {
                let n = s.partition_point(|&(c, _)| c <= hi);
                n.checked_sub(1).map(|i| s[i].1)
            })
            .collect();
        let (mean_err, std_err) = if errs.is_empty() {
            (None, None)
        } else {
            let m = errs.iter().sum::<f64>() / errs.len() as f64;
            let v = errs.iter().map(|e| (e - m) * (e - m)).sum::<f64>() / errs.len() as f64;
            (Some(m), Some(v.sqrt()))
        };
        out.push(CurveBin {
            bin_lo: lo,
            bin_hi: hi,
            seeds: errs.len(),
            mean_err,
            std_err,
        });
    }
    Ok(CostErrorCurve { upper, bins: out })
}

impl CostErrorCurve {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for b in &self.bins {
            w.serialize(b)?;
        }
        into_string(w)
    }
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidArgument(format!("csv flush: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// `(cumulative cost, trials executed)` after each trial.
pub fn trials_per_cost(log: &RunLog) -> Vec<(f64, usize)> {
    log.cumulative_cost
        .iter()
        .enumerate()
        .map(|(i, &c)| (c, i + 1))
        .collect()
}

#[derive(Serialize)]
struct TrialsRow<'a> {
    series: &'a str,
    seed: u64,
    trials: usize,
    cumulative_cost: f64,
}

/// Step series of several labelled logs in one table.
pub fn trials_per_cost_csv(series: &[(&str, &RunLog)]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (name, log) in series {
        for (cumulative_cost, trials) in trials_per_cost(log) {
            w.serialize(TrialsRow {
                series: name,
                seed: log.seed,
                trials,
                cumulative_cost,
            })?;
        }
    }
    into_string(w)
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Mean of `perturbed` minus mean of `original`, in percentage points.
pub fn percent_completion_difference(perturbed: &[f64], original: &[f64]) -> Result<f64> {
    match (mean(perturbed), mean(original)) {
        (Some(p), Some(o)) => Ok(100.0 * (p - o)),
        _ => Err(Error::EmptyLog),
    }
}

/// Metrics of every trial carrying `tag` across a group of logs.
pub fn metrics_for<'a>(logs: impl IntoIterator<Item = &'a RunLog>, tag: PerturbationTag) -> Vec<f64> {
    logs.into_iter()
        .flat_map(|l| &l.records)
        .filter(|r| r.perturbation == tag)
        .map(|r| r.metric)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BreakdownRow {
    /// A perturbation tag, or `all` for the aggregate row.
    pub tag: String,
    pub trials: usize,
    pub mean_metric: f64,
    pub success_rate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BreakdownTable {
    pub rows: Vec<BreakdownRow>,
    pub aggregate: BreakdownRow,
}

fn row(tag: String, records: &[&TrialRecord]) -> BreakdownRow {
    let n = records.len();
    let m = records.iter().map(|r| r.metric).sum::<f64>();
    let s = records.iter().filter(|r| r.success).count();
    BreakdownRow {
        tag,
        trials: n,
        mean_metric: m / n as f64,
        success_rate: s as f64 / n as f64,
    }
}

/// Per-tag mean metric over a group of logs, in tag order.
pub fn breakdown<'a>(logs: impl IntoIterator<Item = &'a RunLog>) -> Result<BreakdownTable> {
    let mut by_tag: BTreeMap<PerturbationTag, Vec<&TrialRecord>> = BTreeMap::new();
    let mut all = Vec::new();
    for r in logs.into_iter().flat_map(|l| &l.records) {
        by_tag.entry(r.perturbation).or_default().push(r);
        all.push(r);
    }
    if all.is_empty() {
        return Err(Error::EmptyLog);
    }
    Ok(BreakdownTable {
        rows: by_tag.iter().map(|(t, rs)| row(t.to_string(), rs)).collect(),
        aggregate: row("all".into(), &all),
    })
}

impl BreakdownTable {
    pub fn get(&self, tag: PerturbationTag) -> Option<&BreakdownRow> {
        let name = tag.to_string();
        self.rows.iter().find(|r| r.tag == name)
    }

    pub fn total_trials(&self) -> usize {
        self.rows.iter().map(|r| r.trials).sum()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in self.rows.iter().chain(std::iter::once(&self.aggregate)) {
            w.serialize(r)?;
        }
        into_string(w)
    }
}

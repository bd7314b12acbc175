//! Batches of trials and the condition comparison that follows them.
//!
//! Runs execute in parallel and each writes only inside its own directory.
//! The comparison starts once every run has finished.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gait::Condition;
use crate::io::{run_features, write_json, write_run_outputs, RunFeatures};
use crate::plot::write_plots;
use crate::sim::config::{check_schema_version, default_schema_version};
use crate::sim::{run_scenario, ScenarioConfig};
use crate::stats::{
    compare_conditions, summary_text, StatReport, TTestVariant, TrialFeatures, ALPHA,
};
use crate::{Error, Result};

pub const REPORT_FILE: &str = "report.json";
pub const SUMMARY_FILE: &str = "summary.txt";

/// Which runs form each condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonSpec {
    pub condition_a: Vec<String>,
    pub condition_b: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatchSpec {
    pub schema_version: String,
    pub runs: Vec<ScenarioConfig>,
    /// `None` groups runs by their `condition`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonSpec>,
    pub variant: TTestVariant,
    pub alpha: f64,
}

impl Default for BatchSpec {
    fn default() -> Self {
        Self {
            schema_version: default_schema_version(),
            runs: Vec::new(),
            comparison: None,
            variant: TTestVariant::Student,
            alpha: ALPHA,
        }
    }
}

impl BatchSpec {
    /// `trials` runs per condition. Trial `i` of both conditions shares the
    /// seed `base_seed + i`, so A and B form matched pairs.
    pub fn paired(trials: usize, base_seed: u64) -> Self {
        let mut runs = Vec::with_capacity(2 * trials);
        for condition in [Condition::A, Condition::B] {
            for i in 0..trials {
                runs.push(ScenarioConfig::for_condition(
                    condition,
                    format!("{}{}", condition.label(), i + 1),
                    base_seed.wrapping_add(i as u64),
                ));
            }
        }
        Self {
            runs,
            ..Self::default()
        }
    }

    /// Two trials per condition.
    pub fn standard(base_seed: u64) -> Self {
        Self::paired(2, base_seed)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| {
            Error::config(
                format!("line {} column {}", e.line(), e.column()),
                e.to_string(),
            )
        })?;
        check_schema_version(&spec.schema_version)?;
        Ok(spec)
    }

    /// Moves every run seed so the smallest becomes `seed`, keeping their
    /// offsets.
    pub fn reseed(&mut self, seed: u64) {
        let min = self.runs.iter().map(|r| r.rng_seed).min().unwrap_or(0);
        for r in &mut self.runs {
            r.rng_seed = seed.wrapping_add(r.rng_seed - min);
        }
    }

    pub fn set_exclude_first_steps(&mut self, n: usize) {
        for r in &mut self.runs {
            r.exclude_first_steps = n;
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_schema_version(&self.schema_version)?;
        if self.runs.is_empty() {
            return Err(Error::config("runs", "batch has no runs"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::config("alpha", "must lie in (0, 1)"));
        }
        let mut labels = BTreeSet::new();
        for (i, r) in self.runs.iter().enumerate() {
            r.validate().map_err(|e| match e {
                Error::Config { field, reason } => Error::Config {
                    field: format!("runs[{i}].{field}"),
                    reason,
                },
                other => other,
            })?;
            if !labels.insert(r.trial_id.as_str()) {
                return Err(Error::config(
                    format!("runs[{i}].trial_id"),
                    format!("duplicate trial id `{}`", r.trial_id),
                ));
            }
        }
        if let Some(c) = &self.comparison {
            for (field, list) in [
                ("comparison.condition_a", &c.condition_a),
                ("comparison.condition_b", &c.condition_b),
            ] {
                for label in list {
                    if !labels.contains(label.as_str()) {
                        return Err(Error::config(field, format!("unknown run `{label}`")));
                    }
                }
            }
        }
        Ok(())
    }

    fn group(&self, condition: Condition) -> Vec<String> {
        match (&self.comparison, condition) {
            (Some(c), Condition::A) => c.condition_a.clone(),
            (Some(c), Condition::B) => c.condition_b.clone(),
            (None, _) => self
                .runs
                .iter()
                .filter(|r| r.condition == condition)
                .map(|r| r.trial_id.clone())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutcome {
    pub runs: Vec<RunFeatures>,
    /// `None` when a condition had no runs.
    pub report: Option<StatReport>,
}

fn trial_features(runs: &[RunFeatures], labels: &[String]) -> Result<Vec<TrialFeatures>> {
    labels
        .iter()
        .map(|label| {
            let run = runs
                .iter()
                .find(|r| &r.trial_id == label)
                .expect("labels validated against runs");
            match &run.features {
                Some(f) => Ok(TrialFeatures {
                    trial_id: run.trial_id.clone(),
                    condition: run.condition,
                    features: f.clone(),
                }),
                None => Err(Error::Run {
                    label: label.clone(),
                    source: Box::new(Error::DegenerateTrial(
                        run.analysis_error.clone().unwrap_or_default(),
                    )),
                }),
            }
        })
        .collect()
}

/// Runs every trial, then compares the conditions. With `out` set, each
/// run writes into `out/<trial_id>/` and the report, summary and charts go
/// into `out`. A failed run aborts the comparison; the other runs' files
/// are still written.
pub fn run_batch(spec: &BatchSpec, out: Option<&Path>) -> Result<BatchOutcome> {
    spec.validate()?;
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
    }
    let results: Vec<Result<RunFeatures>> = spec
        .runs
        .par_iter()
        .map(|config| {
            let record = run_scenario(config)?;
            match out {
                Some(dir) => write_run_outputs(&dir.join(&config.trial_id), &record, config),
                None => Ok(run_features(&record, config)),
            }
        })
        .collect();
    let mut runs = Vec::with_capacity(results.len());
    for (config, result) in spec.runs.iter().zip(results) {
        match result {
            Ok(f) => runs.push(f),
            Err(e) => {
                return Err(Error::Run {
                    label: config.trial_id.clone(),
                    source: Box::new(e),
                })
            }
        }
    }

    let group_a = spec.group(Condition::A);
    let group_b = spec.group(Condition::B);
    if group_a.is_empty() || group_b.is_empty() {
        log::warn!("comparison skipped: both conditions need at least one run");
        return Ok(BatchOutcome { runs, report: None });
    }
    let a = trial_features(&runs, &group_a)?;
    let b = trial_features(&runs, &group_b)?;
    let report = compare_conditions(&a, &b, spec.variant, spec.alpha)?;
    if let Some(dir) = out {
        write_json(&dir.join(REPORT_FILE), &report)?;
        fs::write(dir.join(SUMMARY_FILE), summary_text(&report))?;
        write_plots(dir, &report)?;
    }
    Ok(BatchOutcome {
        runs,
        report: Some(report),
    })
}

/// Reads a report written by [`run_batch`].
pub fn read_report(text: &str) -> Result<StatReport> {
    let report: StatReport = serde_json::from_str(text)?;
    check_schema_version(&report.schema_version)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_layout() {
        let spec = BatchSpec::standard(10);
        let ids: Vec<&str> = spec.runs.iter().map(|r| r.trial_id.as_str()).collect();
        assert_eq!(ids, ["A1", "A2", "B1", "B2"]);
        assert_eq!(spec.runs[0].rng_seed, spec.runs[2].rng_seed);
        assert_eq!(spec.group(Condition::B), ["B1", "B2"]);
        spec.validate().unwrap();
    }

    #[test]
    fn duplicate_and_unknown_labels() {
        let mut spec = BatchSpec::standard(1);
        spec.runs[1].trial_id = "A1".into();
        assert!(
            matches!(spec.validate(), Err(Error::Config { field, .. }) if field == "runs[1].trial_id")
        );
        let mut spec = BatchSpec::standard(1);
        spec.comparison = Some(ComparisonSpec {
            condition_a: vec!["A1".into()],
            condition_b: vec!["C9".into()],
        });
        assert!(spec.validate().is_err());
    }

    #[test]
    fn nested_config_errors_name_the_run() {
        let mut spec = BatchSpec::standard(1);
        spec.runs[3].dt = 0.0;
        assert!(
            matches!(spec.validate(), Err(Error::Config { field, .. }) if field == "runs[3].dt")
        );
    }

    #[test]
    fn reseed_keeps_offsets() {
        let mut spec = BatchSpec::standard(100);
        spec.reseed(7);
        let seeds: Vec<u64> = spec.runs.iter().map(|r| r.rng_seed).collect();
        assert_eq!(seeds, [7, 8, 7, 8]);
    }

    #[test]
    fn single_condition_skips_comparison() {
        let mut spec = BatchSpec::standard(3);
        spec.runs.retain(|r| r.condition == Condition::A);
        let outcome = run_batch(&spec, None).unwrap();
        assert_eq!(outcome.runs.len(), 2);
        assert!(outcome.report.is_none());
    }
}

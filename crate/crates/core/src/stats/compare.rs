//! Condition A versus condition B comparison of gait features.
//!
//! Left and right legs of every trial are pooled into one sample per
//! condition, so two trials per condition give four values per cell.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::normality::NormalityOutcome;
use super::ttest::{t_test, TTestResult, TTestVariant};
use super::SampleSet;
use crate::gait::{Condition, Foot, GaitFeatures};
use crate::{Error, Result, SCHEMA_VERSION};

/// Features of one analysed trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFeatures {
    pub trial_id: String,
    pub condition: Condition,
    pub features: GaitFeatures,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricComparison {
    /// `stance_pct` or `swing_pct`.
    pub metric: String,
    pub sample_a: SampleSet,
    pub sample_b: SampleSet,
    pub normality_a: NormalityOutcome,
    pub normality_b: NormalityOutcome,
    /// Statistic is A minus B.
    pub t_test: TTestResult,
    /// Mean of B minus mean of A [percentage points].
    pub mean_delta: f64,
}

/// B minus A for the i-th trial of each condition, one leg.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialDelta {
    pub trial_a: String,
    pub trial_b: String,
    pub foot: Foot,
    pub stance_delta: f64,
    pub swing_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub schema_version: String,
    pub variant: TTestVariant,
    pub alpha: f64,
    pub metrics: Vec<MetricComparison>,
    pub deltas: Vec<TrialDelta>,
    pub trials: Vec<TrialFeatures>,
}

impl StatReport {
    pub fn metric(&self, name: &str) -> Option<&MetricComparison> {
        self.metrics.iter().find(|m| m.metric == name)
    }
}

fn pooled(
    features: &[TrialFeatures],
    label: String,
    pick: impl Fn(&GaitFeatures, Foot) -> f64,
) -> SampleSet {
    let values = features
        .iter()
        .flat_map(|t| {
            [
                pick(&t.features, Foot::Left),
                pick(&t.features, Foot::Right),
            ]
        })
        .collect();
    SampleSet::new(label, values)
}

fn compare_metric(
    name: &str,
    a: &[TrialFeatures],
    b: &[TrialFeatures],
    variant: TTestVariant,
    alpha: f64,
    pick: impl Fn(&GaitFeatures, Foot) -> f64 + Copy,
) -> Result<MetricComparison> {
    let sample_a = pooled(a, format!("{name}/A"), pick);
    let sample_b = pooled(b, format!("{name}/B"), pick);
    let test = t_test(&sample_a, &sample_b, variant, alpha).map_err(|e| Error::Comparison {
        comparison: format!("{name} A vs B"),
        source: Box::new(e),
    })?;
    Ok(MetricComparison {
        metric: name.to_string(),
        normality_a: NormalityOutcome::run(&sample_a, alpha),
        normality_b: NormalityOutcome::run(&sample_b, alpha),
        mean_delta: test.mean_b - test.mean_a,
        t_test: test,
        sample_a,
        sample_b,
    })
}

/// Normality checks and t-tests on stance and swing percentages, plus
/// per-trial, per-leg deltas.
pub fn compare_conditions(
    features_a: &[TrialFeatures],
    features_b: &[TrialFeatures],
    variant: TTestVariant,
    alpha: f64,
) -> Result<StatReport> {
    for (list, which) in [(features_a, "A"), (features_b, "B")] {
        if list.is_empty() {
            return Err(Error::InsufficientData {
                what: if which == "A" {
                    "condition A trials"
                } else {
                    "condition B trials"
                },
                needed: 1,
                found: 0,
            });
        }
    }
    let metrics = vec![
        compare_metric(
            "stance_pct",
            features_a,
            features_b,
            variant,
            alpha,
            GaitFeatures::stance_pct,
        )?,
        compare_metric(
            "swing_pct",
            features_a,
            features_b,
            variant,
            alpha,
            GaitFeatures::swing_pct,
        )?,
    ];
    let deltas = features_a
        .iter()
        .zip(features_b)
        .flat_map(|(ta, tb)| {
            [Foot::Left, Foot::Right].map(|foot| TrialDelta {
                trial_a: ta.trial_id.clone(),
                trial_b: tb.trial_id.clone(),
                foot,
                stance_delta: tb.features.stance_pct(foot) - ta.features.stance_pct(foot),
                swing_delta: tb.features.swing_pct(foot) - ta.features.swing_pct(foot),
            })
        })
        .collect();
    Ok(StatReport {
        schema_version: SCHEMA_VERSION.to_string(),
        variant,
        alpha,
        metrics,
        deltas,
        trials: features_a.iter().chain(features_b).cloned().collect(),
    })
}

/// Plain-text table of the comparison.
pub fn summary_text(report: &StatReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Condition comparison ({} t-test, alpha = {})",
        report.variant.label(),
        report.alpha
    );
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<8} {:>10} {:>6} {:>9} {:>9}",
        "trial", "condition", "steps", "duration", "stride_m"
    );
    for t in &report.trials {
        let _ = writeln!(
            out,
            "{:<8} {:>10} {:>6} {:>9.3} {:>9.3}",
            t.trial_id,
            t.condition.label(),
            t.features.step_count,
            t.features.gait_duration,
            t.features.est_stride_length
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<8} {:<8} {:<6} {:>10} {:>10}",
        "trial_a", "trial_b", "leg", "d_stance", "d_swing"
    );
    for d in &report.deltas {
        let _ = writeln!(
            out,
            "{:<8} {:<8} {:<6} {:>+10.3} {:>+10.3}",
            d.trial_a,
            d.trial_b,
            d.foot.label(),
            d.stance_delta,
            d.swing_delta
        );
    }
    let _ = writeln!(out);
    for m in &report.metrics {
        let t = &m.t_test;
        let _ = writeln!(
            out,
            "{}: mean A {:.3}, mean B {:.3}, delta {:+.3}, t = {:.4}, df = {:.2}, p = {:.4} -> {}",
            m.metric,
            t.mean_a,
            t.mean_b,
            m.mean_delta,
            t.t_statistic,
            t.degrees_of_freedom,
            t.p_value,
            if t.significant {
                "significant"
            } else {
                "not significant"
            }
        );
        for (cond, n) in [("A", &m.normality_a), ("B", &m.normality_b)] {
            match (&n.result, &n.skipped) {
                (Some(r), _) => {
                    let _ = writeln!(
                        out,
                        "  Shapiro-Wilk {cond}: W = {:.4}, p = {:.4} ({})",
                        r.w_statistic,
                        r.p_value,
                        if r.normal_at_alpha {
                            "normality not rejected"
                        } else {
                            "normality rejected"
                        }
                    );
                }
                (None, Some(reason)) => {
                    let _ = writeln!(out, "  Shapiro-Wilk {cond}: skipped ({reason})");
                }
                (None, None) => {}
            }
        }
    }
    out
}

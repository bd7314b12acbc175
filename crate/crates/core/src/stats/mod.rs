//! Condition comparison statistics: Shapiro-Wilk normality check followed by
//! a two-tailed t-test.

pub mod compare;
pub mod normality;
pub mod ttest;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use compare::{
    compare_conditions, summary_text, MetricComparison, StatReport, TrialDelta, TrialFeatures,
};
pub use normality::{shapiro_wilk, NormalityOutcome, NormalityResult};
pub use ttest::{t_test, TTestResult, TTestVariant};

/// Default significance level.
pub const ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub label: String,
    pub values: Vec<f64>,
}

impl SampleSet {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        if self.values.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFiniteSample(self.label.clone()))
        }
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Unbiased sample variance, two-pass.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let ss: f64 = self.values.iter().map(|v| (v - m) * (v - m)).sum();
        ss / (self.values.len() as f64 - 1.0)
    }
}

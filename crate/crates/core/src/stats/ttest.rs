//! Two-tailed t-tests. The p-value is the regularized incomplete beta
//! `I_{df/(df+t²)}(df/2, 1/2)`.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use super::SampleSet;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TTestVariant {
    /// Pooled variance, unpaired.
    #[default]
    Student,
    /// Unequal variances with Satterthwaite degrees of freedom.
    Welch,
    /// Differences of matched pairs.
    Paired,
}

impl TTestVariant {
    pub fn label(self) -> &'static str {
        match self {
            TTestVariant::Student => "student",
            TTestVariant::Welch => "welch",
            TTestVariant::Paired => "paired",
        }
    }
}

impl std::str::FromStr for TTestVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "student" => Ok(TTestVariant::Student),
            "welch" => Ok(TTestVariant::Welch),
            "paired" => Ok(TTestVariant::Paired),
            other => Err(Error::config(
                "variant",
                format!("unknown t-test variant `{other}` (student, welch, paired)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub variant: TTestVariant,
    pub t_statistic: f64,
    pub degrees_of_freedom: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub significant: bool,
    pub mean_a: f64,
    pub mean_b: f64,
}

/// Two-tailed p-value of `t` under a t distribution with `df` degrees of
/// freedom.
pub fn two_tailed_p(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    beta_reg(df / 2.0, 0.5, df / (df + t * t)).clamp(0.0, 1.0)
}

fn check(sample: &SampleSet) -> Result<()> {
    if sample.len() < 2 {
        return Err(Error::SampleSize {
            label: sample.label.clone(),
            n: sample.len(),
            min: 2,
            max: usize::MAX,
        });
    }
    sample.check_finite()
}

/// Compares the means of `a` and `b`. A positive statistic means `a` has
/// the larger mean.
pub fn t_test(
    a: &SampleSet,
    b: &SampleSet,
    variant: TTestVariant,
    alpha: f64,
) -> Result<TTestResult> {
    check(a)?;
    check(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mean_a, mean_b) = (a.mean(), b.mean());
    let (diff, se, df) = match variant {
        TTestVariant::Student => {
            let df = na + nb - 2.0;
            let pooled = ((na - 1.0) * a.variance() + (nb - 1.0) * b.variance()) / df;
            (mean_a - mean_b, (pooled * (1.0 / na + 1.0 / nb)).sqrt(), df)
        }
        TTestVariant::Welch => {
            let qa = a.variance() / na;
            let qb = b.variance() / nb;
            let se2 = qa + qb;
            let df = if se2 > 0.0 {
                se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0))
            } else {
                na + nb - 2.0
            };
            (mean_a - mean_b, se2.sqrt(), df)
        }
        TTestVariant::Paired => {
            if a.len() != b.len() {
                return Err(Error::SampleSize {
                    label: b.label.clone(),
                    n: b.len(),
                    min: a.len(),
                    max: a.len(),
                });
            }
            let d = SampleSet::new(
                format!("{} - {}", a.label, b.label),
                a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect(),
            );
            (d.mean(), (d.variance() / na).sqrt(), na - 1.0)
        }
    };
    let t = if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    };
    let p = two_tailed_p(t, df);
    Ok(TTestResult {
        variant,
        t_statistic: t,
        degrees_of_freedom: df,
        p_value: p,
        alpha,
        significant: p < alpha,
        mean_a,
        mean_b,
    })
}

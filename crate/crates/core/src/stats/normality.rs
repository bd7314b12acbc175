//! Shapiro-Wilk W test with Royston's coefficient and p-value
//! approximations (algorithm AS R94), valid for 3 <= n <= 5000.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::SampleSet;
use crate::{Error, Result};

pub const MIN_N: usize = 3;
pub const MAX_N: usize = 5000;

const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056];
const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
const C3: [f64; 4] = [0.5440, -0.39978, 0.025054, -6.714e-4];
const C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];
const G: [f64; 2] = [-2.273, 0.459];

/// Ranges below this count as zero spread.
const SMALL: f64 = 1e-19;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalityResult {
    pub n: usize,
    pub w_statistic: f64,
    pub p_value: f64,
    pub alpha: f64,
    /// `p_value >= alpha`: normality is not rejected.
    pub normal_at_alpha: bool,
}

/// Normality check that may have been skipped, for example when a cell has
/// fewer than three values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityOutcome {
    pub result: Option<NormalityResult>,
    pub skipped: Option<String>,
}

impl NormalityOutcome {
    pub fn run(sample: &SampleSet, alpha: f64) -> Self {
        match shapiro_wilk(sample, alpha) {
            Ok(r) => Self {
                result: Some(r),
                skipped: None,
            },
            Err(e) => Self {
                result: None,
                skipped: Some(e.to_string()),
            },
        }
    }
}

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

/// The first `n / 2` coefficients, largest first; the rest follow by
/// antisymmetry.
fn coefficients(n: usize, std: &Normal) -> Vec<f64> {
    let half = n / 2;
    if n == 3 {
        return vec![std::f64::consts::FRAC_1_SQRT_2];
    }
    let an = n as f64;
    let m: Vec<f64> = (1..=half)
        .map(|i| -std.inverse_cdf((i as f64 - 0.375) / (an + 0.25)))
        .collect();
    let summ2 = 2.0 * m.iter().map(|v| v * v).sum::<f64>();
    let ssumm2 = summ2.sqrt();
    let rsn = 1.0 / an.sqrt();
    let a1 = poly(&C1, rsn) + m[0] / ssumm2;
    let mut a = vec![0.0; half];
    a[0] = a1;
    let (first_plain, fac) = if n > 5 {
        let a2 = poly(&C2, rsn) + m[1] / ssumm2;
        a[1] = a2;
        let fac = ((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1])
            / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2))
            .sqrt();
        (2, fac)
    } else {
        let fac = ((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1)).sqrt();
        (1, fac)
    };
    for i in first_plain..half {
        a[i] = m[i] / fac;
    }
    a
}

fn p_value(n: usize, w: f64, std: &Normal) -> f64 {
    if n == 3 {
        let p = 6.0 / std::f64::consts::PI * (w.sqrt().asin() - (0.75f64).sqrt().asin());
        return p.clamp(0.0, 1.0);
    }
    let an = n as f64;
    let w1 = (1.0 - w).ln();
    let (y, mean, sd) = if n <= 11 {
        let gamma = poly(&G, an);
        if w1 >= gamma {
            return 0.0;
        }
        (-(gamma - w1).ln(), poly(&C3, an), poly(&C4, an).exp())
    } else {
        let ln_n = an.ln();
        (w1, poly(&C5, ln_n), poly(&C6, ln_n).exp())
    };
    std.sf((y - mean) / sd)
}

/// Shapiro-Wilk test of `sample` at significance `alpha`.
pub fn shapiro_wilk(sample: &SampleSet, alpha: f64) -> Result<NormalityResult> {
    let n = sample.len();
    if !(MIN_N..=MAX_N).contains(&n) {
        return Err(Error::SampleSize {
            label: sample.label.clone(),
            n,
            min: MIN_N,
            max: MAX_N,
        });
    }
    sample.check_finite()?;
    let mut x = sample.values.clone();
    x.sort_by(f64::total_cmp);
    let range = x[n - 1] - x[0];
    if range < SMALL * x[0].abs().max(1.0) {
        return Err(Error::DegenerateSample(sample.label.clone()));
    }
    // Scaling by the range keeps the sums well conditioned.
    let x: Vec<f64> = x.iter().map(|v| (v - x[0]) / range).collect();
    let std = Normal::standard();
    let a = coefficients(n, &std);
    let mean = x.iter().sum::<f64>() / n as f64;
    let ssq: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    let b: f64 = a
        .iter()
        .enumerate()
        .map(|(i, ai)| ai * (x[n - 1 - i] - x[i]))
        .sum();
    let w = (b * b / ssq).min(1.0);
    let w = if n == 3 { w.max(0.75) } else { w };
    let p = p_value(n, w, &std);
    Ok(NormalityResult {
        n,
        w_statistic: w,
        p_value: p,
        alpha,
        normal_at_alpha: p >= alpha,
    })
}

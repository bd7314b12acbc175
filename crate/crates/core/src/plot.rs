//! Bar charts of the trial features as standalone SVG.
//!
//! Output depends only on the report: coordinates are printed with a fixed
//! number of decimals and nothing is read from the environment.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::gait::{Condition, Foot};
use crate::stats::{StatReport, TrialFeatures};
use crate::Result;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 48.0;
const MARGIN_BOTTOM: f64 = 64.0;
const Y_TICKS: usize = 5;

const COLOR_A: &str = "#4c72b0";
const COLOR_B: &str = "#dd8452";
const COLOR_LEFT: &str = "#55a868";
const COLOR_RIGHT: &str = "#8172b3";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlotKind {
    GaitDurationBars,
    StepCountBars,
    StancePctBars,
    SwingPctBars,
}

impl PlotKind {
    pub const ALL: [PlotKind; 4] = [
        PlotKind::GaitDurationBars,
        PlotKind::StepCountBars,
        PlotKind::StancePctBars,
        PlotKind::SwingPctBars,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            PlotKind::GaitDurationBars => "gait_duration.svg",
            PlotKind::StepCountBars => "step_count.svg",
            PlotKind::StancePctBars => "stance_pct.svg",
            PlotKind::SwingPctBars => "swing_pct.svg",
        }
    }

    fn title(self) -> &'static str {
        match self {
            PlotKind::GaitDurationBars => "Walking time per trial",
            PlotKind::StepCountBars => "Steps per trial",
            PlotKind::StancePctBars => "Mean stance share per leg",
            PlotKind::SwingPctBars => "Mean swing share per leg",
        }
    }

    fn y_label(self) -> &'static str {
        match self {
            PlotKind::GaitDurationBars => "duration [s]",
            PlotKind::StepCountBars => "steps",
            PlotKind::StancePctBars => "stance [%]",
            PlotKind::SwingPctBars => "swing [%]",
        }
    }

    fn per_leg(self) -> bool {
        matches!(self, PlotKind::StancePctBars | PlotKind::SwingPctBars)
    }

    fn decimals(self) -> usize {
        match self {
            PlotKind::StepCountBars => 0,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub kind: PlotKind,
    pub path: PathBuf,
}

struct Bar {
    value: f64,
    color: &'static str,
}

fn bars(kind: PlotKind, trial: &TrialFeatures) -> Vec<Bar> {
    let f = &trial.features;
    let by_condition = match trial.condition {
        Condition::A => COLOR_A,
        Condition::B => COLOR_B,
    };
    match kind {
        PlotKind::GaitDurationBars => vec![Bar {
            value: f.gait_duration,
            color: by_condition,
        }],
        PlotKind::StepCountBars => vec![Bar {
            value: f.step_count as f64,
            color: by_condition,
        }],
        PlotKind::StancePctBars | PlotKind::SwingPctBars => [Foot::Left, Foot::Right]
            .map(|foot| Bar {
                value: if kind == PlotKind::StancePctBars {
                    f.stance_pct(foot)
                } else {
                    f.swing_pct(foot)
                },
                color: if foot == Foot::Left {
                    COLOR_LEFT
                } else {
                    COLOR_RIGHT
                },
            })
            .into(),
    }
}

/// Smallest 1, 2 or 5 times a power of ten that is at least `v`.
fn nice_ceiling(v: f64) -> f64 {
    if v <= 0.0 || !v.is_finite() {
        return 1.0;
    }
    let base = 10f64.powf(v.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * base)
        .find(|&c| c >= v)
        .unwrap_or(10.0 * base)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Renders one chart: a bar group per trial, in report order.
pub fn render_svg(kind: PlotKind, report: &StatReport) -> String {
    let groups: Vec<(&TrialFeatures, Vec<Bar>)> =
        report.trials.iter().map(|t| (t, bars(kind, t))).collect();
    let max = groups
        .iter()
        .flat_map(|(_, b)| b.iter().map(|b| b.value))
        .fold(0.0, f64::max);
    let y_max = nice_ceiling(max * 1.1);
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let y_of = |v: f64| MARGIN_TOP + plot_h * (1.0 - v / y_max);
    let d = kind.decimals();

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{HEIGHT:.0}" viewBox="0 0 {WIDTH:.0} {HEIGHT:.0}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        kind.title()
    );
    for i in 0..=Y_TICKS {
        let v = y_max * i as f64 / Y_TICKS as f64;
        let y = y_of(v);
        let _ = writeln!(
            s,
            r##"<line x1="{MARGIN_LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##,
            WIDTH - MARGIN_RIGHT
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.d$}</text>"#,
            MARGIN_LEFT - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        kind.y_label()
    );

    let n = groups.len().max(1) as f64;
    let slot = plot_w / n;
    for (gi, (trial, group)) in groups.iter().enumerate() {
        let inner = slot * 0.7;
        let bar_w = inner / group.len().max(1) as f64;
        let x0 = MARGIN_LEFT + slot * gi as f64 + (slot - inner) / 2.0;
        for (bi, bar) in group.iter().enumerate() {
            let x = x0 + bar_w * bi as f64;
            let y = y_of(bar.value);
            let h = MARGIN_TOP + plot_h - y;
            let _ = writeln!(
                s,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{h:.2}" fill="{}"/>"#,
                bar_w * 0.9,
                bar.color
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="10">{:.d$}</text>"#,
                x + bar_w * 0.45,
                y - 4.0,
                bar.value
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{} ({})</text>"#,
            MARGIN_LEFT + slot * (gi as f64 + 0.5),
            MARGIN_TOP + plot_h + 18.0,
            escape(&trial.trial_id),
            trial.condition.label()
        );
    }
    let _ = writeln!(
        s,
        r##"<line x1="{MARGIN_LEFT:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#333333"/>"##,
        MARGIN_TOP + plot_h,
        WIDTH - MARGIN_RIGHT,
        MARGIN_TOP + plot_h
    );
    let legend: &[(&str, &str)] = if kind.per_leg() {
        &[("left", COLOR_LEFT), ("right", COLOR_RIGHT)]
    } else {
        &[("condition A", COLOR_A), ("condition B", COLOR_B)]
    };
    for (i, (label, color)) in legend.iter().enumerate() {
        let x = MARGIN_LEFT + 140.0 * i as f64;
        let y = HEIGHT - 20.0;
        let _ = writeln!(
            s,
            r#"<rect x="{x:.2}" y="{:.2}" width="12" height="12" fill="{color}"/>"#,
            y - 10.0
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{y:.2}">{label}</text>"#, x + 18.0);
    }
    s.push_str("</svg>\n");
    s
}

/// Writes all four charts into `dir`.
pub fn write_plots(dir: &Path, report: &StatReport) -> Result<Vec<PlotSpec>> {
    fs::create_dir_all(dir)?;
    PlotKind::ALL
        .iter()
        .map(|&kind| {
            let path = dir.join(kind.file_name());
            fs::write(&path, render_svg(kind, report))?;
            Ok(PlotSpec { kind, path })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gait::GaitFeatures;
    use crate::stats::{compare_conditions, TTestVariant, ALPHA};

    fn report(trials_per_condition: usize) -> StatReport {
        let t = |i: usize, condition: Condition| {
            let steps = 30 - usize::from(condition == Condition::B);
            let stance_r = if condition == Condition::B {
                58.0
            } else {
                60.0
            } + 0.1 * i as f64;
            TrialFeatures {
                trial_id: format!("{}{}", condition.label(), i + 1),
                condition,
                features: GaitFeatures {
                    gait_duration: steps as f64 * 0.545,
                    steady_gait_duration: (steps - 2) as f64 * 0.545,
                    step_count: steps,
                    mean_stance_pct_left: 58.0 - 0.1 * i as f64,
                    mean_stance_pct_right: stance_r,
                    mean_swing_pct_left: 42.0 + 0.1 * i as f64,
                    mean_swing_pct_right: 100.0 - stance_r,
                    est_stride_length: 16.0 / steps as f64,
                    strides_used_left: 12,
                    strides_used_right: 12,
                    exclude_first_steps: 2,
                },
            }
        };
        let a: Vec<_> = (0..trials_per_condition)
            .map(|i| t(i, Condition::A))
            .collect();
        let b: Vec<_> = (0..trials_per_condition)
            .map(|i| t(i, Condition::B))
            .collect();
        compare_conditions(&a, &b, TTestVariant::Student, ALPHA).unwrap()
    }

    #[test]
    fn nice_ceilings() {
        assert_eq!(nice_ceiling(33.0), 50.0);
        assert_eq!(nice_ceiling(66.0), 100.0);
        assert_eq!(nice_ceiling(17.9), 20.0);
        assert_eq!(nice_ceiling(0.0), 1.0);
    }

    #[test]
    fn svg_is_deterministic_and_well_formed() {
        let r = report(2);
        for kind in PlotKind::ALL {
            let a = render_svg(kind, &r);
            assert_eq!(a, render_svg(kind, &r));
            assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
            let bars = a.matches("<rect x=").count() - 2;
            let per_trial = if kind.per_leg() { 2 } else { 1 };
            assert_eq!(bars, 4 * per_trial);
        }
    }

    #[test]
    fn one_file_per_kind_for_many_trials() {
        let dir = tempfile::tempdir().unwrap();
        let specs = write_plots(dir.path(), &report(50)).unwrap();
        assert_eq!(specs.len(), 4);
        for spec in specs {
            assert!(spec.path.exists());
        }
    }
}

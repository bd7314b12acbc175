//! Gait events, strides and trial features from per-foot force traces.
//!
//! A step is one heel strike of either foot. A stride runs from one heel
//! strike to the next of the same foot; its stance ends at the toe-off in
//! between. Event times are the linearly interpolated threshold crossings.

use serde::{Deserialize, Serialize};

use super::{EventKind, Foot, FootForceTrace, GaitEvent};
use crate::pwad::{detect_contact, ContactSensorParams};
use crate::{Error, Result};

/// Relative tolerance on the sampling interval.
const UNIFORM_TOLERANCE: f64 = 1e-6;

/// Contact thresholds used for plantar-force traces: low enough that the
/// loading ramp is crossed within a few milliseconds of foot contact.
pub fn event_thresholds() -> ContactSensorParams {
    ContactSensorParams {
        on_threshold: 20.0,
        off_threshold: 10.0,
        debounce: 0.05,
    }
}

fn check_trace(trace: &FootForceTrace) -> Result<f64> {
    let s = &trace.samples;
    for (k, &(t, f)) in s.iter().enumerate() {
        if !t.is_finite() || !f.is_finite() || f < 0.0 {
            return Err(Error::Format {
                row: k + 1,
                reason: format!("sample ({t}, {f}) must be finite with force >= 0"),
            });
        }
    }
    if s.len() < 2 {
        return Ok(0.0);
    }
    let dt = s[1].0 - s[0].0;
    if dt <= 0.0 {
        return Err(Error::Format {
            row: 2,
            reason: "time must increase".into(),
        });
    }
    for k in 2..s.len() {
        let step = s[k].0 - s[k - 1].0;
        if (step - dt).abs() > UNIFORM_TOLERANCE * dt {
            return Err(Error::Format {
                row: k + 1,
                reason: format!("non-uniform sampling: step {step} s, expected {dt} s"),
            });
        }
    }
    Ok(dt)
}

/// Time at which the signal last crossed `threshold` in the given direction
/// within samples `lo..=k`.
fn crossing_time(samples: &[(f64, f64)], lo: usize, k: usize, threshold: f64, rising: bool) -> f64 {
    for j in (lo.max(1)..=k).rev() {
        let (t0, f0) = samples[j - 1];
        let (t1, f1) = samples[j];
        let crossed = if rising {
            f0 <= threshold && f1 > threshold
        } else {
            f0 >= threshold && f1 < threshold
        };
        if crossed {
            return t0 + (threshold - f0) / (f1 - f0) * (t1 - t0);
        }
    }
    samples[k].0
}

/// Heel strikes and toe-offs of one foot.
///
/// A trace that starts loaded has its first lift-off dropped, so every
/// foot's event list begins with a heel strike. A final heel strike without
/// a matching toe-off is kept; it counts as a step but opens no stride.
pub fn detect_events(
    trace: &FootForceTrace,
    params: &ContactSensorParams,
) -> Result<Vec<GaitEvent>> {
    let dt = check_trace(trace)?;
    let s = &trace.samples;
    let mut events = Vec::new();
    let Some(&(_, f0)) = s.first() else {
        return Ok(events);
    };
    let mut contact = f0 > params.on_threshold;
    let mut since_change = f64::INFINITY;
    let mut last_change = 0;
    for k in 1..s.len() {
        since_change += dt;
        let next = detect_contact(s[k].1, contact, params, since_change);
        if next == contact {
            continue;
        }
        let threshold = if next {
            params.on_threshold
        } else {
            params.off_threshold
        };
        let t = crossing_time(s, last_change + 1, k, threshold, next);
        let kind = if next {
            EventKind::HeelStrike
        } else {
            EventKind::ToeOff
        };
        if kind == EventKind::HeelStrike || !events.is_empty() {
            events.push(GaitEvent {
                kind,
                foot: trace.foot,
                t,
            });
        }
        contact = next;
        since_change = 0.0;
        last_change = k;
    }
    Ok(events)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrideRecord {
    pub foot: Foot,
    pub start_t: f64,
    pub stance_duration: f64,
    pub swing_duration: f64,
    /// Always `stance_duration + swing_duration`.
    pub stride_duration: f64,
}

impl StrideRecord {
    pub fn stance_pct(&self) -> f64 {
        100.0 * self.stance_duration / self.stride_duration
    }

    pub fn swing_pct(&self) -> f64 {
        100.0 * self.swing_duration / self.stride_duration
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct FootCursor {
    heel_strike: Option<f64>,
    toe_off: Option<f64>,
    last_t: Option<f64>,
}

/// One stride per consecutive heel-strike pair of each foot, ordered by
/// start time.
pub fn segment_strides(events: &[GaitEvent]) -> Result<Vec<StrideRecord>> {
    let mut cursors = [FootCursor::default(); 2];
    let mut strides = Vec::new();
    for (index, e) in events.iter().enumerate() {
        let c = &mut cursors[e.foot.index()];
        if c.last_t.is_some_and(|last| e.t <= last) {
            return Err(Error::EventSequence {
                index,
                reason: format!(
                    "{} event at {} s is not after the previous one",
                    e.foot.label(),
                    e.t
                ),
            });
        }
        let expecting_toe_off = c.heel_strike.is_some() && c.toe_off.is_none();
        match (e.kind, expecting_toe_off) {
            (EventKind::HeelStrike, false) => {
                if let (Some(hs), Some(to)) = (c.heel_strike, c.toe_off) {
                    let stance = to - hs;
                    let swing = e.t - to;
                    strides.push(StrideRecord {
                        foot: e.foot,
                        start_t: hs,
                        stance_duration: stance,
                        swing_duration: swing,
                        stride_duration: stance + swing,
                    });
                }
                c.heel_strike = Some(e.t);
                c.toe_off = None;
            }
            (EventKind::ToeOff, true) => c.toe_off = Some(e.t),
            (kind, _) => {
                return Err(Error::EventSequence {
                    index,
                    reason: format!("unexpected {kind:?} for {} foot", e.foot.label()),
                });
            }
        }
        c.last_t = Some(e.t);
    }
    strides.sort_by(|a, b| a.start_t.total_cmp(&b.start_t));
    Ok(strides)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaitFeatures {
    /// Last event minus first event, excluded steps included [s].
    pub gait_duration: f64,
    /// Last event minus the first retained heel strike [s].
    pub steady_gait_duration: f64,
    /// Heel strikes of both feet, excluded steps included.
    pub step_count: usize,
    pub mean_stance_pct_left: f64,
    pub mean_stance_pct_right: f64,
    pub mean_swing_pct_left: f64,
    pub mean_swing_pct_right: f64,
    /// Two step lengths [m].
    pub est_stride_length: f64,
    pub strides_used_left: usize,
    pub strides_used_right: usize,
    pub exclude_first_steps: usize,
}

impl GaitFeatures {
    pub fn stance_pct(&self, foot: Foot) -> f64 {
        match foot {
            Foot::Left => self.mean_stance_pct_left,
            Foot::Right => self.mean_stance_pct_right,
        }
    }

    pub fn swing_pct(&self, foot: Foot) -> f64 {
        match foot {
            Foot::Left => self.mean_swing_pct_left,
            Foot::Right => self.mean_swing_pct_right,
        }
    }
}

/// Trial features. The first `exclude_first_steps` heel strikes of either
/// foot are left out of the stance and swing averages; durations and the
/// step count cover the whole walk.
pub fn compute_features(
    strides: &[StrideRecord],
    events: &[GaitEvent],
    path_length: f64,
    exclude_first_steps: usize,
) -> Result<GaitFeatures> {
    if !(path_length.is_finite() && path_length > 0.0) {
        return Err(Error::config("path_length", "must be finite and > 0"));
    }
    let mut heel_strikes: Vec<f64> = events
        .iter()
        .filter(|e| e.kind == EventKind::HeelStrike)
        .map(|e| e.t)
        .collect();
    heel_strikes.sort_by(f64::total_cmp);
    if heel_strikes.len() <= exclude_first_steps {
        return Err(Error::InsufficientData {
            what: "steps",
            needed: exclude_first_steps + 1,
            found: heel_strikes.len(),
        });
    }
    let first = events.iter().map(|e| e.t).fold(f64::INFINITY, f64::min);
    let last = events.iter().map(|e| e.t).fold(f64::NEG_INFINITY, f64::max);
    let cutoff = heel_strikes[exclude_first_steps];

    let leg = |foot: Foot| -> Result<(f64, f64, usize)> {
        let used: Vec<&StrideRecord> = strides
            .iter()
            .filter(|s| s.foot == foot && s.start_t >= cutoff)
            .collect();
        if used.is_empty() {
            return Err(Error::InsufficientData {
                what: "strides per leg after exclusion",
                needed: 1,
                found: 0,
            });
        }
        let n = used.len() as f64;
        let stance = used.iter().map(|s| s.stance_pct()).sum::<f64>() / n;
        let swing = used.iter().map(|s| s.swing_pct()).sum::<f64>() / n;
        Ok((stance, swing, used.len()))
    };
    let (stance_l, swing_l, n_l) = leg(Foot::Left)?;
    let (stance_r, swing_r, n_r) = leg(Foot::Right)?;
    let step_count = heel_strikes.len();
    Ok(GaitFeatures {
        gait_duration: last - first,
        steady_gait_duration: last - cutoff,
        step_count,
        mean_stance_pct_left: stance_l,
        mean_stance_pct_right: stance_r,
        mean_swing_pct_left: swing_l,
        mean_swing_pct_right: swing_r,
        est_stride_length: 2.0 * path_length / step_count as f64,
        strides_used_left: n_l,
        strides_used_right: n_r,
        exclude_first_steps,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaitAnalysis {
    pub events: Vec<GaitEvent>,
    pub strides: Vec<StrideRecord>,
    pub features: GaitFeatures,
}

/// Runs events, strides and features on a left/right trace pair.
pub fn analyze_traces(
    left: &FootForceTrace,
    right: &FootForceTrace,
    path_length: f64,
    exclude_first_steps: usize,
    params: &ContactSensorParams,
) -> Result<GaitAnalysis> {
    let mut events = detect_events(left, params)?;
    events.extend(detect_events(right, params)?);
    events.sort_by(|a, b| a.t.total_cmp(&b.t));
    let strides = segment_strides(&events)?;
    let features = compute_features(&strides, &events, path_length, exclude_first_steps)?;
    Ok(GaitAnalysis {
        events,
        strides,
        features,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gait::gen::{condition_preset, synthesize_trial, AssistStream, Condition};
    use crate::sim::rng::SeedStreams;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn ev(kind: EventKind, foot: Foot, t: f64) -> GaitEvent {
        GaitEvent { kind, foot, t }
    }

    fn hs(foot: Foot, t: f64) -> GaitEvent {
        ev(EventKind::HeelStrike, foot, t)
    }

    fn to(foot: Foot, t: f64) -> GaitEvent {
        ev(EventKind::ToeOff, foot, t)
    }

    fn square_wave(on: f64, off: f64, cycles: usize, dt: f64) -> FootForceTrace {
        let mut trace = FootForceTrace::new(Foot::Left);
        let period = on + off;
        let n = ((cycles as f64 * period + off) / dt).round() as usize;
        for k in 0..n {
            let t = k as f64 * dt;
            let phase = (t - off).rem_euclid(period);
            let loaded = t >= off && phase < on - 1e-9;
            trace.push(t, if loaded { 700.0 } else { 0.0 });
        }
        trace
    }

    #[test]
    fn square_wave_edges() {
        let dt = 0.01;
        let trace = square_wave(0.6, 0.4, 5, dt);
        let events = detect_events(&trace, &event_thresholds()).unwrap();
        assert_eq!(events.len(), 10);
        for (i, e) in events.iter().enumerate() {
            let cycle = (i / 2) as f64;
            let edge = 0.4 + cycle + if i % 2 == 0 { 0.0 } else { 0.6 };
            assert!(
                (e.t - edge).abs() <= dt,
                "event {i} at {} vs edge {edge}",
                e.t
            );
            let expected = if i % 2 == 0 {
                EventKind::HeelStrike
            } else {
                EventKind::ToeOff
            };
            assert_eq!(e.kind, expected);
        }
    }

    #[test]
    fn flat_trace_has_no_events() {
        let mut trace = FootForceTrace::new(Foot::Right);
        for k in 0..100 {
            trace.push(k as f64 * 0.01, 0.0);
        }
        assert!(detect_events(&trace, &event_thresholds())
            .unwrap()
            .is_empty());
        let empty = FootForceTrace::new(Foot::Right);
        assert!(detect_events(&empty, &event_thresholds())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn initial_lift_off_is_dropped() {
        let mut trace = FootForceTrace::new(Foot::Left);
        for k in 0..200 {
            let t = k as f64 * 0.01;
            let loaded = t < 0.5 || (0.9..1.5).contains(&t);
            trace.push(t, if loaded { 700.0 } else { 0.0 });
        }
        let events = detect_events(&trace, &event_thresholds()).unwrap();
        assert_eq!(events.len(), 2);
        assert_eq!(events[0].kind, EventKind::HeelStrike);
    }

    #[test]
    fn trailing_stance_opens_no_stride() {
        let mut trace = square_wave(0.6, 0.4, 3, 0.01);
        let last_t = trace.samples.last().unwrap().0;
        for k in 1..=30 {
            trace.push(last_t + k as f64 * 0.01, 700.0);
        }
        let events = detect_events(&trace, &event_thresholds()).unwrap();
        assert_eq!(events.last().unwrap().kind, EventKind::HeelStrike);
        let strides = segment_strides(&events).unwrap();
        assert_eq!(strides.len(), 3);
    }

    #[test]
    fn non_uniform_sampling_is_a_format_error() {
        let mut trace = FootForceTrace::new(Foot::Left);
        for t in [0.0, 0.01, 0.02, 0.04, 0.05] {
            trace.push(t, 0.0);
        }
        assert!(matches!(
            detect_events(&trace, &event_thresholds()),
            Err(Error::Format { row: 4, .. })
        ));
    }

    #[test]
    fn one_stride_arithmetic() {
        let strides = segment_strides(&[
            hs(Foot::Right, 0.0),
            to(Foot::Right, 0.6),
            hs(Foot::Right, 1.0),
        ])
        .unwrap();
        assert_eq!(strides.len(), 1);
        let s = strides[0];
        assert_eq!(s.stance_duration, 0.6);
        assert_abs_diff_eq!(s.swing_duration, 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(s.stride_duration, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.stance_pct(), 60.0, epsilon = 1e-12);
    }

    #[test]
    fn single_heel_strike_has_no_strides() {
        assert!(segment_strides(&[hs(Foot::Left, 0.3)]).unwrap().is_empty());
    }

    #[test]
    fn ten_cycles_give_nine_strides() {
        let events: Vec<GaitEvent> = (0..10)
            .flat_map(|k| {
                let t = k as f64;
                [hs(Foot::Left, t), to(Foot::Left, t + 0.6)]
            })
            .collect();
        assert_eq!(segment_strides(&events).unwrap().len(), 9);
    }

    #[test]
    fn alternation_violation_names_index() {
        let events = [
            hs(Foot::Left, 0.0),
            hs(Foot::Right, 0.2),
            hs(Foot::Left, 0.5),
        ];
        assert!(matches!(
            segment_strides(&events),
            Err(Error::EventSequence { index: 2, .. })
        ));
        assert!(matches!(
            segment_strides(&[to(Foot::Left, 0.0)]),
            Err(Error::EventSequence { index: 0, .. })
        ));
    }

    fn regular_events(stance: f64, steps: usize) -> Vec<GaitEvent> {
        let mut events = Vec::new();
        for i in 0..steps {
            let foot = if i % 2 == 0 { Foot::Right } else { Foot::Left };
            let t = i as f64 * 0.5;
            events.push(hs(foot, t));
            if i + 2 < steps {
                events.push(to(foot, t + stance));
            }
        }
        events.sort_by(|a, b| a.t.total_cmp(&b.t));
        events
    }

    #[test]
    fn identical_strides_average_exactly() {
        let events = regular_events(0.6, 16);
        let strides = segment_strides(&events).unwrap();
        let f = compute_features(&strides, &events, 8.0, 2).unwrap();
        assert_abs_diff_eq!(f.mean_stance_pct_left, 60.0, epsilon = 1e-9);
        assert_abs_diff_eq!(f.mean_swing_pct_right, 40.0, epsilon = 1e-9);
        assert_eq!(f.step_count, 16);
        assert_eq!(f.est_stride_length, 1.0);
        assert_abs_diff_eq!(f.gait_duration, 7.5, epsilon = 1e-12);
        assert_abs_diff_eq!(f.steady_gait_duration, 6.5, epsilon = 1e-12);
    }

    #[test]
    fn too_few_steps() {
        let events = [hs(Foot::Right, 0.0), hs(Foot::Left, 0.5)];
        assert!(matches!(
            compute_features(&[], &events, 8.0, 2),
            Err(Error::InsufficientData {
                needed: 3,
                found: 2,
                ..
            })
        ));
    }

    #[test]
    fn noiseless_trace_recovers_truth() {
        let params = condition_preset(Condition::A).without_noise();
        let trial = synthesize_trial(
            &params,
            8.0,
            &AssistStream::Constant(0.0),
            0.01,
            &SeedStreams::new(3),
        )
        .unwrap();
        let a = analyze_traces(&trial.left, &trial.right, 8.0, 2, &event_thresholds()).unwrap();
        let f = &a.features;
        assert_abs_diff_eq!(f.mean_stance_pct_left, 58.0, epsilon = 0.5);
        assert_abs_diff_eq!(f.mean_stance_pct_right, 60.0, epsilon = 0.5);
        assert_eq!(f.step_count, trial.truth.step_count());
        for (s, t) in a.strides.iter().zip(trial.truth.strides.iter()) {
            assert_eq!(s.foot, t.foot);
            assert_abs_diff_eq!(s.stance_pct(), t.stance_pct(), epsilon = 0.5);
        }
    }

    proptest! {
        #[test]
        fn percentages_are_complementary(stance in 0.52f64..0.88, steps in 6usize..40) {
            let events = regular_events(stance, steps);
            let strides = segment_strides(&events).unwrap();
            let f = compute_features(&strides, &events, 8.0, 2).unwrap();
            prop_assert!((f.mean_stance_pct_left + f.mean_swing_pct_left - 100.0).abs() < 1e-9);
            prop_assert!((f.mean_stance_pct_right + f.mean_swing_pct_right - 100.0).abs() < 1e-9);
            for s in &strides {
                prop_assert_eq!(s.stance_duration + s.swing_duration, s.stride_duration);
            }
        }

        #[test]
        fn exclusion_only_moves_averages(seed in 0u64..200, exclude in 0usize..6) {
            let params = condition_preset(Condition::B);
            let trial = synthesize_trial(&params, 8.0, &AssistStream::Constant(0.8), 0.01, &SeedStreams::new(seed))
                .unwrap();
            let th = event_thresholds();
            let base = analyze_traces(&trial.left, &trial.right, 8.0, 0, &th).unwrap();
            let more = analyze_traces(&trial.left, &trial.right, 8.0, exclude, &th).unwrap();
            prop_assert_eq!(&base.events, &more.events);
            prop_assert_eq!(&base.strides, &more.strides);
            prop_assert_eq!(base.features.step_count, more.features.step_count);
            prop_assert_eq!(base.features.gait_duration, more.features.gait_duration);
            prop_assert!(more.features.strides_used_left <= base.features.strides_used_left);
        }
    }
}

//! Plantar-force gait: synthesis of per-foot force traces and the event,
//! stride and feature pipeline that measures them.

pub mod analysis;
pub mod gen;

use serde::{Deserialize, Serialize};

pub use analysis::{
    analyze_traces, compute_features, detect_events, event_thresholds, segment_strides,
    GaitAnalysis, GaitFeatures, StrideRecord,
};
pub use gen::{
    condition_preset, inject_fog, plan_steps, synthesize_trial, AssistStream, Condition,
    FogEpisode, GaitParams, GaitSynthesizer, GroundTruth, PlannedStep, StepPlan, StepTruth,
    StrideTruth, SynthesizedTrial,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Foot {
    Left,
    Right,
}

impl Foot {
    pub fn other(self) -> Foot {
        match self {
            Foot::Left => Foot::Right,
            Foot::Right => Foot::Left,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Foot::Left => 0,
            Foot::Right => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Foot::Left => "left",
            Foot::Right => "right",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    HeelStrike,
    ToeOff,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaitEvent {
    pub kind: EventKind,
    pub foot: Foot,
    /// [s]
    pub t: f64,
}

/// Vertical ground-reaction force under one foot, uniformly sampled.
#[derive(Debug, Clone, PartialEq)]
pub struct FootForceTrace {
    pub foot: Foot,
    /// `(t [s], force [N])` pairs.
    pub samples: Vec<(f64, f64)>,
}

impl FootForceTrace {
    pub fn new(foot: Foot) -> Self {
        Self {
            foot,
            samples: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn push(&mut self, t: f64, force: f64) {
        self.samples.push((t, force));
    }
}

//! Synthetic plantar-force traces.
//!
//! Steps alternate right, left, right, ... starting from quiet standing. Each
//! stance is a trapezoid with linear rise and fall. The schedule is built one
//! heel strike at a time so that the right-leg stance can respond to the
//! assistance measured during the most recent completed left stance.
//!
//! Timing of step `i` with stride period `P`, stance fraction `s_i` and
//! freezing delay `D_i` attached to its heel strike `h_i`:
//!
//! - next heel strike: `h_{i+1} = h_i + P/2 + D_i`
//! - toe-off: `h_i + s_i·P + D_i + D_{i+1}`
//!
//! so a freezing episode lengthens the stance and stride of the affected
//! steps while the swing keeps its nominal length and no distance is gained.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use super::{Foot, FootForceTrace};
use crate::sim::rng::{SeedStreams, Stream};
use crate::{Error, Result};

/// Bounds applied to every per-step stance fraction.
const STANCE_FRACTION_MIN: f64 = 0.51;
const STANCE_FRACTION_MAX: f64 = 0.89;

/// Standing time before the first step in a standalone trial [s].
const LEAD_IN: f64 = 1.0;
/// Standing time recorded after the last heel strike [s].
const TAIL: f64 = 0.5;
/// Upper bound on standalone trial length [s].
const MAX_TRIAL_TIME: f64 = 3600.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Condition {
    /// Walker only.
    A,
    /// Walker together with the assist device.
    B,
}

impl Condition {
    pub fn label(self) -> &'static str {
        match self {
            Condition::A => "A",
            Condition::B => "B",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaitParams {
    /// [steps/min]
    pub cadence: f64,
    pub stance_fraction_left: f64,
    /// Right-leg stance fraction without assistance.
    pub stance_fraction_right: f64,
    /// [m]
    pub stride_length: f64,
    /// Plateau force during stance [N].
    pub peak_force: f64,
    /// Duration of the loading and unloading ramps [s].
    pub rise_time: f64,
    /// Additive Gaussian force noise while loaded [N].
    pub force_noise_std: f64,
    /// Per-step Gaussian jitter of the stance fraction.
    pub stance_jitter_std: f64,
    /// Right stance fraction removed at full assistance.
    pub assist_stance_reduction: f64,
    /// Relative stride lengthening at full assistance.
    pub assist_stride_gain: f64,
    /// Freezing episodes per minute of walking.
    pub fog_rate: f64,
    /// [s]
    pub fog_duration: f64,
}

impl Default for GaitParams {
    fn default() -> Self {
        Self {
            cadence: 110.0,
            stance_fraction_left: 0.58,
            stance_fraction_right: 0.60,
            stride_length: 0.545,
            peak_force: 700.0,
            rise_time: 0.05,
            force_noise_std: 5.0,
            stance_jitter_std: 0.005,
            assist_stance_reduction: 0.02,
            assist_stride_gain: 0.05,
            fog_rate: 0.0,
            fog_duration: 1.0,
        }
    }
}

impl GaitParams {
    /// Heel strike to heel strike of the same foot [s].
    pub fn stride_period(&self) -> f64 {
        120.0 / self.cadence
    }

    /// Fraction of the stride with both feet loaded, summed over both
    /// double-support intervals.
    pub fn double_support_fraction(&self) -> f64 {
        self.stance_fraction_left + self.stance_fraction_right - 1.0
    }

    pub fn stance_fraction(&self, foot: Foot) -> f64 {
        match foot {
            Foot::Left => self.stance_fraction_left,
            Foot::Right => self.stance_fraction_right,
        }
    }

    /// Same parameters with force noise and stance jitter switched off.
    pub fn without_noise(self) -> Self {
        Self {
            force_noise_std: 0.0,
            stance_jitter_std: 0.0,
            ..self
        }
    }

    /// Same parameters with the assist terms switched off.
    pub fn without_assist(self) -> Self {
        Self {
            assist_stance_reduction: 0.0,
            assist_stride_gain: 0.0,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gait.cadence", self.cadence),
            ("gait.stride_length", self.stride_length),
            ("gait.peak_force", self.peak_force),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(field, "must be finite and > 0"));
            }
        }
        let non_negative = [
            ("gait.rise_time", self.rise_time),
            ("gait.force_noise_std", self.force_noise_std),
            ("gait.stance_jitter_std", self.stance_jitter_std),
            ("gait.assist_stance_reduction", self.assist_stance_reduction),
            ("gait.assist_stride_gain", self.assist_stride_gain),
            ("gait.fog_rate", self.fog_rate),
            ("gait.fog_duration", self.fog_duration),
        ];
        for (field, value) in non_negative {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::config(field, "must be finite and >= 0"));
            }
        }
        for (field, value) in [
            ("gait.stance_fraction_left", self.stance_fraction_left),
            ("gait.stance_fraction_right", self.stance_fraction_right),
        ] {
            if !(value > 0.5 && value < 0.9) {
                return Err(Error::config(field, "must lie in (0.5, 0.9)"));
            }
        }
        let shortest_phase = (1.0 - STANCE_FRACTION_MAX) * self.stride_period();
        if 2.0 * self.rise_time >= shortest_phase {
            return Err(Error::config(
                "gait.rise_time",
                "ramps must fit inside the shortest swing",
            ));
        }
        Ok(())
    }
}

/// Gait parameters for a trial condition. The two presets differ only in
/// the assist terms.
pub fn condition_preset(condition: Condition) -> GaitParams {
    match condition {
        Condition::A => GaitParams::default().without_assist(),
        Condition::B => GaitParams::default(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannedStep {
    pub foot: Foot,
    /// Stance fraction before any assistance is applied.
    pub stance_fraction: f64,
    /// Freezing delay inserted at this heel strike [s].
    pub fog_delay: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FogEpisode {
    /// Onset measured from gait start on the nominal schedule [s].
    pub t: f64,
    /// Step whose heel strike the episode attaches to.
    pub step: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StepPlan {
    pub steps: Vec<PlannedStep>,
    pub episodes: Vec<FogEpisode>,
}

impl StepPlan {
    fn fog_delay(&self, step: usize) -> f64 {
        self.steps.get(step).map_or(0.0, |s| s.fog_delay)
    }
}

/// Nominal heel-strike time of step `i`, measured from gait start.
fn nominal_heel_strike(params: &GaitParams, i: usize) -> f64 {
    let p = params.stride_period();
    (1.0 - params.stance_fraction_right) * p + i as f64 * p / 2.0
}

/// Draws the per-step stance fractions of a trial with no freezing.
pub fn plan_steps<R: Rng + ?Sized>(params: &GaitParams, max_steps: usize, rng: &mut R) -> StepPlan {
    let jitter = (params.stance_jitter_std > 0.0)
        .then(|| Normal::new(0.0, params.stance_jitter_std).expect("jitter std is positive"));
    let steps = (0..max_steps)
        .map(|i| {
            let foot = if i % 2 == 0 { Foot::Right } else { Foot::Left };
            let base = params.stance_fraction(foot);
            let noise = jitter.as_ref().map_or(0.0, |d| d.sample(rng));
            PlannedStep {
                foot,
                stance_fraction: base + noise,
                fog_delay: 0.0,
            }
        })
        .collect();
    StepPlan {
        steps,
        episodes: Vec::new(),
    }
}

/// Adds freezing episodes drawn from a Poisson process at `fog_rate` over
/// the nominal span of the plan.
pub fn inject_fog<R: Rng + ?Sized>(
    params: &GaitParams,
    mut plan: StepPlan,
    rng: &mut R,
) -> StepPlan {
    if params.fog_rate <= 0.0 || plan.steps.is_empty() {
        return plan;
    }
    let gaps = Exp::new(params.fog_rate / 60.0).expect("fog rate is positive");
    let horizon = nominal_heel_strike(params, plan.steps.len() - 1);
    let mut t = 0.0;
    loop {
        t += gaps.sample(rng);
        if t > horizon {
            break;
        }
        let step = (0..plan.steps.len())
            .find(|&i| nominal_heel_strike(params, i) >= t)
            .unwrap_or(plan.steps.len() - 1);
        plan.steps[step].fog_delay += params.fog_duration;
        plan.episodes.push(FogEpisode { t, step });
    }
    plan
}

/// Per-step record of what the synthesizer actually used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepTruth {
    pub index: usize,
    pub foot: Foot,
    pub heel_strike: f64,
    /// `None` when the walk ended before this foot lifted again.
    pub toe_off: Option<f64>,
    pub stance_fraction: f64,
    /// Mean assist gain over the preceding completed left stance.
    pub assist_gain: f64,
    /// [m]
    pub step_length: f64,
    pub fog_delay: f64,
    pub cumulative_distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrideTruth {
    /// Index of the opening step.
    pub step: usize,
    pub foot: Foot,
    pub start_t: f64,
    pub stance_duration: f64,
    pub swing_duration: f64,
    pub stride_duration: f64,
    /// Stance fraction drawn for the step, before freezing dilation.
    pub stance_fraction: f64,
    pub fog: bool,
}

impl StrideTruth {
    pub fn stance_pct(&self) -> f64 {
        100.0 * self.stance_duration / self.stride_duration
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GroundTruth {
    pub gait_start: Option<f64>,
    pub final_heel_strike: Option<f64>,
    pub distance: f64,
    pub halted: bool,
    pub steps: Vec<StepTruth>,
    pub strides: Vec<StrideTruth>,
    pub fog_episodes: Vec<FogEpisode>,
}

impl GroundTruth {
    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    /// Final heel strike minus first heel strike [s].
    pub fn gait_duration(&self) -> Option<f64> {
        Some(self.final_heel_strike? - self.steps.first()?.heel_strike)
    }

    fn strides_after(
        &self,
        foot: Foot,
        exclude_first_steps: usize,
    ) -> impl Iterator<Item = &StrideTruth> {
        self.strides
            .iter()
            .filter(move |s| s.foot == foot && s.step >= exclude_first_steps)
    }

    /// Mean drawn stance fraction over strides opened after the excluded
    /// steps.
    pub fn mean_stance_fraction(&self, foot: Foot, exclude_first_steps: usize) -> Option<f64> {
        mean(
            self.strides_after(foot, exclude_first_steps)
                .map(|s| s.stance_fraction),
        )
    }

    /// Mean realized stance percentage from the stride timing.
    pub fn mean_stance_pct(&self, foot: Foot, exclude_first_steps: usize) -> Option<f64> {
        mean(
            self.strides_after(foot, exclude_first_steps)
                .map(StrideTruth::stance_pct),
        )
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

#[derive(Debug, Clone, Copy)]
struct Contact {
    start: f64,
    end: f64,
}

impl Contact {
    const STANDING: Contact = Contact {
        start: f64::NEG_INFINITY,
        end: f64::INFINITY,
    };

    fn contains(&self, t: f64) -> bool {
        self.start <= t && t < self.end
    }
}

/// Tick-driven force synthesizer.
///
/// Call [`GaitSynthesizer::start`] once, then for every tick call
/// [`GaitSynthesizer::tick`] followed by [`GaitSynthesizer::record_assist`].
#[derive(Debug, Clone)]
pub struct GaitSynthesizer {
    params: GaitParams,
    plan: StepPlan,
    target_distance: f64,
    period: f64,
    noise: Option<Normal<f64>>,
    noise_rng: [ChaCha8Rng; 2],
    started: Option<f64>,
    contact: [Contact; 2],
    current_step: [Option<usize>; 2],
    next_step: usize,
    next_heel_strike: f64,
    distance: f64,
    finished: bool,
    halted: bool,
    steps: Vec<StepTruth>,
    left_sum: f64,
    left_count: usize,
    left_closed: bool,
    last_left_gain: Option<f64>,
}

impl GaitSynthesizer {
    pub fn new(params: GaitParams, distance: f64, streams: &SeedStreams) -> Result<Self> {
        params.validate()?;
        check_distance(&params, distance)?;
        let max_steps = (2.0 * distance / params.stride_length).ceil() as usize + 4;
        let plan = plan_steps(&params, max_steps, &mut streams.stream(Stream::StepPlan));
        let plan = inject_fog(&params, plan, &mut streams.stream(Stream::Fog));
        Self::with_plan(params, distance, plan, streams)
    }

    pub fn with_plan(
        params: GaitParams,
        distance: f64,
        plan: StepPlan,
        streams: &SeedStreams,
    ) -> Result<Self> {
        params.validate()?;
        check_distance(&params, distance)?;
        let noise = (params.force_noise_std > 0.0)
            .then(|| Normal::new(0.0, params.force_noise_std).expect("noise std is positive"));
        Ok(Self {
            period: params.stride_period(),
            params,
            plan,
            target_distance: distance,
            noise,
            noise_rng: [
                streams.stream(Stream::ForceNoiseLeft),
                streams.stream(Stream::ForceNoiseRight),
            ],
            started: None,
            contact: [Contact::STANDING; 2],
            current_step: [None; 2],
            next_step: 0,
            next_heel_strike: f64::INFINITY,
            distance: 0.0,
            finished: false,
            halted: false,
            steps: Vec::new(),
            left_sum: 0.0,
            left_count: 0,
            left_closed: false,
            last_left_gain: None,
        })
    }

    pub fn plan(&self) -> &StepPlan {
        &self.plan
    }

    pub fn started(&self) -> Option<f64> {
        self.started
    }

    /// True once the final heel strike has happened.
    pub fn finished(&self) -> bool {
        self.finished
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    /// Begins walking at `t0`: the right foot lifts at once.
    pub fn start(&mut self, t0: f64) {
        if self.started.is_some() {
            return;
        }
        self.started = Some(t0);
        let p = self.period;
        let h0 = t0 + (1.0 - self.params.stance_fraction_right) * p;
        let h1 = h0 + p / 2.0 + self.plan.fog_delay(0);
        self.contact[Foot::Right.index()].end = t0;
        self.contact[Foot::Left.index()].end = h1 - (1.0 - self.params.stance_fraction_left) * p;
        self.next_heel_strike = h0;
    }

    /// Ends the walk at the next heel strike regardless of distance.
    pub fn halt(&mut self) {
        self.halted = true;
    }

    /// Advances the schedule to `t` and returns `(left, right)` forces [N].
    pub fn tick(&mut self, t: f64) -> (f64, f64) {
        if self.started.is_some() {
            self.process_events(t);
        }
        let left = self.force(Foot::Left, t);
        let right = self.force(Foot::Right, t);
        (left, right)
    }

    /// Feeds the assist gain in effect at `t`. Only samples taken while the
    /// left foot is loaded count.
    pub fn record_assist(&mut self, t: f64, gain: f64) {
        if !self.left_closed && self.contact[Foot::Left.index()].contains(t) {
            self.left_sum += gain;
            self.left_count += 1;
        }
    }

    fn process_events(&mut self, t: f64) {
        loop {
            let left_end = self.contact[Foot::Left.index()].end;
            let toe_off_due = !self.left_closed && left_end <= t;
            let strike_due = !self.finished && self.next_heel_strike <= t;
            match (toe_off_due, strike_due) {
                (true, true) if left_end <= self.next_heel_strike => self.close_left_stance(),
                (true, false) => self.close_left_stance(),
                (_, true) => self.heel_strike(),
                (false, false) => break,
            }
        }
    }

    fn close_left_stance(&mut self) {
        self.left_closed = true;
        self.last_left_gain = Some(if self.left_count > 0 {
            self.left_sum / self.left_count as f64
        } else {
            0.0
        });
    }

    fn heel_strike(&mut self) {
        let i = self.next_step;
        let Some(planned) = self.plan.steps.get(i).copied() else {
            self.finished = true;
            return;
        };
        let p = self.period;
        let foot = planned.foot;
        let g = self.last_left_gain.unwrap_or(0.0);
        let mut s = planned.stance_fraction;
        if foot == Foot::Right {
            s -= self.params.assist_stance_reduction * g;
        }
        let s = s.clamp(STANCE_FRACTION_MIN, STANCE_FRACTION_MAX);
        let step_length =
            self.params.stride_length * (1.0 + self.params.assist_stride_gain * g) / 2.0;
        self.distance += step_length;
        let last = self.halted || self.distance >= self.target_distance;
        let h = self.next_heel_strike;
        let d_i = planned.fog_delay;
        let end = if last {
            f64::INFINITY
        } else {
            h + s * p + d_i + self.plan.fog_delay(i + 1)
        };
        self.contact[foot.index()] = Contact { start: h, end };
        if last {
            self.contact[foot.other().index()].end = f64::INFINITY;
            if let Some(j) = self.current_step[foot.other().index()] {
                self.steps[j].toe_off = None;
            }
            self.finished = true;
        }
        self.current_step[foot.index()] = Some(i);
        self.steps.push(StepTruth {
            index: i,
            foot,
            heel_strike: h,
            toe_off: end.is_finite().then_some(end),
            stance_fraction: s,
            assist_gain: g,
            step_length,
            fog_delay: d_i,
            cumulative_distance: self.distance,
        });
        if foot == Foot::Left {
            self.left_sum = 0.0;
            self.left_count = 0;
            self.left_closed = false;
        }
        self.next_step += 1;
        self.next_heel_strike = h + p / 2.0 + d_i;
    }

    fn force(&mut self, foot: Foot, t: f64) -> f64 {
        let c = self.contact[foot.index()];
        if !c.contains(t) {
            return 0.0;
        }
        let peak = self.params.peak_force;
        let rise = self.params.rise_time;
        let clean = if rise > 0.0 {
            peak * ((t - c.start) / rise).min((c.end - t) / rise).min(1.0)
        } else {
            peak
        };
        match &self.noise {
            Some(noise) if clean > 0.0 => {
                (clean + noise.sample(&mut self.noise_rng[foot.index()])).max(0.0)
            }
            _ => clean,
        }
    }

    /// Assembles the ground truth for everything synthesized so far.
    pub fn finish(&self) -> GroundTruth {
        let strides = self
            .steps
            .iter()
            .zip(self.steps.iter().skip(2))
            .filter_map(|(a, b)| {
                let toe_off = a.toe_off?;
                let stride = b.heel_strike - a.heel_strike;
                let stance = toe_off - a.heel_strike;
                Some(StrideTruth {
                    step: a.index,
                    foot: a.foot,
                    start_t: a.heel_strike,
                    stance_duration: stance,
                    swing_duration: stride - stance,
                    stride_duration: stride,
                    stance_fraction: a.stance_fraction,
                    fog: a.fog_delay > 0.0 || self.plan.fog_delay(a.index + 1) > 0.0,
                })
            })
            .collect();
        GroundTruth {
            gait_start: self.started,
            final_heel_strike: self
                .finished
                .then(|| self.steps.last().map(|s| s.heel_strike))
                .flatten(),
            distance: self.distance,
            halted: self.halted,
            steps: self.steps.clone(),
            strides,
            fog_episodes: self.plan.episodes.clone(),
        }
    }
}

fn check_distance(params: &GaitParams, distance: f64) -> Result<()> {
    if !(distance.is_finite() && distance >= params.stride_length) {
        return Err(Error::DegenerateTrial(format!(
            "distance {distance} m is shorter than one stride of {} m",
            params.stride_length
        )));
    }
    Ok(())
}

/// Assist gain supplied to a standalone trial, one value per tick.
#[derive(Debug, Clone, PartialEq)]
pub enum AssistStream {
    Constant(f64),
    Samples(Vec<f64>),
}

impl AssistStream {
    fn at(&self, tick: usize) -> Result<f64> {
        match self {
            AssistStream::Constant(g) => Ok(*g),
            AssistStream::Samples(v) => v
                .get(tick)
                .copied()
                .ok_or(Error::AssistStreamExhausted(tick)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesizedTrial {
    pub left: FootForceTrace,
    pub right: FootForceTrace,
    pub truth: GroundTruth,
}

/// Synthesizes a whole trial: one second of standing, the walk, and a short
/// standing tail after the final heel strike.
pub fn synthesize_trial(
    params: &GaitParams,
    distance: f64,
    assist: &AssistStream,
    dt: f64,
    streams: &SeedStreams,
) -> Result<SynthesizedTrial> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::config("dt", "must be finite and > 0"));
    }
    let mut syn = GaitSynthesizer::new(params.clone(), distance, streams)?;
    let start_tick = (LEAD_IN / dt).round() as usize;
    let tail_ticks = (TAIL / dt).round().max(1.0) as usize;
    let mut left = FootForceTrace::new(Foot::Left);
    let mut right = FootForceTrace::new(Foot::Right);
    let mut end_tick = None;
    let mut k = 0usize;
    loop {
        let t = k as f64 * dt;
        if t > MAX_TRIAL_TIME {
            return Err(Error::DegenerateTrial(format!(
                "walk did not finish within {MAX_TRIAL_TIME} s"
            )));
        }
        if k == start_tick {
            syn.start(t);
        }
        let (fl, fr) = syn.tick(t);
        left.push(t, fl);
        right.push(t, fr);
        syn.record_assist(t, assist.at(k)?);
        if syn.finished() && end_tick.is_none() {
            end_tick = Some(k + tail_ticks);
        }
        if end_tick == Some(k) {
            break;
        }
        k += 1;
    }
    Ok(SynthesizedTrial {
        left,
        right,
        truth: syn.finish(),
    })
}

//! Scenario configuration and the scripted event timeline.

use serde::{Deserialize, Serialize};

use crate::controller::ControllerParams;
use crate::gait::{condition_preset, Condition, GaitParams};
use crate::plant::WalkerParams;
use crate::pwad::PwadParams;
use crate::{Error, Result, SCHEMA_MAJOR, SCHEMA_VERSION};

/// Rejects schema versions with a major other than the supported one.
pub fn check_schema_version(version: &str) -> Result<()> {
    let major = version
        .split('.')
        .next()
        .and_then(|m| m.trim().parse::<u32>().ok());
    if major == Some(SCHEMA_MAJOR) {
        Ok(())
    } else {
        Err(Error::SchemaVersion {
            found: version.to_string(),
            expected: SCHEMA_MAJOR,
        })
    }
}

pub(crate) fn default_schema_version() -> String {
    SCHEMA_VERSION.to_string()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Command {
    /// Engage the position-hold brake.
    Stop,
    /// Apply a constant disturbance torque [N·m] from now on.
    Disturb(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimelineEntry {
    /// [s]
    pub t: f64,
    /// `STOP` or `DISTURB`.
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

impl TimelineEntry {
    pub fn stop(t: f64) -> Self {
        Self {
            t,
            command: "STOP".into(),
            value: None,
        }
    }

    pub fn disturb(t: f64, torque: f64) -> Self {
        Self {
            t,
            command: "DISTURB".into(),
            value: Some(torque),
        }
    }

    pub fn parse(&self, index: usize) -> Result<Command> {
        let field = format!("timeline[{index}]");
        match (self.command.as_str(), self.value) {
            ("STOP", _) => Ok(Command::Stop),
            ("DISTURB", Some(v)) if v.is_finite() => Ok(Command::Disturb(v)),
            ("DISTURB", _) => Err(Error::config(
                format!("{field}.value"),
                "DISTURB needs a finite torque",
            )),
            (other, _) => Err(Error::config(
                format!("{field}.command"),
                format!("unknown command `{other}`"),
            )),
        }
    }
}

/// Validates a timeline and returns the parsed commands.
pub fn parse_timeline(timeline: &[TimelineEntry]) -> Result<Vec<(f64, Command)>> {
    let mut prev = f64::NEG_INFINITY;
    timeline
        .iter()
        .enumerate()
        .map(|(i, e)| {
            if !(e.t.is_finite() && e.t >= 0.0) {
                return Err(Error::config(
                    format!("timeline[{i}].t"),
                    "must be finite and >= 0",
                ));
            }
            if e.t < prev {
                return Err(Error::config(
                    format!("timeline[{i}].t"),
                    "timeline must be sorted by t",
                ));
            }
            prev = e.t;
            Ok((e.t, e.parse(i)?))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: String,
    pub trial_id: String,
    pub condition: Condition,
    /// [m]
    pub target_distance: f64,
    /// [m/s]
    pub target_velocity: f64,
    pub rng_seed: u64,
    /// [s]
    pub dt: f64,
    /// Simulated time after which an unfinished run is cut off [s].
    pub time_cap: f64,
    /// Velocity sensor noise [m/s].
    pub velocity_noise_std: f64,
    /// User push that starts the walker [N].
    pub push_force: f64,
    /// [s]
    pub push_duration: f64,
    /// Heel strikes left out of the stride averages.
    pub exclude_first_steps: usize,
    pub plant: WalkerParams,
    pub controller: ControllerParams,
    pub pwad: PwadParams,
    /// `None` uses the preset of `condition`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gait: Option<GaitParams>,
    pub timeline: Vec<TimelineEntry>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            schema_version: default_schema_version(),
            trial_id: "trial".into(),
            condition: Condition::A,
            target_distance: 8.0,
            target_velocity: 0.5,
            rng_seed: 42,
            dt: 0.01,
            time_cap: 120.0,
            velocity_noise_std: 0.005,
            push_force: 20.0,
            push_duration: 0.5,
            exclude_first_steps: 2,
            plant: WalkerParams::default(),
            controller: ControllerParams::default(),
            pwad: PwadParams::default(),
            gait: None,
            timeline: Vec::new(),
        }
    }
}

impl ScenarioConfig {
    pub fn for_condition(condition: Condition, trial_id: impl Into<String>, seed: u64) -> Self {
        Self {
            condition,
            trial_id: trial_id.into(),
            rng_seed: seed,
            ..Self::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| {
            Error::config(
                format!("line {} column {}", e.line(), e.column()),
                e.to_string(),
            )
        })?;
        check_schema_version(&config.schema_version)?;
        Ok(config)
    }

    pub fn gait_params(&self) -> GaitParams {
        self.gait
            .clone()
            .unwrap_or_else(|| condition_preset(self.condition))
    }

    /// Whether the assist device is active in this run.
    pub fn pwad_enabled(&self) -> bool {
        self.condition == Condition::B
    }

    pub fn validate(&self) -> Result<()> {
        check_schema_version(&self.schema_version)?;
        let positive = [
            ("target_distance", self.target_distance),
            ("target_velocity", self.target_velocity),
            ("time_cap", self.time_cap),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(field, "must be finite and > 0"));
            }
        }
        if !(self.dt.is_finite() && self.dt > 0.0 && self.dt <= 0.1) {
            return Err(Error::config("dt", "must lie in (0, 0.1]"));
        }
        for (field, value) in [
            ("velocity_noise_std", self.velocity_noise_std),
            ("push_force", self.push_force),
            ("push_duration", self.push_duration),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::config(field, "must be finite and >= 0"));
            }
        }
        if self.trial_id.is_empty()
            || !self
                .trial_id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        {
            return Err(Error::config(
                "trial_id",
                "must be non-empty ASCII letters, digits, '-', '_' or '.'",
            ));
        }
        self.plant.validate()?;
        self.controller.validate()?;
        self.pwad.validate()?;
        self.gait_params().validate()?;
        match (self.condition, self.pwad.enabled) {
            (Condition::A, Some(true)) => {
                return Err(Error::config(
                    "pwad.enabled",
                    "condition A runs without the assist device",
                ))
            }
            (Condition::B, Some(false)) => {
                return Err(Error::config(
                    "pwad.enabled",
                    "condition B runs with the assist device",
                ))
            }
            _ => {}
        }
        if self.condition == Condition::A && self.pwad.assist_override.is_some() {
            return Err(Error::config(
                "pwad.assist_override",
                "condition A runs without the assist device",
            ));
        }
        parse_timeline(&self.timeline)?;
        Ok(())
    }
}

//! Pneumatic walking-assist device.
//!
//! A force sensor under the left sole gates a solenoid valve. While the left
//! foot is loaded the valve feeds the leg muscle from the regulator; on
//! lift-off it vents. Pressure follows a first-order lag toward the regulator
//! setting or toward ambient.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContactSensorParams {
    /// Force that must be exceeded to register contact [N].
    pub on_threshold: f64,
    /// Force that must be undercut to register lift-off [N].
    pub off_threshold: f64,
    /// Minimum time between state changes [s].
    pub debounce: f64,
}

impl Default for ContactSensorParams {
    fn default() -> Self {
        Self {
            on_threshold: 50.0,
            off_threshold: 30.0,
            debounce: 0.05,
        }
    }
}

impl ContactSensorParams {
    pub fn validate(&self, prefix: &str) -> Result<()> {
        if !(self.off_threshold.is_finite() && self.off_threshold > 0.0) {
            return Err(Error::config(
                format!("{prefix}.off_threshold"),
                "must be finite and > 0",
            ));
        }
        if !(self.on_threshold.is_finite() && self.on_threshold > self.off_threshold) {
            return Err(Error::config(
                format!("{prefix}.on_threshold"),
                "must exceed off_threshold",
            ));
        }
        if !(self.debounce.is_finite() && self.debounce >= 0.0) {
            return Err(Error::config(
                format!("{prefix}.debounce"),
                "must be finite and >= 0",
            ));
        }
        Ok(())
    }
}

/// Hysteresis contact decision with debounce.
pub fn detect_contact(
    force: f64,
    previous: bool,
    params: &ContactSensorParams,
    time_since_change: f64,
) -> bool {
    if time_since_change < params.debounce {
        return previous;
    }
    if !previous && force > params.on_threshold {
        true
    } else if previous && force < params.off_threshold {
        false
    } else {
        previous
    }
}

/// Stateful wrapper around [`detect_contact`] for a sampled force signal.
#[derive(Debug, Clone, Copy)]
pub struct ContactDetector {
    params: ContactSensorParams,
    contact: bool,
    since_change: f64,
}

impl ContactDetector {
    pub fn new(params: ContactSensorParams) -> Self {
        Self {
            params,
            contact: false,
            since_change: f64::INFINITY,
        }
    }

    pub fn contact(&self) -> bool {
        self.contact
    }

    /// Feeds one sample taken `dt` after the previous one. Returns the new
    /// contact flag.
    pub fn update(&mut self, force: f64, dt: f64) -> bool {
        self.since_change += dt;
        let next = detect_contact(force, self.contact, &self.params, self.since_change);
        if next != self.contact {
            self.contact = next;
            self.since_change = 0.0;
        }
        self.contact
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Valve {
    Open,
    Vent,
}

impl Valve {
    pub fn is_open(self) -> bool {
        self == Valve::Open
    }
}

/// The valve follows the left-contact flag: open on contact, vent on lift-off.
pub fn valve_logic(left_contact: bool) -> Valve {
    if left_contact {
        Valve::Open
    } else {
        Valve::Vent
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PwadParams {
    /// `None` follows the trial condition.
    pub enabled: Option<bool>,
    /// Regulator setting [MPa].
    pub max_pressure: f64,
    /// Fill time constant [s].
    pub tau_fill: f64,
    /// Vent time constant [s].
    pub tau_vent: f64,
    pub contact: ContactSensorParams,
    /// Replaces the pressure-derived assist gain with a constant. Only
    /// meaningful when the device is enabled.
    pub assist_override: Option<f64>,
}

impl Default for PwadParams {
    fn default() -> Self {
        Self {
            enabled: None,
            max_pressure: 0.3,
            tau_fill: 0.15,
            tau_vent: 0.25,
            contact: ContactSensorParams::default(),
            assist_override: None,
        }
    }
}

impl PwadParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("pwad.max_pressure", self.max_pressure),
            ("pwad.tau_fill", self.tau_fill),
            ("pwad.tau_vent", self.tau_vent),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(field, "must be finite and > 0"));
            }
        }
        if let Some(g) = self.assist_override {
            if !(0.0..=1.0).contains(&g) {
                return Err(Error::config("pwad.assist_override", "must lie in [0, 1]"));
            }
        }
        self.contact.validate("pwad.contact")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MuscleState {
    /// Gauge pressure [MPa].
    pub pressure: f64,
    pub valve_open: bool,
}

/// First-order pressure update, clamped to `[0, max_pressure]`.
pub fn pressure_step(m: MuscleState, valve: Valve, dt: f64, params: &PwadParams) -> MuscleState {
    let (target, tau) = match valve {
        Valve::Open => (params.max_pressure, params.tau_fill),
        Valve::Vent => (0.0, params.tau_vent),
    };
    let p = m.pressure + dt / tau * (target - m.pressure);
    MuscleState {
        pressure: p.clamp(0.0, params.max_pressure),
        valve_open: valve.is_open(),
    }
}

/// Normalized assistance: 0 when empty, 1 at the regulator setting.
pub fn assist_gain(m: &MuscleState, params: &PwadParams) -> f64 {
    (m.pressure / params.max_pressure).clamp(0.0, 1.0)
}

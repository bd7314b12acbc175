//! Walker control: incremental velocity control across the motion regions,
//! and position-hold braking after a stop command.
//!
//! The velocity law nudges the torque command by a fixed step whenever the
//! velocity error leaves the deadband: `0.03` is read as N·m and `0.05` as
//! m/s. The brake law integrates the wheel-angle error into a position
//! command that a PD position servo tracks.

use serde::{Deserialize, Serialize};

use crate::plant::{WalkerParams, WalkerState};
use crate::{Error, Result};

/// Tolerance for treating a torque command as exactly zero.
const TORQUE_ZERO: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    PositiveNeutral,
    Accelerating,
    ConstantVelocity,
    Decelerating,
    NegativeNeutral,
    Braked,
}

impl Region {
    pub const CHAIN: [Region; 5] = [
        Region::PositiveNeutral,
        Region::Accelerating,
        Region::ConstantVelocity,
        Region::Decelerating,
        Region::NegativeNeutral,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Region::PositiveNeutral => "PositiveNeutral",
            Region::Accelerating => "Accelerating",
            Region::ConstantVelocity => "ConstantVelocity",
            Region::Decelerating => "Decelerating",
            Region::NegativeNeutral => "NegativeNeutral",
            Region::Braked => "Braked",
        }
    }

    /// Position along the five-region chain; `None` for `Braked`.
    pub fn chain_index(self) -> Option<usize> {
        Region::CHAIN.iter().position(|&r| r == self)
    }

    /// Whether `self -> next` is a legal edge. Staying put is always legal.
    pub fn can_transition_to(self, next: Region) -> bool {
        if self == next || next == Region::Braked {
            return true;
        }
        match (self.chain_index(), next.chain_index()) {
            (Some(a), Some(b)) => b == a + 1,
            _ => false,
        }
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerParams {
    /// Torque increment per tick [N·m].
    pub step: f64,
    /// Velocity error band with no torque change [m/s].
    pub deadband: f64,
    /// Absolute bound on the integrated torque command [N·m].
    pub tau_cap: f64,
    /// Measured speed that ends the positive neutral region [m/s].
    pub v_start: f64,
    /// Planned deceleration [m/s²].
    pub a_dec: f64,
    /// Extra distance added to the stopping-distance test [m].
    pub decel_margin: f64,
    /// Speed regarded as complete rest [m/s].
    pub stop_velocity: f64,
    /// Floor of the deceleration ramp [m/s].
    pub creep_velocity: f64,
    /// Position servo stiffness [N·m/rad].
    pub kp: f64,
    /// Position servo damping [N·m·s/rad].
    pub kd: f64,
    /// Interval between brake position-command updates [s].
    pub brake_update_period: f64,
}

impl Default for ControllerParams {
    fn default() -> Self {
        Self {
            step: 0.03,
            deadband: 0.05,
            tau_cap: 5.0,
            v_start: 0.05,
            a_dec: 0.25,
            decel_margin: 0.05,
            stop_velocity: 0.005,
            creep_velocity: 0.1,
            kp: 5.0,
            kd: 0.5,
            brake_update_period: 0.5,
        }
    }
}

impl ControllerParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("controller.step", self.step),
            ("controller.deadband", self.deadband),
            ("controller.tau_cap", self.tau_cap),
            ("controller.a_dec", self.a_dec),
            ("controller.stop_velocity", self.stop_velocity),
            ("controller.brake_update_period", self.brake_update_period),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(field, "must be finite and > 0"));
            }
        }
        let non_negative = [
            ("controller.v_start", self.v_start),
            ("controller.decel_margin", self.decel_margin),
            ("controller.creep_velocity", self.creep_velocity),
            ("controller.kp", self.kp),
            ("controller.kd", self.kd),
        ];
        for (field, value) in non_negative {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::config(field, "must be finite and >= 0"));
            }
        }
        Ok(())
    }
}

/// Where the walk is heading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionProfile {
    pub target_velocity: f64,
    pub target_distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityControllerState {
    /// Previous torque command [N·m].
    pub tau_prev: f64,
    /// Current velocity setpoint [m/s].
    pub v_ref: f64,
    pub deadband: f64,
    pub step: f64,
    pub tau_cap: f64,
    pub region: Region,
}

impl VelocityControllerState {
    pub fn new(params: &ControllerParams) -> Self {
        Self {
            tau_prev: 0.0,
            v_ref: 0.0,
            deadband: params.deadband,
            step: params.step,
            tau_cap: params.tau_cap,
            region: Region::PositiveNeutral,
        }
    }
}

/// One tick of the incremental velocity law.
///
/// The inequalities are strict: an error exactly at the deadband leaves the
/// torque unchanged. An increment that would leave `±tau_cap` is refused,
/// so the command always moves by a whole step or not at all.
pub fn velocity_control_step(
    ctrl: VelocityControllerState,
    c_t: f64,
) -> (VelocityControllerState, f64) {
    let delta = if ctrl.v_ref - c_t > ctrl.deadband {
        ctrl.step
    } else if c_t - ctrl.v_ref > ctrl.deadband {
        -ctrl.step
    } else {
        0.0
    };
    let candidate = ctrl.tau_prev + delta;
    let tau = if candidate.abs() > ctrl.tau_cap + TORQUE_ZERO {
        ctrl.tau_prev
    } else {
        candidate
    };
    (
        VelocityControllerState {
            tau_prev: tau,
            ..ctrl
        },
        tau,
    )
}

/// Steps a leftover torque command back toward zero once the walk is over.
pub fn relax_torque(ctrl: VelocityControllerState) -> (VelocityControllerState, f64) {
    let tau = if ctrl.tau_prev > TORQUE_ZERO {
        ctrl.tau_prev - ctrl.step
    } else if ctrl.tau_prev < -TORQUE_ZERO {
        ctrl.tau_prev + ctrl.step
    } else {
        ctrl.tau_prev
    };
    let tau = if tau.abs() < TORQUE_ZERO { 0.0 } else { tau };
    (
        VelocityControllerState {
            tau_prev: tau,
            ..ctrl
        },
        tau,
    )
}

/// Next motion region given the measured speed `c_t` and the travelled
/// distance. `Braked` is only entered through [`brake_engage`] and never
/// left here.
pub fn region_transition(
    region: Region,
    position: f64,
    c_t: f64,
    params: &ControllerParams,
    profile: &MotionProfile,
) -> Region {
    match region {
        Region::PositiveNeutral if c_t > params.v_start => Region::Accelerating,
        Region::Accelerating if c_t >= profile.target_velocity - params.deadband => {
            Region::ConstantVelocity
        }
        Region::ConstantVelocity => {
            let remaining = profile.target_distance - position;
            let stopping = c_t * c_t / (2.0 * params.a_dec) + params.decel_margin;
            if remaining <= stopping {
                Region::Decelerating
            } else {
                region
            }
        }
        Region::Decelerating
            if c_t < params.stop_velocity || position >= profile.target_distance =>
        {
            Region::NegativeNeutral
        }
        other => other,
    }
}

/// Velocity setpoint for a region. `since_entry` is the time spent in the
/// region so far and only matters while decelerating, where the setpoint
/// ramps down at `a_dec` and then holds at the creep speed until the target
/// distance is reached.
pub fn region_setpoint(
    region: Region,
    since_entry: f64,
    params: &ControllerParams,
    profile: &MotionProfile,
) -> f64 {
    match region {
        Region::Accelerating | Region::ConstantVelocity => profile.target_velocity,
        Region::Decelerating => {
            let ramp = profile.target_velocity - params.a_dec * since_entry;
            ramp.max(params.creep_velocity.min(profile.target_velocity))
        }
        Region::PositiveNeutral | Region::NegativeNeutral | Region::Braked => 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BrakeControllerState {
    /// Last position command [rad].
    pub p_prev: f64,
    /// Wheel angle captured when the stop command arrived [rad].
    pub p_ref: f64,
    pub engaged: bool,
}

/// Captures the current wheel angle as the hold reference.
pub fn brake_engage(state: &WalkerState, params: &WalkerParams) -> BrakeControllerState {
    let p_ref = state.wheel_angle(params);
    BrakeControllerState {
        p_prev: p_ref,
        p_ref,
        engaged: true,
    }
}

/// One update of the position-hold law, with `b` the measured wheel angle.
pub fn brake_control_step(
    brake: BrakeControllerState,
    b: f64,
) -> Result<(BrakeControllerState, f64)> {
    if !brake.engaged {
        return Err(Error::BrakeNotEngaged);
    }
    let p = brake.p_prev + (brake.p_ref - b);
    Ok((BrakeControllerState { p_prev: p, ..brake }, p))
}

/// Torque the wheel servo applies in position mode.
pub fn position_hold_torque(
    p_cmd: f64,
    angle: f64,
    rate: f64,
    params: &ControllerParams,
    limit: f64,
) -> f64 {
    (params.kp * (p_cmd - angle) - params.kd * rate).clamp(-limit, limit)
}

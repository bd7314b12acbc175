//! Longitudinal walker dynamics.
//!
//! The walker is a point mass driven by two wheel actuators, resisted by
//! rolling resistance and by a viscous term standing in for the coupling to
//! the user's arms and gait. Integration is semi-implicit Euler: velocity is
//! updated first and the new velocity advances the position.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const GRAVITY: f64 = 9.81;

/// Speeds below this magnitude count as standing still.
pub const REST_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WalkerParams {
    /// Drive wheel radius [m]. The walker's wheels are 15 cm in diameter.
    pub wheel_radius: f64,
    /// Walker plus effective user coupling [kg]. Tunable, not measured.
    pub mass: f64,
    pub rolling_resistance_coeff: f64,
    /// Continuous torque rating of each wheel actuator [N·m].
    pub torque_limit: f64,
    pub n_driven_wheels: u32,
    /// Viscous user-coupling loss [N·s/m].
    pub coupling_damping: f64,
    /// Net force below which a walker at rest stays at rest [N]. `None`
    /// means the rolling-resistance force itself.
    pub static_threshold: Option<f64>,
}

impl Default for WalkerParams {
    fn default() -> Self {
        Self {
            wheel_radius: 0.075,
            mass: 12.0,
            rolling_resistance_coeff: 0.02,
            torque_limit: 1.2,
            n_driven_wheels: 2,
            coupling_damping: 25.0,
            static_threshold: None,
        }
    }
}

impl WalkerParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("plant.wheel_radius", self.wheel_radius),
            ("plant.mass", self.mass),
            ("plant.torque_limit", self.torque_limit),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(field, "must be finite and > 0"));
            }
        }
        let non_negative = [
            (
                "plant.rolling_resistance_coeff",
                self.rolling_resistance_coeff,
            ),
            ("plant.coupling_damping", self.coupling_damping),
            (
                "plant.static_threshold",
                self.static_threshold.unwrap_or(0.0),
            ),
        ];
        for (field, value) in non_negative {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::config(field, "must be finite and >= 0"));
            }
        }
        if self.n_driven_wheels == 0 {
            return Err(Error::config("plant.n_driven_wheels", "must be >= 1"));
        }
        Ok(())
    }

    /// Magnitude of the rolling-resistance force [N].
    pub fn rolling_force(&self) -> f64 {
        self.rolling_resistance_coeff * self.mass * GRAVITY
    }

    pub fn static_force(&self) -> f64 {
        self.static_threshold
            .unwrap_or_else(|| self.rolling_force())
    }

    /// Longitudinal force produced by a lumped per-wheel torque.
    pub fn torque_to_force(&self, torque: f64) -> f64 {
        f64::from(self.n_driven_wheels) * torque / self.wheel_radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WalkerState {
    /// Distance along the straight path [m].
    pub position: f64,
    /// [m/s]
    pub velocity: f64,
}

impl WalkerState {
    /// Wheel angle implied by the travelled distance [rad].
    pub fn wheel_angle(&self, params: &WalkerParams) -> f64 {
        self.position / params.wheel_radius
    }

    pub fn wheel_rate(&self, params: &WalkerParams) -> f64 {
        self.velocity / params.wheel_radius
    }
}

/// Clamps a torque command to the actuator rating.
pub fn saturate_torque(tau: f64, params: &WalkerParams) -> f64 {
    tau.clamp(-params.torque_limit, params.torque_limit)
}

/// Advances the walker by one step of `dt` seconds.
///
/// `push_force` is any exogenous longitudinal force [N]: the user's push,
/// or a disturbance expressed as force.
pub fn plant_step(
    state: WalkerState,
    tau_cmd: f64,
    push_force: f64,
    dt: f64,
    params: &WalkerParams,
) -> Result<WalkerState> {
    if !state.position.is_finite() {
        return Err(Error::NumericInput("position"));
    }
    if !state.velocity.is_finite() {
        return Err(Error::NumericInput("velocity"));
    }
    if !tau_cmd.is_finite() {
        return Err(Error::NumericInput("tau_cmd"));
    }
    if !push_force.is_finite() {
        return Err(Error::NumericInput("push_force"));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::NumericInput("dt"));
    }

    let drive = params.torque_to_force(saturate_torque(tau_cmd, params));
    let applied = drive + push_force;
    let rolling = params.rolling_force();
    let v = state.velocity;

    if v.abs() < REST_EPSILON && applied.abs() <= params.static_force() {
        return Ok(WalkerState {
            position: state.position,
            velocity: 0.0,
        });
    }

    let resistance = if v.abs() < REST_EPSILON {
        0.0
    } else {
        rolling * v.signum()
    };
    let accel = (applied - resistance - params.coupling_damping * v) / params.mass;
    let mut v_next = v + accel * dt;
    // Friction and damping stop the walker; they never reverse it.
    if v.abs() >= REST_EPSILON && v_next * v < 0.0 && applied.abs() <= rolling {
        v_next = 0.0;
    }
    Ok(WalkerState {
        position: state.position + v_next * dt,
        velocity: v_next,
    })
}

/// Velocity feedback as the controller sees it: true velocity plus Gaussian
/// sensor noise. A zero `noise_std` returns the velocity exactly and draws
/// nothing from `rng`.
pub fn measure_velocity<R: Rng + ?Sized>(state: &WalkerState, noise_std: f64, rng: &mut R) -> f64 {
    if noise_std <= 0.0 {
        return state.velocity;
    }
    let noise = Normal::new(0.0, noise_std).expect("noise_std is finite and positive");
    state.velocity + noise.sample(rng)
}

//! One deterministic trial: plant, controllers, assist device and gait
//! synthesizer stepped together on a fixed clock.
//!
//! Each telemetry row holds the state at the start of its tick together
//! with the commands computed from it.

use serde::{Deserialize, Serialize};

use super::clock::SimClock;
use super::config::{parse_timeline, Command, ScenarioConfig, TimelineEntry};
use super::rng::{SeedStreams, Stream};
use crate::controller::{
    brake_control_step, brake_engage, position_hold_torque, region_setpoint, region_transition,
    relax_torque, velocity_control_step, BrakeControllerState, MotionProfile, Region,
    VelocityControllerState,
};
use crate::gait::{Condition, Foot, FootForceTrace, GaitSynthesizer, GroundTruth};
use crate::plant::{measure_velocity, plant_step, saturate_torque, WalkerState};
use crate::pwad::{assist_gain, pressure_step, valve_logic, ContactDetector, MuscleState};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    /// Walker at rest past the target and the walk finished.
    Complete,
    /// Stopped by command and held until the time cap.
    Halted,
    /// Time cap reached before completion.
    Incomplete,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TelemetryRow {
    pub tick: u64,
    pub t: f64,
    pub region: Region,
    /// Velocity-law torque command [N·m].
    pub tau_cmd: f64,
    pub velocity: f64,
    pub position: f64,
    /// [MPa]
    pub p_muscle: f64,
    pub f_left: f64,
    pub f_right: f64,
    pub valve: bool,
    /// Torque actually applied by the actuators [N·m].
    pub tau_applied: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum RunEvent {
    RegionTransition {
        tick: u64,
        t: f64,
        from: Region,
        to: Region,
    },
    GaitStart {
        tick: u64,
        t: f64,
    },
    GaitEnd {
        tick: u64,
        t: f64,
        steps: usize,
    },
    Valve {
        tick: u64,
        t: f64,
        open: bool,
    },
    Stop {
        tick: u64,
        t: f64,
    },
    BrakeEngaged {
        tick: u64,
        t: f64,
        p_ref: f64,
        replaced: bool,
    },
    Disturbance {
        tick: u64,
        t: f64,
        torque: f64,
    },
    TimelineIgnored {
        t: f64,
        command: String,
    },
    RunEnd {
        tick: u64,
        t: f64,
        status: RunStatus,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub trial_id: String,
    pub condition: Condition,
    pub seed: u64,
    pub status: RunStatus,
    pub telemetry: Vec<TelemetryRow>,
    pub events: Vec<RunEvent>,
    pub left: FootForceTrace,
    pub right: FootForceTrace,
    pub truth: GroundTruth,
    /// State after the last tick.
    pub final_state: WalkerState,
    /// Time after the last tick [s].
    pub end_time: f64,
}

/// Runs the scenario with its own timeline.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunRecord> {
    scripted_events(config, &config.timeline)
}

/// Runs the scenario with `timeline` in place of the configured one.
pub fn scripted_events(config: &ScenarioConfig, timeline: &[TimelineEntry]) -> Result<RunRecord> {
    config.validate()?;
    let commands = parse_timeline(timeline)?;
    let streams = SeedStreams::new(config.rng_seed);
    let mut sensor_rng = streams.stream(Stream::VelocitySensor);
    let mut clock = SimClock::new(config.dt)?;
    let dt = config.dt;
    let plant = &config.plant;
    let cp = &config.controller;
    let pwad = &config.pwad;
    let profile = MotionProfile {
        target_velocity: config.target_velocity,
        target_distance: config.target_distance,
    };
    let pwad_on = config.pwad_enabled();
    let brake_period = clock.ticks_for(cp.brake_update_period);

    let mut gait = GaitSynthesizer::new(config.gait_params(), config.target_distance, &streams)?;
    let mut state = WalkerState::default();
    let mut ctrl = VelocityControllerState::new(cp);
    let mut region_entry = 0.0;
    let mut brake: Option<(BrakeControllerState, u64)> = None;
    let mut brake_cmd = 0.0;
    let mut disturbance = 0.0;
    let mut muscle = MuscleState::default();
    let mut detector = ContactDetector::new(pwad.contact);
    let mut gait_ended = false;

    let mut telemetry = Vec::new();
    let mut events = Vec::new();
    let mut left = FootForceTrace::new(Foot::Left);
    let mut right = FootForceTrace::new(Foot::Right);
    let mut next_command = 0;
    let status;

    loop {
        let tick = clock.tick();
        let t = clock.t();

        while let Some(&(at, cmd)) = commands.get(next_command) {
            if at > t {
                break;
            }
            next_command += 1;
            match cmd {
                Command::Stop => {
                    events.push(RunEvent::Stop { tick, t });
                    let engaged = brake_engage(&state, plant);
                    events.push(RunEvent::BrakeEngaged {
                        tick,
                        t,
                        p_ref: engaged.p_ref,
                        replaced: brake.is_some(),
                    });
                    brake = Some((engaged, tick));
                    if ctrl.region != Region::Braked {
                        events.push(RunEvent::RegionTransition {
                            tick,
                            t,
                            from: ctrl.region,
                            to: Region::Braked,
                        });
                        ctrl.region = Region::Braked;
                    }
                    gait.halt();
                }
                Command::Disturb(torque) => {
                    disturbance = torque;
                    events.push(RunEvent::Disturbance { tick, t, torque });
                }
            }
        }

        let measured = measure_velocity(&state, config.velocity_noise_std, &mut sensor_rng);
        if ctrl.region != Region::Braked {
            let next = region_transition(ctrl.region, state.position, measured, cp, &profile);
            if next != ctrl.region {
                events.push(RunEvent::RegionTransition {
                    tick,
                    t,
                    from: ctrl.region,
                    to: next,
                });
                if ctrl.region == Region::PositiveNeutral {
                    gait.start(t);
                    events.push(RunEvent::GaitStart { tick, t });
                }
                ctrl.region = next;
                region_entry = t;
            }
        }

        let tau_applied = match ctrl.region {
            Region::Braked => {
                let (b, engaged_at) = brake.expect("braked region implies an engaged brake");
                if (tick - engaged_at) % brake_period == 0 {
                    let (nb, p) = brake_control_step(b, state.wheel_angle(plant))?;
                    brake = Some((nb, engaged_at));
                    brake_cmd = p;
                }
                position_hold_torque(
                    brake_cmd,
                    state.wheel_angle(plant),
                    state.wheel_rate(plant),
                    cp,
                    plant.torque_limit,
                )
            }
            Region::NegativeNeutral => {
                ctrl = relax_torque(ctrl).0;
                saturate_torque(ctrl.tau_prev, plant)
            }
            region => {
                ctrl.v_ref = region_setpoint(region, t - region_entry, cp, &profile);
                ctrl = velocity_control_step(ctrl, measured).0;
                saturate_torque(ctrl.tau_prev, plant)
            }
        };

        let (f_left, f_right) = gait.tick(t);
        let pressure = muscle.pressure;
        let gain = if pwad_on {
            let contact = detector.update(f_left, dt);
            let valve = valve_logic(contact);
            if valve.is_open() != muscle.valve_open {
                events.push(RunEvent::Valve {
                    tick,
                    t,
                    open: valve.is_open(),
                });
            }
            muscle = pressure_step(muscle, valve, dt, pwad);
            pwad.assist_override
                .unwrap_or_else(|| assist_gain(&muscle, pwad))
        } else {
            0.0
        };
        gait.record_assist(t, gain);
        if gait.finished() && !gait_ended {
            gait_ended = true;
            events.push(RunEvent::GaitEnd {
                tick,
                t,
                steps: gait.finish().step_count(),
            });
        }

        telemetry.push(TelemetryRow {
            tick,
            t,
            region: ctrl.region,
            tau_cmd: ctrl.tau_prev,
            velocity: state.velocity,
            position: state.position,
            p_muscle: pressure,
            f_left,
            f_right,
            valve: muscle.valve_open,
            tau_applied,
        });
        left.push(t, f_left);
        right.push(t, f_right);

        let push = if ctrl.region == Region::PositiveNeutral && t < config.push_duration {
            config.push_force
        } else {
            0.0
        };
        let external = push + plant.torque_to_force(disturbance);
        state = plant_step(state, tau_applied, external, dt, plant)?;
        clock.advance();

        let walker_done = ctrl.region == Region::NegativeNeutral
            && state.velocity.abs() < cp.stop_velocity
            && state.position >= config.target_distance;
        if walker_done && gait.finished() {
            status = RunStatus::Complete;
            break;
        }
        if clock.t() >= config.time_cap {
            status = if brake.is_some() {
                RunStatus::Halted
            } else {
                RunStatus::Incomplete
            };
            break;
        }
    }

    for (i, e) in timeline.iter().enumerate().skip(next_command) {
        log::debug!("timeline entry {i} at {} s ignored after run end", e.t);
        events.push(RunEvent::TimelineIgnored {
            t: e.t,
            command: e.command.clone(),
        });
    }
    let end_time = clock.t();
    events.push(RunEvent::RunEnd {
        tick: clock.tick(),
        t: end_time,
        status,
    });
    if status == RunStatus::Incomplete {
        log::warn!(
            "run `{}` hit the {} s time cap",
            config.trial_id,
            config.time_cap
        );
    }
    Ok(RunRecord {
        trial_id: config.trial_id.clone(),
        condition: config.condition,
        seed: config.rng_seed,
        status,
        telemetry,
        events,
        left,
        right,
        truth: gait.finish(),
        final_state: state,
        end_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    fn config() -> ScenarioConfig {
        ScenarioConfig::default()
    }

    #[test]
    fn default_run_completes_at_target() {
        let r = run_scenario(&config()).unwrap();
        assert_eq!(r.status, RunStatus::Complete);
        let x = r.final_state.position;
        assert!((8.0..=8.1).contains(&x), "final position {x}");
        assert_eq!(
            r.telemetry.len() as u64,
            r.telemetry.last().unwrap().tick + 1
        );
    }

    #[test]
    fn telemetry_is_ordered_and_bounded() {
        let r = run_scenario(&ScenarioConfig::for_condition(Condition::B, "b", 3)).unwrap();
        for w in r.telemetry.windows(2) {
            assert!(w[1].t > w[0].t);
            assert_eq!(w[1].tick, w[0].tick + 1);
        }
        for row in &r.telemetry {
            assert!(row.tau_applied.abs() <= 1.2);
            assert!((0.0..=0.3).contains(&row.p_muscle));
        }
    }

    #[test]
    fn regions_walk_the_chain_forward() {
        let r = run_scenario(&config()).unwrap();
        let mut seen = vec![Region::PositiveNeutral];
        for row in &r.telemetry {
            if *seen.last().unwrap() != row.region {
                assert!(seen.last().unwrap().can_transition_to(row.region));
                seen.push(row.region);
            }
        }
        assert_eq!(seen, Region::CHAIN.to_vec());
    }

    #[test]
    fn condition_a_never_pressurizes() {
        let r = run_scenario(&config()).unwrap();
        assert!(r
            .telemetry
            .iter()
            .all(|row| row.p_muscle == 0.0 && !row.valve));
    }

    #[test]
    fn valve_only_open_with_contact() {
        let c = ScenarioConfig::for_condition(Condition::B, "b", 5);
        let r = run_scenario(&c).unwrap();
        let mut det = ContactDetector::new(c.pwad.contact);
        for row in &r.telemetry {
            let contact = det.update(row.f_left, c.dt);
            assert_eq!(row.valve, contact);
        }
    }

    #[test]
    fn zero_distance_is_a_config_error() {
        let c = ScenarioConfig {
            target_distance: 0.0,
            ..config()
        };
        assert!(matches!(run_scenario(&c), Err(Error::Config { .. })));
    }

    #[test]
    fn empty_timeline_matches_plain_run() {
        let a = run_scenario(&config()).unwrap();
        let b = scripted_events(&config(), &[]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stop_engages_brake_on_first_tick_at_or_after() {
        let c = ScenarioConfig {
            time_cap: 20.0,
            ..config()
        };
        let r = scripted_events(&c, &[TimelineEntry::stop(5.0)]).unwrap();
        let first = r
            .telemetry
            .iter()
            .find(|row| row.region == Region::Braked)
            .unwrap();
        assert!(first.t >= 5.0 && first.t - 5.0 < c.dt);
        assert_eq!(r.status, RunStatus::Halted);
        assert!(r.final_state.velocity.abs() < 0.01);
        assert!(r.truth.halted);
    }

    #[test]
    fn late_timeline_entries_are_ignored_and_logged() {
        let r = scripted_events(&config(), &[TimelineEntry::stop(500.0)]).unwrap();
        assert!(r
            .events
            .iter()
            .any(|e| matches!(e, RunEvent::TimelineIgnored { command, .. } if command == "STOP")));
        assert_eq!(r.status, RunStatus::Complete);
    }

    #[test]
    fn tight_cap_is_incomplete_not_an_error() {
        let c = ScenarioConfig {
            time_cap: 3.0,
            ..config()
        };
        let r = run_scenario(&c).unwrap();
        assert_eq!(r.status, RunStatus::Incomplete);
    }

    #[test]
    fn same_seed_same_record() {
        let c = ScenarioConfig::for_condition(Condition::B, "b", 77);
        assert_eq!(run_scenario(&c).unwrap(), run_scenario(&c).unwrap());
    }
}

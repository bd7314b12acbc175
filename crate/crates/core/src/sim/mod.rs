//! Simulation clock, seeded streams, scenario configuration and the trial
//! runner.

pub mod clock;
pub mod config;
pub mod rng;
pub mod run;

pub use clock::SimClock;
pub use config::{check_schema_version, parse_timeline, Command, ScenarioConfig, TimelineEntry};
pub use rng::{SeedStreams, Stream};
pub use run::{run_scenario, scripted_events, RunEvent, RunRecord, RunStatus, TelemetryRow};

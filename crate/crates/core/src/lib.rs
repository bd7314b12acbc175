//! Deterministic simulator and analysis toolkit for a robotic walker paired
//! with a pneumatic walking-assist device.
//!
//! The crate is organised bottom-up:
//!
//! - [`plant`]: one-dimensional walker dynamics.
//! - [`controller`]: incremental-torque velocity control across the five
//!   motion regions, plus the position-hold brake.
//! - [`pwad`]: foot-contact detection, valve logic and muscle pressure.
//! - [`gait`]: plantar-force trace synthesis and the gait-feature pipeline.
//! - [`stats`]: Shapiro-Wilk, two-sample t-tests and condition comparison.
//! - [`sim`]: clock, seeded streams and the scenario runner that wires the
//!   pieces together.
//! - [`io`], [`plot`], [`batch`]: file formats, SVG figures and batch runs.

pub mod batch;
pub mod controller;
pub mod error;
pub mod gait;
pub mod io;
pub mod plant;
pub mod plot;
pub mod pwad;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};

/// Version written into every JSON artifact and required of every JSON input.
pub const SCHEMA_VERSION: &str = "1.0";

/// Major component of [`SCHEMA_VERSION`]; readers reject any other major.
pub const SCHEMA_MAJOR: u32 = 1;

//! Fixed-step simulation clock.

use crate::{Error, Result};

/// Fixed-step clock. Time is always derived from the integer tick so that it
/// never accumulates rounding drift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimClock {
    dt: f64,
    tick: u64,
}

impl SimClock {
    pub fn new(dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::config("dt", "must be finite and > 0"));
        }
        Ok(Self { dt, tick: 0 })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    /// Current time in seconds, `tick * dt`.
    pub fn t(&self) -> f64 {
        self.time_at(self.tick)
    }

    pub fn time_at(&self, tick: u64) -> f64 {
        tick as f64 * self.dt
    }

    pub fn advance(&mut self) {
        self.tick += 1;
    }

    /// Number of whole ticks covering `seconds`, at least one.
    pub fn ticks_for(&self, seconds: f64) -> u64 {
        ((seconds / self.dt).round() as u64).max(1)
    }
}

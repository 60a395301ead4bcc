//! Integer picosecond timestamps.
//!
//! Every timestamp and duration inside the simulator is an integer number of
//! picoseconds. Configuration and reports use seconds; conversion happens at
//! the boundary.

use std::fmt;
use std::ops::{Add, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

const PS_PER_SECOND: f64 = 1e12;

/// A non-negative instant or duration in picoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Time(pub u64);

impl Time {
    pub const ZERO: Time = Time(0);
    /// Smallest representable positive duration.
    pub const TICK: Time = Time(1);
    pub const MAX: Time = Time(u64::MAX);

    pub const fn from_ps(ps: u64) -> Self {
        Time(ps)
    }

    pub const fn from_ns(ns: u64) -> Self {
        Time(ns * 1_000)
    }

    pub const fn from_us(us: u64) -> Self {
        Time(us * 1_000_000)
    }

    /// Converts seconds to picoseconds, rounding to the nearest tick.
    pub fn try_from_secs(secs: f64) -> Result<Self, Error> {
        if !secs.is_finite() {
            return Err(Error::invalid("time", format!("non-finite value {secs}")));
        }
        if secs < 0.0 {
            return Err(Error::NegativeTime(secs));
        }
        let ps = (secs * PS_PER_SECOND).round();
        if ps >= u64::MAX as f64 {
            return Err(Error::invalid("time", format!("{secs} s overflows the picosecond clock")));
        }
        Ok(Time(ps as u64))
    }

    /// Like [`Time::try_from_secs`] but for values already known to be valid.
    ///
    /// Panics on negative or non-finite input.
    pub fn from_secs(secs: f64) -> Self {
        Self::try_from_secs(secs).expect("valid duration in seconds")
    }

    pub fn as_ps(self) -> u64 {
        self.0
    }

    pub fn as_secs(self) -> f64 {
        self.0 as f64 / PS_PER_SECOND
    }

    pub fn saturating_add(self, other: Time) -> Time {
        Time(self.0.saturating_add(other.0))
    }

    pub fn saturating_sub(self, other: Time) -> Time {
        Time(self.0.saturating_sub(other.0))
    }
}

impl Add for Time {
    type Output = Time;

    fn add(self, rhs: Time) -> Time {
        Time(self.0 + rhs.0)
    }
}

impl Sub for Time {
    type Output = Time;

    fn sub(self, rhs: Time) -> Time {
        Time(self.0 - rhs.0)
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} s", self.as_secs())
    }
}

// Serialized as seconds so that config files stay in SI units.
impl Serialize for Time {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.as_secs())
    }
}

impl<'de> Deserialize<'de> for Time {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let secs = f64::deserialize(deserializer)?;
        Time::try_from_secs(secs).map_err(serde::de::Error::custom)
    }
}

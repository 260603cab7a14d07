//! Exact fixed-point simulation time.
//!
//! All times and durations are expressed in units of the post-GST message
//! delay bound (δ ≡ 1). Internally a value is an integer number of ticks, so
//! event ordering never depends on floating-point rounding.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ParseError;

/// Number of ticks in one time unit.
pub const TICKS_PER_UNIT: u64 = 1_000_000;

const FRACTION_DIGITS: usize = 6;

/// A non-negative point in time or a duration, in δ units.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Time(u64);

impl Time {
    pub const ZERO: Time = Time(0);
    pub const MAX: Time = Time(u64::MAX);

    pub const fn from_ticks(ticks: u64) -> Self {
        Time(ticks)
    }

    /// Whole number of time units.
    pub const fn units(units: u64) -> Self {
        Time(units * TICKS_PER_UNIT)
    }

    /// `num / den` units, exact when the result is a whole number of ticks.
    pub fn ratio(num: u64, den: u64) -> Self {
        assert!(den > 0, "zero denominator");
        let ticks = (num as u128 * TICKS_PER_UNIT as u128) / den as u128;
        Time(u64::try_from(ticks).expect("time overflow"))
    }

    pub const fn ticks(self) -> u64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / TICKS_PER_UNIT as f64
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn checked_add(self, rhs: Time) -> Option<Time> {
        self.0.checked_add(rhs.0).map(Time)
    }

    pub fn checked_sub(self, rhs: Time) -> Option<Time> {
        self.0.checked_sub(rhs.0).map(Time)
    }

    pub fn checked_mul(self, k: u64) -> Option<Time> {
        self.0.checked_mul(k).map(Time)
    }

    pub fn saturating_sub(self, rhs: Time) -> Time {
        Time(self.0.saturating_sub(rhs.0))
    }
}

impl Add for Time {
    type Output = Time;
    fn add(self, rhs: Time) -> Time {
        self.checked_add(rhs).expect("time overflow")
    }
}

impl AddAssign for Time {
    fn add_assign(&mut self, rhs: Time) {
        *self = *self + rhs;
    }
}

impl Sub for Time {
    type Output = Time;
    fn sub(self, rhs: Time) -> Time {
        self.checked_sub(rhs).expect("negative duration")
    }
}

impl Mul<u64> for Time {
    type Output = Time;
    fn mul(self, k: u64) -> Time {
        self.checked_mul(k).expect("time overflow")
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let whole = self.0 / TICKS_PER_UNIT;
        let frac = self.0 % TICKS_PER_UNIT;
        if frac == 0 {
            return write!(f, "{whole}");
        }
        let digits = format!("{frac:0width$}", width = FRACTION_DIGITS);
        write!(f, "{whole}.{}", digits.trim_end_matches('0'))
    }
}

impl FromStr for Time {
    type Err = ParseError;

    /// Parses a non-negative decimal such as `4`, `4.5` or `0.000001`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseError::Time(s.to_string());
        let s = s.trim();
        let (whole, frac) = match s.split_once('.') {
            Some((w, f)) => (w, f),
            None => (s, ""),
        };
        if whole.is_empty() && frac.is_empty() {
            return Err(bad());
        }
        if !whole.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        if frac.len() > FRACTION_DIGITS {
            return Err(bad());
        }
        let whole: u64 = if whole.is_empty() { 0 } else { whole.parse().map_err(|_| bad())? };
        let mut frac_ticks: u64 = 0;
        if !frac.is_empty() {
            let padded = format!("{frac:0<width$}", width = FRACTION_DIGITS);
            frac_ticks = padded.parse().map_err(|_| bad())?;
        }
        whole
            .checked_mul(TICKS_PER_UNIT)
            .and_then(|t| t.checked_add(frac_ticks))
            .map(Time)
            .ok_or_else(bad)
    }
}

impl Serialize for Time {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Time {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

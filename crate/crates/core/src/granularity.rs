//! Time granularities and the bucketing rule shared by discretization and
//! time-based iteration.
//!
//! Real-time granularities carry a fixed tick length in seconds. Months are
//! 30 days and years 365 days, so bucketing never depends on calendar data.
//! [`TimeGranularity::EventOrdered`] only preserves relative order and is
//! rejected by every operation that does time arithmetic.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::Timestamp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TimeGranularity {
    EventOrdered,
    Second,
    Minute,
    Hour,
    Day,
    Week,
    Month,
    Year,
}

impl TimeGranularity {
    pub const REAL_TIME: [TimeGranularity; 7] = [
        TimeGranularity::Second,
        TimeGranularity::Minute,
        TimeGranularity::Hour,
        TimeGranularity::Day,
        TimeGranularity::Week,
        TimeGranularity::Month,
        TimeGranularity::Year,
    ];

    /// Tick length in seconds, `None` for the event-ordered granularity.
    pub const fn seconds(self) -> Option<u64> {
        match self {
            TimeGranularity::EventOrdered => None,
            TimeGranularity::Second => Some(1),
            TimeGranularity::Minute => Some(60),
            TimeGranularity::Hour => Some(3_600),
            TimeGranularity::Day => Some(86_400),
            TimeGranularity::Week => Some(604_800),
            TimeGranularity::Month => Some(30 * 86_400),
            TimeGranularity::Year => Some(365 * 86_400),
        }
    }

    pub fn is_event_ordered(self) -> bool {
        self == TimeGranularity::EventOrdered
    }

    pub(crate) fn require_real_time(self) -> Result<u64> {
        self.seconds().ok_or(Error::ExcludedGranularity(self))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TimeGranularity::EventOrdered => "event",
            TimeGranularity::Second => "second",
            TimeGranularity::Minute => "minute",
            TimeGranularity::Hour => "hour",
            TimeGranularity::Day => "day",
            TimeGranularity::Week => "week",
            TimeGranularity::Month => "month",
            TimeGranularity::Year => "year",
        }
    }
}

impl fmt::Display for TimeGranularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TimeGranularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "event" | "event_ordered" | "eventordered" | "r" => TimeGranularity::EventOrdered,
            "second" | "s" => TimeGranularity::Second,
            "minute" | "m" => TimeGranularity::Minute,
            "hour" | "h" => TimeGranularity::Hour,
            "day" | "d" => TimeGranularity::Day,
            "week" | "w" => TimeGranularity::Week,
            "month" => TimeGranularity::Month,
            "year" | "y" => TimeGranularity::Year,
            other => return Err(Error::Validation(format!("unknown granularity `{other}`"))),
        })
    }
}

/// Orders two real-time granularities by tick length: `Less` means `a` is
/// finer than `b`.
pub fn compare_granularity(a: TimeGranularity, b: TimeGranularity) -> Result<Ordering> {
    let a = a.require_real_time()?;
    let b = b.require_real_time()?;
    Ok(a.cmp(&b))
}

/// Ratio between a coarse and a native tick, kept as an exact fraction
/// `coarse_secs / native_secs` since e.g. a year is not a whole number of weeks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TickRatio {
    num: u64,
    den: u64,
}

impl TickRatio {
    pub fn new(native: TimeGranularity, coarse: TimeGranularity) -> Result<Self> {
        let native_secs = native.require_real_time()?;
        let coarse_secs = coarse.require_real_time()?;
        if coarse_secs < native_secs {
            return Err(Error::GranularityOrder { native, coarse });
        }
        let g = gcd(coarse_secs, native_secs);
        Ok(TickRatio {
            num: coarse_secs / g,
            den: native_secs / g,
        })
    }

    /// Number of native ticks in one coarse tick, if it is a whole number.
    pub fn whole_ticks(self) -> Option<u64> {
        (self.den == 1).then_some(self.num)
    }

    /// Bucket of a non-negative offset (in native ticks) from the anchor.
    #[inline]
    pub fn bucket(self, offset: u64) -> u64 {
        if self.den == 1 {
            offset / self.num
        } else {
            ((offset as u128 * self.den as u128) / self.num as u128) as u64
        }
    }

    /// First native offset that falls into bucket `k`.
    pub fn bucket_start(self, k: u64) -> u64 {
        let n = k as u128 * self.num as u128;
        n.div_ceil(self.den as u128) as u64
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `floor((t - anchor) / ticks(coarse, native))`.
pub fn bucket_of(
    t: Timestamp,
    anchor: Timestamp,
    native: TimeGranularity,
    coarse: TimeGranularity,
) -> Result<u64> {
    let ratio = TickRatio::new(native, coarse)?;
    if t < anchor {
        return Err(Error::NegativeOffset { t, anchor });
    }
    Ok(ratio.bucket((t - anchor) as u64))
}

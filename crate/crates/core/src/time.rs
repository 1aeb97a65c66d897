//! Fixed-point simulation time.
//!
//! All event timestamps live on a grid of 0.001 abstract time units. Delays
//! are computed in `f64` and quantized once, when they enter the event
//! calendar; from then on every addition and comparison is exact integer
//! arithmetic, so a run replayed with the same seed produces bit-identical
//! timestamps on every platform.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

/// Sub-units per abstract time unit.
pub const SUBUNITS: i64 = 1000;

/// A point in (or span of) simulation time, stored as a signed count of
/// 0.001-unit steps. Spans may be negative (e.g. a missed time margin).
#[derive(Copy, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Time(i64);

impl Time {
    pub const ZERO: Time = Time(0);
    /// One whole time unit, the broker's scheduling cadence.
    pub const TICK: Time = Time(SUBUNITS);

    /// Whole time units, exactly.
    pub const fn from_units(units: i64) -> Time {
        Time(units * SUBUNITS)
    }

    /// Raw sub-unit count.
    pub const fn from_subunits(subunits: i64) -> Time {
        Time(subunits)
    }

    /// Quantize a real-valued duration to the grid (round half away from zero).
    pub fn from_f64(units: f64) -> Time {
        Time((units * SUBUNITS as f64).round() as i64)
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / SUBUNITS as f64
    }

    pub const fn subunits(self) -> i64 {
        self.0
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    pub fn max(self, other: Time) -> Time {
        Time(self.0.max(other.0))
    }

    pub fn min(self, other: Time) -> Time {
        Time(self.0.min(other.0))
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

impl AddAssign for Time {
    fn add_assign(&mut self, rhs: Time) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Time {
    fn sub_assign(&mut self, rhs: Time) {
        self.0 -= rhs.0;
    }
}

impl Neg for Time {
    type Output = Time;
    fn neg(self) -> Time {
        Time(-self.0)
    }
}

impl Mul<i64> for Time {
    type Output = Time;
    fn mul(self, rhs: i64) -> Time {
        Time(self.0 * rhs)
    }
}

impl Sum for Time {
    fn sum<I: Iterator<Item = Time>>(iter: I) -> Time {
        Time(iter.map(|t| t.0).sum())
    }
}

impl fmt::Display for Time {
    /// Canonical form with all three fractional digits, e.g. `12.300`,
    /// `-0.002`. Used verbatim in traces and CSV exports.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{}{}.{:03}", sign, abs / SUBUNITS as u64, abs % SUBUNITS as u64)
    }
}

impl fmt::Debug for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl serde::Serialize for Time {
    /// Serialized as the canonical decimal string so fixed-point exactness
    /// survives any text format.
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Time {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Time, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

impl FromStr for Time {
    type Err = String;

    /// Parses the canonical decimal form exactly (no float round-trip), up to
    /// three fractional digits.
    fn from_str(s: &str) -> Result<Time, String> {
        let (sign, body) = match s.strip_prefix('-') {
            Some(rest) => (-1, rest),
            None => (1, s),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if frac_part.len() > 3 {
            return Err(format!("time `{s}` exceeds 0.001 resolution"));
        }
        let int: i64 = int_part
            .parse()
            .map_err(|_| format!("bad time literal `{s}`"))?;
        let mut frac: i64 = 0;
        if !frac_part.is_empty() {
            frac = frac_part
                .parse()
                .map_err(|_| format!("bad time literal `{s}`"))?;
            for _ in frac_part.len()..3 {
                frac *= 10;
            }
        }
        Ok(Time(sign * (int * SUBUNITS + frac)))
    }
}

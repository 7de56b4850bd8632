//! Exact finite decimals for the head/tail thresholds.
//!
//! `alpha` and the rareness thresholds are compared against ratios of
//! integer counts. Holding them as `num / 10^k` keeps `count <= alpha * mean`
//! an integer comparison, so `1.2` means exactly twelve tenths on every
//! platform.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

const MAX_FRACTION_DIGITS: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Decimal {
    // `den` is always a power of ten (so Display is exact) and `num` carries
    // no trailing zero digit beyond it, which makes derived equality exact.
    num: u64,
    den: u64,
}

impl Decimal {
    pub fn from_parts(num: u64, fraction_digits: u32) -> Result<Self, Error> {
        if fraction_digits > MAX_FRACTION_DIGITS {
            return Err(Error::Config(format!(
                "at most {MAX_FRACTION_DIGITS} fractional digits are supported"
            )));
        }
        Ok(Decimal {
            num,
            den: 10u64.pow(fraction_digits),
        }
        .canonical())
    }

    fn canonical(mut self) -> Self {
        while self.den > 1 && self.num.is_multiple_of(10) {
            self.num /= 10;
            self.den /= 10;
        }
        self
    }

    /// Converts through the shortest round-trip representation, so
    /// `Decimal::from_f64(1.2)` is exactly 12/10.
    pub fn from_f64(value: f64) -> Result<Self, Error> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::Config(format!(
                "expected a finite non-negative number, got {value}"
            )));
        }
        format!("{value}").parse()
    }

    pub fn ratio(&self) -> Ratio<u64> {
        Ratio::new(self.num, self.den)
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    /// Compares `lhs_num / lhs_den` against `self * rhs`, all in integers.
    ///
    /// Used as `count * d` vs `alpha * total`, i.e. `count` vs `alpha * mu`.
    pub fn cmp_scaled(&self, lhs: u64, rhs: u64) -> Ordering {
        let left = lhs as u128 * self.den as u128;
        let right = self.num as u128 * rhs as u128;
        left.cmp(&right)
    }
}

impl PartialOrd for Decimal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Decimal {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl FromStr for Decimal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || Error::Config(format!("`{s}` is not a non-negative decimal number"));
        let (int_part, frac_part) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(bad());
        }
        let frac_part = frac_part.trim_end_matches('0');
        let digits = frac_part.len() as u32;
        if digits > MAX_FRACTION_DIGITS {
            return Err(Error::Config(format!(
                "`{s}` has more than {MAX_FRACTION_DIGITS} fractional digits"
            )));
        }
        let int_value: u64 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(|_| bad())?
        };
        let frac_value: u64 = if frac_part.is_empty() {
            0
        } else {
            frac_part.parse().map_err(|_| bad())?
        };
        let den = 10u64.pow(digits);
        let num = int_value
            .checked_mul(den)
            .and_then(|v| v.checked_add(frac_value))
            .ok_or_else(bad)?;
        Ok(Decimal { num, den })
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let int = self.num / self.den;
        let frac = self.num % self.den;
        if self.den == 1 {
            return write!(f, "{int}");
        }
        let width = self.den.ilog10() as usize;
        let frac = format!("{frac:0width$}");
        let frac = frac.trim_end_matches('0');
        if frac.is_empty() {
            write!(f, "{int}")
        } else {
            write!(f, "{int}.{frac}")
        }
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        // Shortest f64 repr of a <=12 digit decimal prints back the same digits.
        serializer.serialize_f64(self.to_f64())
    }
}

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = f64::deserialize(deserializer)?;
        Decimal::from_f64(value).map_err(serde::de::Error::custom)
    }
}

//! Numbers with explicit units, as written in scenario files.
//!
//! Quantities keep the unit they were written with so a parsed file
//! serializes back to the same text; conversion to SI happens on use.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use relaysim_core::Seconds;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unit {
    Second,
    Minute,
    Hour,
    Day,
    /// Julian year.
    Year,
    Meter,
    Kilometer,
    AstronomicalUnit,
    LightSecond,
    LightMinute,
    LightYear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Time,
    Length,
}

const UNITS: &[(&str, Unit)] = &[
    ("s", Unit::Second),
    ("min", Unit::Minute),
    ("h", Unit::Hour),
    ("d", Unit::Day),
    ("yr", Unit::Year),
    ("m", Unit::Meter),
    ("km", Unit::Kilometer),
    ("au", Unit::AstronomicalUnit),
    ("ls", Unit::LightSecond),
    ("lmin", Unit::LightMinute),
    ("lyr", Unit::LightYear),
];

const AU_METERS: f64 = 149_597_870_700.0;
const YEAR_SECONDS: f64 = 365.25 * 86_400.0;

impl Unit {
    pub fn symbol(self) -> &'static str {
        UNITS.iter().find(|(_, u)| *u == self).map(|(s, _)| *s).expect("every unit listed")
    }

    pub fn dimension(self) -> Dimension {
        match self {
            Unit::Second | Unit::Minute | Unit::Hour | Unit::Day | Unit::Year => Dimension::Time,
            _ => Dimension::Length,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuantityError {
    #[error("`{0}` is not a number followed by a unit (s, min, h, d, yr, m, km, au, ls, lmin, lyr)")]
    Malformed(String),
    #[error("unknown unit `{0}`")]
    UnknownUnit(String),
    #[error("`{0}` is a {1}, expected a {2}")]
    WrongDimension(String, &'static str, &'static str),
}

/// A value with its unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Quantity {
    pub value: f64,
    pub unit: Unit,
}

impl Quantity {
    pub fn new(value: f64, unit: Unit) -> Self {
        Self { value, unit }
    }

    pub fn seconds(value: f64) -> Self {
        Self::new(value, Unit::Second)
    }

    /// Duration in seconds; lengths are rejected.
    pub fn as_seconds(&self) -> Result<Seconds, QuantityError> {
        match self.unit {
            Unit::Second => Ok(self.value),
            Unit::Minute => Ok(self.value * 60.0),
            Unit::Hour => Ok(self.value * 3600.0),
            Unit::Day => Ok(self.value * 86_400.0),
            Unit::Year => Ok(self.value * YEAR_SECONDS),
            _ => Err(QuantityError::WrongDimension(self.to_string(), "length", "duration")),
        }
    }

    /// Length in meters; light-distances use `c`. Durations are rejected.
    pub fn as_meters(&self, c: f64) -> Result<f64, QuantityError> {
        match self.unit {
            Unit::Meter => Ok(self.value),
            Unit::Kilometer => Ok(self.value * 1e3),
            Unit::AstronomicalUnit => Ok(self.value * AU_METERS),
            Unit::LightSecond => Ok(self.value * c),
            Unit::LightMinute => Ok(self.value * 60.0 * c),
            Unit::LightYear => Ok(self.value * YEAR_SECONDS * c),
            _ => Err(QuantityError::WrongDimension(self.to_string(), "duration", "length")),
        }
    }

    /// Light-travel time: durations pass through, lengths are divided by `c`.
    pub fn as_light_time(&self, c: f64) -> Seconds {
        match self.unit {
            Unit::LightSecond => self.value,
            Unit::LightMinute => self.value * 60.0,
            Unit::LightYear => self.value * YEAR_SECONDS,
            u if u.dimension() == Dimension::Time => self.as_seconds().expect("time unit"),
            _ => self.as_meters(c).expect("length unit") / c,
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.value, self.unit.symbol())
    }
}

impl FromStr for Quantity {
    type Err = QuantityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim();
        let split = trimmed
            .char_indices()
            .find(|&(i, ch)| ch.is_ascii_alphabetic() && !is_exponent(trimmed, i))
            .map(|(i, _)| i)
            .ok_or_else(|| QuantityError::Malformed(s.to_string()))?;
        let (number, unit) = trimmed.split_at(split);
        let value: f64 = number
            .trim()
            .parse()
            .map_err(|_| QuantityError::Malformed(s.to_string()))?;
        if !value.is_finite() {
            return Err(QuantityError::Malformed(s.to_string()));
        }
        let unit = UNITS
            .iter()
            .find(|(sym, _)| *sym == unit.trim())
            .map(|(_, u)| *u)
            .ok_or_else(|| QuantityError::UnknownUnit(unit.trim().to_string()))?;
        Ok(Quantity { value, unit })
    }
}

/// An `e`/`E` that belongs to the number, as in `1.5e11 m`.
fn is_exponent(s: &str, i: usize) -> bool {
    let bytes = s.as_bytes();
    if !matches!(bytes[i], b'e' | b'E') || i == 0 || !bytes[i - 1].is_ascii_digit() && bytes[i - 1] != b'.' {
        return false;
    }
    match bytes.get(i + 1) {
        Some(b'+' | b'-') => bytes.get(i + 2).is_some_and(u8::is_ascii_digit),
        Some(b) => b.is_ascii_digit(),
        None => false,
    }
}

impl TryFrom<String> for Quantity {
    type Error = QuantityError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Quantity> for String {
    fn from(q: Quantity) -> String {
        q.to_string()
    }
}

/// Parses a command-line duration: a quantity, or a bare number of seconds.
pub fn parse_duration_arg(s: &str) -> Result<Seconds, String> {
    if let Ok(v) = s.trim().parse::<f64>() {
        return Ok(v);
    }
    let q: Quantity = s.parse().map_err(|e: QuantityError| e.to_string())?;
    q.as_seconds().map_err(|e| e.to_string())
}

/// A speed written as a fraction of light (`0.98c`) or in `m/s` / `km/s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Speed {
    text: String,
    kind: SpeedKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SpeedKind {
    FractionOfC(f64),
    MetersPerSecond(f64),
}

impl Speed {
    pub fn meters_per_second(&self, c: f64) -> f64 {
        match self.kind {
            SpeedKind::FractionOfC(beta) => beta * c,
            SpeedKind::MetersPerSecond(v) => v,
        }
    }
}

impl FromStr for Speed {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let bad = || format!("`{s}` is not a speed (use e.g. `0.98c`, `3e4 m/s` or `30 km/s`)");
        let kind = if let Some(beta) = t.strip_suffix('c') {
            SpeedKind::FractionOfC(beta.trim().parse().map_err(|_| bad())?)
        } else if let Some(v) = t.strip_suffix("km/s") {
            SpeedKind::MetersPerSecond(v.trim().parse::<f64>().map_err(|_| bad())? * 1e3)
        } else if let Some(v) = t.strip_suffix("m/s") {
            SpeedKind::MetersPerSecond(v.trim().parse().map_err(|_| bad())?)
        } else {
            SpeedKind::MetersPerSecond(t.parse().map_err(|_| bad())?)
        };
        let finite = match kind {
            SpeedKind::FractionOfC(x) | SpeedKind::MetersPerSecond(x) => x.is_finite(),
        };
        if !finite {
            return Err(bad());
        }
        Ok(Speed { text: t.to_string(), kind })
    }
}

impl TryFrom<String> for Speed {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Speed> for String {
    fn from(s: Speed) -> String {
        s.text
    }
}

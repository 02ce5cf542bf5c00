//! Angles given either in radians or in units of pi (`0.5pi`, `pi`, `-2.5*pi`).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An angle in radians. Parses `1.2`, `0.5pi`, `0.5*pi`, `pi`, `-pi`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Angle(pub f64);

impl Angle {
    pub fn radians(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("cannot parse angle {0:?}; use radians or a multiple of pi such as 0.5pi")]
pub struct AngleParseError(String);

impl FromStr for Angle {
    type Err = AngleParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || AngleParseError(s.to_string());
        let t = s.trim();
        let Some(coef) = t.strip_suffix("pi") else {
            return t.parse::<f64>().map(Angle).map_err(|_| err());
        };
        let coef = coef.trim_end().trim_end_matches('*').trim_end();
        let c = match coef {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().map_err(|_| err())?,
        };
        if !c.is_finite() {
            return Err(err());
        }
        Ok(Angle(c * PI))
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Angle(x)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

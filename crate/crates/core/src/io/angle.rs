use std::f64::consts::PI;

use serde::{de, Deserialize, Deserializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot read {0:?} as an angle (expected radians, \"pi\" or a form like \"2pi/3\")")]
pub struct AngleParseError(pub String);

fn number(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|x| x.is_finite())
}

/// Reads an angle in radians. Besides plain numbers this accepts `pi`
/// multiples and fractions: `pi`, `-pi/4`, `2pi/3`, `3*pi/5`, `0.5pi`.
pub fn parse_angle(text: &str) -> Result<f64, AngleParseError> {
    let err = || AngleParseError(text.to_string());
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(at) = s.find("pi") else {
        return number(&s).ok_or_else(err);
    };
    let (head, tail) = (&s[..at], &s[at + 2..]);
    let head = head.strip_suffix('*').unwrap_or(head);
    let coefficient = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => number(h).ok_or_else(err)?,
    };
    let divisor = match tail {
        "" => 1.0,
        t => {
            let d = t.strip_prefix('/').and_then(number).ok_or_else(err)?;
            if d == 0.0 {
                return Err(err());
            }
            d
        }
    };
    Ok(coefficient * PI / divisor)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawAngle {
    Number(f64),
    Text(String),
}

/// `deserialize_with` adapter accepting a JSON number or an angle string.
pub(crate) fn deserialize_angle<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    match RawAngle::deserialize(d)? {
        RawAngle::Number(x) => Ok(x),
        RawAngle::Text(s) => parse_angle(&s).map_err(de::Error::custom),
    }
}

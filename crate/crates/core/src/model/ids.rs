//! Dotted-decimal identifiers of the value chain.
//!
//! A core value is numbered `N`, its qualities `N.M`, the requirements derived
//! from a quality `N.M.K`, and threats and controls hang off a requirement as
//! `N.M.K-Tj` and `N.M.K-Cj`. Every component is a positive integer written
//! without leading zeros, so the textual form of an id is canonical.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed {expected} id `{text}`")]
pub struct IdError {
    pub expected: &'static str,
    pub text: String,
}

fn component(part: &str) -> Option<u32> {
    if part.is_empty() || !part.bytes().all(|b| b.is_ascii_digit()) || part.starts_with('0') {
        return None;
    }
    part.parse().ok()
}

fn components<const N: usize>(text: &str) -> Option<[u32; N]> {
    let mut out = [0u32; N];
    let mut parts = text.split('.');
    for slot in out.iter_mut() {
        *slot = component(parts.next()?)?;
    }
    parts.next().is_none().then_some(out)
}

/// Parses a positive integer without sign or leading zeros.
pub fn parse_positive(text: &str) -> Option<u32> {
    component(text)
}

/// Id of a value quality, `N.M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QualityId {
    pub core: u32,
    pub index: u32,
}

/// Id of an ethical value requirement, `N.M.K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EvrId {
    pub core: u32,
    pub quality: u32,
    pub index: u32,
}

impl EvrId {
    pub fn quality_id(&self) -> QualityId {
        QualityId {
            core: self.core,
            index: self.quality,
        }
    }
}

/// Id of a threat against a requirement, `N.M.K-Tj`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ThreatId {
    pub evr: EvrId,
    pub index: u32,
}

/// Id of a control mitigating threats of one requirement, `N.M.K-Cj`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ControlId {
    pub evr: EvrId,
    pub index: u32,
}

impl fmt::Display for QualityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.core, self.index)
    }
}

impl fmt::Display for EvrId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}.{}", self.core, self.quality, self.index)
    }
}

impl fmt::Display for ThreatId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-T{}", self.evr, self.index)
    }
}

impl fmt::Display for ControlId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-C{}", self.evr, self.index)
    }
}

impl FromStr for QualityId {
    type Err = IdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let [core, index] = components::<2>(s).ok_or_else(|| IdError {
            expected: "quality",
            text: s.to_string(),
        })?;
        Ok(QualityId { core, index })
    }
}

impl FromStr for EvrId {
    type Err = IdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let [core, quality, index] = components::<3>(s).ok_or_else(|| IdError {
            expected: "requirement",
            text: s.to_string(),
        })?;
        Ok(EvrId {
            core,
            quality,
            index,
        })
    }
}

fn suffixed(s: &str, marker: char, expected: &'static str) -> Result<(EvrId, u32), IdError> {
    let err = || IdError {
        expected,
        text: s.to_string(),
    };
    let (head, tail) = s.split_once('-').ok_or_else(err)?;
    let tail = tail.strip_prefix(marker).ok_or_else(err)?;
    let evr: EvrId = head.parse().map_err(|_| err())?;
    let index = component(tail).ok_or_else(err)?;
    Ok((evr, index))
}

impl FromStr for ThreatId {
    type Err = IdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (evr, index) = suffixed(s, 'T', "threat")?;
        Ok(ThreatId { evr, index })
    }
}

impl FromStr for ControlId {
    type Err = IdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (evr, index) = suffixed(s, 'C', "control")?;
        Ok(ControlId { evr, index })
    }
}

macro_rules! string_serde {
    ($($ty:ty),*) => {$(
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let text = String::deserialize(deserializer)?;
                text.parse().map_err(serde::de::Error::custom)
            }
        }
    )*};
}

string_serde!(QualityId, EvrId, ThreatId, ControlId);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_canonical_forms() {
        let evr: EvrId = "1.1.3".parse().unwrap();
        assert_eq!(evr.quality_id(), "1.1".parse().unwrap());
        let threat: ThreatId = "1.1.2-T1".parse().unwrap();
        assert_eq!(threat.evr, "1.1.2".parse().unwrap());
        assert_eq!(threat.to_string(), "1.1.2-T1");
        let control: ControlId = "12.3.4-C10".parse().unwrap();
        assert_eq!(control.to_string(), "12.3.4-C10");
    }

    #[test]
    fn rejects_malformed_forms() {
        for bad in ["1", "1.", ".1", "1.0", "01.1", "1.1.1.1", "a.b", "1.-1", ""] {
            assert!(bad.parse::<QualityId>().is_err(), "{bad}");
        }
        for bad in [
            "1.1", "1.1.1-C1", "1.1.1-T", "1.1.1-T0", "1.1.1T1", "1.1.1-t1",
        ] {
            assert!(bad.parse::<ThreatId>().is_err(), "{bad}");
        }
        assert!("99999999999.1".parse::<QualityId>().is_err());
    }
}

//! Case labels shared by every pipeline.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum CaseId {
    /// Reversible centers r0..r22.
    R(u8),
    /// Reversible Lotka-Volterra centers rlv0..rlv6.
    Rlv(u8),
    /// Generic Lotka-Volterra centers lv1..lv5.
    Lv(u8),
    /// Codimension-four center with a cubic invariant curve.
    C4,
}

impl CaseId {
    pub fn all_reversible() -> impl Iterator<Item = CaseId> {
        (0..=22).map(CaseId::R)
    }

    pub fn is_valid(&self) -> bool {
        match *self {
            CaseId::R(k) => k <= 22,
            CaseId::Rlv(k) => k <= 6,
            CaseId::Lv(k) => (1..=5).contains(&k),
            CaseId::C4 => true,
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CaseId::R(k) => write!(f, "r{k}"),
            CaseId::Rlv(k) => write!(f, "rlv{k}"),
            CaseId::Lv(k) => write!(f, "lv{k}"),
            CaseId::C4 => write!(f, "c4"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownCase(pub String);

impl fmt::Display for UnknownCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown case '{}'", self.0)
    }
}

impl std::error::Error for UnknownCase {}

impl FromStr for CaseId {
    type Err = UnknownCase;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let l = s.trim().to_ascii_lowercase();
        let parse = |rest: &str| rest.parse::<u8>().ok();
        let id = if l == "c4" {
            Some(CaseId::C4)
        } else if let Some(r) = l.strip_prefix("rlv") {
            parse(r).map(CaseId::Rlv)
        } else if let Some(r) = l.strip_prefix("lv") {
            parse(r).map(CaseId::Lv)
        } else if let Some(r) = l.strip_prefix('r') {
            parse(r).map(CaseId::R)
        } else {
            None
        };
        match id {
            Some(c) if c.is_valid() => Ok(c),
            _ => Err(UnknownCase(s.to_string())),
        }
    }
}

impl From<CaseId> for String {
    fn from(c: CaseId) -> String {
        c.to_string()
    }
}

impl TryFrom<String> for CaseId {
    type Error = UnknownCase;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        for s in ["r0", "r18", "r22", "rlv0", "rlv6", "lv1", "lv5", "c4"] {
            let c: CaseId = s.parse().unwrap();
            assert_eq!(c.to_string(), s);
        }
        assert!("r23".parse::<CaseId>().is_err());
        assert!("lv0".parse::<CaseId>().is_err());
        assert!("x1".parse::<CaseId>().is_err());
    }
}

use std::fmt;

use serde::{Deserialize, Serialize};

/// Prefix reserved for compiler-allocated ancilla wires.
pub const ANCILLA_PREFIX: &str = "_anc";

/// Opaque wire token. Integer and string labels never alias: `0` and `"0"`
/// are distinct wires.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WireLabel {
    Int(i64),
    Name(String),
}

impl WireLabel {
    pub fn ancilla(k: usize) -> Self {
        WireLabel::Name(format!("{ANCILLA_PREFIX}{k}"))
    }

    /// True for labels in the compiler's reserved ancilla namespace.
    pub fn is_reserved(&self) -> bool {
        matches!(self, WireLabel::Name(s) if s.starts_with(ANCILLA_PREFIX))
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            WireLabel::Int(i) => Some(*i),
            WireLabel::Name(_) => None,
        }
    }
}

impl fmt::Display for WireLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WireLabel::Int(i) => write!(f, "{i}"),
            WireLabel::Name(s) => f.write_str(s),
        }
    }
}

impl From<&str> for WireLabel {
    fn from(s: &str) -> Self {
        WireLabel::Name(s.to_owned())
    }
}

impl From<String> for WireLabel {
    fn from(s: String) -> Self {
        WireLabel::Name(s)
    }
}

impl From<&String> for WireLabel {
    fn from(s: &String) -> Self {
        WireLabel::Name(s.clone())
    }
}

impl From<i64> for WireLabel {
    fn from(i: i64) -> Self {
        WireLabel::Int(i)
    }
}

impl From<i32> for WireLabel {
    fn from(i: i32) -> Self {
        WireLabel::Int(i64::from(i))
    }
}

impl From<usize> for WireLabel {
    fn from(i: usize) -> Self {
        WireLabel::Int(i as i64)
    }
}

impl From<&WireLabel> for WireLabel {
    fn from(w: &WireLabel) -> Self {
        w.clone()
    }
}

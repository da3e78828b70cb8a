use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub const DEFAULT_USEPULSES: &str = "Calibration_PulseDefinitions.QubitBosonPulses";

/// Physical motional mode `m{manifold}i{index}`; index 0 is the
/// center-of-mass mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PhysicalMode {
    pub manifold: u32,
    pub index: u32,
}

impl PhysicalMode {
    /// Parses labels of the form `m<digits>i<digits>`.
    pub fn parse(label: &str) -> Option<Self> {
        let rest = label.strip_prefix('m')?;
        let (m, i) = rest.split_once('i')?;
        let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
        if !digits(m) || !digits(i) {
            return None;
        }
        Some(PhysicalMode {
            manifold: m.parse().ok()?,
            index: i.parse().ok()?,
        })
    }

    pub fn is_com(&self) -> bool {
        self.index == 0
    }
}

impl fmt::Display for PhysicalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m{}i{}", self.manifold, self.index)
    }
}

fn default_couplings() -> BTreeMap<String, Vec<[String; 2]>> {
    [(
        "BS".to_string(),
        vec![["m0i1".to_string(), "m1i1".to_string()]],
    )]
    .into_iter()
    .collect()
}

fn yes() -> bool {
    true
}

fn default_pulses() -> String {
    DEFAULT_USEPULSES.to_owned()
}

/// Trapped-ion device description, loadable from JSON.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QscoutDevice {
    pub n_qubits: u32,
    #[serde(default)]
    pub enable_com: bool,
    /// Gate name → allowed (unordered) mode pairs. Gates not listed are
    /// unrestricted.
    #[serde(default = "default_couplings")]
    pub couplings: BTreeMap<String, Vec<[String; 2]>>,
    #[serde(default = "yes")]
    pub optimize: bool,
    #[serde(default = "default_pulses")]
    pub usepulses: String,
}

impl QscoutDevice {
    pub fn new(n_qubits: u32) -> Self {
        QscoutDevice {
            n_qubits,
            enable_com: false,
            couplings: default_couplings(),
            optimize: true,
            usepulses: default_pulses(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Modes usable for allocation: manifold 0 then 1, index ascending.
    pub fn enabled_modes(&self) -> Vec<PhysicalMode> {
        let first = if self.enable_com { 0 } else { 1 };
        (0..2)
            .flat_map(|m| {
                (first..self.n_qubits).map(move |i| PhysicalMode {
                    manifold: m,
                    index: i,
                })
            })
            .collect()
    }

    pub fn exists(&self, m: PhysicalMode) -> bool {
        m.manifold < 2 && m.index < self.n_qubits
    }

    /// True when `gate` may act on the mode pair (in either order).
    pub fn coupling_allowed(&self, gate: &str, a: &str, b: &str) -> bool {
        match self.couplings.get(gate) {
            None => true,
            Some(pairs) => pairs
                .iter()
                .any(|[x, y]| (x == a && y == b) || (x == b && y == a)),
        }
    }
}

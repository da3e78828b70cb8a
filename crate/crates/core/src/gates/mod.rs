//! Gate definitions: symbolic generators plus metadata, no stored matrices.

pub mod generator;
pub mod names;
pub mod ops;
mod standard;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::{Arc, OnceLock};

use indexmap::IndexMap;
use thiserror::Error;

pub use generator::{GenExpr, KronTerm, Prim};
pub use standard::evo_gate;

use crate::ir::{GateInstruction, Param, WireLabel};
use crate::types::WireType;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamKind {
    Angle,
    /// Modulus `r` of a complex amplitude stored as `(r, phi)`.
    Amplitude,
    /// Phase `phi` of a complex amplitude.
    Phase,
    Real,
    AngleVector,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: ParamKind,
}

/// How a gate declares its wire types.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GateClass {
    /// Qubit gate with a Pauli representation: every wire is a qubit.
    Dv,
    /// Qumode-only gate: every wire is a qumode.
    Cv,
    /// Explicit per-wire annotation.
    Hybrid(Vec<WireType>),
    /// No declaration; types come from the decomposition or generator.
    Unannotated,
}

pub type GeneratorFn = Arc<dyn Fn(&[Param]) -> GenExpr + Send + Sync>;
pub type DecompositionFn =
    Arc<dyn Fn(&[Param], &[WireLabel]) -> Vec<GateInstruction> + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixedGate {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    Cnot,
}

#[derive(Clone)]
pub enum GateForm {
    /// `exp(K(params))`.
    Exponential(GeneratorFn),
    Fixed(FixedGate),
    ModeSwap,
}

/// How Adjoint and Pow fold into parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PowerLaw {
    /// `U(p)^s = U(s·p)` on the flagged parameters.
    Scale(Vec<bool>),
    /// `U^k` for integer `k` is the gate named at index `k mod len`; `"I"` is identity.
    Cyclic(&'static [&'static str]),
    /// No parameter folding; handled by rewrite rules.
    None,
}

/// A user-registered decomposition, with a flag telling the rewrite engine
/// whether the produced gates mutually commute.
#[derive(Clone)]
pub struct Decomposition {
    pub build: DecompositionFn,
    pub commuting: bool,
}

pub struct GateDef {
    pub name: String,
    pub arity: usize,
    pub params: Vec<ParamSpec>,
    pub class: GateClass,
    pub form: GateForm,
    pub power: PowerLaw,
    pub decomposition: Option<Decomposition>,
    /// Rewrite rule ids that can consume this gate.
    pub rules: Vec<u32>,
    pub(crate) signature_memo: OnceLock<Result<Vec<WireType>, String>>,
}

impl GateDef {
    pub fn is_exponential(&self) -> bool {
        matches!(self.form, GateForm::Exponential(_))
    }

    /// Generator `K` of an exponential-form gate, slots `0..arity`.
    pub fn generator(&self, params: &[Param]) -> Option<GenExpr> {
        match &self.form {
            GateForm::Exponential(g) => Some(g(params)),
            _ => None,
        }
    }

    /// Signature declared by class or annotation, if any.
    pub fn declared_signature(&self) -> Option<Vec<WireType>> {
        match &self.class {
            GateClass::Dv => Some(vec![WireType::Qubit; self.arity]),
            GateClass::Cv => Some(vec![WireType::Qumode; self.arity]),
            GateClass::Hybrid(t) => Some(t.clone()),
            GateClass::Unannotated => None,
        }
    }

    /// Copy of this definition with its type declaration removed.
    pub fn stripped(&self) -> GateDef {
        GateDef {
            name: self.name.clone(),
            arity: self.arity,
            params: self.params.clone(),
            class: GateClass::Unannotated,
            form: self.form.clone(),
            power: self.power.clone(),
            decomposition: self.decomposition.clone(),
            rules: self.rules.clone(),
            signature_memo: OnceLock::new(),
        }
    }

    pub fn validate_params(&self, params: &[Param]) -> Result<(), String> {
        if params.len() != self.params.len() {
            return Err(format!(
                "{} takes {} parameters, got {}",
                self.name,
                self.params.len(),
                params.len()
            ));
        }
        let mut vec_len = None;
        for (spec, p) in self.params.iter().zip(params) {
            match (spec.kind, p) {
                (ParamKind::AngleVector, Param::Vector(v)) => {
                    if v.iter().any(|x| !x.is_finite()) {
                        return Err(format!("{}: non-finite entry in {}", self.name, spec.name));
                    }
                    match vec_len {
                        Some(n) if n != v.len() => {
                            return Err(format!("{}: angle vectors differ in length", self.name));
                        }
                        _ => vec_len = Some(v.len()),
                    }
                }
                (ParamKind::AngleVector, Param::Real(_)) => {
                    return Err(format!("{}: {} must be a vector", self.name, spec.name));
                }
                (_, Param::Vector(_)) => {
                    return Err(format!("{}: {} must be a scalar", self.name, spec.name))
                }
                (_, Param::Real(x)) if !x.is_finite() => {
                    return Err(format!("{}: {} is not finite", self.name, spec.name));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

impl fmt::Debug for GateDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GateDef")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .field("class", &self.class)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GateError {
    #[error("unknown gate `{name}`{}", suggest(.near))]
    Unknown { name: String, near: Vec<String> },
    #[error("unknown gate set `{0}`")]
    UnknownGateSet(String),
    #[error("gate set file: {0}")]
    GateSetFile(String),
}

fn suggest(near: &[String]) -> String {
    if near.is_empty() {
        String::new()
    } else {
        format!(" (did you mean {}?)", near.join(", "))
    }
}

pub struct Library {
    gates: IndexMap<String, Arc<GateDef>>,
}

impl Library {
    pub fn get(&self, name: &str) -> Option<&Arc<GateDef>> {
        self.gates.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<GateDef>> {
        self.gates.values()
    }
}

pub fn library() -> &'static Library {
    static LIB: OnceLock<Library> = OnceLock::new();
    LIB.get_or_init(|| Library {
        gates: standard::build()
            .into_iter()
            .map(|g| (g.name.clone(), Arc::new(g)))
            .collect(),
    })
}

pub fn lookup(name: &str) -> Result<Arc<GateDef>, GateError> {
    if let Some(g) = library().get(name) {
        return Ok(g.clone());
    }
    let mut near: Vec<(usize, String)> = library()
        .iter()
        .map(|g| {
            (
                edit_distance(&name.to_lowercase(), &g.name.to_lowercase()),
                g.name.clone(),
            )
        })
        .filter(|(d, _)| *d <= 2)
        .collect();
    near.sort();
    Err(GateError::Unknown {
        name: name.to_owned(),
        near: near.into_iter().map(|(_, n)| n).collect(),
    })
}

fn edit_distance(a: &str, b: &str) -> usize {
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.chars().enumerate() {
        let mut cur = vec![i + 1; b.len() + 1];
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != *cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        prev = cur;
    }
    prev[b.len()]
}

/// Gates of the CV table.
pub const CV_GATES: &[&str] = &[
    "D", "R", "F", "Sq", "K", "C", "SNAP", "BS", "ModeSwap", "TMS", "SUM",
];
/// Gates of the hybrid table.
pub const HYBRID_GATES: &[&str] = &[
    "CR", "CP", "CD", "CS", "SQR", "JC", "AJC", "RB", "CBS", "CTMS", "CSUM",
];
pub const DV_GATES: &[&str] = &["H", "X", "Y", "Z", "S", "Sdg", "RX", "RY", "RZ", "CNOT"];

/// Named target gate set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateSet {
    pub name: String,
    pub gates: BTreeSet<String>,
    /// Accept any gate and any modifier (no lowering at all).
    pub accept_all: bool,
}

impl GateSet {
    pub fn contains(&self, gate: &str) -> bool {
        self.accept_all || self.gates.contains(gate)
    }

    pub fn from_names<I: IntoIterator<Item = S>, S: Into<String>>(name: &str, gates: I) -> GateSet {
        GateSet {
            name: name.to_owned(),
            gates: gates.into_iter().map(Into::into).collect(),
            accept_all: false,
        }
    }

    /// Parses `{"name": ..., "gates": [...]}`.
    pub fn from_json(text: &str) -> Result<GateSet, GateError> {
        #[derive(serde::Deserialize)]
        struct Raw {
            name: String,
            gates: Vec<String>,
        }
        let raw: Raw =
            serde_json::from_str(text).map_err(|e| GateError::GateSetFile(e.to_string()))?;
        for g in &raw.gates {
            lookup(g).map_err(|e| GateError::GateSetFile(e.to_string()))?;
        }
        Ok(GateSet::from_names(&raw.name, raw.gates))
    }

    pub fn defs(&self) -> Vec<Arc<GateDef>> {
        library()
            .iter()
            .filter(|g| self.contains(&g.name))
            .cloned()
            .collect()
    }
}

/// Looks up one of the shipped sets: `full`, `sim-native`, `qscout-native`.
pub fn enumerate_gateset(name: &str) -> Result<GateSet, GateError> {
    match name {
        "full" => Ok(GateSet {
            name: "full".into(),
            gates: library().iter().map(|g| g.name.clone()).collect(),
            accept_all: true,
        }),
        "sim-native" => Ok(GateSet::from_names(
            "sim-native",
            CV_GATES.iter().chain(HYBRID_GATES).chain(DV_GATES).copied(),
        )),
        "qscout-native" => Ok(GateSet::from_names(
            "qscout-native",
            ["RZ", "RY", "RX", "CNOT", "xCD"],
        )),
        other => Err(GateError::UnknownGateSet(other.to_owned())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_suggests_near_matches() {
        match lookup("CDD") {
            Err(GateError::Unknown { near, .. }) => assert!(near.contains(&"CD".to_string())),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cr_metadata() {
        let cr = lookup("CR").unwrap();
        assert_eq!(cr.arity, 2);
        assert_eq!(
            cr.declared_signature(),
            Some(vec![WireType::Qubit, WireType::Qumode])
        );
        assert!(cr.is_exponential());
    }

    #[test]
    fn modeswap_is_explicit() {
        let g = lookup("ModeSwap").unwrap();
        assert!(matches!(g.form, GateForm::ModeSwap));
        assert_eq!(g.declared_signature(), Some(vec![WireType::Qumode; 2]));
    }

    #[test]
    fn shipped_sets() {
        let q = enumerate_gateset("qscout-native").unwrap();
        assert!(q.contains("xCD") && !q.contains("D"));
        let s = enumerate_gateset("sim-native").unwrap();
        for g in CV_GATES.iter().chain(HYBRID_GATES) {
            assert!(s.contains(g), "{g}");
        }
        let f = enumerate_gateset("full").unwrap();
        assert!(s.gates.is_subset(&f.gates));
        assert!(enumerate_gateset("nope").is_err());
    }

    #[test]
    fn gate_set_json() {
        let g = GateSet::from_json(r#"{"name":"mine","gates":["RZ","CD"]}"#).unwrap();
        assert!(g.contains("CD") && !g.contains("D"));
        assert!(GateSet::from_json(r#"{"name":"bad","gates":["Q"]}"#).is_err());
    }
}

//! Spectral observables, basis schemas and measurement processes.

use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::gates::ops;
use crate::ir::{GateInstruction, WireLabel};
use crate::types::{TypeEnv, WireType};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    /// Bits for qubits, photon counts for qumodes.
    Discrete,
    /// Eigenbasis of the `x` quadrature; qumodes only.
    Position,
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::Discrete => "discrete",
            Basis::Position => "position",
        })
    }
}

impl Serialize for Basis {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("wire {wire}: basis conflict ({first} vs {second})")]
    BasisConflict {
        wire: WireLabel,
        first: Basis,
        second: Basis,
    },
    #[error("wire {0}: position basis requested on a qubit")]
    PositionOnQubit(WireLabel),
    #[error("unsupported observable `{0}`")]
    Unsupported(String),
    #[error("outcome tuple has {got} entries, observable needs {expected}")]
    Arity { expected: usize, got: usize },
    #[error("outcome #{index} has the wrong kind for {factor}")]
    OutcomeKind { index: usize, factor: String },
    #[error("observable uses wire {0} twice")]
    RepeatedWire(WireLabel),
}

/// Ordered wire → basis map covering exactly the measured wires.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct BasisSchema(Vec<(WireLabel, Basis)>);

impl BasisSchema {
    pub fn new(entries: Vec<(WireLabel, Basis)>) -> Self {
        let mut s = BasisSchema::default();
        for (w, b) in entries {
            s.insert(w, b).expect("schema entries must not conflict");
        }
        s
    }

    pub fn discrete<W: Into<WireLabel>>(wires: impl IntoIterator<Item = W>) -> Self {
        BasisSchema::new(
            wires
                .into_iter()
                .map(|w| (w.into(), Basis::Discrete))
                .collect(),
        )
    }

    pub fn entries(&self) -> &[(WireLabel, Basis)] {
        &self.0
    }

    pub fn get(&self, w: &WireLabel) -> Option<Basis> {
        self.0.iter().find(|(v, _)| v == w).map(|(_, b)| *b)
    }

    pub fn wires(&self) -> Vec<WireLabel> {
        self.0.iter().map(|(w, _)| w.clone()).collect()
    }

    pub fn insert(&mut self, w: WireLabel, b: Basis) -> Result<(), MeasureError> {
        match self.get(&w) {
            Some(old) if old != b => Err(MeasureError::BasisConflict {
                wire: w,
                first: old,
                second: b,
            }),
            Some(_) => Ok(()),
            None => {
                self.0.push((w, b));
                Ok(())
            }
        }
    }

    /// Rejects position sampling on wires typed as qubits.
    pub fn check(&self, env: &TypeEnv) -> Result<(), MeasureError> {
        for (w, b) in &self.0 {
            if *b == Basis::Position && env.get(w) == Some(&WireType::Qubit) {
                return Err(MeasureError::PositionOnQubit(w.clone()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Factor {
    N(WireLabel),
    Xquad(WireLabel),
    PauliZ(WireLabel),
    PauliX(WireLabel),
    PauliY(WireLabel),
}

impl Factor {
    pub fn wire(&self) -> &WireLabel {
        match self {
            Factor::N(w)
            | Factor::Xquad(w)
            | Factor::PauliZ(w)
            | Factor::PauliX(w)
            | Factor::PauliY(w) => w,
        }
    }

    pub fn preferred_basis(&self) -> Basis {
        match self {
            Factor::Xquad(_) => Basis::Position,
            _ => Basis::Discrete,
        }
    }

    pub fn wire_type(&self) -> WireType {
        match self {
            Factor::N(_) | Factor::Xquad(_) => WireType::Qumode,
            _ => WireType::Qubit,
        }
    }

    /// Builds a factor from its textual name (`N`, `X`/`Xquad`, `Z`, `PauliX`, ...).
    pub fn from_name(name: &str, w: WireLabel) -> Result<Factor, MeasureError> {
        Ok(match name {
            "N" | "n" => Factor::N(w),
            "Xquad" | "x" => Factor::Xquad(w),
            "Z" | "PauliZ" => Factor::PauliZ(w),
            "X" | "PauliX" => Factor::PauliX(w),
            "Y" | "PauliY" => Factor::PauliY(w),
            other => return Err(MeasureError::Unsupported(other.to_owned())),
        })
    }

    fn spectrum(&self, o: &Outcome) -> Option<f64> {
        match (self, o) {
            (Factor::N(_), Outcome::Count(n)) => Some(*n as f64),
            (Factor::Xquad(_), Outcome::Real(x)) => Some(*x),
            (Factor::PauliZ(_) | Factor::PauliX(_) | Factor::PauliY(_), Outcome::Bit(b)) => {
                Some(if *b == 0 { 1.0 } else { -1.0 })
            }
            _ => None,
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, w) = match self {
            Factor::N(w) => ("N", w),
            Factor::Xquad(w) => ("Xquad", w),
            Factor::PauliZ(w) => ("Z", w),
            Factor::PauliX(w) => ("X", w),
            Factor::PauliY(w) => ("Y", w),
        };
        write!(f, "{n}({w})")
    }
}

/// `coeff · Π factors`, one factor per wire.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    pub coeff: f64,
    factors: Vec<Factor>,
}

impl Observable {
    pub fn new(coeff: f64, factors: Vec<Factor>) -> Result<Self, MeasureError> {
        for (i, f) in factors.iter().enumerate() {
            if factors[..i].iter().any(|g| g.wire() == f.wire()) {
                return Err(MeasureError::RepeatedWire(f.wire().clone()));
            }
        }
        Ok(Observable { coeff, factors })
    }

    fn single(f: Factor) -> Self {
        Observable {
            coeff: 1.0,
            factors: vec![f],
        }
    }

    pub fn z(w: impl Into<WireLabel>) -> Self {
        Self::single(Factor::PauliZ(w.into()))
    }
    pub fn x(w: impl Into<WireLabel>) -> Self {
        Self::single(Factor::PauliX(w.into()))
    }
    pub fn y(w: impl Into<WireLabel>) -> Self {
        Self::single(Factor::PauliY(w.into()))
    }
    pub fn n(w: impl Into<WireLabel>) -> Self {
        Self::single(Factor::N(w.into()))
    }
    pub fn xquad(w: impl Into<WireLabel>) -> Self {
        Self::single(Factor::Xquad(w.into()))
    }

    /// Tensor product; fails if the factors share a wire.
    pub fn tensor(&self, o: &Observable) -> Result<Self, MeasureError> {
        let mut f = self.factors.clone();
        f.extend(o.factors.iter().cloned());
        Observable::new(self.coeff * o.coeff, f)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Observable {
            coeff: self.coeff * c,
            ..self.clone()
        }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// Wires in factor order; outcome tuples follow this order.
    pub fn wires(&self) -> Vec<WireLabel> {
        self.factors.iter().map(|f| f.wire().clone()).collect()
    }

    /// Spectrum function: product of the factor spectra times the coefficient.
    pub fn eigenvalue_of(&self, outcome: &[Outcome]) -> Result<f64, MeasureError> {
        if outcome.len() != self.factors.len() {
            return Err(MeasureError::Arity {
                expected: self.factors.len(),
                got: outcome.len(),
            });
        }
        let mut v = self.coeff;
        for (index, (f, o)) in self.factors.iter().zip(outcome).enumerate() {
            v *= f.spectrum(o).ok_or_else(|| MeasureError::OutcomeKind {
                index,
                factor: f.to_string(),
            })?;
        }
        Ok(v)
    }

    /// Rotations taking each factor to its measured basis.
    pub fn diagonalizing_gates(&self) -> Vec<GateInstruction> {
        let mut out = Vec::new();
        for f in &self.factors {
            match f {
                Factor::PauliX(w) => out.push(ops::h(w.clone())),
                Factor::PauliY(w) => {
                    out.push(ops::sdg(w.clone()));
                    out.push(ops::h(w.clone()));
                }
                _ => {}
            }
        }
        out
    }

    pub fn schema(&self) -> BasisSchema {
        BasisSchema::new(
            self.factors
                .iter()
                .map(|f| (f.wire().clone(), f.preferred_basis()))
                .collect(),
        )
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeff != 1.0 {
            write!(f, "{}·", self.coeff)?;
        }
        for (i, x) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str("⊗")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

/// One measured value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Outcome {
    Bit(u8),
    Count(u64),
    Real(f64),
}

impl Outcome {
    pub fn as_f64(&self) -> f64 {
        match *self {
            Outcome::Bit(b) => f64::from(b),
            Outcome::Count(n) => n as f64,
            Outcome::Real(x) => x,
        }
    }
}

impl Serialize for Outcome {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match *self {
            Outcome::Bit(b) => s.serialize_u8(b),
            Outcome::Count(n) => s.serialize_u64(n),
            Outcome::Real(x) => s.serialize_f64(x),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MeasurementSpec {
    Expval(Observable),
    Var(Observable),
    Sample(BasisSchema),
}

impl MeasurementSpec {
    pub fn wires(&self) -> Vec<WireLabel> {
        match self {
            MeasurementSpec::Expval(o) | MeasurementSpec::Var(o) => o.wires(),
            MeasurementSpec::Sample(s) => s.wires(),
        }
    }

    /// Per-wire constraints: qumodes for position sampling and CV factors,
    /// qubits for Pauli factors; discrete sampling constrains nothing.
    pub fn wire_constraints(&self) -> Vec<WireType> {
        match self {
            MeasurementSpec::Expval(o) | MeasurementSpec::Var(o) => {
                o.factors.iter().map(Factor::wire_type).collect()
            }
            MeasurementSpec::Sample(s) => {
                s.0.iter()
                    .map(|(_, b)| match b {
                        Basis::Position => WireType::Qumode,
                        Basis::Discrete => WireType::Bottom,
                    })
                    .collect()
            }
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            MeasurementSpec::Expval(_) => "expval",
            MeasurementSpec::Var(_) => "var",
            MeasurementSpec::Sample(_) => "sample",
        }
    }

    pub fn schema(&self) -> BasisSchema {
        match self {
            MeasurementSpec::Expval(o) | MeasurementSpec::Var(o) => o.schema(),
            MeasurementSpec::Sample(s) => s.clone(),
        }
    }

    pub fn diagonalizing_gates(&self) -> Vec<GateInstruction> {
        match self {
            MeasurementSpec::Expval(o) | MeasurementSpec::Var(o) => o.diagonalizing_gates(),
            MeasurementSpec::Sample(_) => vec![],
        }
    }
}

/// Joint schema of all measurements on a tape.
pub fn infer_basis_schema(measurements: &[MeasurementSpec]) -> Result<BasisSchema, MeasureError> {
    let mut s = BasisSchema::default();
    for m in measurements {
        for (w, b) in m.schema().0 {
            s.insert(w, b)?;
        }
    }
    Ok(s)
}

/// Basis rotations for a whole measurement list. Each wire is rotated once,
/// by the first measurement that needs it.
pub fn joint_diagonalizing_gates(measurements: &[MeasurementSpec]) -> Vec<GateInstruction> {
    let mut done: Vec<WireLabel> = Vec::new();
    let mut out = Vec::new();
    for m in measurements {
        let gates = m.diagonalizing_gates();
        let fresh: Vec<WireLabel> = gates
            .iter()
            .map(|g| g.wires()[0].clone())
            .filter(|w| !done.contains(w))
            .collect();
        out.extend(gates.into_iter().filter(|g| fresh.contains(&g.wires()[0])));
        done.extend(fresh);
    }
    out
}

/// Sample mean and `E[f²] − E[f]²` of an observable over outcome tuples.
pub fn estimate(obs: &Observable, samples: &[Vec<Outcome>]) -> Result<(f64, f64), MeasureError> {
    let n = samples.len() as f64;
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for s in samples {
        let f = obs.eigenvalue_of(s)?;
        m1 += f;
        m2 += f * f;
    }
    let mean = m1 / n;
    Ok((mean, m2 / n - mean * mean))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn schema_inference() {
        let s = infer_basis_schema(&[MeasurementSpec::Expval(Observable::n("m"))]).unwrap();
        assert_eq!(s.entries(), &[("m".into(), Basis::Discrete)]);
        let zx = Observable::z("q").tensor(&Observable::xquad("m")).unwrap();
        let s = infer_basis_schema(&[MeasurementSpec::Expval(zx)]).unwrap();
        assert_eq!(
            s.entries(),
            &[("q".into(), Basis::Discrete), ("m".into(), Basis::Position)]
        );
        let explicit = BasisSchema::discrete(["e0", "e1"]);
        assert_eq!(
            infer_basis_schema(&[MeasurementSpec::Sample(explicit.clone())]).unwrap(),
            explicit
        );
    }

    #[test]
    fn basis_conflict() {
        let r = infer_basis_schema(&[
            MeasurementSpec::Expval(Observable::n("m")),
            MeasurementSpec::Expval(Observable::xquad("m")),
        ]);
        assert!(matches!(r, Err(MeasureError::BasisConflict { .. })));
    }

    #[test]
    fn spectra() {
        assert_eq!(
            Observable::n("m")
                .eigenvalue_of(&[Outcome::Count(7)])
                .unwrap(),
            7.0
        );
        assert_eq!(
            Observable::z("q")
                .eigenvalue_of(&[Outcome::Bit(1)])
                .unwrap(),
            -1.0
        );
        let zx = Observable::z("q").tensor(&Observable::xquad("m")).unwrap();
        assert_eq!(
            zx.eigenvalue_of(&[Outcome::Bit(1), Outcome::Real(0.42)])
                .unwrap(),
            -0.42
        );
        assert!(zx.eigenvalue_of(&[Outcome::Bit(1)]).is_err());
        assert!(zx
            .eigenvalue_of(&[Outcome::Real(1.0), Outcome::Real(0.42)])
            .is_err());
    }

    #[test]
    fn diagonalization() {
        assert_eq!(Observable::x("q").diagonalizing_gates(), vec![ops::h("q")]);
        assert_eq!(
            Observable::y("q").diagonalizing_gates(),
            vec![ops::sdg("q"), ops::h("q")]
        );
        assert!(Observable::n("m").diagonalizing_gates().is_empty());
        assert!(Observable::z("q")
            .tensor(&Observable::n("m"))
            .unwrap()
            .diagonalizing_gates()
            .is_empty());
    }

    #[test]
    fn unsupported_factor_names() {
        assert!(matches!(
            Factor::from_name("Hermitian", "q".into()),
            Err(MeasureError::Unsupported(_))
        ));
        assert!(matches!(
            Factor::from_name("Heterodyne", "m".into()),
            Err(MeasureError::Unsupported(_))
        ));
    }

    #[test]
    fn position_on_qubit_rejected() {
        let mut env = TypeEnv::new();
        env.insert("q".into(), WireType::Qubit);
        let s = BasisSchema::new(vec![("q".into(), Basis::Position)]);
        assert!(s.check(&env).is_err());
    }

    proptest! {
        #[test]
        fn eigenvalues_scale_linearly(c in -5.0f64..5.0, n in 0u64..50, b in 0u8..2, x in -3.0f64..3.0) {
            let o = Observable::n("m").tensor(&Observable::z("q")).unwrap().tensor(&Observable::xquad("p")).unwrap();
            let out = [Outcome::Count(n), Outcome::Bit(b), Outcome::Real(x)];
            let base = o.eigenvalue_of(&out).unwrap();
            prop_assert!((o.scaled(c).eigenvalue_of(&out).unwrap() - c * base).abs() < 1e-9);
        }

        #[test]
        fn schema_inference_is_order_insensitive(perm in Just(vec![0usize, 1, 2]).prop_shuffle()) {
            let ms = [
                MeasurementSpec::Expval(Observable::n("a")),
                MeasurementSpec::Expval(Observable::xquad("b")),
                MeasurementSpec::Var(Observable::z("c")),
            ];
            let reordered: Vec<_> = perm.iter().map(|&i| ms[i].clone()).collect();
            let s1 = infer_basis_schema(&ms).unwrap();
            let s2 = infer_basis_schema(&reordered).unwrap();
            for (w, b) in s1.entries() {
                prop_assert_eq!(s2.get(w), Some(*b));
            }
            prop_assert_eq!(infer_basis_schema(&[MeasurementSpec::Sample(s1.clone())]).unwrap(), s1);
        }
    }
}

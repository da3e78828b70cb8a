//! Wire types and single-pass, first-wins type inference.

use std::collections::BTreeMap;
use std::fmt;

use indexmap::IndexMap;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::gates::{GateDef, GateForm, ParamKind};
use crate::ir::{GateInstruction, Param, QuantumTape, WireLabel};
use crate::measure::MeasurementSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WireType {
    Bottom,
    Qubit,
    Qudit(u32),
    Qumode,
}

impl fmt::Display for WireType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WireType::Bottom => f.write_str("unresolved"),
            WireType::Qubit => f.write_str("qubit"),
            WireType::Qudit(d) => write!(f, "qudit({d})"),
            WireType::Qumode => f.write_str("qumode"),
        }
    }
}

impl Serialize for WireType {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Wire → type map in first-appearance order.
pub type TypeEnv = IndexMap<WireLabel, WireType>;

/// `(position, type)` constraints over an instruction's wires.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TypeSignature(pub Vec<(usize, WireType)>);

impl TypeSignature {
    pub fn types(&self, arity: usize) -> Vec<WireType> {
        let mut v = vec![WireType::Bottom; arity];
        for &(i, t) in &self.0 {
            v[i] = t;
        }
        v
    }

    fn from_types(t: &[WireType]) -> Self {
        TypeSignature(
            t.iter()
                .enumerate()
                .filter(|(_, t)| **t != WireType::Bottom)
                .map(|(i, t)| (i, *t))
                .collect(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
#[error("wire {wire}: expected {required}, found {existing} at op #{index} ({})", .path.join(" > "))]
pub struct TypeError {
    pub wire: WireLabel,
    pub existing: WireType,
    pub required: WireType,
    pub index: usize,
    /// Gate names from the outer instruction down to the failing step.
    pub path: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum InferenceError {
    #[error(transparent)]
    Conflict(#[from] TypeError),
    #[error("op #{index}: cannot resolve a signature for `{gate}`: {reason}")]
    Unresolvable {
        gate: String,
        index: usize,
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum Diagnostic {
    #[error("{0}")]
    TypeConflict(TypeError),
    #[error("wire {0}: type could not be inferred")]
    UnresolvedWire(WireLabel),
    #[error("op #{index}: cannot resolve a signature for `{gate}`")]
    UnresolvableSignature { gate: String, index: usize },
}

/// Counters from one inference run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct InferenceStats {
    /// Top-level signature resolutions (one per instruction and measurement).
    pub resolutions: usize,
}

/// Types of a gate's own wires. Resolution order: declaration, then the
/// registered decomposition, then a structural rewrite, then the generator's
/// primitives. Memoized per definition.
pub fn gate_signature(def: &GateDef) -> Result<Vec<WireType>, String> {
    def.signature_memo
        .get_or_init(|| derive_signature(def, true))
        .clone()
}

/// Same as [`gate_signature`] but optionally skipping the declaration, which
/// lets tests re-derive a declared signature from structure alone.
pub fn derive_signature(def: &GateDef, use_declared: bool) -> Result<Vec<WireType>, String> {
    if use_declared {
        if let Some(sig) = def.declared_signature() {
            return Ok(sig);
        }
    }
    let wires: Vec<WireLabel> = (0..def.arity)
        .map(|i| WireLabel::Name(format!("#{i}")))
        .collect();
    let params = placeholder_params(def);
    let expansion = match &def.decomposition {
        Some(d) => Some((d.build)(&params, &wires)),
        None => {
            let instr = GateInstruction::raw(
                std::sync::Arc::new(def.stripped()),
                params.clone(),
                wires.clone(),
                vec![],
            );
            crate::rewrite::structural_expansion(&instr)
        }
    };
    if let Some(ops) = expansion {
        let mut env: BTreeMap<usize, WireType> = BTreeMap::new();
        for op in &ops {
            let sig = signature_of(op).map_err(|e| format!("{} > {e}", def.name))?;
            for (pos, t) in sig.0 {
                let Some(slot) = wires.iter().position(|w| w == &op.wires()[pos]) else {
                    continue;
                };
                match env.insert(slot, t) {
                    Some(old) if old != t => {
                        return Err(format!(
                            "{} > {}: wire slot {slot} is both {old} and {t}",
                            def.name,
                            op.name()
                        ));
                    }
                    _ => {}
                }
            }
        }
        return Ok((0..def.arity)
            .map(|i| env.get(&i).copied().unwrap_or(WireType::Bottom))
            .collect());
    }
    match &def.form {
        GateForm::Exponential(g) => {
            let slots = g(&params)
                .slot_types()
                .map_err(|s| format!("{}: slot {s} used inconsistently", def.name))?;
            Ok((0..def.arity)
                .map(|i| slots.get(&i).copied().unwrap_or(WireType::Bottom))
                .collect())
        }
        GateForm::Fixed(_) => Ok(vec![WireType::Qubit; def.arity]),
        GateForm::ModeSwap => Err(format!(
            "{}: no signature, decomposition or generator",
            def.name
        )),
    }
}

fn placeholder_params(def: &GateDef) -> Vec<Param> {
    def.params
        .iter()
        .map(|p| match p.kind {
            ParamKind::AngleVector => Param::Vector(vec![0.1, 0.2]),
            _ => Param::Real(0.1),
        })
        .collect()
}

/// Constraints imposed by one gate instruction; conditioning wires are qubits.
pub fn signature_of(instr: &GateInstruction) -> Result<TypeSignature, String> {
    let base = gate_signature(instr.gate())?;
    let k = instr.num_conditions();
    let mut types = vec![WireType::Qubit; k];
    types.extend(base);
    Ok(TypeSignature::from_types(&types))
}

/// Constraints imposed by a measurement, positions over `m.wires()`.
pub fn measurement_signature(m: &MeasurementSpec) -> TypeSignature {
    TypeSignature::from_types(&m.wire_constraints())
}

fn bind(
    env: &mut TypeEnv,
    w: &WireLabel,
    t: WireType,
    index: usize,
    gate: &str,
) -> Result<(), TypeError> {
    let cur = env.entry(w.clone()).or_insert(WireType::Bottom);
    if *cur == WireType::Bottom {
        *cur = t;
        Ok(())
    } else if *cur == t || t == WireType::Bottom {
        Ok(())
    } else {
        Err(TypeError {
            wire: w.clone(),
            existing: *cur,
            required: t,
            index,
            path: vec![gate.to_owned()],
        })
    }
}

pub fn infer_types(tape: &QuantumTape) -> Result<TypeEnv, InferenceError> {
    infer_types_with_stats(tape).map(|(env, _)| env)
}

/// One forward pass over gates then measurements. Measurement indices
/// continue after the gate indices.
pub fn infer_types_with_stats(
    tape: &QuantumTape,
) -> Result<(TypeEnv, InferenceStats), InferenceError> {
    let mut env: TypeEnv = tape
        .wires()
        .into_iter()
        .map(|w| (w, WireType::Bottom))
        .collect();
    let mut stats = InferenceStats::default();
    for (index, op) in tape.ops().iter().enumerate() {
        stats.resolutions += 1;
        let sig = signature_of(op).map_err(|reason| InferenceError::Unresolvable {
            gate: op.name().to_owned(),
            index,
            reason,
        })?;
        for (pos, t) in sig.0 {
            bind(&mut env, &op.wires()[pos], t, index, op.name())?;
        }
    }
    let base = tape.ops().len();
    for (i, m) in tape.measurements().iter().enumerate() {
        stats.resolutions += 1;
        let wires = m.wires();
        for (pos, t) in measurement_signature(m).0 {
            bind(&mut env, &wires[pos], t, base + i, m.kind_name())?;
        }
    }
    Ok((env, stats))
}

/// Checks every constraint of `tape` against `env`; with `strict`, wires left
/// `Bottom` are reported too.
pub fn validate(tape: &QuantumTape, env: &TypeEnv, strict: bool) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut check = |w: &WireLabel, t: WireType, index: usize, gate: &str| {
        let cur = env.get(w).copied().unwrap_or(WireType::Bottom);
        if cur != t {
            out.push(Diagnostic::TypeConflict(TypeError {
                wire: w.clone(),
                existing: cur,
                required: t,
                index,
                path: vec![gate.to_owned()],
            }));
        }
    };
    let mut unresolvable = Vec::new();
    for (index, op) in tape.ops().iter().enumerate() {
        match signature_of(op) {
            Ok(sig) => sig
                .0
                .iter()
                .for_each(|&(p, t)| check(&op.wires()[p], t, index, op.name())),
            Err(_) => unresolvable.push(Diagnostic::UnresolvableSignature {
                gate: op.name().to_owned(),
                index,
            }),
        }
    }
    let base = tape.ops().len();
    for (i, m) in tape.measurements().iter().enumerate() {
        let wires = m.wires();
        for (p, t) in measurement_signature(m).0 {
            check(&wires[p], t, base + i, m.kind_name());
        }
    }
    out.extend(unresolvable);
    if strict {
        for w in tape.wires() {
            if env.get(&w).copied().unwrap_or(WireType::Bottom) == WireType::Bottom {
                out.push(Diagnostic::UnresolvedWire(w));
            }
        }
    }
    out
}

/// Lenient resolution: every `Bottom` becomes `Qubit`; returns the defaulted wires.
pub fn default_unresolved(env: &TypeEnv) -> (TypeEnv, Vec<WireLabel>) {
    let mut out = env.clone();
    let mut defaulted = Vec::new();
    for (w, t) in out.iter_mut() {
        if *t == WireType::Bottom {
            *t = WireType::Qubit;
            defaulted.push(w.clone());
        }
    }
    (out, defaulted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{self, ops};
    use crate::ir::build_tape;
    use crate::measure::{Basis, BasisSchema, MeasurementSpec};
    use proptest::prelude::*;

    fn tape(ops: Vec<GateInstruction>, meas: Vec<MeasurementSpec>) -> QuantumTape {
        build_tape(vec![], ops, meas, None).unwrap()
    }

    #[test]
    fn forced_conflict() {
        let t = tape(vec![ops::x(0i64), ops::d(0.3, 0.0, 0i64)], vec![]);
        match infer_types(&t) {
            Err(InferenceError::Conflict(e)) => {
                assert_eq!(e.wire, WireLabel::Int(0));
                assert_eq!(e.existing, WireType::Qubit);
                assert_eq!(e.required, WireType::Qumode);
                assert_eq!(e.index, 1);
                assert_eq!(
                    e.to_string(),
                    "wire 0: expected qumode, found qubit at op #1 (D)"
                );
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn calibration_prefix() {
        let t = tape(
            vec![
                ops::h("q"),
                ops::cd(0.5, 0.0, "q", "m"),
                ops::d(0.5, 1.0, "m"),
            ],
            vec![],
        );
        let env = infer_types(&t).unwrap();
        assert_eq!(env[&WireLabel::from("q")], WireType::Qubit);
        assert_eq!(env[&WireLabel::from("m")], WireType::Qumode);
        assert!(validate(&t, &env, true).is_empty());
    }

    #[test]
    fn position_sampling_identifies_qumodes() {
        let s = BasisSchema::new(vec![("w".into(), Basis::Position)]);
        let env = infer_types(&tape(vec![], vec![MeasurementSpec::Sample(s)])).unwrap();
        assert_eq!(env[&WireLabel::from("w")], WireType::Qumode);
        let s = BasisSchema::new(vec![("w".into(), Basis::Discrete)]);
        let t = tape(vec![], vec![MeasurementSpec::Sample(s)]);
        let env = infer_types(&t).unwrap();
        assert_eq!(env[&WireLabel::from("w")], WireType::Bottom);
        assert_eq!(
            validate(&t, &env, true),
            vec![Diagnostic::UnresolvedWire("w".into())]
        );
        assert!(validate(&t, &env, false).is_empty());
        let (d, defaulted) = default_unresolved(&env);
        assert_eq!(d[&WireLabel::from("w")], WireType::Qubit);
        assert_eq!(defaulted.len(), 1);
    }

    #[test]
    fn cd_signature() {
        let sig = signature_of(&ops::cd(0.5, 0.0, "q", "m")).unwrap();
        assert_eq!(sig.0, vec![(0, WireType::Qubit), (1, WireType::Qumode)]);
        let cond = ops::bs(0.1, 0.0, "a", "b").condition_on_qubit("q").unwrap();
        assert_eq!(
            signature_of(&cond).unwrap().types(3),
            vec![WireType::Qubit, WireType::Qumode, WireType::Qumode]
        );
    }

    #[test]
    fn evo_without_annotation_recurses_into_decomposition() {
        let evo = gates::evo_gate(1.0, -1.0, 0.1, false);
        assert_eq!(evo.declared_signature(), None);
        assert_eq!(
            gate_signature(&evo).unwrap(),
            vec![WireType::Qubit, WireType::Qumode]
        );
    }

    #[test]
    fn stats_count_one_resolution_per_instruction() {
        let t = tape(
            vec![
                ops::h("q"),
                ops::cd(0.5, 0.0, "q", "m"),
                ops::d(0.5, 1.0, "m"),
            ],
            vec![],
        );
        let (_, s) = infer_types_with_stats(&t).unwrap();
        assert_eq!(s.resolutions, 3);
    }

    fn compatible_op() -> impl Strategy<Value = GateInstruction> {
        prop_oneof![
            Just(ops::h("q")),
            Just(ops::r(0.3, "m")),
            Just(ops::cd(0.2, 0.0, "q", "m")),
            Just(ops::bs(0.2, 0.0, "m", "n")),
            Just(ops::rz(0.3, "p")),
            Just(ops::jc(0.1, 0.0, "p", "n")),
        ]
    }

    proptest! {
        #[test]
        fn compatible_permutations_agree(ops in proptest::collection::vec(compatible_op(), 1..8), seed in any::<u64>()) {
            let env = infer_types(&tape(ops.clone(), vec![])).unwrap();
            let mut shuffled = ops;
            let n = shuffled.len();
            let mut s = seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1);
                shuffled.swap(i, (s >> 33) as usize % (i + 1));
            }
            let env2 = infer_types(&tape(shuffled, vec![])).unwrap();
            for (w, t) in &env {
                prop_assert_eq!(env2[w], *t);
            }
            prop_assert_eq!(infer_types(&tape(vec![], vec![])).unwrap().len(), 0);
        }

        #[test]
        fn conflicts_raise_in_either_order(swap in any::<bool>()) {
            let mut v = vec![ops::h("w"), ops::r(0.1, "w")];
            if swap { v.reverse(); }
            let r = infer_types(&tape(v, vec![]));
            prop_assert!(matches!(r, Err(InferenceError::Conflict(e)) if e.index == 1));
        }
    }
}

//! Wire-type inference: declared signatures re-derived from structure,
//! conflicts located precisely, unannotated gates typed through their
//! decomposition, and the measurement basis rules.

mod support;

use hybc_core::gates::{enumerate_gateset, evo_gate, ops};
use hybc_core::ir::{build_tape, GateInstruction, Param, QuantumTape, WireLabel};
use hybc_core::measure::{Basis, BasisSchema, MeasurementSpec, Observable};
use hybc_core::rewrite::{decompose_to_gateset, DEFAULT_MAX_DEPTH};
use hybc_core::types::{
    derive_signature, gate_signature, infer_types, infer_types_with_stats, validate, Diagnostic,
    InferenceError, TypeEnv, TypeError, WireType,
};
use support::shipped;
use WireType::{Bottom, Qubit, Qumode};

fn tape(ops: Vec<GateInstruction>, ms: Vec<MeasurementSpec>) -> QuantumTape {
    build_tape(vec![], ops, ms, None).unwrap()
}

fn conflict(t: &QuantumTape) -> TypeError {
    match infer_types(t) {
        Err(InferenceError::Conflict(e)) => e,
        other => panic!("expected a conflict, got {other:?}"),
    }
}

fn env(pairs: &[(&str, WireType)]) -> TypeEnv {
    pairs
        .iter()
        .map(|(w, t)| (WireLabel::from(*w), *t))
        .collect()
}

#[test]
fn declared_signatures_are_rederived_from_structure() {
    let mut declared = 0;
    for def in shipped() {
        let Some(sig) = def.declared_signature() else {
            continue;
        };
        declared += 1;
        let derived = derive_signature(&def, false).unwrap_or_else(|e| panic!("{}: {e}", def.name));
        assert_eq!(derived, sig, "{}", def.name);
        // the stripped definition resolves through the same route
        let stripped = def.stripped();
        assert!(stripped.declared_signature().is_none(), "{}", def.name);
        assert_eq!(
            gate_signature(&stripped).unwrap(),
            sig,
            "{} stripped",
            def.name
        );
    }
    assert_eq!(declared, shipped().len());
}

#[test]
fn qubit_gate_on_a_qumode_is_a_conflict() {
    let e = conflict(&tape(vec![ops::d(0.2, 0.0, "m"), ops::h("m")], vec![]));
    assert_eq!(
        (e.wire, e.existing, e.required, e.index),
        ("m".into(), Qumode, Qubit, 1)
    );
    assert_eq!(e.path, ["H"]);
}

#[test]
fn swapped_hybrid_operands_are_a_conflict() {
    let e = conflict(&tape(
        vec![
            ops::x("q"),
            ops::cd(0.1, 0.0, "q", "m"),
            ops::cd(0.1, 0.0, "m", "q"),
        ],
        vec![],
    ));
    assert_eq!(
        (e.wire, e.existing, e.required, e.index),
        ("m".into(), Qumode, Qubit, 2)
    );
}

#[test]
fn condition_wires_must_be_qubits() {
    let g = ops::r(0.3, "m").condition_on_qubit("c").unwrap();
    let e = conflict(&tape(vec![ops::r(0.1, "c"), g], vec![]));
    assert_eq!(
        (e.wire, e.existing, e.required, e.index),
        ("c".into(), Qumode, Qubit, 1)
    );
}

#[test]
fn measurement_conflicts_are_indexed_after_the_gates() {
    let pos = BasisSchema::new(vec![("q".into(), Basis::Position)]);
    let e = conflict(&tape(
        vec![ops::h("q"), ops::x("q")],
        vec![MeasurementSpec::Sample(pos)],
    ));
    assert_eq!(
        (e.wire, e.existing, e.required, e.index),
        ("q".into(), Qubit, Qumode, 2)
    );
    assert_eq!(e.path, ["sample"]);
    let e = conflict(&tape(
        vec![ops::r(0.1, "m")],
        vec![MeasurementSpec::Expval(Observable::z("m"))],
    ));
    assert_eq!((e.existing, e.required, e.index), (Qumode, Qubit, 1));
}

#[test]
fn validate_reports_every_conflict() {
    let t = tape(
        vec![ops::h("a"), ops::r(0.1, "b"), ops::d(0.1, 0.0, "a")],
        vec![],
    );
    let diags = validate(&t, &env(&[("a", Qubit), ("b", Qubit)]), false);
    assert_eq!(diags.len(), 2, "{diags:?}");
    assert!(
        matches!(&diags[0], Diagnostic::TypeConflict(e) if e.index == 1 && e.wire == "b".into())
    );
    assert!(
        matches!(&diags[1], Diagnostic::TypeConflict(e) if e.index == 2 && e.wire == "a".into())
    );
}

#[test]
fn unannotated_evolution_is_typed_by_its_decomposition() {
    let def = evo_gate(1.0, -1.0, 0.1, false);
    assert!(def.declared_signature().is_none());
    assert_eq!(gate_signature(&def).unwrap(), vec![Qubit, Qumode]);
    let g = GateInstruction::new(def, vec![Param::Real(1.0)], vec!["s", "osc"]).unwrap();
    let inferred = infer_types(&tape(vec![g], vec![])).unwrap();
    assert_eq!(inferred, env(&[("s", Qubit), ("osc", Qumode)]));
}

#[test]
fn position_sampling_implies_a_qumode_and_discrete_sampling_nothing() {
    let pos = BasisSchema::new(vec![("w".into(), Basis::Position)]);
    assert_eq!(
        infer_types(&tape(vec![], vec![MeasurementSpec::Sample(pos)])).unwrap(),
        env(&[("w", Qumode)])
    );
    let disc = BasisSchema::discrete(["w"]);
    assert_eq!(
        infer_types(&tape(vec![], vec![MeasurementSpec::Sample(disc)])).unwrap(),
        env(&[("w", Bottom)])
    );
    // a discrete sample after a qubit gate keeps the qubit
    let disc = BasisSchema::discrete(["w"]);
    assert_eq!(
        infer_types(&tape(
            vec![ops::h("w")],
            vec![MeasurementSpec::Sample(disc)]
        ))
        .unwrap(),
        env(&[("w", Qubit)])
    );
    // strict validation flags the undetermined wire
    let t = tape(
        vec![],
        vec![MeasurementSpec::Sample(BasisSchema::discrete(["w"]))],
    );
    let diags = validate(&t, &infer_types(&t).unwrap(), true);
    assert_eq!(diags, vec![Diagnostic::UnresolvedWire("w".into())]);
}

fn mixed_tape() -> QuantumTape {
    tape(
        vec![
            ops::h("q"),
            ops::cd(0.3, 0.1, "q", "m"),
            ops::bs(0.2, 0.0, "m", "k"),
            ops::snap(vec![0.1, 0.4], "k"),
            ops::jc(0.4, 0.0, "p", "m"),
        ],
        vec![
            MeasurementSpec::Expval(Observable::n("k")),
            MeasurementSpec::Sample(BasisSchema::discrete(["q", "p"])),
        ],
    )
}

#[test]
fn inference_is_one_deterministic_pass_in_first_use_order() {
    let t = mixed_tape();
    let (a, stats) = infer_types_with_stats(&t).unwrap();
    assert_eq!(stats.resolutions, t.ops().len() + t.measurements().len());
    let b = infer_types(&t).unwrap();
    assert_eq!(a, b);
    let order: Vec<String> = a.keys().map(ToString::to_string).collect();
    assert_eq!(order, ["q", "m", "k", "p"]);
    assert_eq!(
        a.values().copied().collect::<Vec<_>>(),
        [Qubit, Qumode, Qumode, Qubit]
    );
}

#[test]
fn decomposition_keeps_every_wire_type() {
    let t = mixed_tape();
    let before = infer_types(&t).unwrap();
    for set in ["sim-native", "qscout-native"] {
        let Ok(out) = decompose_to_gateset(&t, &enumerate_gateset(set).unwrap(), DEFAULT_MAX_DEPTH)
        else {
            // beamsplitters have no route to the device gate set
            assert_eq!(set, "qscout-native");
            continue;
        };
        let after = infer_types(&out).unwrap();
        for (w, ty) in &before {
            assert_eq!(after.get(w).copied().unwrap_or(Bottom), *ty, "{set}: {w}");
        }
        for (w, ty) in &after {
            if !before.contains_key(w) {
                assert!(w.is_reserved() && *ty == Qubit, "{set}: new wire {w}: {ty}");
            }
        }
    }
}

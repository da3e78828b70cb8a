//! Randomized invariants: deterministic, idempotent QASM; decomposition keeps
//! the action; schemas are stable; sampling agrees with the analytic values.

mod support;

use hybc_core::gates::{enumerate_gateset, ops, GateSet};
use hybc_core::ir::{build_tape, GateInstruction, QuantumTape};
use hybc_core::measure::{infer_basis_schema, Basis, BasisSchema, MeasurementSpec, Observable};
use hybc_core::qasm::{emit_qasm, parse_qasm, roundtrip};
use hybc_core::rewrite::{decompose_to_gateset, DEFAULT_MAX_DEPTH};
use hybc_core::sim::{execute, Cutoffs, MeasurementResult};
use hybc_core::types::{default_unresolved, infer_types};
use num_rational::Rational64;
use proptest::prelude::*;
use support::{sequence_deviation, Regime};

/// One gate on qubits `q0`, `q1` and qumode `m0`, with small parameters.
fn base_gate() -> impl Strategy<Value = GateInstruction> {
    let small = -0.3f64..0.3;
    let angle = -3.0f64..3.0;
    prop_oneof![
        (angle.clone(), 0..2usize).prop_map(|(t, k)| ops::ry(t, ["q0", "q1"][k])),
        (angle.clone()).prop_map(|t| ops::rz(t, "q1")),
        Just(ops::h("q0")),
        Just(ops::s("q1")),
        Just(ops::cnot("q0", "q1")),
        (small.clone(), angle.clone()).prop_map(|(r, p)| ops::d(r.abs(), p, "m0")),
        angle.clone().prop_map(|t| ops::r(t, "m0")),
        (small.clone(), angle.clone(), 0..2usize).prop_map(|(r, p, k)| ops::cd(
            r.abs(),
            p,
            ["q0", "q1"][k],
            "m0"
        )),
        angle.clone().prop_map(|t| ops::cr(t, "q1", "m0")),
        Just(ops::cp("q0", "m0")),
        prop::collection::vec(angle.clone(), 1..4).prop_map(|v| ops::snap(v, "m0")),
        (angle.clone(), angle).prop_map(|(t, p)| ops::jc(t / 4.0, p, "q1", "m0")),
    ]
}

/// A base gate, possibly inverted, raised to an integer power, conditioned
/// or controlled on the other qubit. Conditioning has no QASM spelling, so it
/// can be switched off; JC is never conditioned or controlled (no rule
/// covers it).
fn gate(allow_condition: bool) -> impl Strategy<Value = GateInstruction> {
    (base_gate(), 0..6usize).prop_map(move |(g, m)| {
        let other = if g.wires().iter().any(|w| w.to_string() == "q0") {
            "q1"
        } else {
            "q0"
        };
        let free =
            !g.wires().iter().any(|w| w.to_string() == other) && !matches!(g.name(), "JC" | "CNOT");
        match m {
            1 => g.adjoint(),
            2 => g.power(Rational64::from(-2)),
            3 if allow_condition
                && free
                && g.gate().is_exponential()
                && g.num_conditions() == 0 =>
            {
                g.condition_on_qubit(other).unwrap()
            }
            4 if free => g.controlled_by(other).unwrap(),
            _ => g,
        }
    })
}

fn measurements() -> impl Strategy<Value = Vec<MeasurementSpec>> {
    prop_oneof![
        Just(vec![]),
        Just(vec![MeasurementSpec::Expval(Observable::z("q0"))]),
        Just(vec![MeasurementSpec::Var(Observable::n("m0").scaled(0.5))]),
        Just(vec![MeasurementSpec::Expval(
            Observable::x("q1")
                .tensor(&Observable::xquad("m0"))
                .unwrap()
        )]),
        Just(vec![MeasurementSpec::Sample(BasisSchema::discrete([
            "q0", "q1", "m0"
        ]))]),
        Just(vec![MeasurementSpec::Sample(BasisSchema::new(vec![(
            "m0".into(),
            Basis::Position
        )]))]),
    ]
}

fn typed(t: &QuantumTape) -> hybc_core::types::TypeEnv {
    default_unresolved(&infer_types(t).unwrap()).0
}

fn lean_set() -> GateSet {
    GateSet::from_names(
        "lean",
        [
            "H", "S", "Sdg", "X", "Y", "Z", "RX", "RY", "RZ", "CNOT", "R", "CR", "xCD", "SQR", "JC",
        ],
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn qasm_emission_is_deterministic_and_a_fixed_point(
        gates in prop::collection::vec(gate(false), 0..8),
        ms in measurements(),
        precision in 4usize..12,
    ) {
        let t = build_tape(vec![], gates, ms, None).unwrap();
        let env = typed(&t);
        let a = emit_qasm(&t, &env, precision).unwrap();
        prop_assert_eq!(&a, &emit_qasm(&t, &env, precision).unwrap());
        prop_assert!(roundtrip(&t, &env, precision).unwrap(), "{}", a);
        let p = parse_qasm(&a).unwrap();
        prop_assert_eq!(&a, &emit_qasm(&p.tape, &p.env, precision).unwrap());
    }

    #[test]
    fn decomposition_keeps_the_action(gates in prop::collection::vec(gate(true), 1..5)) {
        let t = QuantumTape::from_ops(gates.clone());
        for set in [enumerate_gateset("sim-native").unwrap(), lean_set()] {
            let out = decompose_to_gateset(&t, &set, DEFAULT_MAX_DEPTH).unwrap();
            prop_assert!(out.ops().iter().all(|g| set.contains(g.name())));
            let dev = sequence_deviation(&gates, out.ops(), Regime::LowFock);
            prop_assert!(dev < 1e-6, "{}: {:e}", set.name, dev);
        }
    }

    #[test]
    fn schema_inference_is_idempotent(ms in measurements(), more in measurements()) {
        let all: Vec<MeasurementSpec> = ms.into_iter().chain(more).collect();
        if let Ok(s) = infer_basis_schema(&all) {
            let again = infer_basis_schema(&[MeasurementSpec::Sample(s.clone())]).unwrap();
            prop_assert_eq!(&s, &again);
            let mut doubled = all.clone();
            doubled.extend(all.iter().cloned());
            prop_assert_eq!(infer_basis_schema(&doubled).unwrap(), s);
        }
    }

    #[test]
    fn sample_means_sit_within_five_standard_errors(
        theta in 0.0f64..std::f64::consts::PI,
        r in 0.0f64..1.0,
        seed in any::<u64>(),
    ) {
        let shots = 4000;
        let gates = vec![ops::ry(theta, "q"), ops::d(r, 0.4, "m")];
        let env = typed(&build_tape(vec![], gates.clone(), vec![], None).unwrap());
        let cut = Cutoffs::new(24).unwrap();
        // n and x need different bases on the same wire, so one tape each
        for obs in [Observable::z("q"), Observable::n("m"), Observable::xquad("m")] {
            let run = |m: MeasurementSpec, shots: Option<u64>| {
                let t = build_tape(vec![], gates.clone(), vec![m], shots).unwrap();
                execute::<f64>(&t, &env, &cut, Some(seed)).unwrap().0[0].value().unwrap()
            };
            let e = run(MeasurementSpec::Expval(obs.clone()), None);
            let v = run(MeasurementSpec::Var(obs.clone()), None);
            let s = run(MeasurementSpec::Expval(obs.clone()), Some(shots));
            let se = (v / shots as f64).sqrt();
            prop_assert!((s - e).abs() <= 5.0 * se + 1e-12, "{}: {} vs {} (se {})", obs, s, e, se);
        }
    }
}

#[test]
fn seeded_sampling_repeats_exactly() {
    let t = build_tape(
        vec![],
        vec![ops::h("q"), ops::cd(0.4, 0.0, "q", "m")],
        vec![MeasurementSpec::Sample(BasisSchema::new(vec![
            ("q".into(), Basis::Discrete),
            ("m".into(), Basis::Position),
        ]))],
        Some(500),
    )
    .unwrap();
    let env = typed(&t);
    let cut = Cutoffs::new(16).unwrap();
    let a = execute::<f64>(&t, &env, &cut, Some(11)).unwrap();
    let b = execute::<f64>(&t, &env, &cut, Some(11)).unwrap();
    let c = execute::<f64>(&t, &env, &cut, Some(12)).unwrap();
    let samples = |r: &(Vec<MeasurementResult>, Option<u64>)| match &r.0[0] {
        MeasurementResult::Samples { samples, .. } => samples.clone(),
        _ => unreachable!(),
    };
    assert_eq!(samples(&a), samples(&b));
    assert_ne!(samples(&a), samples(&c));
}

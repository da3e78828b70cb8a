//! Truncated Fock-space statevector simulator.
//!
//! Qubits have dimension 2 and qumodes their cutoff. Exponential gates are
//! exponentiated through Hermitian eigendecompositions of the truncated
//! generator, so every applied gate is unitary to machine precision.

pub mod expm;
pub mod operators;
mod sample;
mod state;

use std::collections::BTreeMap;

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

pub use sample::sample;
pub use state::{gate_plan, wire_dim, StateVector};

use crate::gates::enumerate_gateset;
use crate::ir::{GateInstruction, QuantumTape, WireLabel};
use crate::measure::{estimate, infer_basis_schema, Basis, MeasureError, MeasurementSpec, Outcome};
use crate::rewrite::{decompose_to_gateset, DecomposeError, DEFAULT_MAX_DEPTH};
use crate::scalar::Real;
use crate::types::{infer_types, InferenceError, TypeEnv, WireType};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("cutoff {0} is below the minimum of 2")]
    Cutoff(usize),
    #[error("{prim} needs a {want} wire, got dimension {dim}")]
    WrongWire {
        prim: String,
        dim: usize,
        want: WireType,
    },
    #[error("generator slot {0} has no wire")]
    Slot(usize),
    #[error("generator is not anti-Hermitian (residual {0:e})")]
    NotAntiHermitian(f64),
    #[error("wire {0}: type is unresolved")]
    UnresolvedWire(WireLabel),
    #[error("wire {wire}: level {level} does not fit dimension {dim}")]
    PrepLevel {
        wire: WireLabel,
        level: usize,
        dim: usize,
    },
    #[error("wire {0} is not part of the state")]
    UnknownWire(WireLabel),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("op #{index} ({gate}): {source}")]
    Gate {
        index: usize,
        gate: String,
        source: Box<SimError>,
    },
    #[error(transparent)]
    Types(#[from] InferenceError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
}

/// Qumode truncation: a default plus per-wire overrides. Any value ≥ 2 is
/// accepted; powers of two are not required.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cutoffs {
    pub default: usize,
    pub per_wire: BTreeMap<WireLabel, usize>,
}

impl Cutoffs {
    pub fn new(default: usize) -> Result<Self, SimError> {
        if default < 2 {
            return Err(SimError::Cutoff(default));
        }
        Ok(Cutoffs {
            default,
            per_wire: BTreeMap::new(),
        })
    }

    pub fn with(mut self, w: impl Into<WireLabel>, n: usize) -> Result<Self, SimError> {
        if n < 2 {
            return Err(SimError::Cutoff(n));
        }
        self.per_wire.insert(w.into(), n);
        Ok(self)
    }

    pub fn of(&self, w: &WireLabel) -> usize {
        self.per_wire.get(w).copied().unwrap_or(self.default)
    }

    /// Every cutoff multiplied by `k`.
    pub fn scaled(&self, k: usize) -> Self {
        Cutoffs {
            default: self.default * k,
            per_wire: self
                .per_wire
                .iter()
                .map(|(w, n)| (w.clone(), n * k))
                .collect(),
        }
    }
}

impl Default for Cutoffs {
    fn default() -> Self {
        Cutoffs {
            default: 16,
            per_wire: BTreeMap::new(),
        }
    }
}

/// Result of one measurement.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum MeasurementResult {
    Expval {
        expval: f64,
    },
    Var {
        var: f64,
    },
    Samples {
        samples: Vec<Vec<Outcome>>,
        schema: IndexMap<String, Basis>,
        seed: u64,
        cutoffs: BTreeMap<String, usize>,
    },
}

impl MeasurementResult {
    pub fn value(&self) -> Option<f64> {
        match self {
            MeasurementResult::Expval { expval } => Some(*expval),
            MeasurementResult::Var { var } => Some(*var),
            MeasurementResult::Samples { .. } => None,
        }
    }
}

/// Runs the preparation and every gate. Types are inferred; unresolved wires
/// are an error.
pub fn simulate<T: Real>(
    tape: &QuantumTape,
    cutoffs: &Cutoffs,
) -> Result<StateVector<T>, SimError> {
    let env = infer_types(tape)?;
    simulate_with_env(tape, &env, cutoffs)
}

/// As [`simulate`] with a caller-supplied type environment.
pub fn simulate_with_env<T: Real>(
    tape: &QuantumTape,
    env: &TypeEnv,
    cutoffs: &Cutoffs,
) -> Result<StateVector<T>, SimError> {
    let mut state = StateVector::basis(tape.wires(), env, cutoffs, tape.prep())?;
    for (index, op) in tape.ops().iter().enumerate() {
        apply_or_lower(&mut state, op).map_err(|e| SimError::Gate {
            index,
            gate: op.name().to_owned(),
            source: Box::new(e),
        })?;
    }
    Ok(state)
}

/// Applies `op` directly; shapes without a direct matrix (a qubit condition on
/// a fixed gate, say) are first lowered to the simulator-native set.
fn apply_or_lower<T: Real>(
    state: &mut StateVector<T>,
    op: &GateInstruction,
) -> Result<(), SimError> {
    match state.apply(op) {
        Err(SimError::Unsupported(_)) => {
            let native = enumerate_gateset("sim-native").expect("shipped set");
            let lowered = decompose_to_gateset(
                &QuantumTape::from_ops(vec![op.clone()]),
                &native,
                DEFAULT_MAX_DEPTH,
            )?;
            for g in lowered.ops() {
                state.apply(g)?;
            }
            Ok(())
        }
        other => other,
    }
}

/// Executes a tape end to end: analytic values when `shots` is unset,
/// otherwise samples (and sample estimates for expval/var) drawn from a
/// ChaCha8 stream seeded with `seed` or a fresh random seed.
pub fn execute<T: Real>(
    tape: &QuantumTape,
    env: &TypeEnv,
    cutoffs: &Cutoffs,
    seed: Option<u64>,
) -> Result<(Vec<MeasurementResult>, Option<u64>), SimError> {
    let schema = infer_basis_schema(tape.measurements())?;
    schema.check(env)?;
    let state = simulate_with_env::<T>(tape, env, cutoffs)?;
    let Some(shots) = tape.shots() else {
        let res = tape
            .measurements()
            .iter()
            .map(|m| match m {
                MeasurementSpec::Expval(o) => Ok(MeasurementResult::Expval {
                    expval: state.expval(o)?.as_f64(),
                }),
                MeasurementSpec::Var(o) => Ok(MeasurementResult::Var {
                    var: state.var(o)?.as_f64(),
                }),
                MeasurementSpec::Sample(_) => {
                    Err(SimError::Unsupported("sample() needs shots".into()))
                }
            })
            .collect::<Result<_, _>>()?;
        return Ok((res, None));
    };
    let seed = seed.unwrap_or_else(|| rand::rng().random());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut res = Vec::new();
    for m in tape.measurements() {
        let mut rotated = state.clone();
        for g in m.diagonalizing_gates() {
            rotated.apply(&g)?;
        }
        let schema = m.schema();
        let samples = sample(&rotated, &schema, shots, &mut rng)?;
        res.push(match m {
            MeasurementSpec::Expval(o) => MeasurementResult::Expval {
                expval: estimate(o, &samples)?.0,
            },
            MeasurementSpec::Var(o) => MeasurementResult::Var {
                var: estimate(o, &samples)?.1,
            },
            MeasurementSpec::Sample(s) => MeasurementResult::Samples {
                samples,
                schema: s
                    .entries()
                    .iter()
                    .map(|(w, b)| (w.to_string(), *b))
                    .collect(),
                seed,
                cutoffs: qumode_cutoffs(env, cutoffs),
            },
        });
    }
    Ok((res, Some(seed)))
}

/// Cutoff of every qumode wire, keyed by label.
pub fn qumode_cutoffs(env: &TypeEnv, cutoffs: &Cutoffs) -> BTreeMap<String, usize> {
    env.iter()
        .filter(|(_, t)| **t == WireType::Qumode)
        .map(|(w, _)| (w.to_string(), cutoffs.of(w)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::ops;
    use crate::ir::build_tape;
    use crate::measure::{BasisSchema, Observable};

    fn run(tape: &QuantumTape, cut: usize, seed: Option<u64>) -> Vec<MeasurementResult> {
        let env = infer_types(tape).unwrap();
        execute::<f64>(tape, &env, &Cutoffs::new(cut).unwrap(), seed)
            .unwrap()
            .0
    }

    #[test]
    fn empty_tape_is_ground_state() {
        let t = build_tape(
            vec![],
            vec![],
            vec![MeasurementSpec::Expval(Observable::z("q"))],
            None,
        )
        .unwrap();
        let s = simulate::<f64>(&t, &Cutoffs::default()).unwrap();
        assert_eq!(s.amplitudes().len(), 2);
        assert_eq!(s.amplitudes()[0].re, 1.0);
    }

    #[test]
    fn x_flips() {
        let t = build_tape(vec![], vec![ops::x("q")], vec![], None).unwrap();
        let s = simulate::<f64>(&t, &Cutoffs::default()).unwrap();
        assert_eq!(s.amplitudes()[1].re, 1.0);
    }

    #[test]
    fn coherent_state_moments() {
        let t = build_tape(
            vec![],
            vec![ops::d(1.0, 0.0, "m")],
            vec![
                MeasurementSpec::Expval(Observable::n("m")),
                MeasurementSpec::Var(Observable::n("m")),
            ],
            None,
        )
        .unwrap();
        let r = run(&t, 32, None);
        assert!((r[0].value().unwrap() - 1.0).abs() < 1e-6);
        assert!((r[1].value().unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn coherent_quadrature_mean() {
        let t = build_tape(
            vec![],
            vec![ops::d(0.5, 0.0, "m")],
            vec![MeasurementSpec::Expval(Observable::xquad("m"))],
            None,
        )
        .unwrap();
        let r = run(&t, 32, None);
        assert!((r[0].value().unwrap() - 2f64.sqrt() * 0.5).abs() < 1e-6);
    }

    #[test]
    fn fock_prep_readout() {
        let t = build_tape(
            vec![("q".into(), 0), ("m".into(), 4)],
            vec![],
            vec![
                MeasurementSpec::Expval(Observable::n("m")),
                MeasurementSpec::Sample(BasisSchema::discrete(["m"])),
            ],
            None,
        )
        .unwrap();
        let env: TypeEnv = [
            ("q".into(), WireType::Qubit),
            ("m".into(), WireType::Qumode),
        ]
        .into_iter()
        .collect();
        let s = simulate_with_env::<f64>(&t, &env, &Cutoffs::new(8).unwrap()).unwrap();
        assert!((s.expval(&Observable::n("m")).unwrap() - 4.0).abs() < 1e-12);
        let t = t.with_shots(Some(20)).unwrap();
        let (r, _) = execute::<f64>(&t, &env, &Cutoffs::new(8).unwrap(), Some(1)).unwrap();
        match &r[1] {
            MeasurementResult::Samples { samples, .. } => {
                assert!(samples.iter().all(|s| s == &[Outcome::Count(4)]))
            }
            other => panic!("{other:?}"),
        }
        let bad = t.with_prep(vec![("m".into(), 8)]);
        assert!(matches!(
            simulate_with_env::<f64>(&bad, &env, &Cutoffs::new(8).unwrap()),
            Err(SimError::PrepLevel { .. })
        ));
    }

    #[test]
    fn excited_qubit_samples_one() {
        let t = build_tape(
            vec![],
            vec![ops::x("q")],
            vec![MeasurementSpec::Sample(BasisSchema::discrete(["q"]))],
            Some(5),
        )
        .unwrap();
        match &run(&t, 4, Some(3))[0] {
            MeasurementResult::Samples { samples, .. } => {
                assert_eq!(samples, &vec![vec![Outcome::Bit(1)]; 5])
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn vacuum_position_statistics() {
        let schema = BasisSchema::new(vec![("m".into(), Basis::Position)]);
        let t = build_tape(
            vec![],
            vec![],
            vec![MeasurementSpec::Sample(schema)],
            Some(100_000),
        )
        .unwrap();
        let MeasurementResult::Samples { samples, .. } = &run(&t, 32, Some(7))[0] else {
            panic!()
        };
        let xs: Vec<f64> = samples.iter().map(|s| s[0].as_f64()).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 0.01, "{mean}");
        assert!((var - 0.5).abs() < 0.025, "{var}");
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let t = build_tape(
            vec![],
            vec![ops::h("q")],
            vec![MeasurementSpec::Sample(BasisSchema::discrete(["q"]))],
            Some(64),
        )
        .unwrap();
        assert_eq!(run(&t, 4, Some(11)), run(&t, 4, Some(11)));
    }

    #[test]
    fn shot_estimate_of_pauli_x() {
        let t = build_tape(
            vec![],
            vec![ops::h("q")],
            vec![MeasurementSpec::Expval(Observable::x("q"))],
            Some(200),
        )
        .unwrap();
        assert_eq!(run(&t, 4, Some(5))[0].value(), Some(1.0));
    }

    #[test]
    fn position_on_qubit_rejected() {
        let schema = BasisSchema::new(vec![("q".into(), Basis::Position)]);
        let t = build_tape(
            vec![],
            vec![ops::h("q")],
            vec![MeasurementSpec::Sample(schema)],
            Some(4),
        )
        .unwrap();
        let env: TypeEnv = [("q".into(), WireType::Qubit)].into_iter().collect();
        assert!(execute::<f64>(&t, &env, &Cutoffs::default(), Some(1)).is_err());
    }
}

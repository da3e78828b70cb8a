use indexmap::IndexSet;

use super::{GateInstruction, IrError, WireLabel};
use crate::measure::MeasurementSpec;

/// Immutable circuit: basis-state preparation, gates in execution order, and
/// terminal measurements. `shots == None` means analytic mode.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumTape {
    prep: Vec<(WireLabel, usize)>,
    ops: Vec<GateInstruction>,
    measurements: Vec<MeasurementSpec>,
    shots: Option<u64>,
}

/// Validates every instruction and normalizes its modifiers.
pub fn build_tape(
    prep: Vec<(WireLabel, usize)>,
    ops: Vec<GateInstruction>,
    measurements: Vec<MeasurementSpec>,
    shots: Option<u64>,
) -> Result<QuantumTape, IrError> {
    if shots == Some(0) {
        return Err(IrError::ZeroShots);
    }
    for (i, (w, _)) in prep.iter().enumerate() {
        if prep[..i].iter().any(|(v, _)| v == w) {
            return Err(IrError::DuplicatePrep(w.clone()));
        }
    }
    let ops = ops
        .into_iter()
        .enumerate()
        .map(|(index, op)| {
            op.validate().map_err(|e| IrError::Instruction {
                index,
                source: Box::new(e),
            })?;
            Ok(op.normalized())
        })
        .collect::<Result<Vec<_>, IrError>>()?;
    Ok(QuantumTape {
        prep,
        ops,
        measurements,
        shots,
    })
}

impl QuantumTape {
    /// Tape of already-validated instructions.
    pub fn from_ops(ops: Vec<GateInstruction>) -> QuantumTape {
        build_tape(vec![], ops, vec![], None).expect("instructions are valid")
    }

    pub fn prep(&self) -> &[(WireLabel, usize)] {
        &self.prep
    }

    pub fn ops(&self) -> &[GateInstruction] {
        &self.ops
    }

    pub fn measurements(&self) -> &[MeasurementSpec] {
        &self.measurements
    }

    pub fn shots(&self) -> Option<u64> {
        self.shots
    }

    /// Wires in order of first appearance: preparation, gates, measurements.
    pub fn wires(&self) -> Vec<WireLabel> {
        let mut seen = IndexSet::new();
        for (w, _) in &self.prep {
            seen.insert(w.clone());
        }
        for op in &self.ops {
            for w in op.wires() {
                seen.insert(w.clone());
            }
        }
        for m in &self.measurements {
            for w in m.wires() {
                seen.insert(w);
            }
        }
        seen.into_iter().collect()
    }

    pub fn with_ops(&self, ops: Vec<GateInstruction>) -> QuantumTape {
        QuantumTape {
            ops,
            ..self.clone()
        }
    }

    pub fn with_measurements(&self, measurements: Vec<MeasurementSpec>) -> QuantumTape {
        QuantumTape {
            measurements,
            ..self.clone()
        }
    }

    pub fn with_shots(&self, shots: Option<u64>) -> Result<QuantumTape, IrError> {
        if shots == Some(0) {
            return Err(IrError::ZeroShots);
        }
        Ok(QuantumTape {
            shots,
            ..self.clone()
        })
    }

    pub fn with_prep(&self, prep: Vec<(WireLabel, usize)>) -> QuantumTape {
        QuantumTape {
            prep,
            ..self.clone()
        }
    }
}

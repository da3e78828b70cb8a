//! Circuit IR: wires, parameters, modifiers, instructions and tapes.

mod instruction;
pub mod modifier;
mod param;
mod tape;
mod wire;

use thiserror::Error;

pub use instruction::GateInstruction;
pub use modifier::{normalize, Modifier};
pub use param::{polar, rect, Param};
pub use tape::{build_tape, QuantumTape};
pub use wire::{WireLabel, ANCILLA_PREFIX};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IrError {
    #[error("{gate} expects {expected} wires, got {got}")]
    Arity {
        gate: String,
        expected: usize,
        got: usize,
    },
    #[error("{0}")]
    BadParams(String),
    #[error("{gate}: wire {wire} used twice")]
    DuplicateWire { gate: String, wire: WireLabel },
    #[error("{gate}: condition wire {wire} is not in its prepended position")]
    ConditionWire { gate: String, wire: WireLabel },
    #[error("{0}")]
    Gate(String),
    #[error("instruction #{index}: {source}")]
    Instruction { index: usize, source: Box<IrError> },
    #[error("shots must be positive")]
    ZeroShots,
    #[error("wire {0} prepared twice")]
    DuplicatePrep(WireLabel),
}

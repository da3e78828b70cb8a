//! OpenQASM 3.0 with the CV extensions: `qumode` registers, `measure_n`,
//! `measure_x`, and the `cvstdgates.inc` gate library. Basis-state preparation
//! and expectation values travel as `pragma hybc.prep`, `pragma hybc.expval`
//! and `pragma hybc.var` lines.

mod emit;
mod lexer;
mod parser;

use std::collections::HashMap;
use std::sync::OnceLock;

use thiserror::Error;

use crate::ir::{GateInstruction, Param, QuantumTape, WireLabel};
use crate::measure::{infer_basis_schema, Factor, MeasureError, MeasurementSpec, Observable};
use crate::types::{TypeEnv, WireType};

/// The shipped CV gate library.
pub const CVSTDGATES: &str = include_str!("cvstdgates.inc");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("type error: `{gate}` argument {position} must be {expected}, got a {found} wire ({signature})")]
    Type {
        gate: String,
        position: usize,
        expected: WireType,
        found: WireType,
        signature: String,
    },
    #[error("unknown gate {0}")]
    UnknownGate(String),
    #[error("unsupported construct: {0}")]
    Unsupported(String),
    #[error("register: {0}")]
    Register(String),
    #[error("invalid instruction: {0}")]
    Ir(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{line}:{col}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QasmError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("gate `{0}` has no OpenQASM spelling; decompose it first")]
    NotInLibrary(String),
    #[error("wire {0}: type is unresolved")]
    Unresolved(WireLabel),
    #[error("wire {0}: qudits have no register type")]
    Qudit(WireLabel),
    #[error("qubit-conditioned `{0}` has no OpenQASM spelling; decompose it first")]
    CondZ(String),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Parser output. Wires are named `<register><index>`.
#[derive(Clone, Debug)]
pub struct Parsed {
    pub tape: QuantumTape,
    pub env: TypeEnv,
    pub warnings: Vec<String>,
}

pub fn parse_qasm(src: &str) -> Result<Parsed, ParseError> {
    parser::parse(src)
}

/// Deterministic program text; parameters use `precision` decimals.
pub fn emit_qasm(tape: &QuantumTape, env: &TypeEnv, precision: usize) -> Result<String, QasmError> {
    emit::emit(tape, env, precision).map(|(s, _)| s)
}

/// `parse(emit(tape))` against `tape`: same gates, modifiers and wires up to
/// register renaming, parameters within `10^-precision`, same schema and types.
pub fn roundtrip(tape: &QuantumTape, env: &TypeEnv, precision: usize) -> Result<bool, QasmError> {
    let (text, regs) = emit::emit(tape, env, precision)?;
    let parsed = parse_qasm(&text)?;
    let map: HashMap<WireLabel, WireLabel> =
        regs.iter().map(|(w, s)| (w.clone(), s.label())).collect();
    let rename = |w: &WireLabel| map[w].clone();
    let tol = 10f64.powi(-(precision as i32));
    let expected: Vec<GateInstruction> = tape.ops().iter().map(|g| g.map_wires(rename)).collect();
    let got = parsed.tape.ops();
    let ops_match = expected.len() == got.len()
        && expected.iter().zip(got).all(|(a, b)| {
            a.name() == b.name()
                && a.wires() == b.wires()
                && a.modifiers() == b.modifiers()
                && a.params().len() == b.params().len()
                && a.params()
                    .iter()
                    .zip(b.params())
                    .all(|(x, y)| params_close(x, y, tol))
        });
    let (samples, observables): (Vec<_>, Vec<_>) = tape
        .measurements()
        .iter()
        .partition(|m| matches!(m, MeasurementSpec::Sample(_)));
    let (got_samples, got_observables): (Vec<_>, Vec<_>) = parsed
        .tape
        .measurements()
        .iter()
        .partition(|m| matches!(m, MeasurementSpec::Sample(_)));
    let samples: Vec<MeasurementSpec> = samples.into_iter().cloned().collect();
    let got_samples: Vec<MeasurementSpec> = got_samples.into_iter().cloned().collect();
    let want: Vec<(WireLabel, _)> = infer_basis_schema(&samples)?
        .entries()
        .iter()
        .map(|(w, b)| (rename(w), *b))
        .collect();
    let have = infer_basis_schema(&got_samples)?;
    let observables_match = observables.len() == got_observables.len()
        && observables
            .iter()
            .zip(&got_observables)
            .all(|(a, b)| observable_close(&rename_observable(a, &rename), b, tol));
    let prep: Vec<(WireLabel, usize)> = tape.prep().iter().map(|(w, l)| (rename(w), *l)).collect();
    let types_match = env
        .iter()
        .all(|(w, t)| parsed.env.get(&rename(w)) == Some(t));
    Ok(ops_match
        && want.as_slice() == have.entries()
        && observables_match
        && prep == parsed.tape.prep()
        && types_match)
}

fn rename_observable(
    m: &MeasurementSpec,
    rename: &impl Fn(&WireLabel) -> WireLabel,
) -> MeasurementSpec {
    let f = |o: &Observable| {
        let factors = o
            .factors()
            .iter()
            .map(|f| match f {
                Factor::N(w) => Factor::N(rename(w)),
                Factor::Xquad(w) => Factor::Xquad(rename(w)),
                Factor::PauliZ(w) => Factor::PauliZ(rename(w)),
                Factor::PauliX(w) => Factor::PauliX(rename(w)),
                Factor::PauliY(w) => Factor::PauliY(rename(w)),
            })
            .collect();
        Observable::new(o.coeff, factors).expect("renaming is injective")
    };
    match m {
        MeasurementSpec::Expval(o) => MeasurementSpec::Expval(f(o)),
        MeasurementSpec::Var(o) => MeasurementSpec::Var(f(o)),
        MeasurementSpec::Sample(s) => MeasurementSpec::Sample(s.clone()),
    }
}

fn observable_close(a: &MeasurementSpec, b: &MeasurementSpec, tol: f64) -> bool {
    match (a, b) {
        (MeasurementSpec::Expval(x), MeasurementSpec::Expval(y))
        | (MeasurementSpec::Var(x), MeasurementSpec::Var(y)) => {
            (x.coeff - y.coeff).abs() <= tol && x.factors() == y.factors()
        }
        _ => false,
    }
}

fn params_close(a: &Param, b: &Param, tol: f64) -> bool {
    match (a, b) {
        (Param::Real(x), Param::Real(y)) => (x - y).abs() <= tol,
        (Param::Vector(x), Param::Vector(y)) => {
            x.len() == y.len() && x.iter().zip(y).all(|(x, y)| (x - y).abs() <= tol)
        }
        _ => false,
    }
}

/// Gate names defined by a body (not a defcal stub) in `cvstdgates.inc`.
pub fn library_definitions() -> Vec<&'static str> {
    let mut v: Vec<&'static str> = CVSTDGATES
        .lines()
        .filter_map(|l| l.strip_prefix("gate "))
        .filter_map(|l| l.split(['(', ' ']).next())
        .collect();
    v.sort_unstable();
    v
}

/// Inlines the `cvstdgates.inc` body of gate `name` on concrete wires.
pub fn expand_library_gate(
    name: &str,
    params: &[f64],
    wires: &[WireLabel],
) -> Option<Vec<GateInstruction>> {
    static TOKENS: OnceLock<Vec<lexer::Token>> = OnceLock::new();
    let toks = TOKENS.get_or_init(|| lexer::lex(CVSTDGATES).expect("shipped library lexes"));
    let mut p = parser::Parser::new(toks)
        .library()
        .expect("shipped library parses");
    p.expand(name, params, wires)
}

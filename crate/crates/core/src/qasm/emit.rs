use std::collections::HashMap;
use std::fmt::Write;

use super::QasmError;
use crate::gates::names::to_qasm;
use crate::ir::{GateInstruction, Modifier, Param, QuantumTape, WireLabel};
use crate::jaqal::PhysicalMode;
use crate::measure::{infer_basis_schema, Basis, Factor, MeasurementSpec};
use crate::types::{TypeEnv, WireType};

/// Where a wire lives in the emitted program: element `index` of register
/// `reg`, or a scalar register named after the wire.
#[derive(Clone, Debug)]
pub(super) struct Slot {
    pub reg: String,
    pub index: Option<usize>,
}

impl Slot {
    fn text(&self) -> String {
        match self.index {
            Some(i) => format!("{}[{i}]", self.reg),
            None => self.reg.clone(),
        }
    }

    /// Wire label the parser gives this slot.
    pub fn label(&self) -> WireLabel {
        match self.index {
            Some(i) => WireLabel::Name(format!("{}{i}", self.reg)),
            None => WireLabel::Name(self.reg.clone()),
        }
    }
}

/// Qubits go to `q[i]` and qumodes to `m[i]` in environment order. Qumodes
/// named after a physical trap mode (`m1i1`) keep their name as a scalar
/// register so device placement survives the round trip.
pub(super) fn registers(
    tape: &QuantumTape,
    env: &TypeEnv,
) -> Result<Vec<(WireLabel, Slot)>, QasmError> {
    for w in tape.wires() {
        if !env.contains_key(&w) {
            return Err(QasmError::Unresolved(w));
        }
    }
    let (mut nq, mut nm) = (0, 0);
    let next = |reg: &str, n: &mut usize| {
        *n += 1;
        Slot {
            reg: reg.to_owned(),
            index: Some(*n - 1),
        }
    };
    env.iter()
        .map(|(w, t)| match t {
            WireType::Qubit => Ok((w.clone(), next("q", &mut nq))),
            WireType::Qumode => match w {
                WireLabel::Name(s) if PhysicalMode::parse(s).is_some() => Ok((
                    w.clone(),
                    Slot {
                        reg: s.clone(),
                        index: None,
                    },
                )),
                _ => Ok((w.clone(), next("m", &mut nm))),
            },
            WireType::Qudit(_) => Err(QasmError::Qudit(w.clone())),
            WireType::Bottom => Err(QasmError::Unresolved(w.clone())),
        })
        .collect()
}

fn number(x: f64, precision: usize) -> String {
    format!("{x:.precision$}")
}

fn param(p: &Param, precision: usize) -> String {
    match p {
        Param::Real(x) => number(*x, precision),
        Param::Vector(v) => format!(
            "{{{}}}",
            v.iter()
                .map(|x| number(*x, precision))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    }
}

pub(super) fn statement(
    g: &GateInstruction,
    slots: &HashMap<WireLabel, String>,
    precision: usize,
) -> Result<String, QasmError> {
    let name = to_qasm(g.name()).ok_or_else(|| QasmError::NotInLibrary(g.name().to_owned()))?;
    let mut s = String::new();
    for m in g.modifiers().iter().rev() {
        match m {
            Modifier::Ctrl(_) => s.push_str("ctrl @ "),
            Modifier::Adjoint => s.push_str("inv @ "),
            Modifier::Pow(k) => write!(s, "pow({k}) @ ").expect("string write"),
            Modifier::CondZ(_) => return Err(QasmError::CondZ(g.name().to_owned())),
        }
    }
    s.push_str(name);
    if !g.params().is_empty() {
        let ps: Vec<String> = g.params().iter().map(|p| param(p, precision)).collect();
        write!(s, "({})", ps.join(", ")).expect("string write");
    }
    let args: Vec<&str> = g.wires().iter().map(|w| slots[w].as_str()).collect();
    write!(s, " {};", args.join(", ")).expect("string write");
    Ok(s)
}

/// Emits the program and returns the wire → register-element mapping.
pub(super) fn emit(
    tape: &QuantumTape,
    env: &TypeEnv,
    precision: usize,
) -> Result<(String, Vec<(WireLabel, Slot)>), QasmError> {
    let regs = registers(tape, env)?;
    let slots: HashMap<WireLabel, String> =
        regs.iter().map(|(w, s)| (w.clone(), s.text())).collect();
    let mut out =
        String::from("OPENQASM 3.0;\ninclude \"stdgates.inc\";\ninclude \"cvstdgates.inc\";\n\n");
    let count = |r: &str| {
        regs.iter()
            .filter(|(_, s)| s.reg == r && s.index.is_some())
            .count()
    };
    let (nq, nm) = (count("q"), count("m"));
    if nq > 0 {
        writeln!(out, "qubit[{nq}] q;").expect("string write");
    }
    if nm > 0 {
        writeln!(out, "qumode[{nm}] m;").expect("string write");
    }
    for (_, s) in regs.iter().filter(|(_, s)| s.index.is_none()) {
        writeln!(out, "qumode {};", s.reg).expect("string write");
    }
    let mut body = Vec::new();
    for (w, level) in tape.prep() {
        body.push(format!("pragma hybc.prep {} {level}", slots[w]));
    }
    for g in tape.ops() {
        body.push(statement(g, &slots, precision)?);
    }
    let samples: Vec<MeasurementSpec> = tape
        .measurements()
        .iter()
        .filter(|m| matches!(m, MeasurementSpec::Sample(_)))
        .cloned()
        .collect();
    for m in tape.measurements() {
        let (kind, o) = match m {
            MeasurementSpec::Expval(o) => ("expval", o),
            MeasurementSpec::Var(o) => ("var", o),
            MeasurementSpec::Sample(_) => continue,
        };
        let mut line = format!("pragma hybc.{kind}");
        if o.coeff != 1.0 {
            write!(line, " {}", number(o.coeff, precision)).expect("string write");
        }
        for f in o.factors() {
            let name = match f {
                Factor::N(_) => "N",
                Factor::Xquad(_) => "Xquad",
                Factor::PauliZ(_) => "Z",
                Factor::PauliX(_) => "X",
                Factor::PauliY(_) => "Y",
            };
            write!(line, " {name} {}", slots[f.wire()]).expect("string write");
        }
        body.push(line);
    }
    let schema = infer_basis_schema(&samples)?;
    for (k, (w, b)) in schema.entries().iter().enumerate() {
        let slot = &slots[w];
        body.push(match (env[w], b) {
            (WireType::Qubit, _) => format!("bit c{k} = measure {slot};"),
            (_, Basis::Discrete) => format!("uint c{k} = measure_n {slot};"),
            (_, Basis::Position) => format!("float c{k} = measure_x {slot};"),
        });
    }
    if !body.is_empty() {
        out.push('\n');
        for l in body {
            out.push_str(&l);
            out.push('\n');
        }
    }
    Ok((out, regs))
}

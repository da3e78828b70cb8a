//! Minimal reader for the JAQAL subset the exporter writes: one register, one
//! subcircuit of `Rx`/`Ry`/`Rz`/`CNOT`/`xCD` statements.

use hybc_core::gates::ops;
use hybc_core::ir::{GateInstruction, QuantumTape, WireLabel};

#[derive(Debug)]
pub struct Program {
    pub usepulses: Option<String>,
    pub register: usize,
    pub subcircuits: usize,
    pub statements: Vec<(String, Vec<String>)>,
}

fn qubit(arg: &str, n: usize) -> WireLabel {
    let i: usize = arg
        .strip_prefix("q[")
        .and_then(|r| r.strip_suffix(']'))
        .and_then(|i| i.parse().ok())
        .unwrap_or_else(|| panic!("bad qubit {arg}"));
    assert!(i < n, "q[{i}] outside register of {n}");
    WireLabel::Name(format!("q{i}"))
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("bad number {s}"))
}

pub fn read(text: &str) -> Program {
    let mut p = Program {
        usepulses: None,
        register: 0,
        subcircuits: 0,
        statements: vec![],
    };
    let mut inside = false;
    for line in text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with("//"))
    {
        if let Some(rest) = line.strip_prefix("from ") {
            p.usepulses = Some(rest.split_whitespace().next().unwrap().to_owned());
        } else if let Some(rest) = line.strip_prefix("register q[") {
            p.register = rest.trim_end_matches(']').parse().unwrap();
        } else if line == "subcircuit {" {
            assert!(!inside, "nested subcircuit");
            inside = true;
            p.subcircuits += 1;
        } else if line == "}" {
            assert!(inside);
            inside = false;
        } else {
            assert!(inside, "statement outside a subcircuit: {line}");
            let mut parts = line.split_whitespace();
            let name = parts.next().unwrap().to_owned();
            p.statements
                .push((name, parts.map(str::to_owned).collect()));
        }
    }
    assert!(!inside, "unterminated subcircuit");
    p
}

impl Program {
    /// Gates on wires `q0..` and physical modes `m{manifold}i{index}`.
    pub fn to_tape(&self) -> QuantumTape {
        let n = self.register;
        let ops: Vec<GateInstruction> = self
            .statements
            .iter()
            .map(|(name, a)| match name.as_str() {
                "Rx" => ops::rx(num(&a[1]), qubit(&a[0], n)),
                "Ry" => ops::ry(num(&a[1]), qubit(&a[0], n)),
                "Rz" => ops::rz(num(&a[1]), qubit(&a[0], n)),
                "CNOT" => ops::cnot(qubit(&a[0], n), qubit(&a[1], n)),
                "xCD" => {
                    let mode = format!("m{}i{}", a[1], a[2]);
                    let (re, im) = (num(&a[3]), num(&a[4]));
                    ops::xcd(re.hypot(im), im.atan2(re), qubit(&a[0], n), mode)
                }
                other => panic!("unknown JAQAL gate {other}"),
            })
            .collect();
        QuantumTape::from_ops(ops)
    }
}

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;
use thiserror::Error;

use super::rules::{rules, AncillaSource};
use crate::gates::GateSet;
use crate::ir::{GateInstruction, QuantumTape, WireLabel, ANCILLA_PREFIX};

pub const DEFAULT_MAX_DEPTH: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecomposeError {
    #[error("no rewrite route from `{gate}` to gate set `{target}`")]
    NoRoute { gate: String, target: String },
    #[error("`{gate}` needs more than {max_depth} nested rewrites")]
    DepthExceeded { gate: String, max_depth: usize },
}

/// Gate counts plus ancillae introduced, by wire type.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ResourceCount {
    pub gates: BTreeMap<String, u64>,
    pub ancilla_qubits: u64,
}

impl ResourceCount {
    pub fn of(tape: &QuantumTape) -> Self {
        let mut r = ResourceCount::default();
        for op in tape.ops() {
            *r.gates.entry(op.name().to_owned()).or_default() += 1;
        }
        r
    }

    pub fn add(&mut self, o: &ResourceCount) {
        for (k, v) in &o.gates {
            *self.gates.entry(k.clone()).or_default() += v;
        }
        self.ancilla_qubits += o.ancilla_qubits;
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Why {
    NoRoute,
    Depth,
}

struct Fail {
    why: Why,
    /// A cycle cut was involved, so the failure depends on the path.
    path_dependent: bool,
}

struct Scratch {
    next: usize,
    used: usize,
}

impl AncillaSource for Scratch {
    fn fresh_qubit(&mut self) -> WireLabel {
        let w = WireLabel::ancilla(self.next);
        self.next += 1;
        self.used += 1;
        w
    }
}

struct Engine<'a> {
    target: &'a GateSet,
    max_depth: usize,
    anc: Scratch,
    dead: HashSet<String>,
}

impl Engine<'_> {
    fn accepts(&self, g: &GateInstruction) -> bool {
        self.target.accept_all || (self.target.contains(g.name()) && g.modifiers().is_empty())
    }

    fn lower(
        &mut self,
        g: &GateInstruction,
        path: &mut Vec<String>,
        out: &mut Vec<GateInstruction>,
    ) -> Result<(), Fail> {
        if self.accepts(g) {
            out.push(g.clone());
            return Ok(());
        }
        if path.len() >= self.max_depth {
            return Err(Fail {
                why: Why::Depth,
                path_dependent: true,
            });
        }
        let key = g.shape_key();
        if path.contains(&key) {
            return Err(Fail {
                why: Why::NoRoute,
                path_dependent: true,
            });
        }
        if self.dead.contains(&key) {
            return Err(Fail {
                why: Why::NoRoute,
                path_dependent: false,
            });
        }
        path.push(key.clone());
        let mut why = Why::NoRoute;
        let mut path_dependent = false;
        for rule in rules() {
            let (next, used) = (self.anc.next, self.anc.used);
            let Some(seq) = rule.apply(g, &mut self.anc) else {
                continue;
            };
            let mut buf = Vec::new();
            let mut ok = true;
            for h in &seq {
                if let Err(f) = self.lower(h, path, &mut buf) {
                    if f.why == Why::Depth {
                        why = Why::Depth;
                    }
                    path_dependent |= f.path_dependent;
                    ok = false;
                    break;
                }
            }
            if ok {
                out.extend(buf);
                path.pop();
                return Ok(());
            }
            self.anc.next = next;
            self.anc.used = used;
        }
        path.pop();
        if !path_dependent {
            self.dead.insert(key);
        }
        Err(Fail {
            why,
            path_dependent,
        })
    }
}

fn first_free_ancilla(tape: &QuantumTape) -> usize {
    tape.wires()
        .iter()
        .filter_map(|w| match w {
            WireLabel::Name(s) => s.strip_prefix(ANCILLA_PREFIX)?.parse::<usize>().ok(),
            WireLabel::Int(_) => None,
        })
        .map(|k| k + 1)
        .max()
        .unwrap_or(0)
}

fn run(
    tape: &QuantumTape,
    target: &GateSet,
    max_depth: usize,
) -> Result<(QuantumTape, u64), DecomposeError> {
    if target.accept_all {
        return Ok((tape.clone(), 0));
    }
    let mut e = Engine {
        target,
        max_depth,
        anc: Scratch {
            next: first_free_ancilla(tape),
            used: 0,
        },
        dead: HashSet::new(),
    };
    let mut out = Vec::with_capacity(tape.ops().len());
    // Diagonalizing rotations are lowered with the same rules and appended.
    let diag = crate::measure::joint_diagonalizing_gates(tape.measurements());
    for g in tape.ops().iter().chain(&diag) {
        let mut path = Vec::new();
        e.lower(g, &mut path, &mut out).map_err(|f| match f.why {
            Why::Depth => DecomposeError::DepthExceeded {
                gate: g.to_string(),
                max_depth,
            },
            Why::NoRoute => DecomposeError::NoRoute {
                gate: g.shape_key(),
                target: target.name.clone(),
            },
        })?;
    }
    let measurements = if diag.is_empty() {
        tape.measurements().to_vec()
    } else {
        tape.measurements().iter().map(diagonalized).collect()
    };
    Ok((
        tape.with_ops(out).with_measurements(measurements),
        e.anc.used as u64,
    ))
}

/// After appending the rotations, X/Y factors read as Z.
fn diagonalized(m: &crate::measure::MeasurementSpec) -> crate::measure::MeasurementSpec {
    use crate::measure::{Factor, MeasurementSpec, Observable};
    let rot = |o: &Observable| {
        let f = o
            .factors()
            .iter()
            .map(|f| match f {
                Factor::PauliX(w) | Factor::PauliY(w) => Factor::PauliZ(w.clone()),
                other => other.clone(),
            })
            .collect();
        Observable::new(o.coeff, f).expect("same wires")
    };
    match m {
        MeasurementSpec::Expval(o) => MeasurementSpec::Expval(rot(o)),
        MeasurementSpec::Var(o) => MeasurementSpec::Var(rot(o)),
        s => s.clone(),
    }
}

/// Lowers every instruction into `target`, lowest rule id first with
/// backtracking. Instructions already in the target pass through; fresh
/// ancillae are named `_anc<k>` above any existing index.
pub fn decompose_to_gateset(
    tape: &QuantumTape,
    target: &GateSet,
    max_depth: usize,
) -> Result<QuantumTape, DecomposeError> {
    run(tape, target, max_depth).map(|(t, _)| t)
}

/// Gate multiset of the decomposed tape.
pub fn resource_count(
    tape: &QuantumTape,
    target: &GateSet,
) -> Result<ResourceCount, DecomposeError> {
    let (t, anc) = run(tape, target, DEFAULT_MAX_DEPTH)?;
    let mut r = ResourceCount::of(&t);
    r.ancilla_qubits = anc;
    Ok(r)
}

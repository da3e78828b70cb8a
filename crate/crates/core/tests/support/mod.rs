//! Shared oracle helpers for the integration suites.
#![allow(dead_code)]

pub mod jaqal;

use std::sync::Arc;

use hybc_core::gates::{library, lookup, GateDef, ParamKind};
use hybc_core::ir::{GateInstruction, Param, WireLabel};
use hybc_core::sim::expm::Plan;
use hybc_core::sim::gate_plan;

type Plan64 = Plan<f64>;
use hybc_core::types::{gate_signature, WireType};
use hybc_core::{CMatrix64, StateVector64};
use num_complex::Complex64;

/// Full unitary of `seq` (time order) over `wires`, each with its dimension.
pub fn unitary(seq: &[GateInstruction], wires: &[(WireLabel, usize)]) -> CMatrix64 {
    let dims: Vec<usize> = wires.iter().map(|(_, d)| *d).collect();
    let d: usize = dims.iter().product();
    let mut u = CMatrix64::identity(d, d);
    for g in seq {
        let pos: Vec<usize> = g
            .wires()
            .iter()
            .map(|w| {
                wires
                    .iter()
                    .position(|(v, _)| v == w)
                    .unwrap_or_else(|| panic!("wire {w} not in the register"))
            })
            .collect();
        let sub: Vec<usize> = pos.iter().map(|&p| dims[p]).collect();
        let plan = gate_plan::<f64>(g, &sub).unwrap_or_else(|e| panic!("{g}: {e}"));
        u = StateVector64::embed(&plan, &pos, &dims) * u;
    }
    u
}

/// `exp(K)` by scaling and squaring of a truncated Taylor series.
pub fn taylor_expm(k: &CMatrix64) -> CMatrix64 {
    let n = k.nrows();
    let norm = k.iter().map(|z| z.norm()).fold(0.0, f64::max) * n as f64;
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let a = k / Complex64::new(2f64.powi(s), 0.0);
    let mut term = CMatrix64::identity(n, n);
    let mut sum = term.clone();
    for j in 1..40 {
        term = &term * &a / Complex64::new(j as f64, 0.0);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// `max |a − e^{iγ} b|` over the chosen columns, with `γ` fitted on the
/// largest entry of `b` in those columns.
pub fn column_distance(a: &CMatrix64, b: &CMatrix64, cols: &[usize]) -> f64 {
    let mut best = (0.0, (0, 0));
    for &j in cols {
        for i in 0..b.nrows() {
            if b[(i, j)].norm() > best.0 {
                best = (b[(i, j)].norm(), (i, j));
            }
        }
    }
    let r = a[best.1] / b[best.1];
    let phase = if r.norm() > 0.0 {
        r / r.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    cols.iter()
        .flat_map(|&j| (0..a.nrows()).map(move |i| (i, j)))
        .map(|ij| (a[ij] - phase * b[ij]).norm())
        .fold(0.0, f64::max)
}

pub fn all_columns(m: &CMatrix64) -> Vec<usize> {
    (0..m.ncols()).collect()
}

/// Column indices whose qumode digits are all below `max_level`.
pub fn low_fock_columns(
    wires: &[(WireLabel, usize)],
    qumode: &[bool],
    max_level: usize,
) -> Vec<usize> {
    let dims: Vec<usize> = wires.iter().map(|(_, d)| *d).collect();
    let d: usize = dims.iter().product();
    (0..d)
        .filter(|&idx| {
            let mut rest = idx;
            let mut ok = true;
            for (k, &dk) in dims.iter().enumerate().rev() {
                let digit = rest % dk;
                rest /= dk;
                if qumode[k] && digit >= max_level {
                    ok = false;
                }
            }
            ok
        })
        .collect()
}

pub fn unitarity_defect(u: &CMatrix64) -> f64 {
    let n = u.nrows();
    (u.adjoint() * u - CMatrix64::identity(n, n))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Sample parameters for a gate: a small grid per scalar kind, fixed-length
/// vectors for vector kinds.
pub fn param_grid(def: &GateDef) -> Vec<Vec<Param>> {
    let scalar = |k: ParamKind| -> Vec<f64> {
        match k {
            ParamKind::Amplitude => vec![0.0, 0.3, 1.1],
            ParamKind::Phase => vec![0.0, 0.7, -2.0],
            _ => vec![-1.3, 0.4, 2.5],
        }
    };
    let mut out: Vec<Vec<Param>> = vec![vec![]];
    for spec in &def.params {
        let choices: Vec<Param> = match spec.kind {
            ParamKind::AngleVector => vec![
                Param::Vector(vec![0.3, -1.2, 2.0]),
                Param::Vector(vec![0.9]),
            ],
            k => scalar(k).into_iter().map(Param::Real).collect(),
        };
        out = out
            .iter()
            .flat_map(|p| {
                choices
                    .iter()
                    .map(move |c| [p.clone(), vec![c.clone()]].concat())
            })
            .collect();
    }
    // vector parameters must agree in length
    out.retain(|ps| {
        let lens: Vec<usize> = ps
            .iter()
            .filter_map(|p| p.as_vector().map(<[f64]>::len))
            .collect();
        lens.windows(2).all(|w| w[0] == w[1])
    });
    out
}

/// Wires `w0..` typed by the gate's signature, with cutoff `cutoff` for
/// qumodes.
pub fn gate_wires(def: &GateDef, cutoff: usize) -> Vec<(WireLabel, usize, WireType)> {
    let sig = gate_signature(def).unwrap_or_else(|e| panic!("{}: {e}", def.name));
    sig.iter()
        .enumerate()
        .map(|(i, t)| {
            let d = if *t == WireType::Qumode { cutoff } else { 2 };
            (WireLabel::Name(format!("w{i}")), d, *t)
        })
        .collect()
}

pub fn shipped() -> Vec<Arc<GateDef>> {
    library().iter().cloned().collect()
}

pub fn instr(name: &str, params: &[f64], wires: &[&str]) -> GateInstruction {
    GateInstruction::new(
        lookup(name).unwrap(),
        params.iter().map(|x| Param::Real(*x)).collect(),
        wires.to_vec(),
    )
    .unwrap()
}

/// How a rule is compared: on the whole truncated space, or on the columns
/// whose qumode levels stay below a bound.
#[derive(Clone, Copy, Debug)]
pub enum Regime {
    /// Cutoff 8, every column, 1e-9.
    Exact,
    /// Cutoff 8, columns with total photon number below 8, 1e-9 (a
    /// beamsplitter only swaps modes exactly where no level was cut).
    PhotonNumberBelowCutoff,
    /// Cutoff 32, columns with every qumode level below 8, 1e-6.
    LowFock,
}

impl Regime {
    pub fn cutoff(self) -> usize {
        match self {
            Regime::Exact | Regime::PhotonNumberBelowCutoff => 8,
            Regime::LowFock => 32,
        }
    }
    pub fn tolerance(self) -> f64 {
        match self {
            Regime::Exact | Regime::PhotonNumberBelowCutoff => 1e-9,
            Regime::LowFock => 1e-6,
        }
    }
}

pub struct RuleCase {
    pub rule: u32,
    pub gate: GateInstruction,
    pub regime: Regime,
}

fn case(rule: u32, gate: GateInstruction, regime: Regime) -> RuleCase {
    RuleCase { rule, gate, regime }
}

/// Instances covering every shipped identity of rules 1 to 13, forward and
/// reverse, with modifiers pushed through where the rule allows it, plus the
/// qubit-gate extensions 29 to 31.
pub fn rule_cases() -> Vec<RuleCase> {
    use hybc_core::gates::ops;
    use num_rational::Rational64;
    use Regime::*;
    let cz = |g: GateInstruction, q: &str| g.condition_on_qubit(q).unwrap();
    let sqrt = Rational64::new(1, 2);
    vec![
        case(1, ops::f("m"), Exact),
        case(1, ops::f("m").adjoint(), Exact),
        case(2, ops::mode_swap("a", "b"), PhotonNumberBelowCutoff),
        case(3, ops::cd(0.4, 0.3, "q", "m"), LowFock),
        case(3, ops::cd(0.5, -1.0, "q", "m").adjoint(), LowFock),
        case(3, cz(ops::d(0.3, 0.9, "m"), "q"), LowFock),
        case(4, ops::cr(0.7, "q", "m"), Exact),
        case(4, ops::cr(1.3, "q", "m").power(sqrt), Exact),
        case(4, cz(ops::r(-0.6, "m"), "q"), Exact),
        case(5, ops::cp("q", "m"), Exact),
        case(5, cz(ops::f("m"), "q"), Exact),
        case(6, ops::cs(0.3, 0.5, "q", "m"), LowFock),
        case(6, cz(ops::sq(0.2, -0.4, "m"), "q"), LowFock),
        case(7, ops::cbs(0.6, 0.2, "q", "a", "b"), Exact),
        case(7, cz(ops::bs(0.4, 1.1, "a", "b"), "q"), Exact),
        case(8, ops::ctms(0.3, 0.4, "q", "a", "b"), LowFock),
        case(8, cz(ops::tms(0.2, -0.3, "a", "b"), "q"), LowFock),
        case(9, ops::csum(0.4, "q", "a", "b"), LowFock),
        case(9, cz(ops::sum(-0.3, "a", "b"), "q"), LowFock),
        case(10, ops::snap(vec![0.3, -1.2, 2.0, 0.5], "m"), Exact),
        case(10, ops::snap(vec![0.7, 0.1], "m").adjoint(), Exact),
        case(11, ops::cd(0.45, 0.6, "q", "m"), LowFock),
        case(11, ops::cbs(0.8, -0.5, "q", "a", "b"), Exact),
        case(11, ops::ctms(0.25, 0.9, "q", "a", "b"), LowFock),
        case(12, cz(cz(ops::r(0.6, "m"), "c0"), "c1"), Exact),
        case(12, cz(ops::cr(0.5, "q", "m"), "c"), Exact),
        case(12, cz(cz(ops::d(0.35, 0.2, "m"), "c0"), "c1"), LowFock),
        case(13, ops::r(0.8, "m").controlled_by("c").unwrap(), Exact),
        case(
            13,
            ops::bs(0.5, 0.2, "a", "b").controlled_by("c").unwrap(),
            Exact,
        ),
        case(
            13,
            ops::d(0.4, 0.1, "m").controlled_by("c").unwrap(),
            LowFock,
        ),
        case(29, ops::h("t").controlled_by("c").unwrap(), Exact),
        case(29, ops::s("t").controlled_by("c").unwrap(), Exact),
        case(29, ops::y("t").controlled_by("c").unwrap(), Exact),
        case(29, ops::sdg("t").controlled_by("c").unwrap(), Exact),
        case(30, cz(ops::rx(0.9, "t"), "c"), Exact),
        case(30, cz(ops::ry(-1.4, "t"), "c"), Exact),
        case(31, cz(ops::snap(vec![0.3, -1.2, 2.0], "m"), "c"), Exact),
    ]
}

/// Runs every replacement any rule with the case's id produces and returns
/// the worst column deviation; panics if no rule of that id applies.
pub fn check_rule_case(c: &RuleCase) -> f64 {
    use hybc_core::rewrite::{rules, Counter};

    let replacements: Vec<Vec<GateInstruction>> = rules()
        .iter()
        .filter(|r| r.id == c.rule)
        .filter_map(|r| r.apply(&c.gate, &mut Counter(0)))
        .collect();
    assert!(
        !replacements.is_empty(),
        "no rule {} applies to {}",
        c.rule,
        c.gate
    );
    replacements
        .iter()
        .map(|rhs| sequence_deviation(std::slice::from_ref(&c.gate), rhs, c.regime))
        .fold(0.0, f64::max)
}

/// Worst column deviation between two gate sequences in the given regime.
/// Reserved ancilla wires are started in 0.
pub fn sequence_deviation(lhs: &[GateInstruction], rhs: &[GateInstruction], regime: Regime) -> f64 {
    use hybc_core::ir::QuantumTape;
    use hybc_core::sim::Cutoffs;
    use hybc_core::types::{infer_types, TypeEnv};

    let tape = QuantumTape::from_ops(lhs.iter().chain(rhs).cloned().collect());
    let env: TypeEnv = infer_types(&tape)
        .unwrap()
        .into_iter()
        .map(|(w, t)| {
            (
                w,
                if t == WireType::Bottom {
                    WireType::Qubit
                } else {
                    t
                },
            )
        })
        .collect();
    let wires = tape.wires();
    let cutoffs = Cutoffs::new(regime.cutoff()).unwrap();
    let dims: Vec<usize> = wires
        .iter()
        .map(|w| {
            if env[w] == WireType::Qumode {
                regime.cutoff()
            } else {
                2
            }
        })
        .collect();
    let columns: Vec<Vec<usize>> = digits(&dims)
        .into_iter()
        .filter(|ds| {
            let modes = wires
                .iter()
                .zip(ds)
                .filter(|(w, _)| env[*w] == WireType::Qumode);
            let ancilla_idle = wires
                .iter()
                .zip(ds)
                .all(|(w, d)| !w.is_reserved() || *d == 0);
            ancilla_idle
                && match regime {
                    Regime::Exact => true,
                    Regime::PhotonNumberBelowCutoff => modes.map(|(_, d)| d).sum::<usize>() < 8,
                    Regime::LowFock => modes.into_iter().all(|(_, d)| *d < 8),
                }
        })
        .collect();
    // one plan per gate, reused for every column
    let plans = |seq: &[GateInstruction]| -> Vec<(Plan64, Vec<usize>)> {
        seq.iter()
            .map(|g| {
                let pos: Vec<usize> = g
                    .wires()
                    .iter()
                    .map(|w| wires.iter().position(|v| v == w).unwrap())
                    .collect();
                let sub: Vec<usize> = pos.iter().map(|&p| dims[p]).collect();
                (
                    gate_plan::<f64>(g, &sub).unwrap_or_else(|e| panic!("{g}: {e}")),
                    pos,
                )
            })
            .collect()
    };
    let (lp, rp) = (plans(lhs), plans(rhs));
    let run = |seq: &[(Plan64, Vec<usize>)], ds: &[usize]| {
        let prep: Vec<(WireLabel, usize)> = wires.iter().cloned().zip(ds.iter().copied()).collect();
        let mut s = StateVector64::basis(wires.clone(), &env, &cutoffs, &prep).unwrap();
        for (plan, pos) in seq {
            s.apply_plan(plan, pos);
        }
        s.amplitudes().to_vec()
    };
    let a: Vec<Vec<Complex64>> = columns.iter().map(|ds| run(&lp, ds)).collect();
    let b: Vec<Vec<Complex64>> = columns.iter().map(|ds| run(&rp, ds)).collect();
    vector_distance(&a, &b)
}

/// Every multi-index over `dims`, most significant first.
pub fn digits(dims: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &d in dims {
        out = out
            .into_iter()
            .flat_map(|p| (0..d).map(move |k| [p.clone(), vec![k]].concat()))
            .collect();
    }
    out
}

/// `max |a − e^{iγ} b|` over all entries, one `γ` for the whole set.
pub fn vector_distance(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> f64 {
    let mut best = (0.0, (0, 0));
    for (j, col) in b.iter().enumerate() {
        for (i, z) in col.iter().enumerate() {
            if z.norm() > best.0 {
                best = (z.norm(), (j, i));
            }
        }
    }
    let (j, i) = best.1;
    let r = a[j][i] / b[j][i];
    let phase = if r.norm() > 0.0 {
        r / r.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(move |(p, q)| (p - phase * q).norm()))
        .fold(0.0, f64::max)
}

/// Builds an instance of `def` from raw numbers: scalars are taken in order
/// from `xs` (amplitudes folded into [0, 1.2]), vectors have length 3.
/// Wires come from `qubits` and `qumodes` by signature position.
pub fn instance(
    def: &Arc<GateDef>,
    xs: &[f64],
    qubits: &[&str],
    qumodes: &[&str],
) -> GateInstruction {
    let mut it = xs.iter().copied().cycle();
    let params: Vec<Param> = def
        .params
        .iter()
        .map(|p| match p.kind {
            ParamKind::AngleVector => Param::Vector((0..3).map(|_| it.next().unwrap()).collect()),
            ParamKind::Amplitude => Param::Real(it.next().unwrap().abs().min(1.2)),
            _ => Param::Real(it.next().unwrap()),
        })
        .collect();
    let sig = gate_signature(def).unwrap();
    let (mut nq, mut nm) = (0, 0);
    let wires: Vec<&str> = sig
        .iter()
        .map(|t| {
            if *t == WireType::Qumode {
                nm += 1;
                qumodes[nm - 1]
            } else {
                nq += 1;
                qubits[nq - 1]
            }
        })
        .collect();
    GateInstruction::new(def.clone(), params, wires).unwrap_or_else(|e| panic!("{}: {e}", def.name))
}

//! Shorthand constructors for shipped gates.

use crate::ir::{GateInstruction, Param, WireLabel};

fn mk(name: &str, params: Vec<f64>, wires: Vec<WireLabel>) -> GateInstruction {
    GateInstruction::named(name, params.into_iter().map(Param::Real).collect(), wires)
        .unwrap_or_else(|e| panic!("{name}: {e}"))
}

macro_rules! fixed {
    ($($f:ident => $n:literal),* $(,)?) => {$(
        pub fn $f(w: impl Into<WireLabel>) -> GateInstruction { mk($n, vec![], vec![w.into()]) }
    )*};
}

macro_rules! angle1 {
    ($($f:ident => $n:literal),* $(,)?) => {$(
        pub fn $f(theta: f64, w: impl Into<WireLabel>) -> GateInstruction { mk($n, vec![theta], vec![w.into()]) }
    )*};
}

macro_rules! polar1 {
    ($($f:ident => $n:literal),* $(,)?) => {$(
        pub fn $f(r: f64, phi: f64, w: impl Into<WireLabel>) -> GateInstruction { mk($n, vec![r, phi], vec![w.into()]) }
    )*};
}

macro_rules! qm2 {
    ($($f:ident => $n:literal [$($p:ident),*]),* $(,)?) => {$(
        pub fn $f($($p: f64,)* q: impl Into<WireLabel>, m: impl Into<WireLabel>) -> GateInstruction {
            mk($n, vec![$($p),*], vec![q.into(), m.into()])
        }
    )*};
}

macro_rules! qmm3 {
    ($($f:ident => $n:literal [$($p:ident),*]),* $(,)?) => {$(
        pub fn $f($($p: f64,)* q: impl Into<WireLabel>, m1: impl Into<WireLabel>, m2: impl Into<WireLabel>) -> GateInstruction {
            mk($n, vec![$($p),*], vec![q.into(), m1.into(), m2.into()])
        }
    )*};
}

fixed!(h => "H", x => "X", y => "Y", z => "Z", s => "S", sdg => "Sdg", f => "F");
angle1!(rx => "RX", ry => "RY", rz => "RZ", r => "R", kerr => "K", cubic => "C");
polar1!(d => "D", sq => "Sq");
qm2!(
    cr => "CR" [theta],
    cp => "CP" [],
    cd => "CD" [r, phi],
    cs => "CS" [r, phi],
    jc => "JC" [theta, phi],
    ajc => "AJC" [theta, phi],
    rb => "RB" [r, phi],
    xcd => "xCD" [r, phi],
    bs => "BS" [theta, phi],
    tms => "TMS" [r, phi],
    sum => "SUM" [lambda],
    cnot => "CNOT" [],
);
qmm3!(cbs => "CBS" [theta, phi], ctms => "CTMS" [r, phi], csum => "CSUM" [lambda]);

pub fn mode_swap(a: impl Into<WireLabel>, b: impl Into<WireLabel>) -> GateInstruction {
    mk("ModeSwap", vec![], vec![a.into(), b.into()])
}

pub fn snap(phis: Vec<f64>, m: impl Into<WireLabel>) -> GateInstruction {
    GateInstruction::named("SNAP", vec![Param::Vector(phis)], vec![m.into()]).expect("SNAP")
}

pub fn sqr(
    thetas: Vec<f64>,
    phis: Vec<f64>,
    q: impl Into<WireLabel>,
    m: impl Into<WireLabel>,
) -> GateInstruction {
    GateInstruction::named(
        "SQR",
        vec![Param::Vector(thetas), Param::Vector(phis)],
        vec![q.into(), m.into()],
    )
    .expect("SQR")
}

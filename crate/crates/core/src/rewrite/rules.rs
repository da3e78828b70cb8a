//! Shipped rewrite rules. Each rule maps one instruction to a replacement
//! sequence in time order, or declines.

use std::f64::consts::{FRAC_PI_2, PI};

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};

use crate::gates::{self, ops, GateDef, GateForm};
use crate::ir::{GateInstruction, Modifier, Param, WireLabel};

/// Source of fresh ancilla labels.
pub trait AncillaSource {
    fn fresh_qubit(&mut self) -> WireLabel;
}

/// Hands out `_anc<k>` labels from a counter.
#[derive(Clone, Debug, Default)]
pub struct Counter(pub usize);

impl AncillaSource for Counter {
    fn fresh_qubit(&mut self) -> WireLabel {
        let w = WireLabel::ancilla(self.0);
        self.0 += 1;
        w
    }
}

type Produce = fn(&GateInstruction, &mut dyn AncillaSource) -> Option<Vec<GateInstruction>>;

pub struct RewriteRule {
    pub id: u32,
    pub name: &'static str,
    /// Fresh qubit ancillae allocated per application.
    pub ancillae: usize,
    produce: Produce,
}

impl RewriteRule {
    pub fn apply(
        &self,
        g: &GateInstruction,
        anc: &mut dyn AncillaSource,
    ) -> Option<Vec<GateInstruction>> {
        (self.produce)(g, anc)
    }

    pub fn matches(&self, g: &GateInstruction) -> bool {
        self.apply(g, &mut Counter(0)).is_some()
    }
}

impl std::fmt::Debug for RewriteRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "rule {} ({})", self.id, self.name)
    }
}

/// What a replacement sequence guarantees, which decides the modifiers that
/// may be pushed through it.
#[derive(Clone, Copy)]
struct Props {
    /// Equal as operators, no stray global phase (Ctrl may be pushed).
    exact: bool,
    /// Product of the outputs' exponentials has the matched gate's generator
    /// (CondZ and fractional powers may be pushed, given commutation).
    generator: bool,
    /// Outputs mutually commute.
    commuting: bool,
}

const EXACT_SINGLE: Props = Props {
    exact: true,
    generator: true,
    commuting: true,
};
const PHASE_ONLY: Props = Props {
    exact: false,
    generator: false,
    commuting: false,
};

fn lib(name: &str) -> std::sync::Arc<GateDef> {
    gates::lookup(name).expect("shipped gate")
}

/// `g` without modifiers and conditioning wires.
fn bare(g: &GateInstruction) -> GateInstruction {
    GateInstruction::raw(
        g.gate().clone(),
        g.params().to_vec(),
        g.base_wires().to_vec(),
        vec![],
    )
}

/// Rebuilds `base` with a full modifier list; condition wires are derived
/// from the list.
fn with_mods(base: &GateInstruction, mods: Vec<Modifier>) -> Option<GateInstruction> {
    let mut wires: Vec<WireLabel> = mods
        .iter()
        .filter_map(|m| m.control_wire().cloned())
        .rev()
        .collect();
    wires.extend(base.base_wires().iter().cloned());
    base.with_modifiers(wires, mods).ok()
}

fn apply_mod(g: &GateInstruction, m: &Modifier) -> Option<GateInstruction> {
    let mut mods = g.modifiers().to_vec();
    mods.push(m.clone());
    with_mods(&bare(g), mods)
}

/// Wraps a replacement sequence in the matched instruction's modifiers,
/// innermost first. Declines when a modifier cannot be distributed.
fn push_through(
    mods: &[Modifier],
    mut seq: Vec<GateInstruction>,
    p: Props,
) -> Option<Vec<GateInstruction>> {
    for m in mods {
        let single = seq.len() <= 1 || p.commuting;
        match m {
            Modifier::Adjoint => {
                seq = seq.iter().rev().map(GateInstruction::adjoint).collect();
            }
            Modifier::Pow(k) if k.is_zero() => return Some(vec![]),
            Modifier::Pow(k) if single && (k.is_integer() || p.generator) => {
                seq = seq.iter().map(|g| g.power(*k)).collect();
            }
            Modifier::Pow(k) if k.is_integer() => {
                let n = k.abs().to_integer();
                if n > 64 {
                    return None;
                }
                let unit: Vec<_> = if k.is_negative() {
                    seq.iter().rev().map(GateInstruction::adjoint).collect()
                } else {
                    seq
                };
                seq = (0..n).flat_map(|_| unit.iter().cloned()).collect();
            }
            Modifier::Pow(_) => return None,
            Modifier::CondZ(_) if p.generator && single => {
                seq = seq.iter().map(|g| apply_mod(g, m)).collect::<Option<_>>()?;
            }
            Modifier::Ctrl(_) if p.exact => {
                seq = seq.iter().map(|g| apply_mod(g, m)).collect::<Option<_>>()?;
            }
            _ => return None,
        }
    }
    Some(seq)
}

/// Base rule: expand the bare gate named `name`, then distribute modifiers.
fn base_rule(
    g: &GateInstruction,
    name: &str,
    p: Props,
    f: impl FnOnce(&GateInstruction) -> Vec<GateInstruction>,
) -> Option<Vec<GateInstruction>> {
    if g.name() != name {
        return None;
    }
    push_through(g.modifiers(), f(&bare(g)), p)
}

fn w(g: &GateInstruction, i: usize) -> WireLabel {
    g.base_wires()[i].clone()
}

fn p(g: &GateInstruction, i: usize) -> f64 {
    g.params()[i].as_real().expect("scalar parameter")
}

/// Modifier list split as `(power, adjoint, conditions innermost first)`.
fn split(g: &GateInstruction) -> (Rational64, bool, Vec<Modifier>) {
    let (k, adj) = g.inner();
    (k, adj, g.conditions().cloned().collect())
}

fn inner_mods(k: Rational64, adj: bool) -> Vec<Modifier> {
    let mut v = vec![];
    if !k.is_one() {
        v.push(Modifier::Pow(k));
    }
    if adj {
        v.push(Modifier::Adjoint);
    }
    v
}

fn fold(g: &GateInstruction, _: &mut dyn AncillaSource) -> Option<Vec<GateInstruction>> {
    if g.is_identity() {
        return Some(vec![]);
    }
    let f = g.fold();
    (f != *g).then(|| vec![f])
}

fn r1(g: &GateInstruction, _: &mut dyn AncillaSource) -> Option<Vec<GateInstruction>> {
    base_rule(g, "F", EXACT_SINGLE, |b| vec![ops::r(FRAC_PI_2, w(b, 0))])
}

fn r2(g: &GateInstruction, _: &mut dyn AncillaSource) -> Option<Vec<GateInstruction>> {
    let props = Props {
        exact: true,
        generator: false,
        commuting: false,
    };
    base_rule(g, "ModeSwap", props, |b| {
        vec![
            ops::bs(PI, 0.0, w(b, 0), w(b, 1)),
            ops::r(-FRAC_PI_2, w(b, 0)),
            ops::r(-FRAC_PI_2, w(b, 1)),
        ]
    })
}

/// `(hybrid, bare)` pairs of the conditioned-gate family, rules 3 to 9.
const CONDZ_FAMILY: &[(u32, &str, &str)] = &[
    (3, "CD", "D"),
    (4, "CR", "R"),
    (5, "CP", "F"),
    (6, "CS", "Sq"),
    (7, "CBS", "BS"),
    (8, "CTMS", "TMS"),
    (9, "CSUM", "SUM"),
];

pub(crate) fn is_condz_family(name: &str) -> bool {
    CONDZ_FAMILY.iter().any(|(_, h, _)| *h == name)
}

/// Hybrid gate as `CondZ(bare)`.
fn condz_forward(id: u32, g: &GateInstruction) -> Option<Vec<GateInstruction>> {
    let &(_, hybrid, plain) = CONDZ_FAMILY.iter().find(|(i, _, _)| *i == id)?;
    base_rule(g, hybrid, EXACT_SINGLE, |b| {
        let q = w(b, 0);
        let rest: Vec<WireLabel> = b.base_wires()[1..].to_vec();
        let params = match hybrid {
            "CR" => vec![Param::Real(p(b, 0) / 2.0)],
            _ => b.params().to_vec(),
        };
        let inner = GateInstruction::new(lib(plain), params, rest).expect("arity matches");
        vec![inner.condition_on_qubit(q).expect("distinct wires")]
    })
}

/// `CondZ(bare)` as its hybrid gate, keeping outer conditions.
fn condz_reverse(id: u32, g: &GateInstruction) -> Option<Vec<GateInstruction>> {
    let &(_, hybrid, plain) = CONDZ_FAMILY.iter().find(|(i, _, _)| *i == id)?;
    if g.name() != plain {
        return None;
    }
    let (k, adj, conds) = split(g);
    if !k.is_one() || adj {
        return None;
    }
    let Some(Modifier::CondZ(q)) = conds.first() else {
        return None;
    };
    let params = match hybrid {
        "CR" => vec![Param::Real(2.0 * p(g, 0))],
        _ => g.params().to_vec(),
    };
    let mut wires = vec![q.clone()];
    wires.extend(g.base_wires().iter().cloned());
    let h = GateInstruction::new(lib(hybrid), params, wires).ok()?;
    push_through(&conds[1..], vec![h], EXACT_SINGLE)
}

macro_rules! condz_rules {
    ($($f:ident $r:ident => $id:literal),*) => {$(
        fn $f(g: &GateInstruction, _: &mut dyn AncillaSource) -> Option<Vec<GateInstruction>> { condz_forward($id, g) }
        fn $r(g: &GateInstruction, _: &mut dyn AncillaSource) -> Option<Vec<GateInstruction>> { condz_reverse($id, g) }
    )*};
}

condz_rules!(r3 r3r => 3, r4 r4r => 4, r5 r5r => 5, r6 r6r => 6, r7 r7r => 7, r8 r8r => 8, r9 r9r => 9);

/// CP is also `CR(π)`.
fn r5b(g: &GateInstruction, _: &mut dyn AncillaSource) -> Option<Vec<GateInstruction>> {
    base_rule(g, "CP", EXACT_SINGLE, |b| {
        vec![ops::cr(PI, w(b, 0), w(b, 1))]
    })
}

fn r10(g: &GateInstruction, anc: &mut dyn AncillaSource) -> Option<Vec<GateInstruction>> {
    if g.name() != "SNAP" {
        return None;
    }
    let a = anc.fresh_qubit();
    // Correct on the ancilla's |0> subspace, which survives Adjoint and Ctrl.
    let props = Props {
        exact: true,
        generator: false,
        commuting: false,
    };
    base_rule(g, "SNAP", props, |b| {
        let phis = b.params()[0]
            .as_vector()
            .expect("vector parameter")
            .to_vec();
        let n = phis.len();
        vec![
            ops::sqr(vec![PI; n], vec![0.0; n], a.clone(), w(b, 0)),
            ops::sqr(vec![-PI; n], phis, a.clone(), w(b, 0)),
        ]
    })
}

/// Rule 11 instances: `(gate, phase-shifted partner)`. The conditioned form is
/// conjugated by CP on the qubit and the first mode.
const CP_CONJUGATION: &[(&str, &str)] = &[("CD", "D"), ("CBS", "BS"), ("CTMS", "TMS")];

fn r11(g: &GateInstruction, _: &mut dyn AncillaSource) -> Option<Vec<GateInstruction>> {
    let (hybrid, plain) = *CP_CONJUGATION.iter().find(|(h, _)| *h == g.name())?;
    base_rule(
        g,
        hybrid,
        Props {
            exact: true,
            generator: false,
            commuting: false,
        },
        |b| {
            let q = w(b, 0);
            let modes: Vec<WireLabel> = b.base_wires()[1..].to_vec();
            let shifted = vec![Param::Real(p(b, 0)), Param::Real(p(b, 1) + FRAC_PI_2)];
            let mid =
                GateInstruction::new(lib(plain), shifted, modes.clone()).expect("arity matches");
            let cp = ops::cp(q, modes[0].clone());
            vec![cp.adjoint(), mid, cp]
        },
    )
}

/// Does the gate carry its own Z-conditioning qubit at base wire 0?
fn inherent_condition(name: &str) -> bool {
    is_condz_family(name) || name == "RZ"
}

fn r12(g: &GateInstruction, _: &mut dyn AncillaSource) -> Option<Vec<GateInstruction>> {
    let (k, adj, conds) = split(g);
    if conds.is_empty() || conds.iter().any(|m| !matches!(m, Modifier::CondZ(_))) {
        return None;
    }
    if !matches!(g.gate().form, GateForm::Exponential(_)) {
        return None;
    }
    let inherent = inherent_condition(g.name());
    if conds.len() + usize::from(inherent) < 2 {
        return None;
    }
    // Qubits outermost first; the last one keeps its condition.
    let mut qs: Vec<WireLabel> = conds
        .iter()
        .rev()
        .map(|m| m.control_wire().expect("condition").clone())
        .collect();
    let mut mods = inner_mods(k, adj);
    if inherent {
        qs.push(g.base_wires()[0].clone());
    } else {
        mods.push(conds[0].clone());
    }
    let kept = with_mods(&bare(g), mods)?;
    let ladder: Vec<GateInstruction> = qs
        .windows(2)
        .map(|p| ops::cnot(p[0].clone(), p[1].clone()))
        .collect();
    let mut out = ladder.clone();
    out.push(kept);
    out.extend(ladder.into_iter().rev());
    Some(out)
}

fn r13(g: &GateInstruction, _: &mut dyn AncillaSource) -> Option<Vec<GateInstruction>> {
    if !g.gate().is_exponential() {
        return None;
    }
    let (k, adj, conds) = split(g);
    let i = conds.iter().position(|m| matches!(m, Modifier::Ctrl(_)))?;
    let c = conds[i].control_wire().expect("condition").clone();
    let mut mods = inner_mods(k, adj);
    mods.extend(conds[..i].iter().cloned());
    let u = with_mods(&bare(g), mods)?;
    let half = u.power(Rational64::new(1, 2));
    let second = half.adjoint().condition_on_qubit(c).ok()?;
    push_through(&conds[i + 1..], vec![half, second], EXACT_SINGLE)
}

fn r14(g: &GateInstruction, _: &mut dyn AncillaSource) -> Option<Vec<GateInstruction>> {
    let d = g.gate().decomposition.as_ref()?;
    let seq = (d.build)(g.params(), g.base_wires());
    let props = Props {
        exact: true,
        generator: d.commuting,
        commuting: d.commuting,
    };
    push_through(g.modifiers(), seq, props)
}

macro_rules! euler_rules {
    ($($f:ident : $n:literal => [$($g:ident($a:expr)),*]),*) => {$(
        fn $f(g: &GateInstruction, _: &mut dyn AncillaSource) -> Option<Vec<GateInstruction>> {
            base_rule(g, $n, PHASE_ONLY, |b| vec![$(ops::$g($a, w(b, 0))),*])
        }
    )*};
}

euler_rules!(
    r20: "H" => [rz(PI), ry(FRAC_PI_2)],
    r21: "X" => [rx(PI)],
    r22: "Y" => [ry(PI)],
    r23: "Z" => [rz(PI)],
    r24: "S" => [rz(FRAC_PI_2)],
    r25: "Sdg" => [rz(-FRAC_PI_2)]
);

/// Unconditioned displacement via a conditioned one on a fresh |0> ancilla.
fn r26(g: &GateInstruction, anc: &mut dyn AncillaSource) -> Option<Vec<GateInstruction>> {
    if g.name() != "D" {
        return None;
    }
    let a = anc.fresh_qubit();
    base_rule(
        g,
        "D",
        Props {
            exact: true,
            generator: false,
            commuting: false,
        },
        |b| vec![ops::cd(p(b, 0), p(b, 1), a.clone(), w(b, 0))],
    )
}

fn r27(g: &GateInstruction, _: &mut dyn AncillaSource) -> Option<Vec<GateInstruction>> {
    match (g.name(), g.modifiers()) {
        ("X", [Modifier::Ctrl(c)]) => Some(vec![ops::cnot(c.clone(), g.base_wires()[0].clone())]),
        _ => None,
    }
}

/// `CD = H·xCD·H` on the qubit.
fn r28(g: &GateInstruction, _: &mut dyn AncillaSource) -> Option<Vec<GateInstruction>> {
    base_rule(
        g,
        "CD",
        Props {
            exact: true,
            generator: false,
            commuting: false,
        },
        |b| {
            let q = w(b, 0);
            vec![
                ops::h(q.clone()),
                ops::xcd(p(b, 0), p(b, 1), q.clone(), w(b, 1)),
                ops::h(q),
            ]
        },
    )
}

type EulerRow = (&'static str, f64, &'static [(&'static str, f64)]);

/// `(gate, global phase, Euler rotations in time order)`: the gate equals
/// `e^{i phase}` times the rotation product.
const EXACT_EULER: &[EulerRow] = &[
    ("H", FRAC_PI_2, &[("RZ", PI), ("RY", FRAC_PI_2)]),
    ("X", FRAC_PI_2, &[("RX", PI)]),
    ("Y", FRAC_PI_2, &[("RY", PI)]),
    ("Z", FRAC_PI_2, &[("RZ", PI)]),
    ("S", FRAC_PI_2 / 2.0, &[("RZ", FRAC_PI_2)]),
    ("Sdg", -FRAC_PI_2 / 2.0, &[("RZ", -FRAC_PI_2)]),
];

/// Controlled fixed gate: its phase becomes an RZ on the control, then each
/// Euler rotation is controlled.
fn r29(g: &GateInstruction, _: &mut dyn AncillaSource) -> Option<Vec<GateInstruction>> {
    let (_, phase, rots) = EXACT_EULER.iter().find(|(n, _, _)| *n == g.name())?;
    let (k, adj, conds) = split(g);
    let Some(Modifier::Ctrl(c)) = conds.first() else {
        return None;
    };
    if !k.is_one() || adj {
        return None;
    }
    let t = w(g, 0);
    let mut seq = vec![ops::rz(*phase, c.clone())];
    for (name, angle) in rots.iter() {
        let r = GateInstruction::new(lib(name), vec![Param::Real(*angle)], vec![t.clone()]).ok()?;
        seq.push(r.controlled_by(c.clone()).ok()?);
    }
    // the control's RZ carries a global phase, so nothing more may be pushed
    push_through(&conds[1..], seq, PHASE_ONLY)
}

/// Conditioned RX/RY: rotate the target's basis onto Z around a conditioned RZ.
fn r30(g: &GateInstruction, _: &mut dyn AncillaSource) -> Option<Vec<GateInstruction>> {
    if !matches!(g.name(), "RX" | "RY") {
        return None;
    }
    let (k, adj, conds) = split(g);
    let Some(Modifier::CondZ(c)) = conds.first() else {
        return None;
    };
    if !k.is_one() || adj {
        return None;
    }
    let t = w(g, 0);
    let rz = ops::rz(p(g, 0), t.clone())
        .condition_on_qubit(c.clone())
        .ok()?;
    let seq = match g.name() {
        "RX" => vec![ops::h(t.clone()), rz, ops::h(t)],
        "RY" => vec![
            ops::sdg(t.clone()),
            ops::h(t.clone()),
            rz,
            ops::h(t.clone()),
            ops::s(t),
        ],
        _ => return None,
    };
    push_through(
        &conds[1..],
        seq,
        Props {
            exact: true,
            generator: false,
            commuting: false,
        },
    )
}

/// Conditioned SNAP: per-level Z rotations of the condition qubit, which an
/// SQR about X performs between Hadamards.
fn r31(g: &GateInstruction, _: &mut dyn AncillaSource) -> Option<Vec<GateInstruction>> {
    if g.name() != "SNAP" {
        return None;
    }
    let (k, adj, conds) = split(g);
    let Some(Modifier::CondZ(c)) = conds.first() else {
        return None;
    };
    if !k.is_one() || adj {
        return None;
    }
    let phis = g.params()[0].as_vector()?;
    let thetas: Vec<f64> = phis.iter().map(|f| 2.0 * f).collect();
    let seq = vec![
        ops::h(c.clone()),
        ops::sqr(thetas, vec![0.0; phis.len()], c.clone(), w(g, 0)),
        ops::h(c.clone()),
    ];
    push_through(
        &conds[1..],
        seq,
        Props {
            exact: true,
            generator: false,
            commuting: false,
        },
    )
}

macro_rules! rule {
    ($id:expr, $name:expr, $anc:expr, $f:expr) => {
        RewriteRule {
            id: $id,
            name: $name,
            ancillae: $anc,
            produce: $f,
        }
    };
}

/// Complete shipped rule set in application order (lowest id first).
pub fn rules() -> &'static [RewriteRule] {
    static RULES: std::sync::OnceLock<Vec<RewriteRule>> = std::sync::OnceLock::new();
    RULES.get_or_init(|| {
        vec![
            rule!(0, "fold Adjoint/Pow into parameters", 0, fold),
            rule!(1, "F = R(pi/2)", 0, r1),
            rule!(2, "ModeSwap = BS(pi,0) then R(-pi/2) on both modes", 0, r2),
            rule!(3, "CD = CondZ(D)", 0, r3),
            rule!(3, "CondZ(D) = CD", 0, r3r),
            rule!(4, "CR(theta) = CondZ(R(theta/2))", 0, r4),
            rule!(4, "CondZ(R(theta)) = CR(2 theta)", 0, r4r),
            rule!(5, "CP = CR(pi)", 0, r5b),
            rule!(5, "CP = CondZ(F)", 0, r5),
            rule!(5, "CondZ(F) = CP", 0, r5r),
            rule!(6, "CS = CondZ(Sq)", 0, r6),
            rule!(6, "CondZ(Sq) = CS", 0, r6r),
            rule!(7, "CBS = CondZ(BS)", 0, r7),
            rule!(7, "CondZ(BS) = CBS", 0, r7r),
            rule!(8, "CTMS = CondZ(TMS)", 0, r8),
            rule!(8, "CondZ(TMS) = CTMS", 0, r8r),
            rule!(9, "CSUM = CondZ(SUM)", 0, r9),
            rule!(9, "CondZ(SUM) = CSUM", 0, r9r),
            rule!(10, "SNAP = two SQR on an ancilla", 1, r10),
            rule!(
                11,
                "conditioned displacement-type gate = CP-conjugated partner",
                0,
                r11
            ),
            rule!(
                12,
                "multi-qubit CondZ = CNOT ladder around one CondZ",
                0,
                r12
            ),
            rule!(
                13,
                "controlled U = sqrt(U) then sqrt(CondZ(U))^dagger",
                0,
                r13
            ),
            rule!(14, "registered decomposition", 0, r14),
            rule!(20, "H = RZ(pi) then RY(pi/2)", 0, r20),
            rule!(21, "X = RX(pi)", 0, r21),
            rule!(22, "Y = RY(pi)", 0, r22),
            rule!(23, "Z = RZ(pi)", 0, r23),
            rule!(24, "S = RZ(pi/2)", 0, r24),
            rule!(25, "Sdg = RZ(-pi/2)", 0, r25),
            rule!(26, "D = CD on a fresh |0> ancilla", 1, r26),
            rule!(27, "Ctrl(X) = CNOT", 0, r27),
            rule!(28, "CD = H xCD H", 0, r28),
            rule!(
                29,
                "Ctrl(fixed gate) = control phase then controlled Euler rotations",
                0,
                r29
            ),
            rule!(30, "CondZ(RX|RY) = basis change around CondZ(RZ)", 0, r30),
            rule!(31, "CondZ(SNAP) = H SQR H on the condition qubit", 0, r31),
        ]
    })
}

/// The gate-definition identities (rules 1 to 10) applied to a bare gate; used to
/// derive wire types structurally. Reverse forms and device rules are not
/// consulted.
pub fn structural_expansion(g: &GateInstruction) -> Option<Vec<GateInstruction>> {
    let mut anc = Counter(0);
    let forward: [Produce; 10] = [r1, r2, r3, r4, r5b, r6, r7, r8, r9, r10];
    forward.iter().find_map(|f| f(g, &mut anc))
}

/// Convenience: looks up the first rule with `id` that accepts `g`.
pub fn apply_rule(
    id: u32,
    g: &GateInstruction,
    anc: &mut dyn AncillaSource,
) -> Option<Vec<GateInstruction>> {
    rules()
        .iter()
        .filter(|r| r.id == id)
        .find_map(|r| r.apply(g, anc))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cp_becomes_cr_pi() {
        let out = apply_rule(5, &ops::cp("q", "m"), &mut Counter(0)).unwrap();
        assert_eq!(out, vec![ops::cr(PI, "q", "m")]);
        let out = r5(&ops::cp("q", "m"), &mut Counter(0)).unwrap();
        assert_eq!(out[0].name(), "F");
    }

    #[test]
    fn cr_halves_into_condz() {
        let out = r4(&ops::cr(0.8, "q", "m"), &mut Counter(0)).unwrap();
        assert_eq!(out, vec![ops::r(0.4, "m").condition_on_qubit("q").unwrap()]);
        let back = r4r(&out[0], &mut Counter(0)).unwrap();
        assert_eq!(back, vec![ops::cr(0.8, "q", "m")]);
    }

    #[test]
    fn snap_uses_one_ancilla() {
        let mut c = Counter(3);
        let out = r10(&ops::snap(vec![0.1, 0.2, 0.3], "m"), &mut c).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].wires()[0], WireLabel::ancilla(3));
        assert_eq!(c.0, 4);
    }

    #[test]
    fn ladder_has_two_n_minus_one_cnots() {
        let g = ops::f("m")
            .condition_on_qubit("a")
            .unwrap()
            .condition_on_qubit("b")
            .unwrap()
            .condition_on_qubit("c")
            .unwrap();
        let out = r12(&g, &mut Counter(0)).unwrap();
        assert_eq!(out.iter().filter(|g| g.name() == "CNOT").count(), 4);
        assert_eq!(out[0], ops::cnot("c", "b"));
        assert_eq!(out[2].conditions().count(), 1);
        // inherent qubit counts
        let cd = ops::cd(0.1, 0.0, "q", "m").condition_on_qubit("c").unwrap();
        let out = r12(&cd, &mut Counter(0)).unwrap();
        assert_eq!(
            out,
            vec![
                ops::cnot("c", "q"),
                ops::cd(0.1, 0.0, "q", "m"),
                ops::cnot("c", "q")
            ]
        );
    }

    #[test]
    fn controlled_rotation_splits() {
        let g = ops::r(0.6, "m").controlled_by("c").unwrap();
        let out = r13(&g, &mut Counter(0)).unwrap();
        assert_eq!(out[0].fold(), ops::r(0.3, "m"));
        assert_eq!(
            out[1].fold(),
            ops::r(-0.3, "m").condition_on_qubit("c").unwrap()
        );
    }

    #[test]
    fn phase_only_rules_refuse_ctrl() {
        let g = ops::h("q").controlled_by("c").unwrap();
        assert!(r20(&g, &mut Counter(0)).is_none());
        assert!(r20(&ops::h("q"), &mut Counter(0)).is_some());
    }

    #[test]
    fn structural_expansion_covers_table_gates() {
        for n in [
            "F", "ModeSwap", "CD", "CR", "CP", "CS", "CBS", "CTMS", "CSUM", "SNAP",
        ] {
            let def = lib(n);
            let wires: Vec<WireLabel> = (0..def.arity)
                .map(|i| WireLabel::from(format!("w{i}")))
                .collect();
            let params = def
                .params
                .iter()
                .map(|p| match p.kind {
                    crate::gates::ParamKind::AngleVector => Param::Vector(vec![0.1]),
                    _ => Param::Real(0.1),
                })
                .collect();
            let g = GateInstruction::new(def, params, wires).unwrap();
            assert!(structural_expansion(&g).is_some(), "{n}");
        }
        assert!(structural_expansion(&ops::d(0.1, 0.0, "m")).is_none());
    }
}

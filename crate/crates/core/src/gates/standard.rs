use std::f64::consts::FRAC_PI_2;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use super::generator::*;
use super::{
    Decomposition, FixedGate, GateClass, GateDef, GateForm, ParamKind, ParamSpec, PowerLaw,
};
use crate::ir::{GateInstruction, Param};
use crate::types::WireType::{Qubit, Qumode};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn re(p: &[Param], i: usize) -> f64 {
    p[i].as_real().expect("validated scalar parameter")
}

fn vec_of(p: &[Param], i: usize) -> &[f64] {
    p[i].as_vector().expect("validated vector parameter")
}

fn amp(p: &[Param]) -> Complex64 {
    Complex64::from_polar(re(p, 0), re(p, 1))
}

const fn ps(name: &'static str, kind: ParamKind) -> ParamSpec {
    ParamSpec { name, kind }
}

const ANGLE: ParamSpec = ps("theta", ParamKind::Angle);
const R: ParamSpec = ps("r", ParamKind::Amplitude);
const PHI: ParamSpec = ps("phi", ParamKind::Phase);

struct Builder {
    name: &'static str,
    arity: usize,
    params: Vec<ParamSpec>,
    class: GateClass,
    form: GateForm,
    power: PowerLaw,
    rules: Vec<u32>,
}

impl Builder {
    fn exp(
        name: &'static str,
        arity: usize,
        params: Vec<ParamSpec>,
        class: GateClass,
        g: impl Fn(&[Param]) -> GenExpr + Send + Sync + 'static,
    ) -> Self {
        let scaled = params.iter().map(|p| p.kind != ParamKind::Phase).collect();
        Builder {
            name,
            arity,
            params,
            class,
            form: GateForm::Exponential(Arc::new(g)),
            power: PowerLaw::Scale(scaled),
            rules: vec![],
        }
    }

    fn fixed(
        name: &'static str,
        arity: usize,
        f: FixedGate,
        cycle: &'static [&'static str],
    ) -> Self {
        Builder {
            name,
            arity,
            params: vec![],
            class: GateClass::Dv,
            form: GateForm::Fixed(f),
            power: PowerLaw::Cyclic(cycle),
            rules: vec![],
        }
    }

    fn power(mut self, p: PowerLaw) -> Self {
        self.power = p;
        self
    }

    fn rules(mut self, r: &[u32]) -> Self {
        self.rules = r.to_vec();
        self
    }

    fn done(self) -> GateDef {
        GateDef {
            name: self.name.to_owned(),
            arity: self.arity,
            params: self.params,
            class: self.class,
            form: self.form,
            power: self.power,
            decomposition: None,
            rules: self.rules,
            signature_memo: OnceLock::new(),
        }
    }
}

/// `α a† − α* a` on `slot`.
fn displacement(alpha: Complex64, slot: usize) -> GenExpr {
    alpha * adag(slot) - alpha.conj() * a(slot)
}

/// `½(ζ* a² − ζ a†²)`.
fn squeeze(zeta: Complex64, slot: usize) -> GenExpr {
    0.5 * (zeta.conj() * (a(slot) * a(slot)) - zeta * (adag(slot) * adag(slot)))
}

/// `−iθ/2 (e^{iφ} a†b + h.c.)`.
fn beamsplitter(theta: f64, phi: f64, m1: usize, m2: usize) -> GenExpr {
    let e = Complex64::from_polar(1.0, phi);
    (-I * theta / 2.0) * (e * (adag(m1) * a(m2)) + e.conj() * (a(m1) * adag(m2)))
}

/// `ξ a†b† − ξ* ab`.
fn two_mode_squeeze(xi: Complex64, m1: usize, m2: usize) -> GenExpr {
    xi * (adag(m1) * adag(m2)) - xi.conj() * (a(m1) * a(m2))
}

/// `λ/2 (a + a†)(b† − b)`.
fn two_mode_sum(lambda: f64, m1: usize, m2: usize) -> GenExpr {
    (lambda / 2.0) * ((a(m1) + adag(m1)) * (adag(m2) - a(m2)))
}

fn hybrid(t: &[crate::types::WireType]) -> GateClass {
    GateClass::Hybrid(t.to_vec())
}

pub(super) fn build() -> Vec<GateDef> {
    let qm = hybrid(&[Qubit, Qumode]);
    let qmm = hybrid(&[Qubit, Qumode, Qumode]);
    let vec_angles = |n| ps(n, ParamKind::AngleVector);
    vec![
        // qubit gates
        Builder::fixed("H", 1, FixedGate::H, &["I", "H"])
            .rules(&[20, 29])
            .done(),
        Builder::fixed("X", 1, FixedGate::X, &["I", "X"])
            .rules(&[21, 27, 29])
            .done(),
        Builder::fixed("Y", 1, FixedGate::Y, &["I", "Y"])
            .rules(&[22, 29])
            .done(),
        Builder::fixed("Z", 1, FixedGate::Z, &["I", "Z"])
            .rules(&[23, 29])
            .done(),
        Builder::fixed("S", 1, FixedGate::S, &["I", "S", "Z", "Sdg"])
            .rules(&[24, 29])
            .done(),
        Builder::fixed("Sdg", 1, FixedGate::Sdg, &["I", "Sdg", "Z", "S"])
            .rules(&[25, 29])
            .done(),
        Builder::exp("RX", 1, vec![ANGLE], GateClass::Dv, |p| {
            (-I * re(p, 0) / 2.0) * pauli_x(0)
        })
        .rules(&[30])
        .done(),
        Builder::exp("RY", 1, vec![ANGLE], GateClass::Dv, |p| {
            (-I * re(p, 0) / 2.0) * pauli_y(0)
        })
        .rules(&[30])
        .done(),
        Builder::exp("RZ", 1, vec![ANGLE], GateClass::Dv, |p| {
            (-I * re(p, 0) / 2.0) * pauli_z(0)
        })
        .rules(&[12])
        .done(),
        Builder::fixed("CNOT", 2, FixedGate::Cnot, &["I", "CNOT"]).done(),
        // qumode gates
        Builder::exp("D", 1, vec![R, PHI], GateClass::Cv, |p| {
            displacement(amp(p), 0)
        })
        .rules(&[3, 26])
        .done(),
        Builder::exp("R", 1, vec![ANGLE], GateClass::Cv, |p| {
            (-I * re(p, 0)) * num(0)
        })
        .rules(&[4])
        .done(),
        Builder::exp("F", 1, vec![], GateClass::Cv, |_| (-I * FRAC_PI_2) * num(0))
            .power(PowerLaw::None)
            .rules(&[1, 5])
            .done(),
        Builder::exp("Sq", 1, vec![R, PHI], GateClass::Cv, |p| squeeze(amp(p), 0))
            .rules(&[6])
            .done(),
        Builder::exp(
            "K",
            1,
            vec![ps("kappa", ParamKind::Real)],
            GateClass::Cv,
            |p| (-I * re(p, 0)) * (num(0) * num(0)),
        )
        .done(),
        Builder::exp("C", 1, vec![ps("r", ParamKind::Real)], GateClass::Cv, |p| {
            (-I * re(p, 0)) * (quad_x(0) * quad_x(0) * quad_x(0))
        })
        .done(),
        Builder::exp("SNAP", 1, vec![vec_angles("phi")], GateClass::Cv, |p| {
            let phis = vec_of(p, 0);
            GenExpr::Sum(
                phis.iter()
                    .enumerate()
                    .map(|(k, &f)| (-I * f) * fock_proj(0, k))
                    .collect(),
            )
        })
        .rules(&[10, 31])
        .done(),
        Builder::exp("BS", 2, vec![ANGLE, PHI], GateClass::Cv, |p| {
            beamsplitter(re(p, 0), re(p, 1), 0, 1)
        })
        .rules(&[7])
        .done(),
        Builder {
            name: "ModeSwap",
            arity: 2,
            params: vec![],
            class: GateClass::Cv,
            form: GateForm::ModeSwap,
            power: PowerLaw::Cyclic(&["I", "ModeSwap"]),
            rules: vec![2],
        }
        .done(),
        Builder::exp("TMS", 2, vec![R, PHI], GateClass::Cv, |p| {
            two_mode_squeeze(amp(p), 0, 1)
        })
        .rules(&[8])
        .done(),
        Builder::exp(
            "SUM",
            2,
            vec![ps("lambda", ParamKind::Real)],
            GateClass::Cv,
            |p| two_mode_sum(re(p, 0), 0, 1),
        )
        .rules(&[9])
        .done(),
        // hybrid gates
        Builder::exp("CR", 2, vec![ANGLE], qm.clone(), |p| {
            (-I * re(p, 0) / 2.0) * (pauli_z(0) * num(1))
        })
        .rules(&[4, 12])
        .done(),
        Builder::exp("CP", 2, vec![], qm.clone(), |_| {
            (-I * FRAC_PI_2) * (pauli_z(0) * num(1))
        })
        .power(PowerLaw::None)
        .rules(&[5, 12])
        .done(),
        Builder::exp("CD", 2, vec![R, PHI], qm.clone(), |p| {
            pauli_z(0) * displacement(amp(p), 1)
        })
        .rules(&[3, 11, 12, 28])
        .done(),
        Builder::exp("CS", 2, vec![R, PHI], qm.clone(), |p| {
            pauli_z(0) * squeeze(amp(p), 1)
        })
        .rules(&[6, 12])
        .done(),
        Builder::exp(
            "SQR",
            2,
            vec![vec_angles("theta"), vec_angles("phi")],
            qm.clone(),
            |p| {
                let th = vec_of(p, 0);
                let ph = vec_of(p, 1);
                GenExpr::Sum(
                    th.iter()
                        .zip(ph)
                        .enumerate()
                        .map(|(k, (&t, &f))| {
                            (-I * t / 2.0)
                                * ((f.cos() * pauli_x(0) + f.sin() * pauli_y(0)) * fock_proj(1, k))
                        })
                        .collect(),
                )
            },
        )
        .power(PowerLaw::Scale(vec![true, false]))
        .done(),
        Builder::exp("JC", 2, vec![ANGLE, PHI], qm.clone(), |p| {
            let e = Complex64::from_polar(1.0, re(p, 1));
            (-I * re(p, 0)) * (e * (sigma_minus(0) * adag(1)) + e.conj() * (sigma_plus(0) * a(1)))
        })
        .done(),
        Builder::exp("AJC", 2, vec![ANGLE, PHI], qm.clone(), |p| {
            let e = Complex64::from_polar(1.0, re(p, 1));
            (-I * re(p, 0)) * (e * (sigma_plus(0) * adag(1)) + e.conj() * (sigma_minus(0) * a(1)))
        })
        .done(),
        Builder::exp("RB", 2, vec![R, PHI], qm.clone(), |p| {
            let th = amp(p);
            -I * (pauli_x(0) * (th * adag(1) + th.conj() * a(1)))
        })
        .done(),
        Builder::exp("CBS", 3, vec![ANGLE, PHI], qmm.clone(), |p| {
            pauli_z(0) * beamsplitter(re(p, 0), re(p, 1), 1, 2)
        })
        .rules(&[7, 11, 12])
        .done(),
        Builder::exp("CTMS", 3, vec![R, PHI], qmm.clone(), |p| {
            pauli_z(0) * two_mode_squeeze(amp(p), 1, 2)
        })
        .rules(&[8, 11, 12])
        .done(),
        Builder::exp("CSUM", 3, vec![ps("lambda", ParamKind::Real)], qmm, |p| {
            pauli_z(0) * two_mode_sum(re(p, 0), 1, 2)
        })
        .rules(&[9, 12])
        .done(),
        // device-native X-conditioned displacement
        Builder::exp("xCD", 2, vec![R, PHI], qm, |p| {
            pauli_x(0) * displacement(amp(p), 1)
        })
        .done(),
    ]
}

/// Time evolution under `ω_r n − (ω_q/2) Z − (χ/2) Z n` for time `t`, with its
/// product decomposition `RZ(−ω_q t), R(ω_r t), CR(−χ t)` registered. With
/// `annotated = false` the gate carries no type declaration.
pub fn evo_gate(omega_r: f64, omega_q: f64, chi: f64, annotated: bool) -> Arc<GateDef> {
    let class = if annotated {
        GateClass::Hybrid(vec![Qubit, Qumode])
    } else {
        GateClass::Unannotated
    };
    let mut def = Builder::exp("Evo", 2, vec![ps("t", ParamKind::Real)], class, move |p| {
        let t = re(p, 0);
        (-I * t)
            * (omega_r * num(1)
                - (omega_q / 2.0) * pauli_z(0)
                - (chi / 2.0) * (pauli_z(0) * num(1)))
    })
    .rules(&[14])
    .done();
    def.decomposition = Some(Decomposition {
        build: Arc::new(move |p, w| {
            let t = re(p, 0);
            let g = |name: &str, params: Vec<Param>, wires: Vec<_>| {
                GateInstruction::new(super::lookup(name).expect("shipped gate"), params, wires)
                    .expect("well-formed decomposition")
            };
            vec![
                g("RZ", vec![Param::Real(-omega_q * t)], vec![w[0].clone()]),
                g("R", vec![Param::Real(omega_r * t)], vec![w[1].clone()]),
                g(
                    "CR",
                    vec![Param::Real(-chi * t)],
                    vec![w[0].clone(), w[1].clone()],
                ),
            ]
        }),
        commuting: true,
    });
    Arc::new(def)
}

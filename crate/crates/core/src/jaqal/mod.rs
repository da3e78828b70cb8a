//! QSCOUT trapped-ion target: device validation, virtual qumode allocation,
//! lowering to the native gate set, and JAQAL text.
//!
//! `xCD q m i u v` is the X-conditioned displacement
//! `exp[X_q ((u + iv) a† − (u − iv) a)]` on mode `m{m}i{i}`. Amplitudes are
//! stored in polar form in the IR and printed as `(u, v)`.

mod device;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fmt::Write;

use indexmap::IndexMap;
use thiserror::Error;

pub use device::{PhysicalMode, QscoutDevice, DEFAULT_USEPULSES};

use crate::gates::{enumerate_gateset, GateSet};
use crate::ir::{GateInstruction, QuantumTape, WireLabel};
use crate::rewrite::{decompose_to_gateset, DecomposeError, DEFAULT_MAX_DEPTH};
use crate::types::{TypeEnv, WireType};

/// Significant digits of printed parameters unless configured otherwise.
pub const DEFAULT_PRECISION: usize = 5;

/// Gates the CV lowering produces before the qubit gates are rewritten.
const INTERMEDIATE: &[&str] = &[
    "H", "X", "Y", "Z", "S", "Sdg", "RX", "RY", "RZ", "CNOT", "xCD",
];

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Diagnostic {
    #[error("{wire}: center-of-mass modes are disabled on this device")]
    ComModeDisabled { wire: WireLabel },
    #[error("{wire}: no such mode on a {n_qubits}-ion device")]
    UnknownMode { wire: WireLabel, n_qubits: u32 },
    #[error("op #{index} ({gate}): modes {a} and {b} cannot be coupled")]
    DisallowedCoupling {
        index: usize,
        gate: String,
        a: WireLabel,
        b: WireLabel,
    },
    #[error("qubit {wire}: index outside 0..{n_qubits}")]
    QubitOutOfRange { wire: WireLabel, n_qubits: u32 },
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum JaqalError {
    #[error("device validation failed:\n{}", .0.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n"))]
    Validation(Vec<Diagnostic>),
    #[error("cannot allocate physical modes: {0}")]
    Unsatisfiable(String),
    #[error(transparent)]
    NoRoute(#[from] DecomposeError),
    #[error("circuit needs {needed} qubits, device has {available}")]
    TooManyQubits { needed: usize, available: u32 },
    #[error("`{0}` is not a native instruction")]
    NotNative(String),
    #[error("wire {0}: type is unresolved")]
    Unresolved(WireLabel),
}

fn physical(w: &WireLabel) -> Option<PhysicalMode> {
    match w {
        WireLabel::Name(s) => PhysicalMode::parse(s),
        WireLabel::Int(_) => None,
    }
}

fn qumodes(env: &TypeEnv) -> impl Iterator<Item = &WireLabel> {
    env.iter()
        .filter(|(_, t)| **t == WireType::Qumode)
        .map(|(w, _)| w)
}

/// Hardware-constraint diagnostics; empty when the tape fits the device.
pub fn validate_for_qscout(
    tape: &QuantumTape,
    env: &TypeEnv,
    device: &QscoutDevice,
) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for w in qumodes(env) {
        if let Some(m) = physical(w) {
            if !device.exists(m) {
                out.push(Diagnostic::UnknownMode {
                    wire: w.clone(),
                    n_qubits: device.n_qubits,
                });
            } else if m.is_com() && !device.enable_com {
                out.push(Diagnostic::ComModeDisabled { wire: w.clone() });
            }
        }
    }
    for (w, t) in env {
        if let (WireType::Qubit, WireLabel::Int(i)) = (t, w) {
            if *i < 0 || *i >= i64::from(device.n_qubits) {
                out.push(Diagnostic::QubitOutOfRange {
                    wire: w.clone(),
                    n_qubits: device.n_qubits,
                });
            }
        }
    }
    for (index, g) in tape.ops().iter().enumerate() {
        let modes: Vec<&WireLabel> = g
            .base_wires()
            .iter()
            .filter(|w| env.get(*w) == Some(&WireType::Qumode))
            .collect();
        if let [a, b] = modes.as_slice() {
            if physical(a).is_some()
                && physical(b).is_some()
                && !device.coupling_allowed(g.name(), &a.to_string(), &b.to_string())
            {
                out.push(Diagnostic::DisallowedCoupling {
                    index,
                    gate: g.name().to_owned(),
                    a: (*a).clone(),
                    b: (*b).clone(),
                });
            }
        }
    }
    out
}

/// Maps every qumode wire to a physical label. Physical labels map to
/// themselves; virtual ones take the first enabled free mode (manifold 0
/// then 1, index ascending) that keeps every coupling constraint satisfied.
pub fn allocate_virtual_wires(
    tape: &QuantumTape,
    env: &TypeEnv,
    device: &QscoutDevice,
) -> Result<IndexMap<WireLabel, String>, JaqalError> {
    let mut map: IndexMap<WireLabel, String> = IndexMap::new();
    let mut used: HashSet<String> = HashSet::new();
    for w in qumodes(env) {
        if physical(w).is_some() {
            map.insert(w.clone(), w.to_string());
            used.insert(w.to_string());
        }
    }
    // two-mode gates, for coupling checks
    let pairs: Vec<(&str, &WireLabel, &WireLabel)> = tape
        .ops()
        .iter()
        .filter_map(|g| {
            let m: Vec<&WireLabel> = g
                .base_wires()
                .iter()
                .filter(|w| env.get(*w) == Some(&WireType::Qumode))
                .collect();
            match m.as_slice() {
                [a, b] => Some((g.name(), *a, *b)),
                _ => None,
            }
        })
        .collect();
    let virtuals: Vec<WireLabel> = qumodes(env)
        .filter(|w| physical(w).is_none())
        .cloned()
        .collect();
    for w in &virtuals {
        let choice = device
            .enabled_modes()
            .into_iter()
            .map(|m| m.to_string())
            .find(|cand| {
                !used.contains(cand)
                    && pairs.iter().all(|(g, a, b)| {
                        let resolve = |x: &WireLabel| {
                            if x == w {
                                Some(cand.clone())
                            } else {
                                map.get(x).cloned()
                            }
                        };
                        match (resolve(a), resolve(b)) {
                            (Some(x), Some(y)) if *a == w || *b == w => {
                                device.coupling_allowed(g, &x, &y)
                            }
                            _ => true,
                        }
                    })
            });
        match choice {
            Some(c) => {
                used.insert(c.clone());
                map.insert(w.clone(), c);
            }
            None => {
                let n = device.enabled_modes().len();
                return Err(JaqalError::Unsatisfiable(format!(
                    "no enabled mode left for {w} ({} qumodes requested, {n} enabled)",
                    virtuals.len() + map.len()
                        - virtuals.iter().filter(|v| map.contains_key(*v)).count()
                )));
            }
        }
    }
    Ok(map)
}

/// A native tape with its register layout.
#[derive(Clone, Debug)]
pub struct Lowered {
    pub tape: QuantumTape,
    /// Qubit wire → register index.
    pub qubits: IndexMap<WireLabel, usize>,
    /// Qumode wire (physical label) → mode.
    pub modes: IndexMap<WireLabel, PhysicalMode>,
    pub env: TypeEnv,
}

/// Validates, allocates, and lowers to {Rz, Ry, Rx, CNOT, xCD}. Each
/// unconditioned displacement borrows a fresh ancilla qubit in |0⟩; with
/// `optimize` the ancillae of one mode are merged and adjacent Hadamard
/// pairs cancel before the qubit gates are rewritten.
pub fn lower_to_native(
    tape: &QuantumTape,
    env: &TypeEnv,
    device: &QscoutDevice,
) -> Result<Lowered, JaqalError> {
    if let Some(w) = tape
        .wires()
        .into_iter()
        .find(|w| env.get(w).is_none_or(|t| *t == WireType::Bottom))
    {
        return Err(JaqalError::Unresolved(w));
    }
    let diags = validate_for_qscout(tape, env, device);
    if !diags.is_empty() {
        return Err(JaqalError::Validation(diags));
    }
    let alloc = allocate_virtual_wires(tape, env, device)?;
    let rename = |w: &WireLabel| {
        alloc
            .get(w)
            .map_or_else(|| w.clone(), |p| WireLabel::Name(p.clone()))
    };
    let renamed = tape.with_ops(tape.ops().iter().map(|g| g.map_wires(rename)).collect());
    let mut env: TypeEnv = env.iter().map(|(w, t)| (rename(w), *t)).collect();

    let mid = decompose_to_gateset(
        &renamed,
        &GateSet::from_names("qscout-intermediate", INTERMEDIATE.iter().copied()),
        DEFAULT_MAX_DEPTH,
    )?;
    let mid = if device.optimize {
        mid.with_ops(cancel_hadamards(&merge_ancillae(mid.ops())))
    } else {
        mid
    };
    let native = decompose_to_gateset(
        &mid,
        &enumerate_gateset("qscout-native").expect("shipped set"),
        DEFAULT_MAX_DEPTH,
    )?;

    for w in native.wires() {
        env.entry(w).or_insert(WireType::Qubit);
    }
    let qubits = assign_qubits(&native, &env, device)?;
    let modes = qumodes(&env)
        .filter_map(|w| physical(w).map(|m| (w.clone(), m)))
        .collect();
    Ok(Lowered {
        tape: native,
        qubits,
        modes,
        env,
    })
}

/// Renames the displacement ancillae of each mode to the first one used for
/// that mode. Each borrowed ancilla returns to |0⟩, so sequential reuse is
/// exact.
fn merge_ancillae(ops: &[GateInstruction]) -> Vec<GateInstruction> {
    let mut mode_of: HashMap<WireLabel, Option<WireLabel>> = HashMap::new();
    for g in ops {
        for w in g.wires().iter().filter(|w| w.is_reserved()) {
            let entry = mode_of.entry(w.clone()).or_insert(None);
            if g.name() == "xCD" && g.wires().len() == 2 && &g.wires()[0] == w {
                let m = g.wires()[1].clone();
                // an ancilla serving two modes is left alone
                *entry = match entry.take() {
                    None => Some(m),
                    Some(old) if old == m => Some(old),
                    Some(_) => Some(WireLabel::Name(String::new())),
                };
            }
        }
    }
    let mut leader: HashMap<WireLabel, WireLabel> = HashMap::new();
    let mut rename: HashMap<WireLabel, WireLabel> = HashMap::new();
    let mut order: Vec<&WireLabel> = mode_of.keys().collect();
    order.sort();
    for a in order {
        if let Some(m) = &mode_of[a] {
            if m.to_string().is_empty() {
                continue;
            }
            let l = leader.entry(m.clone()).or_insert_with(|| a.clone());
            rename.insert(a.clone(), l.clone());
        }
    }
    ops.iter()
        .map(|g| g.map_wires(|w| rename.get(w).cloned().unwrap_or_else(|| w.clone())))
        .collect()
}

/// Removes pairs of unmodified Hadamards that are adjacent on their wire.
fn cancel_hadamards(ops: &[GateInstruction]) -> Vec<GateInstruction> {
    let mut kept: Vec<Option<GateInstruction>> = Vec::with_capacity(ops.len());
    let mut last: HashMap<WireLabel, Vec<usize>> = HashMap::new();
    let bare_h = |g: &GateInstruction| g.name() == "H" && g.modifiers().is_empty();
    for g in ops {
        if bare_h(g) {
            let w = &g.wires()[0];
            if let Some(&i) = last.get(w).and_then(|s| s.last()) {
                if kept[i].as_ref().is_some_and(bare_h) {
                    kept[i] = None;
                    last.get_mut(w).expect("present").pop();
                    continue;
                }
            }
        }
        let i = kept.len();
        for w in g.wires() {
            last.entry(w.clone()).or_default().push(i);
        }
        kept.push(Some(g.clone()));
    }
    kept.into_iter().flatten().collect()
}

/// Integer labels keep their index; ancillae then take the lowest free
/// indices, then named qubits in order of appearance.
fn assign_qubits(
    tape: &QuantumTape,
    env: &TypeEnv,
    device: &QscoutDevice,
) -> Result<IndexMap<WireLabel, usize>, JaqalError> {
    let qubits: Vec<WireLabel> = tape
        .wires()
        .into_iter()
        .filter(|w| env.get(w) == Some(&WireType::Qubit))
        .collect();
    let mut out = IndexMap::new();
    let mut taken = HashSet::new();
    for w in &qubits {
        if let WireLabel::Int(i) = w {
            out.insert(w.clone(), *i as usize);
            taken.insert(*i as usize);
        }
    }
    let mut anc: Vec<&WireLabel> = qubits.iter().filter(|w| w.is_reserved()).collect();
    anc.sort_by_key(|w| {
        w.to_string()[crate::ir::ANCILLA_PREFIX.len()..]
            .parse::<usize>()
            .unwrap_or(usize::MAX)
    });
    let named = qubits
        .iter()
        .filter(|w| matches!(w, WireLabel::Name(_)) && !w.is_reserved());
    let mut next = 0;
    for w in anc.into_iter().chain(named) {
        while taken.contains(&next) {
            next += 1;
        }
        out.insert(w.clone(), next);
        taken.insert(next);
    }
    let needed = taken.iter().max().map_or(0, |m| m + 1);
    if needed > device.n_qubits as usize {
        return Err(JaqalError::TooManyQubits {
            needed,
            available: device.n_qubits,
        });
    }
    Ok(out)
}

/// `precision` significant digits, trailing zeros trimmed to one decimal;
/// magnitudes below `10^-precision` print as a signed zero.
pub fn format_number(x: f64, precision: usize) -> String {
    let sign = if x.is_sign_negative() { "-" } else { "" };
    if x.abs() < 10f64.powi(-(precision as i32)) {
        return format!("{sign}0.0");
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (precision as i64 - 1 - magnitude).max(0) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.push('0');
        }
    } else {
        s.push_str(".0");
    }
    s
}

struct Program<'a>(&'a Lowered, &'a QscoutDevice, usize);

impl fmt::Display for Program<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Program(l, device, p) = *self;
        writeln!(f, "from {} usepulses *", device.usepulses)?;
        writeln!(f)?;
        writeln!(f, "register q[{}]", device.n_qubits)?;
        writeln!(f)?;
        writeln!(f, "subcircuit {{")?;
        for g in l.tape.ops() {
            let mut s = String::new();
            statement(&mut s, g, l, &p).map_err(|_| fmt::Error)?;
            writeln!(f, "\t{s}")?;
        }
        writeln!(f, "}}")
    }
}

fn statement(
    s: &mut String,
    g: &GateInstruction,
    l: &Lowered,
    p: &usize,
) -> Result<(), JaqalError> {
    let not_native = || JaqalError::NotNative(g.to_string());
    if !g.modifiers().is_empty() {
        return Err(not_native());
    }
    let q = |w: &WireLabel| l.qubits.get(w).copied().ok_or_else(not_native);
    let num = |k: usize| format_number(g.params()[k].as_real().unwrap_or(f64::NAN), *p);
    let w = g.wires();
    match g.name() {
        "RZ" => write!(s, "Rz q[{}] {}", q(&w[0])?, num(0)),
        "RY" => write!(s, "Ry q[{}] {}", q(&w[0])?, num(0)),
        "RX" => write!(s, "Rx q[{}] {}", q(&w[0])?, num(0)),
        "CNOT" => write!(s, "CNOT q[{}] q[{}]", q(&w[0])?, q(&w[1])?),
        "xCD" => {
            let m = l.modes.get(&w[1]).ok_or_else(not_native)?;
            let r = g.params()[0].as_real().unwrap_or(f64::NAN);
            let phi = g.params()[1].as_real().unwrap_or(f64::NAN);
            write!(
                s,
                "xCD q[{}] {} {} {} {}",
                q(&w[0])?,
                m.manifold,
                m.index,
                format_number(r * phi.cos(), *p),
                format_number(r * phi.sin(), *p)
            )
        }
        _ => return Err(not_native()),
    }
    .expect("string write");
    Ok(())
}

/// JAQAL text of a lowered tape: one subcircuit, measurement implicit.
pub fn emit_jaqal(
    lowered: &Lowered,
    device: &QscoutDevice,
    precision: usize,
) -> Result<String, JaqalError> {
    for g in lowered.tape.ops() {
        statement(&mut String::new(), g, lowered, &precision)?;
    }
    Ok(Program(lowered, device, precision).to_string())
}

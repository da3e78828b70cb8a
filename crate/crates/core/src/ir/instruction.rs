use std::fmt;
use std::sync::Arc;

use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::modifier::{inner_parts, normalize};
use super::{IrError, Modifier, Param, WireLabel};
use crate::gates::{self, GateDef, PowerLaw};

/// One gate application. `wires` lists conditioning wires first (outermost
/// modifier first), then the gate's own wires.
#[derive(Clone)]
pub struct GateInstruction {
    gate: Arc<GateDef>,
    params: Vec<Param>,
    wires: Vec<WireLabel>,
    modifiers: Vec<Modifier>,
}

impl GateInstruction {
    /// Unchecked constructor; [`validate`](Self::validate) reports problems.
    pub fn raw(
        gate: Arc<GateDef>,
        params: Vec<Param>,
        wires: Vec<WireLabel>,
        modifiers: Vec<Modifier>,
    ) -> Self {
        GateInstruction {
            gate,
            params,
            wires,
            modifiers,
        }
    }

    pub fn new<W: Into<WireLabel>>(
        gate: Arc<GateDef>,
        params: Vec<Param>,
        wires: Vec<W>,
    ) -> Result<Self, IrError> {
        let g = Self::raw(
            gate,
            params,
            wires.into_iter().map(Into::into).collect(),
            vec![],
        );
        g.validate()?;
        Ok(g)
    }

    /// Looks the gate up by IR name.
    pub fn named<W: Into<WireLabel>>(
        name: &str,
        params: Vec<Param>,
        wires: Vec<W>,
    ) -> Result<Self, IrError> {
        let def = gates::lookup(name).map_err(|e| IrError::Gate(e.to_string()))?;
        Self::new(def, params, wires)
    }

    /// Checks arity, parameters and wire distinctness, then normalizes modifiers.
    pub fn validate(&self) -> Result<(), IrError> {
        self.gate
            .validate_params(&self.params)
            .map_err(IrError::BadParams)?;
        let conds = self.modifiers.iter().filter(|m| m.is_condition()).count();
        let expected = self.gate.arity + conds;
        if self.wires.len() != expected {
            return Err(IrError::Arity {
                gate: self.gate.name.clone(),
                expected,
                got: self.wires.len(),
            });
        }
        for (i, w) in self.wires.iter().enumerate() {
            if self.wires[..i].contains(w) {
                return Err(IrError::DuplicateWire {
                    gate: self.gate.name.clone(),
                    wire: w.clone(),
                });
            }
        }
        // The i-th condition (inside-out) must name the wire at position conds-1-i.
        for (i, m) in self
            .modifiers
            .iter()
            .filter(|m| m.is_condition())
            .enumerate()
        {
            let w = m.control_wire().expect("condition");
            if &self.wires[conds - 1 - i] != w {
                return Err(IrError::ConditionWire {
                    gate: self.gate.name.clone(),
                    wire: w.clone(),
                });
            }
        }
        Ok(())
    }

    pub(crate) fn normalized(mut self) -> Self {
        self.modifiers = normalize(&self.modifiers);
        self
    }

    pub fn gate(&self) -> &Arc<GateDef> {
        &self.gate
    }

    pub fn name(&self) -> &str {
        &self.gate.name
    }

    pub fn params(&self) -> &[Param] {
        &self.params
    }

    pub fn wires(&self) -> &[WireLabel] {
        &self.wires
    }

    pub fn modifiers(&self) -> &[Modifier] {
        &self.modifiers
    }

    pub fn num_conditions(&self) -> usize {
        self.wires.len() - self.gate.arity
    }

    /// Wires of the bare gate, without conditioning wires.
    pub fn base_wires(&self) -> &[WireLabel] {
        &self.wires[self.num_conditions()..]
    }

    /// Combined inner `(power, adjoint)`.
    pub fn inner(&self) -> (Rational64, bool) {
        inner_parts(&self.modifiers)
    }

    /// Condition modifiers, innermost first.
    pub fn conditions(&self) -> impl Iterator<Item = &Modifier> {
        self.modifiers.iter().filter(|m| m.is_condition())
    }

    pub fn is_identity(&self) -> bool {
        self.inner().0.is_zero()
    }

    pub fn params_f64(&self) -> Vec<f64> {
        self.params.iter().filter_map(Param::as_real).collect()
    }

    fn push_modifier(&self, m: Modifier) -> Self {
        let mut g = self.clone();
        if let Some(q) = m.control_wire() {
            g.wires.insert(0, q.clone());
        }
        g.modifiers.push(m);
        g.normalized()
    }

    pub fn adjoint(&self) -> Self {
        self.push_modifier(Modifier::Adjoint)
    }

    pub fn power(&self, k: Rational64) -> Self {
        self.push_modifier(Modifier::Pow(k))
    }

    /// `e^{K} ↦ e^{Z_q ⊗ K}` with `q` prepended to the wires.
    pub fn condition_on_qubit(&self, q: impl Into<WireLabel>) -> Result<Self, IrError> {
        let q = q.into();
        if self.wires.contains(&q) {
            return Err(IrError::DuplicateWire {
                gate: self.gate.name.clone(),
                wire: q,
            });
        }
        Ok(self.push_modifier(Modifier::CondZ(q)))
    }

    /// `|0><0| ⊗ I + |1><1| ⊗ U` with `q` prepended to the wires.
    pub fn controlled_by(&self, q: impl Into<WireLabel>) -> Result<Self, IrError> {
        let q = q.into();
        if self.wires.contains(&q) {
            return Err(IrError::DuplicateWire {
                gate: self.gate.name.clone(),
                wire: q,
            });
        }
        Ok(self.push_modifier(Modifier::Ctrl(q)))
    }

    /// Replaces the modifier list (normalizing it) and the wire list.
    pub fn with_modifiers(
        &self,
        wires: Vec<WireLabel>,
        modifiers: Vec<Modifier>,
    ) -> Result<Self, IrError> {
        let g = GateInstruction {
            gate: self.gate.clone(),
            params: self.params.clone(),
            wires,
            modifiers,
        };
        g.validate()?;
        Ok(g.normalized())
    }

    /// Same instruction with fresh parameters.
    pub fn with_params(&self, params: Vec<Param>) -> Self {
        GateInstruction {
            params,
            ..self.clone()
        }
    }

    pub fn map_wires(&self, f: impl Fn(&WireLabel) -> WireLabel) -> Self {
        let wires = self.wires.iter().map(&f).collect();
        let modifiers = self
            .modifiers
            .iter()
            .map(|m| match m {
                Modifier::CondZ(q) => Modifier::CondZ(f(q)),
                Modifier::Ctrl(q) => Modifier::Ctrl(f(q)),
                other => other.clone(),
            })
            .collect();
        GateInstruction {
            wires,
            modifiers,
            ..self.clone()
        }
    }

    /// Folds the inner Adjoint/Pow into parameters where the gate's power law
    /// allows it. Conditions are kept. Identity markers are returned as is.
    pub fn fold(&self) -> Self {
        let (k, adj) = self.inner();
        if k.is_zero() || (k.is_one() && !adj) {
            return self.clone();
        }
        let s = if adj { -k } else { k };
        let conds: Vec<Modifier> = self.conditions().cloned().collect();
        match &self.gate.power {
            PowerLaw::Scale(flags) => {
                let sf = s.to_f64().expect("rational converts");
                let params = self
                    .params
                    .iter()
                    .zip(flags)
                    .map(|(p, &scaled)| if scaled { p.scaled(sf) } else { p.clone() })
                    .collect();
                GateInstruction {
                    params,
                    modifiers: conds,
                    ..self.clone()
                }
            }
            PowerLaw::Cyclic(cycle) if s.is_integer() => {
                let n = cycle.len() as i64;
                let idx = (s.to_integer().rem_euclid(n)) as usize;
                let target = cycle[idx];
                if target == "I" {
                    let mut mods = vec![Modifier::Pow(Rational64::zero())];
                    mods.extend(conds);
                    return GateInstruction {
                        modifiers: mods,
                        ..self.clone()
                    };
                }
                let gate = if target == self.gate.name {
                    self.gate.clone()
                } else {
                    gates::lookup(target).expect("cyclic partner is shipped")
                };
                GateInstruction {
                    gate,
                    modifiers: conds,
                    ..self.clone()
                }
            }
            _ => self.clone(),
        }
    }

    /// Structural key: gate name plus modifier shape, ignoring wires and values.
    pub fn shape_key(&self) -> String {
        let mut s = self.gate.name.clone();
        for m in &self.modifiers {
            match m {
                Modifier::Adjoint => s.push_str("+adj"),
                Modifier::Pow(k) if k.is_integer() && k.abs() > Rational64::one() => {
                    s.push_str("+powN")
                }
                Modifier::Pow(k) => s.push_str(&format!("+pow{k}")),
                Modifier::CondZ(_) => s.push_str("+condz"),
                Modifier::Ctrl(_) => s.push_str("+ctrl"),
            }
        }
        s
    }
}

impl PartialEq for GateInstruction {
    fn eq(&self, o: &Self) -> bool {
        self.gate.name == o.gate.name
            && self.params == o.params
            && self.wires == o.wires
            && self.modifiers == o.modifiers
    }
}

impl fmt::Debug for GateInstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for GateInstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for m in self.modifiers.iter().rev() {
            write!(f, "{m}·")?;
        }
        f.write_str(&self.gate.name)?;
        if !self.params.is_empty() {
            f.write_str("(")?;
            for (i, p) in self.params.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{p}")?;
            }
            f.write_str(")")?;
        }
        f.write_str(" [")?;
        for (i, w) in self.wires.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{w}")?;
        }
        f.write_str("]")
    }
}

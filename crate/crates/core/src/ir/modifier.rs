use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Zero};

use super::WireLabel;

/// Symbolic modifier wrapped around a gate. A modifier list is read
/// inside-out: the first entry applies to the bare gate.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Modifier {
    Adjoint,
    Pow(Rational64),
    /// `e^{K} -> e^{Z_q ⊗ K}`; adds one qubit wire.
    CondZ(WireLabel),
    /// `|0><0| ⊗ I + |1><1| ⊗ U`; adds one qubit wire.
    Ctrl(WireLabel),
}

impl Modifier {
    pub fn control_wire(&self) -> Option<&WireLabel> {
        match self {
            Modifier::CondZ(q) | Modifier::Ctrl(q) => Some(q),
            _ => None,
        }
    }

    pub fn is_condition(&self) -> bool {
        self.control_wire().is_some()
    }
}

impl fmt::Display for Modifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modifier::Adjoint => f.write_str("Adjoint"),
            Modifier::Pow(k) => write!(f, "Pow({k})"),
            Modifier::CondZ(q) => write!(f, "CondZ({q})"),
            Modifier::Ctrl(q) => write!(f, "Ctrl({q})"),
        }
    }
}

/// Canonical modifier list: `[Pow(k)]? [Adjoint]? conditions...`.
///
/// Powers and adjoints commute with each other and with both condition
/// modifiers (for exponential gates `CondZ(e^{K})^k = CondZ(e^{kK})`), so they
/// are collected into a single innermost power and an adjoint parity. The
/// relative order of condition modifiers is preserved. `Pow(0)` marks an
/// identity instruction and absorbs any adjoint.
pub fn normalize(mods: &[Modifier]) -> Vec<Modifier> {
    let mut power = Rational64::one();
    let mut adjoint = false;
    let mut conds = Vec::new();
    for m in mods {
        match m {
            Modifier::Adjoint => adjoint = !adjoint,
            Modifier::Pow(k) => power *= *k,
            Modifier::CondZ(_) | Modifier::Ctrl(_) => conds.push(m.clone()),
        }
    }
    let mut out = Vec::with_capacity(conds.len() + 2);
    if power.is_zero() {
        out.push(Modifier::Pow(power));
    } else {
        if !power.is_one() {
            out.push(Modifier::Pow(power));
        }
        if adjoint {
            out.push(Modifier::Adjoint);
        }
    }
    out.extend(conds);
    out
}

/// Inner `(power, adjoint)` part of a normalized list.
pub(crate) fn inner_parts(mods: &[Modifier]) -> (Rational64, bool) {
    let mut power = Rational64::one();
    let mut adjoint = false;
    for m in mods {
        match m {
            Modifier::Pow(k) => power *= *k,
            Modifier::Adjoint => adjoint = !adjoint,
            _ => {}
        }
    }
    (power, adjoint)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn adjoint_pairs_cancel() {
        assert!(normalize(&[Modifier::Adjoint, Modifier::Adjoint]).is_empty());
    }

    #[test]
    fn powers_multiply() {
        let n = normalize(&[Modifier::Pow(r(2, 1)), Modifier::Pow(r(3, 1))]);
        assert_eq!(n, vec![Modifier::Pow(r(6, 1))]);
        assert!(normalize(&[Modifier::Pow(r(1, 2)), Modifier::Pow(r(2, 1))]).is_empty());
    }

    #[test]
    fn zero_power_is_identity_marker() {
        let n = normalize(&[
            Modifier::Adjoint,
            Modifier::Pow(r(0, 1)),
            Modifier::CondZ("q".into()),
        ]);
        assert_eq!(n, vec![Modifier::Pow(r(0, 1)), Modifier::CondZ("q".into())]);
    }

    #[test]
    fn conditions_keep_relative_order() {
        let n = normalize(&[
            Modifier::CondZ("a".into()),
            Modifier::Adjoint,
            Modifier::Ctrl("b".into()),
        ]);
        assert_eq!(
            n,
            vec![
                Modifier::Adjoint,
                Modifier::CondZ("a".into()),
                Modifier::Ctrl("b".into())
            ]
        );
    }

    fn arb_mod() -> impl Strategy<Value = Modifier> {
        prop_oneof![
            Just(Modifier::Adjoint),
            (-3i64..4, 1i64..4).prop_map(|(n, d)| Modifier::Pow(Rational64::new(n, d))),
            prop_oneof![Just("a"), Just("b")].prop_map(|w| Modifier::CondZ(w.into())),
            prop_oneof![Just("c"), Just("d")].prop_map(|w| Modifier::Ctrl(w.into())),
        ]
    }

    proptest! {
        #[test]
        fn normalization_is_idempotent(mods in proptest::collection::vec(arb_mod(), 0..8)) {
            let once = normalize(&mods);
            prop_assert_eq!(normalize(&once), once);
        }

        #[test]
        fn normalization_is_confluent(mods in proptest::collection::vec(arb_mod(), 0..8), split in 0usize..8) {
            // Normalizing a prefix first, then the whole, gives the same normal form.
            let k = split.min(mods.len());
            let mut partial = normalize(&mods[..k]);
            partial.extend_from_slice(&mods[k..]);
            prop_assert_eq!(normalize(&partial), normalize(&mods));
        }

        #[test]
        fn commuting_inner_modifiers_reorder_freely(mods in proptest::collection::vec(arb_mod(), 0..8)) {
            let mut inner: Vec<_> = mods.iter().filter(|m| !m.is_condition()).cloned().collect();
            inner.reverse();
            let conds: Vec<_> = mods.iter().filter(|m| m.is_condition()).cloned().collect();
            let mut permuted = inner;
            permuted.extend(conds);
            prop_assert_eq!(normalize(&permuted), normalize(&mods));
        }
    }
}

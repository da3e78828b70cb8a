//! Symbolic generator expressions. A gate in exponential form is `exp(K)`
//! where `K` is built from the primitives below; `i·K` must be Hermitian.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::types::WireType;

/// Operator primitive acting on one wire slot of a gate.
#[derive(Clone, Debug, PartialEq)]
pub enum Prim {
    A(usize),
    Adag(usize),
    N(usize),
    /// `(a + a†)/√2`.
    X(usize),
    PauliZ(usize),
    PauliX(usize),
    PauliY(usize),
    /// `|0><1|`
    SigmaMinus(usize),
    /// `|1><0|`
    SigmaPlus(usize),
    FockProj(usize, usize),
    /// `exp[-i θ/2 (cos φ X + sin φ Y)]`; a unitary, not a generator term.
    QubitRot {
        slot: usize,
        theta: f64,
        phi: f64,
    },
}

impl Prim {
    pub fn slot(&self) -> usize {
        match *self {
            Prim::A(s)
            | Prim::Adag(s)
            | Prim::N(s)
            | Prim::X(s)
            | Prim::PauliZ(s)
            | Prim::PauliX(s)
            | Prim::PauliY(s)
            | Prim::SigmaMinus(s)
            | Prim::SigmaPlus(s)
            | Prim::FockProj(s, _) => s,
            Prim::QubitRot { slot, .. } => slot,
        }
    }

    /// Wire kind the primitive requires.
    pub fn wire_type(&self) -> WireType {
        match self {
            Prim::A(_) | Prim::Adag(_) | Prim::N(_) | Prim::X(_) | Prim::FockProj(..) => {
                WireType::Qumode
            }
            _ => WireType::Qubit,
        }
    }

    fn dagger(&self) -> GenExpr {
        match *self {
            Prim::A(s) => GenExpr::Prim(Prim::Adag(s)),
            Prim::Adag(s) => GenExpr::Prim(Prim::A(s)),
            Prim::SigmaMinus(s) => GenExpr::Prim(Prim::SigmaPlus(s)),
            Prim::SigmaPlus(s) => GenExpr::Prim(Prim::SigmaMinus(s)),
            Prim::QubitRot { slot, theta, phi } => GenExpr::Prim(Prim::QubitRot {
                slot,
                theta: -theta,
                phi,
            }),
            ref p => GenExpr::Prim(p.clone()),
        }
    }
}

/// Term tree over [`Prim`]s.
#[derive(Clone, Debug, PartialEq)]
pub enum GenExpr {
    Prim(Prim),
    Scale(Complex64, Box<GenExpr>),
    Sum(Vec<GenExpr>),
    /// Operator product, leftmost factor applied last.
    Prod(Vec<GenExpr>),
    Dagger(Box<GenExpr>),
}

pub fn a(s: usize) -> GenExpr {
    GenExpr::Prim(Prim::A(s))
}
pub fn adag(s: usize) -> GenExpr {
    GenExpr::Prim(Prim::Adag(s))
}
pub fn num(s: usize) -> GenExpr {
    GenExpr::Prim(Prim::N(s))
}
pub fn quad_x(s: usize) -> GenExpr {
    GenExpr::Prim(Prim::X(s))
}
pub fn pauli_z(s: usize) -> GenExpr {
    GenExpr::Prim(Prim::PauliZ(s))
}
pub fn pauli_x(s: usize) -> GenExpr {
    GenExpr::Prim(Prim::PauliX(s))
}
pub fn pauli_y(s: usize) -> GenExpr {
    GenExpr::Prim(Prim::PauliY(s))
}
pub fn sigma_minus(s: usize) -> GenExpr {
    GenExpr::Prim(Prim::SigmaMinus(s))
}
pub fn sigma_plus(s: usize) -> GenExpr {
    GenExpr::Prim(Prim::SigmaPlus(s))
}
pub fn fock_proj(s: usize, k: usize) -> GenExpr {
    GenExpr::Prim(Prim::FockProj(s, k))
}

impl GenExpr {
    pub fn scale(self, c: Complex64) -> GenExpr {
        GenExpr::Scale(c, Box::new(self))
    }

    pub fn scale_re(self, x: f64) -> GenExpr {
        self.scale(Complex64::new(x, 0.0))
    }

    pub fn dag(self) -> GenExpr {
        GenExpr::Dagger(Box::new(self))
    }

    /// Shifts every slot index by `k` (used when conditioning wires are prepended).
    pub fn shift_slots(&self, k: usize) -> GenExpr {
        match self {
            GenExpr::Prim(p) => GenExpr::Prim(shift_prim(p, k)),
            GenExpr::Scale(c, e) => GenExpr::Scale(*c, Box::new(e.shift_slots(k))),
            GenExpr::Sum(v) => GenExpr::Sum(v.iter().map(|e| e.shift_slots(k)).collect()),
            GenExpr::Prod(v) => GenExpr::Prod(v.iter().map(|e| e.shift_slots(k)).collect()),
            GenExpr::Dagger(e) => GenExpr::Dagger(Box::new(e.shift_slots(k))),
        }
    }

    /// Pushes daggers down to the primitives.
    pub fn expand_dagger(&self) -> GenExpr {
        self.dagger_if(false)
    }

    fn dagger_if(&self, d: bool) -> GenExpr {
        match self {
            GenExpr::Prim(p) => {
                if d {
                    p.dagger()
                } else {
                    GenExpr::Prim(p.clone())
                }
            }
            GenExpr::Scale(c, e) => {
                GenExpr::Scale(if d { c.conj() } else { *c }, Box::new(e.dagger_if(d)))
            }
            GenExpr::Sum(v) => GenExpr::Sum(v.iter().map(|e| e.dagger_if(d)).collect()),
            GenExpr::Prod(v) => {
                let mut out: Vec<_> = v.iter().map(|e| e.dagger_if(d)).collect();
                if d {
                    out.reverse();
                }
                GenExpr::Prod(out)
            }
            GenExpr::Dagger(e) => e.dagger_if(!d),
        }
    }

    /// Every primitive in the tree, in traversal order.
    pub fn primitives(&self) -> Vec<&Prim> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a Prim>) {
        match self {
            GenExpr::Prim(p) => out.push(p),
            GenExpr::Scale(_, e) | GenExpr::Dagger(e) => e.collect(out),
            GenExpr::Sum(v) | GenExpr::Prod(v) => v.iter().for_each(|e| e.collect(out)),
        }
    }

    /// Required wire type per slot, as implied by the primitives. Conflicting
    /// uses of one slot yield `Err(slot)`.
    pub fn slot_types(&self) -> Result<BTreeMap<usize, WireType>, usize> {
        let mut m = BTreeMap::new();
        for p in self.primitives() {
            let t = p.wire_type();
            match m.insert(p.slot(), t) {
                Some(old) if old != t => return Err(p.slot()),
                _ => {}
            }
        }
        Ok(m)
    }

    /// Expands into a sum of product terms where each term holds at most one
    /// factor expression per slot. Same-slot sums stay unexpanded inside a
    /// factor, so e.g. `(a + a†)(b† - b)` is a single two-factor term.
    pub fn kron_terms(&self) -> Vec<KronTerm> {
        let e = self.expand_dagger();
        let mut terms = e.terms_inner();
        merge_single_slot(&mut terms);
        terms
    }

    fn single_slot(&self) -> Option<usize> {
        let prims = self.primitives();
        let s = prims.first()?.slot();
        prims.iter().all(|p| p.slot() == s).then_some(s)
    }

    fn terms_inner(&self) -> Vec<KronTerm> {
        if let Some(s) = self.single_slot() {
            let mut factors = BTreeMap::new();
            factors.insert(s, vec![self.clone()]);
            return vec![KronTerm {
                coeff: Complex64::new(1.0, 0.0),
                factors,
            }];
        }
        match self {
            GenExpr::Prim(_) => unreachable!("primitive is single-slot"),
            GenExpr::Scale(c, e) => {
                let mut t = e.terms_inner();
                t.iter_mut().for_each(|t| t.coeff *= c);
                t
            }
            GenExpr::Sum(v) => v.iter().flat_map(|e| e.terms_inner()).collect(),
            GenExpr::Prod(v) => {
                let mut acc = vec![KronTerm::one()];
                for f in v {
                    let ft = f.terms_inner();
                    let mut next = Vec::with_capacity(acc.len() * ft.len());
                    for l in &acc {
                        for r in &ft {
                            next.push(l.product(r));
                        }
                    }
                    acc = next;
                }
                acc
            }
            GenExpr::Dagger(_) => unreachable!("daggers expanded before term extraction"),
        }
    }
}

fn shift_prim(p: &Prim, k: usize) -> Prim {
    match *p {
        Prim::A(s) => Prim::A(s + k),
        Prim::Adag(s) => Prim::Adag(s + k),
        Prim::N(s) => Prim::N(s + k),
        Prim::X(s) => Prim::X(s + k),
        Prim::PauliZ(s) => Prim::PauliZ(s + k),
        Prim::PauliX(s) => Prim::PauliX(s + k),
        Prim::PauliY(s) => Prim::PauliY(s + k),
        Prim::SigmaMinus(s) => Prim::SigmaMinus(s + k),
        Prim::SigmaPlus(s) => Prim::SigmaPlus(s + k),
        Prim::FockProj(s, n) => Prim::FockProj(s + k, n),
        Prim::QubitRot { slot, theta, phi } => Prim::QubitRot {
            slot: slot + k,
            theta,
            phi,
        },
    }
}

/// `coeff · ⊗_slot Π(factors[slot])`; slots not listed carry the identity.
#[derive(Clone, Debug)]
pub struct KronTerm {
    pub coeff: Complex64,
    /// Per slot, an ordered product of single-slot expressions.
    pub factors: BTreeMap<usize, Vec<GenExpr>>,
}

impl KronTerm {
    fn one() -> Self {
        KronTerm {
            coeff: Complex64::new(1.0, 0.0),
            factors: BTreeMap::new(),
        }
    }

    fn product(&self, r: &KronTerm) -> KronTerm {
        let mut factors = self.factors.clone();
        for (s, f) in &r.factors {
            factors.entry(*s).or_default().extend(f.iter().cloned());
        }
        KronTerm {
            coeff: self.coeff * r.coeff,
            factors,
        }
    }
}

/// Folds terms that live on the same single slot into one factor sum.
fn merge_single_slot(terms: &mut Vec<KronTerm>) {
    let mut merged: Vec<KronTerm> = Vec::with_capacity(terms.len());
    for t in terms.drain(..) {
        if t.factors.len() == 1 {
            let slot = *t.factors.keys().next().expect("one slot");
            if let Some(m) = merged
                .iter_mut()
                .find(|m| m.factors.len() == 1 && m.factors.contains_key(&slot))
            {
                let lhs = term_expr(m);
                let rhs = term_expr(&t);
                m.coeff = Complex64::new(1.0, 0.0);
                m.factors.insert(slot, vec![GenExpr::Sum(vec![lhs, rhs])]);
                continue;
            }
        }
        merged.push(t);
    }
    *terms = merged;
}

fn term_expr(t: &KronTerm) -> GenExpr {
    let f: Vec<GenExpr> = t.factors.values().flat_map(|v| v.iter().cloned()).collect();
    GenExpr::Prod(f).scale(t.coeff)
}

impl Add for GenExpr {
    type Output = GenExpr;
    fn add(self, r: GenExpr) -> GenExpr {
        match self {
            GenExpr::Sum(mut v) => {
                v.push(r);
                GenExpr::Sum(v)
            }
            l => GenExpr::Sum(vec![l, r]),
        }
    }
}

impl Sub for GenExpr {
    type Output = GenExpr;
    fn sub(self, r: GenExpr) -> GenExpr {
        self + (-r)
    }
}

impl Neg for GenExpr {
    type Output = GenExpr;
    fn neg(self) -> GenExpr {
        self.scale_re(-1.0)
    }
}

impl Mul for GenExpr {
    type Output = GenExpr;
    fn mul(self, r: GenExpr) -> GenExpr {
        match self {
            GenExpr::Prod(mut v) => {
                v.push(r);
                GenExpr::Prod(v)
            }
            l => GenExpr::Prod(vec![l, r]),
        }
    }
}

impl Mul<GenExpr> for Complex64 {
    type Output = GenExpr;
    fn mul(self, r: GenExpr) -> GenExpr {
        r.scale(self)
    }
}

impl Mul<GenExpr> for f64 {
    type Output = GenExpr;
    fn mul(self, r: GenExpr) -> GenExpr {
        r.scale_re(self)
    }
}

impl fmt::Display for Prim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prim::A(s) => write!(f, "a[{s}]"),
            Prim::Adag(s) => write!(f, "a†[{s}]"),
            Prim::N(s) => write!(f, "n[{s}]"),
            Prim::X(s) => write!(f, "x[{s}]"),
            Prim::PauliZ(s) => write!(f, "Z[{s}]"),
            Prim::PauliX(s) => write!(f, "X[{s}]"),
            Prim::PauliY(s) => write!(f, "Y[{s}]"),
            Prim::SigmaMinus(s) => write!(f, "σ-[{s}]"),
            Prim::SigmaPlus(s) => write!(f, "σ+[{s}]"),
            Prim::FockProj(s, k) => write!(f, "|{k}><{k}|[{s}]"),
            Prim::QubitRot { slot, theta, phi } => write!(f, "R_{phi}({theta})[{slot}]"),
        }
    }
}

impl fmt::Display for GenExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenExpr::Prim(p) => write!(f, "{p}"),
            GenExpr::Scale(c, e) => write!(f, "({c})·{e}"),
            GenExpr::Sum(v) => {
                f.write_str("(")?;
                for (i, e) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    write!(f, "{e}")?;
                }
                f.write_str(")")
            }
            GenExpr::Prod(v) => {
                for (i, e) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str("·")?;
                    }
                    write!(f, "{e}")?;
                }
                Ok(())
            }
            GenExpr::Dagger(e) => write!(f, "({e})†"),
        }
    }
}

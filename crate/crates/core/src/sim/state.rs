use num_complex::Complex;
use num_traits::{ToPrimitive, Zero};

use super::expm::{exp_generator, Plan};
use super::operators::{operator_matrix, pauli_x, pauli_y, pauli_z, CMatrix};
use super::{Cutoffs, SimError};
use crate::gates::generator::pauli_z as z_gen;
use crate::gates::{FixedGate, GateForm, GenExpr, Prim};
use crate::ir::{GateInstruction, Modifier, WireLabel};
use crate::measure::{Factor, Observable};
use crate::scalar::{c, cone, cz, Real};
use crate::types::{TypeEnv, WireType};

/// Hilbert-space dimension of a typed wire.
pub fn wire_dim(w: &WireLabel, t: WireType, cutoffs: &Cutoffs) -> Result<usize, SimError> {
    match t {
        WireType::Qubit => Ok(2),
        WireType::Qudit(d) => Ok(d as usize),
        WireType::Qumode => {
            let n = cutoffs.of(w);
            if n < 2 {
                return Err(SimError::Cutoff(n));
            }
            Ok(n)
        }
        WireType::Bottom => Err(SimError::UnresolvedWire(w.clone())),
    }
}

fn fixed_matrix<T: Real>(g: FixedGate) -> CMatrix<T> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match g {
        FixedGate::H => CMatrix::from_row_slice(2, 2, &[c(h, 0.), c(h, 0.), c(h, 0.), c(-h, 0.)]),
        FixedGate::X => pauli_x(),
        FixedGate::Y => pauli_y(),
        FixedGate::Z => pauli_z(),
        FixedGate::S => CMatrix::from_row_slice(2, 2, &[cone(), cz(), cz(), c(0., 1.)]),
        FixedGate::Sdg => CMatrix::from_row_slice(2, 2, &[cone(), cz(), cz(), c(0., -1.)]),
        FixedGate::Cnot => {
            let mut m = CMatrix::zeros(4, 4);
            for (i, j) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
                m[(i, j)] = cone();
            }
            m
        }
    }
}

fn matrix_power<T: Real>(m: &CMatrix<T>, k: i64) -> CMatrix<T> {
    let base = if k < 0 { m.adjoint() } else { m.clone() };
    let mut out = CMatrix::identity(m.nrows(), m.ncols());
    for _ in 0..k.unsigned_abs() {
        out = &out * &base;
    }
    out
}

/// Unitary of an instruction over its own wires (instruction wire order),
/// given the dimension of each wire.
pub fn gate_plan<T: Real>(instr: &GateInstruction, dims: &[usize]) -> Result<Plan<T>, SimError> {
    let instr = instr.fold();
    let n_cond = instr.num_conditions();
    if instr.is_identity() {
        return Ok(Plan::Diagonal(vec![cone(); dims.iter().product()]));
    }
    let (k, adj) = instr.inner();
    let base_dims = &dims[n_cond..];
    let conds: Vec<&Modifier> = instr.conditions().collect();
    // Either still symbolic (generator plus its slot dims) or materialized.
    let mut symbolic: Option<(GenExpr, Vec<usize>)> = None;
    let mut plan: Option<Plan<T>> = None;
    match &instr.gate().form {
        GateForm::Exponential(g) => {
            let s = k.to_f64().expect("finite ratio") * if adj { -1.0 } else { 1.0 };
            symbolic = Some((g(instr.params()).scale_re(s), base_dims.to_vec()));
        }
        GateForm::Fixed(f) => {
            if !k.is_integer() {
                return Err(SimError::Unsupported(format!(
                    "fractional power of {}",
                    instr.name()
                )));
            }
            let m = fixed_matrix::<T>(*f);
            let m = if adj { m.adjoint() } else { m };
            plan = Some(Plan::Dense(matrix_power(&m, *k.numer())));
        }
        GateForm::ModeSwap => {
            if !k.is_integer() {
                return Err(SimError::Unsupported("fractional power of ModeSwap".into()));
            }
            let (da, db) = (base_dims[0], base_dims[1]);
            if da != db {
                return Err(SimError::Unsupported(
                    "ModeSwap between different cutoffs".into(),
                ));
            }
            let swap = |i: usize| (i % db) * da + i / db;
            let perm = if k.numer().rem_euclid(2) == 0 {
                (0..da * db).collect()
            } else {
                (0..da * db).map(swap).collect()
            };
            plan = Some(Plan::Permutation(perm));
        }
    }
    for m in conds {
        match m {
            Modifier::CondZ(_) => match symbolic.take() {
                Some((kx, mut d)) => {
                    d.insert(0, 2);
                    symbolic = Some((GenExpr::Prod(vec![z_gen(0), kx.shift_slots(1)]), d));
                }
                None => {
                    return Err(SimError::Unsupported(format!(
                        "qubit-conditioned {} without a generator",
                        instr.name()
                    )));
                }
            },
            Modifier::Ctrl(_) => {
                let inner = match symbolic.take() {
                    Some((kx, d)) => exp_generator(&kx, &d)?,
                    None => plan.take().expect("materialized"),
                };
                plan = Some(Plan::Controlled(Box::new(inner)));
            }
            _ => unreachable!("conditions only"),
        }
    }
    match (symbolic, plan) {
        (Some((kx, d)), _) => exp_generator(&kx, &d),
        (None, Some(p)) => Ok(p),
        (None, None) => unreachable!(),
    }
}

/// Dense state over typed wires, first wire most significant.
#[derive(Clone, Debug)]
pub struct StateVector<T: Real> {
    amps: Vec<Complex<T>>,
    wires: Vec<WireLabel>,
    types: Vec<WireType>,
    dims: Vec<usize>,
}

/// `Σ digit_k · stride_k` over every digit tuple, row-major.
fn offsets(dims: &[usize], strides: &[usize]) -> Vec<usize> {
    let mut out = vec![0];
    for (&d, &s) in dims.iter().zip(strides) {
        out = out
            .iter()
            .flat_map(|&o| (0..d).map(move |k| o + k * s))
            .collect();
    }
    out
}

impl<T: Real> StateVector<T> {
    /// Basis state: each prepared wire at its level, every other wire at 0.
    pub fn basis(
        wires: Vec<WireLabel>,
        env: &TypeEnv,
        cutoffs: &Cutoffs,
        prep: &[(WireLabel, usize)],
    ) -> Result<Self, SimError> {
        let mut types = Vec::with_capacity(wires.len());
        let mut dims = Vec::with_capacity(wires.len());
        for w in &wires {
            let t = env.get(w).copied().unwrap_or(WireType::Bottom);
            dims.push(wire_dim(w, t, cutoffs)?);
            types.push(t);
        }
        let mut index = 0;
        for (k, w) in wires.iter().enumerate() {
            let level = prep.iter().find(|(v, _)| v == w).map_or(0, |(_, l)| *l);
            if level >= dims[k] {
                return Err(SimError::PrepLevel {
                    wire: w.clone(),
                    level,
                    dim: dims[k],
                });
            }
            index = index * dims[k] + level;
        }
        if let Some((w, _)) = prep.iter().find(|(w, _)| !wires.contains(w)) {
            return Err(SimError::UnknownWire(w.clone()));
        }
        let mut amps = vec![cz(); dims.iter().product()];
        amps[index] = cone();
        Ok(StateVector {
            amps,
            wires,
            types,
            dims,
        })
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn wires(&self) -> &[WireLabel] {
        &self.wires
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn types(&self) -> &[WireType] {
        &self.types
    }

    pub fn norm(&self) -> T {
        <T as num_traits::Float>::sqrt(self.amps.iter().fold(T::zero(), |s, a| s + a.norm_sqr()))
    }

    pub fn position(&self, w: &WireLabel) -> Result<usize, SimError> {
        self.wires
            .iter()
            .position(|v| v == w)
            .ok_or_else(|| SimError::UnknownWire(w.clone()))
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.dims[k + 1];
        }
        s
    }

    /// Applies `plan` to the wires at `positions` (plan's own order).
    pub fn apply_plan(&mut self, plan: &Plan<T>, positions: &[usize]) {
        let strides = self.strides();
        let local = offsets(
            &positions.iter().map(|&p| self.dims[p]).collect::<Vec<_>>(),
            &positions.iter().map(|&p| strides[p]).collect::<Vec<_>>(),
        );
        let others: Vec<usize> = (0..self.dims.len())
            .filter(|p| !positions.contains(p))
            .collect();
        let bases = offsets(
            &others.iter().map(|&p| self.dims[p]).collect::<Vec<_>>(),
            &others.iter().map(|&p| strides[p]).collect::<Vec<_>>(),
        );
        let mut buf = vec![cz(); local.len()];
        let mut scratch = Vec::new();
        for b in bases {
            for (x, o) in buf.iter_mut().zip(&local) {
                *x = self.amps[b + o];
            }
            plan.apply(&mut buf, &mut scratch);
            for (x, o) in buf.iter().zip(&local) {
                self.amps[b + o] = *x;
            }
        }
    }

    pub fn apply(&mut self, instr: &GateInstruction) -> Result<(), SimError> {
        let positions = instr
            .wires()
            .iter()
            .map(|w| self.position(w))
            .collect::<Result<Vec<_>, _>>()?;
        let dims: Vec<usize> = positions.iter().map(|&p| self.dims[p]).collect();
        let plan = gate_plan::<T>(instr, &dims)?;
        self.apply_plan(&plan, &positions);
        Ok(())
    }

    fn factor_matrix(&self, f: &Factor) -> Result<(usize, CMatrix<T>), SimError> {
        let p = self.position(f.wire())?;
        let prim = match f {
            Factor::N(_) => Prim::N(0),
            Factor::Xquad(_) => Prim::X(0),
            Factor::PauliZ(_) => Prim::PauliZ(0),
            Factor::PauliX(_) => Prim::PauliX(0),
            Factor::PauliY(_) => Prim::PauliY(0),
        };
        Ok((p, operator_matrix(&prim, self.dims[p])?))
    }

    /// `O|ψ⟩` for an observable.
    fn applied(&self, obs: &Observable) -> Result<Vec<Complex<T>>, SimError> {
        let mut out = self.clone();
        for f in obs.factors() {
            let (p, m) = self.factor_matrix(f)?;
            out.apply_plan(&Plan::Dense(m), &[p]);
        }
        let k = Complex::new(T::lit(obs.coeff), T::zero());
        Ok(out.amps.into_iter().map(|a| a * k).collect())
    }

    pub fn expval(&self, obs: &Observable) -> Result<T, SimError> {
        let o = self.applied(obs)?;
        let v = self
            .amps
            .iter()
            .zip(&o)
            .fold(cz::<T>(), |s, (a, b)| s + a.conj() * b);
        Ok(v.re)
    }

    /// `⟨O²⟩ − ⟨O⟩²`, using `⟨O²⟩ = ‖O ψ‖²` for Hermitian `O`.
    pub fn var(&self, obs: &Observable) -> Result<T, SimError> {
        let o = self.applied(obs)?;
        let m2 = o.iter().fold(T::zero(), |s, a| s + a.norm_sqr());
        let m1 = self
            .amps
            .iter()
            .zip(&o)
            .fold(cz::<T>(), |s, (a, b)| s + a.conj() * b)
            .re;
        let v = m2 - m1 * m1;
        Ok(if v < T::zero() && v > -T::structural_eps() {
            T::zero()
        } else {
            v
        })
    }

    /// Projects `wire` onto `level` and renormalizes; also returns the
    /// probability of that outcome.
    pub fn postselect(&self, wire: &WireLabel, level: usize) -> Result<(Self, T), SimError> {
        let p = self.position(wire)?;
        let stride: usize = self.dims[p + 1..].iter().product();
        let mut out = self.clone();
        for (i, a) in out.amps.iter_mut().enumerate() {
            if (i / stride) % self.dims[p] != level {
                *a = cz();
            }
        }
        let prob = out.amps.iter().fold(T::zero(), |s, a| s + a.norm_sqr());
        if prob > T::zero() {
            let k = Complex::new(T::one() / <T as num_traits::Float>::sqrt(prob), T::zero());
            out.amps.iter_mut().for_each(|a| *a *= k);
        }
        Ok((out, prob))
    }

    /// Full-space matrix of a plan acting at `positions`: oracle use only.
    pub fn embed(plan: &Plan<T>, positions: &[usize], dims: &[usize]) -> CMatrix<T> {
        let d: usize = dims.iter().product();
        let mut out = CMatrix::zeros(d, d);
        for j in 0..d {
            let mut s = StateVector {
                amps: vec![cz(); d],
                wires: vec![],
                types: vec![],
                dims: dims.to_vec(),
            };
            s.amps[j] = cone();
            s.apply_plan(plan, positions);
            for (i, a) in s.amps.iter().enumerate() {
                if !a.is_zero() {
                    out[(i, j)] = *a;
                }
            }
        }
        out
    }
}

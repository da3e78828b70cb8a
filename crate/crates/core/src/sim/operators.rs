//! Truncated Fock-space and qubit operator matrices.

use nalgebra::DMatrix;
use num_complex::Complex;

use super::SimError;
use crate::gates::{GenExpr, Prim};
use crate::scalar::{c, cone, from_c64, Real};

pub type CMatrix<T> = DMatrix<Complex<T>>;

fn ladder<T: Real>(dim: usize, raise: bool) -> CMatrix<T> {
    let mut m = CMatrix::<T>::zeros(dim, dim);
    for n in 1..dim {
        let v = Complex::new(<T as num_traits::Float>::sqrt(T::lit(n as f64)), T::zero());
        if raise {
            m[(n, n - 1)] = v;
        } else {
            m[(n - 1, n)] = v;
        }
    }
    m
}

fn qubit<T: Real>(entries: [(f64, f64); 4]) -> CMatrix<T> {
    CMatrix::from_row_slice(2, 2, &entries.map(|(re, im)| c::<T>(re, im)))
}

pub fn pauli_x<T: Real>() -> CMatrix<T> {
    qubit([(0., 0.), (1., 0.), (1., 0.), (0., 0.)])
}

pub fn pauli_y<T: Real>() -> CMatrix<T> {
    qubit([(0., 0.), (0., -1.), (0., 1.), (0., 0.)])
}

pub fn pauli_z<T: Real>() -> CMatrix<T> {
    qubit([(1., 0.), (0., 0.), (0., 0.), (-1., 0.)])
}

/// Matrix of one primitive on a wire of dimension `dim`.
pub fn operator_matrix<T: Real>(prim: &Prim, dim: usize) -> Result<CMatrix<T>, SimError> {
    if dim < 2 {
        return Err(SimError::Cutoff(dim));
    }
    let want = prim.wire_type();
    let qubit_dim = |m: CMatrix<T>| {
        if dim == 2 {
            Ok(m)
        } else {
            Err(SimError::WrongWire {
                prim: prim.to_string(),
                dim,
                want,
            })
        }
    };
    Ok(match *prim {
        Prim::A(_) => ladder(dim, false),
        Prim::Adag(_) => ladder(dim, true),
        Prim::N(_) => {
            CMatrix::from_diagonal(&nalgebra::DVector::from_fn(dim, |i, _| c(i as f64, 0.0)))
        }
        Prim::X(_) => {
            (ladder::<T>(dim, false) + ladder::<T>(dim, true))
                * c::<T>(std::f64::consts::FRAC_1_SQRT_2, 0.0)
        }
        Prim::FockProj(_, k) => {
            let mut m = CMatrix::zeros(dim, dim);
            if k < dim {
                m[(k, k)] = cone();
            }
            m
        }
        Prim::PauliX(_) => qubit_dim(pauli_x())?,
        Prim::PauliY(_) => qubit_dim(pauli_y())?,
        Prim::PauliZ(_) => qubit_dim(pauli_z())?,
        Prim::SigmaMinus(_) => qubit_dim(qubit([(0., 0.), (1., 0.), (0., 0.), (0., 0.)]))?,
        Prim::SigmaPlus(_) => qubit_dim(qubit([(0., 0.), (0., 0.), (1., 0.), (0., 0.)]))?,
        Prim::QubitRot { theta, phi, .. } => {
            let (s, co) = (theta / 2.0).sin_cos();
            let e = num_complex::Complex64::from_polar(1.0, phi);
            // cos(t/2) I - i sin(t/2) (cos p X + sin p Y)
            qubit_dim(CMatrix::from_row_slice(
                2,
                2,
                &[
                    c(co, 0.0),
                    from_c64(-num_complex::Complex64::i() * s * e.conj()),
                    from_c64(-num_complex::Complex64::i() * s * e),
                    c(co, 0.0),
                ],
            ))?
        }
    })
}

/// Matrix of an expression whose primitives all sit on one slot.
pub fn single_slot_matrix<T: Real>(e: &GenExpr, dim: usize) -> Result<CMatrix<T>, SimError> {
    Ok(match e {
        GenExpr::Prim(p) => operator_matrix(p, dim)?,
        GenExpr::Scale(k, inner) => single_slot_matrix::<T>(inner, dim)? * from_c64::<T>(*k),
        GenExpr::Sum(v) => {
            let mut acc = CMatrix::zeros(dim, dim);
            for x in v {
                acc += single_slot_matrix::<T>(x, dim)?;
            }
            acc
        }
        GenExpr::Prod(v) => {
            let mut acc = CMatrix::identity(dim, dim);
            for x in v {
                acc *= single_slot_matrix::<T>(x, dim)?;
            }
            acc
        }
        GenExpr::Dagger(inner) => single_slot_matrix::<T>(inner, dim)?.adjoint(),
    })
}

/// Kronecker product, first argument most significant.
pub fn kron<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a.kronecker(b)
}

/// Dense matrix of a full generator over slots with the given dimensions.
pub fn generator_matrix<T: Real>(k: &GenExpr, dims: &[usize]) -> Result<CMatrix<T>, SimError> {
    let d: usize = dims.iter().product();
    let mut acc = CMatrix::<T>::zeros(d, d);
    for term in k.kron_terms() {
        let mut m = CMatrix::<T>::from_element(1, 1, from_c64(term.coeff));
        for (slot, &dim) in dims.iter().enumerate() {
            let f = match term.factors.get(&slot) {
                Some(fs) => single_slot_matrix::<T>(&GenExpr::Prod(fs.clone()), dim)?,
                None => CMatrix::identity(dim, dim),
            };
            m = kron(&m, &f);
        }
        acc += m;
    }
    Ok(acc)
}

/// `max |a_ij - e^{iγ} b_ij|` with γ fixed by the largest-magnitude entry of `b`.
pub fn phase_distance<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    let (mut best, mut idx) = (T::zero(), (0, 0));
    for j in 0..b.ncols() {
        for i in 0..b.nrows() {
            let m = b[(i, j)].norm();
            if m > best {
                best = m;
                idx = (i, j);
            }
        }
    }
    let ratio = if best > T::zero() {
        a[idx] / b[idx]
    } else {
        cone()
    };
    let phase = if ratio.norm() > T::zero() {
        ratio / Complex::new(ratio.norm(), T::zero())
    } else {
        cone()
    };
    let mut worst = T::zero();
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let d = (a[(i, j)] - phase * b[(i, j)]).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

pub fn max_abs<T: Real>(a: &CMatrix<T>) -> T {
    a.iter()
        .fold(T::zero(), |m, z| if z.norm() > m { z.norm() } else { m })
}

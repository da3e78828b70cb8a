//! `exp(K)` for anti-Hermitian generators, planned by structure: diagonal
//! generators exponentiate entrywise, single Kronecker terms factor into
//! per-wire eigenbases, everything else splits into connected blocks that are
//! diagonalized densely.

use std::collections::HashMap;

use nalgebra::DVector;
use num_complex::Complex;

use super::operators::{single_slot_matrix, CMatrix};
use super::SimError;
use crate::gates::GenExpr;
use crate::scalar::{cone, cz, from_c64, Real};

/// A unitary on a small tensor space, stored in whichever form is cheapest.
#[derive(Clone, Debug)]
pub enum Plan<T: Real> {
    Diagonal(Vec<Complex<T>>),
    /// `(⊗ V_s) diag(phases) (⊗ V_s)†`, `None` axes are identity.
    Factored {
        dims: Vec<usize>,
        axes: Vec<Option<CMatrix<T>>>,
        phases: Vec<Complex<T>>,
    },
    /// Singleton indices scale by `diag`; each block acts on its index set.
    Blocks {
        diag: Vec<Complex<T>>,
        blocks: Vec<(Vec<usize>, CMatrix<T>)>,
    },
    Dense(CMatrix<T>),
    /// `|0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ U` with the control most significant.
    Controlled(Box<Plan<T>>),
    /// Basis permutation: `|i⟩ ↦ |perm[i]⟩`.
    Permutation(Vec<usize>),
}

fn exp_c<T: Real>(z: Complex<T>) -> Complex<T> {
    z.exp()
}

fn is_diagonal<T: Real>(m: &CMatrix<T>) -> bool {
    m.iter()
        .enumerate()
        .all(|(k, z)| k % (m.nrows() + 1) == 0 || z.norm() == T::zero())
}

/// Hermiticity tolerance scaled to the matrix size.
fn tol<T: Real>(scale: T) -> T {
    T::lit(1e-9) * (T::one() + scale)
}

/// Eigendecomposition `H = V diag(λ) V†` of a Hermitian matrix.
fn herm_eigen<T: Real>(h: CMatrix<T>) -> (CMatrix<T>, Vec<T>) {
    let e = h.symmetric_eigen();
    (e.eigenvectors, e.eigenvalues.iter().copied().collect())
}

impl<T: Real> Plan<T> {
    pub fn dim(&self) -> usize {
        match self {
            Plan::Diagonal(d) | Plan::Blocks { diag: d, .. } => d.len(),
            Plan::Factored { phases, .. } => phases.len(),
            Plan::Dense(m) => m.nrows(),
            Plan::Controlled(u) => 2 * u.dim(),
            Plan::Permutation(p) => p.len(),
        }
    }

    /// Applies the unitary to a vector in place; `scratch` is reused.
    pub fn apply(&self, v: &mut [Complex<T>], scratch: &mut Vec<Complex<T>>) {
        match self {
            Plan::Diagonal(d) => v.iter_mut().zip(d).for_each(|(x, p)| *x *= *p),
            Plan::Blocks { diag, blocks } => {
                v.iter_mut().zip(diag).for_each(|(x, p)| *x *= *p);
                for (idx, u) in blocks {
                    scratch.clear();
                    scratch.extend(idx.iter().map(|&i| v[i]));
                    for (r, &i) in idx.iter().enumerate() {
                        let mut acc = cz();
                        for (c, x) in scratch.iter().enumerate() {
                            acc += u[(r, c)] * *x;
                        }
                        v[i] = acc;
                    }
                }
            }
            Plan::Factored { dims, axes, phases } => {
                for (s, ax) in axes.iter().enumerate() {
                    if let Some(m) = ax {
                        apply_axis(v, dims, s, &m.adjoint(), scratch);
                    }
                }
                v.iter_mut().zip(phases).for_each(|(x, p)| *x *= *p);
                for (s, ax) in axes.iter().enumerate() {
                    if let Some(m) = ax {
                        apply_axis(v, dims, s, m, scratch);
                    }
                }
            }
            Plan::Dense(m) => {
                scratch.clear();
                scratch.extend_from_slice(v);
                for (r, x) in v.iter_mut().enumerate() {
                    let mut acc = cz();
                    for (c, y) in scratch.iter().enumerate() {
                        acc += m[(r, c)] * *y;
                    }
                    *x = acc;
                }
            }
            Plan::Controlled(u) => {
                let half = u.dim();
                let mut inner = Vec::new();
                u.apply(&mut v[half..], &mut inner);
            }
            Plan::Permutation(p) => {
                scratch.clear();
                scratch.extend_from_slice(v);
                for (i, &j) in p.iter().enumerate() {
                    v[j] = scratch[i];
                }
            }
        }
    }

    pub fn to_dense(&self) -> CMatrix<T> {
        let d = self.dim();
        let mut out = CMatrix::zeros(d, d);
        let mut col = vec![cz(); d];
        let mut scratch = Vec::new();
        for j in 0..d {
            col.iter_mut().for_each(|x| *x = cz());
            col[j] = cone();
            self.apply(&mut col, &mut scratch);
            for i in 0..d {
                out[(i, j)] = col[i];
            }
        }
        out
    }
}

/// Applies `m` along tensor axis `s` of a vector with the given dims.
fn apply_axis<T: Real>(
    v: &mut [Complex<T>],
    dims: &[usize],
    s: usize,
    m: &CMatrix<T>,
    scratch: &mut Vec<Complex<T>>,
) {
    let d = dims[s];
    let inner: usize = dims[s + 1..].iter().product();
    let outer: usize = dims[..s].iter().product();
    for o in 0..outer {
        for i in 0..inner {
            let base = o * d * inner + i;
            scratch.clear();
            scratch.extend((0..d).map(|k| v[base + k * inner]));
            for r in 0..d {
                let mut acc = cz();
                for (c, x) in scratch.iter().enumerate() {
                    acc += m[(r, c)] * *x;
                }
                v[base + r * inner] = acc;
            }
        }
    }
}

/// Per-slot factor matrices of each Kronecker term, with the coefficient.
type Terms<T> = Vec<(Complex<T>, Vec<Option<CMatrix<T>>>)>;

fn term_matrices<T: Real>(k: &GenExpr, dims: &[usize]) -> Result<Terms<T>, SimError> {
    k.kron_terms()
        .into_iter()
        .map(|t| {
            let mut f = vec![None; dims.len()];
            for (slot, fs) in &t.factors {
                let dim = *dims.get(*slot).ok_or(SimError::Slot(*slot))?;
                f[*slot] = Some(single_slot_matrix::<T>(&GenExpr::Prod(fs.clone()), dim)?);
            }
            Ok((from_c64(t.coeff), f))
        })
        .collect()
}

/// Plans `exp(K)` on slots of dimensions `dims`.
pub fn exp_generator<T: Real>(k: &GenExpr, dims: &[usize]) -> Result<Plan<T>, SimError> {
    let terms = term_matrices::<T>(k, dims)?;
    let d: usize = dims.iter().product();
    if terms
        .iter()
        .all(|(_, f)| f.iter().flatten().all(is_diagonal))
    {
        return diagonal_plan(&terms, dims, d);
    }
    if let [(coeff, factors)] = terms.as_slice() {
        if let Some(p) = factored_plan(*coeff, factors, dims) {
            return Ok(p);
        }
    }
    block_plan(&terms, dims, d)
}

fn digits(mut idx: usize, dims: &[usize], out: &mut [usize]) {
    for s in (0..dims.len()).rev() {
        out[s] = idx % dims[s];
        idx /= dims[s];
    }
}

fn diagonal_plan<T: Real>(terms: &Terms<T>, dims: &[usize], d: usize) -> Result<Plan<T>, SimError> {
    let mut dig = vec![0; dims.len()];
    let mut diag = Vec::with_capacity(d);
    for idx in 0..d {
        digits(idx, dims, &mut dig);
        let mut kii = cz::<T>();
        for (c, f) in terms {
            let mut v = *c;
            for (s, m) in f.iter().enumerate() {
                if let Some(m) = m {
                    v *= m[(dig[s], dig[s])];
                }
            }
            kii += v;
        }
        if num_traits::Float::abs(kii.re) > tol(kii.norm()) {
            return Err(SimError::NotAntiHermitian(kii.re.as_f64()));
        }
        diag.push(exp_c(Complex::new(T::zero(), kii.im)));
    }
    Ok(Plan::Diagonal(diag))
}

fn factored_plan<T: Real>(
    coeff: Complex<T>,
    factors: &[Option<CMatrix<T>>],
    dims: &[usize],
) -> Option<Plan<T>> {
    let i = Complex::new(T::zero(), T::one());
    let mut c = coeff;
    let mut axes = Vec::with_capacity(dims.len());
    let mut spectra: Vec<Vec<T>> = Vec::with_capacity(dims.len());
    for (s, f) in factors.iter().enumerate() {
        match f {
            None => {
                axes.push(None);
                spectra.push(vec![T::one(); dims[s]]);
            }
            Some(m) => {
                let scale = super::operators::max_abs(m);
                let h = if super::operators::max_abs(&(m - m.adjoint())) <= tol(scale) {
                    m.clone()
                } else if super::operators::max_abs(&(m + m.adjoint())) <= tol(scale) {
                    c *= i;
                    m * (-i)
                } else {
                    return None;
                };
                let (v, l) = herm_eigen(h);
                axes.push(Some(v));
                spectra.push(l);
            }
        }
    }
    // exp(c Π λ) must be a phase: c real part vanishes up to tolerance.
    if num_traits::Float::abs(c.re) > tol(c.norm()) {
        return None;
    }
    let d: usize = dims.iter().product();
    let mut dig = vec![0; dims.len()];
    let phases = (0..d)
        .map(|idx| {
            digits(idx, dims, &mut dig);
            let lam = spectra
                .iter()
                .zip(&dig)
                .fold(T::one(), |acc, (l, &k)| acc * l[k]);
            exp_c(Complex::new(T::zero(), c.im * lam))
        })
        .collect();
    Some(Plan::Factored {
        dims: dims.to_vec(),
        axes,
        phases,
    })
}

fn find(p: &mut [usize], mut x: usize) -> usize {
    while p[x] != x {
        p[x] = p[p[x]];
        x = p[x];
    }
    x
}

fn block_plan<T: Real>(terms: &Terms<T>, dims: &[usize], d: usize) -> Result<Plan<T>, SimError> {
    let mut entries: HashMap<(usize, usize), Complex<T>> = HashMap::new();
    for (c, f) in terms {
        let mut acc: Vec<(usize, usize, Complex<T>)> = vec![(0, 0, *c)];
        for (s, m) in f.iter().enumerate() {
            let dim = dims[s];
            let nz: Vec<(usize, usize, Complex<T>)> = match m {
                Some(m) => (0..dim)
                    .flat_map(|r| (0..dim).map(move |cc| (r, cc)))
                    .filter(|&(r, cc)| m[(r, cc)].norm() > T::zero())
                    .map(|(r, cc)| (r, cc, m[(r, cc)]))
                    .collect(),
                None => (0..dim).map(|k| (k, k, cone())).collect(),
            };
            acc = acc
                .iter()
                .flat_map(|&(r, cc, v)| {
                    nz.iter()
                        .map(move |&(i, j, w)| (r * dim + i, cc * dim + j, v * w))
                })
                .collect();
        }
        for (r, cc, v) in acc {
            *entries.entry((r, cc)).or_insert_with(cz) += v;
        }
    }
    let scale = entries
        .values()
        .fold(T::zero(), |m, z| if z.norm() > m { z.norm() } else { m });
    let mut parent: Vec<usize> = (0..d).collect();
    for (&(r, cc), v) in &entries {
        if r != cc && v.norm() > T::zero() {
            let (a, b) = (find(&mut parent, r), find(&mut parent, cc));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for x in 0..d {
        let root = find(&mut parent, x);
        groups.entry(root).or_default().push(x);
    }
    let mut roots: Vec<usize> = groups.keys().copied().collect();
    roots.sort_unstable();
    let i = Complex::new(T::zero(), T::one());
    let mut diag = vec![cone::<T>(); d];
    let mut blocks = Vec::new();
    for root in roots {
        let idx = &groups[&root];
        if idx.len() == 1 {
            let k = entries.get(&(idx[0], idx[0])).copied().unwrap_or_else(cz);
            if num_traits::Float::abs(k.re) > tol(scale) {
                return Err(SimError::NotAntiHermitian(k.re.as_f64()));
            }
            diag[idx[0]] = exp_c(Complex::new(T::zero(), k.im));
            continue;
        }
        let n = idx.len();
        let pos: HashMap<usize, usize> = idx.iter().enumerate().map(|(p, &x)| (x, p)).collect();
        let mut h = CMatrix::<T>::zeros(n, n);
        for (&(r, cc), v) in &entries {
            if let (Some(&a), Some(&b)) = (pos.get(&r), pos.get(&cc)) {
                h[(a, b)] = *v * i;
            }
        }
        let skew = super::operators::max_abs(&(&h - h.adjoint()));
        if skew > tol(scale) {
            return Err(SimError::NotAntiHermitian(skew.as_f64()));
        }
        let (v, l) = herm_eigen(h);
        let ph = DVector::from_iterator(n, l.iter().map(|&x| exp_c(Complex::new(T::zero(), -x))));
        let u = &v * CMatrix::from_diagonal(&ph) * v.adjoint();
        blocks.push((idx.clone(), u));
    }
    Ok(Plan::Blocks { diag, blocks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::generator::{a, adag, num, pauli_x, pauli_z};
    use crate::sim::operators::{generator_matrix, phase_distance};
    use num_complex::Complex64;

    /// Scaling-and-squaring Taylor series; independent of the eigen route.
    fn taylor(k: &CMatrix<f64>) -> CMatrix<f64> {
        let norm = crate::sim::operators::max_abs(k) * k.nrows() as f64;
        let s = (norm.max(1.0).log2().ceil() as i32 + 4).max(0);
        let scaled = k / Complex64::new(2f64.powi(s), 0.0);
        let mut term = CMatrix::identity(k.nrows(), k.ncols());
        let mut sum = term.clone();
        for n in 1..30 {
            term = &term * &scaled / Complex64::new(n as f64, 0.0);
            sum += &term;
        }
        for _ in 0..s {
            sum = &sum * &sum;
        }
        sum
    }

    fn check(k: GenExpr, dims: &[usize]) {
        let plan = exp_generator::<f64>(&k, dims).unwrap();
        let dense = plan.to_dense();
        let want = taylor(&generator_matrix::<f64>(&k, dims).unwrap());
        assert!(phase_distance(&dense, &want) < 1e-9, "{k}");
        let u = (&dense * dense.adjoint()) - CMatrix::<f64>::identity(dense.nrows(), dense.nrows());
        assert!(crate::sim::operators::max_abs(&u) < 1e-10);
    }

    #[test]
    fn diagonal_route() {
        let k = Complex64::new(0.0, -0.3) * (pauli_z(0) * num(1));
        assert!(matches!(
            exp_generator::<f64>(&k, &[2, 5]).unwrap(),
            Plan::Diagonal(_)
        ));
        check(k, &[2, 5]);
    }

    #[test]
    fn factored_route() {
        let alpha = Complex64::new(0.3, 0.2);
        let k = pauli_x(0) * (alpha * adag(1) - alpha.conj() * a(1));
        assert!(matches!(
            exp_generator::<f64>(&k, &[2, 6]).unwrap(),
            Plan::Factored { .. }
        ));
        check(k, &[2, 6]);
    }

    #[test]
    fn block_route() {
        let k = Complex64::new(0.0, -0.4) * (adag(0) * a(1) + a(0) * adag(1));
        assert!(matches!(
            exp_generator::<f64>(&k, &[4, 4]).unwrap(),
            Plan::Blocks { .. }
        ));
        check(k, &[4, 4]);
    }

    #[test]
    fn rejects_non_anti_hermitian() {
        let k = 0.5 * num(0);
        assert!(exp_generator::<f64>(&k, &[4]).is_err());
    }

    #[test]
    fn single_precision_unitarity() {
        let alpha = Complex64::new(0.3, 0.0);
        let k = alpha * adag(0) - alpha.conj() * a(0);
        let u = exp_generator::<f32>(&k, &[6]).unwrap().to_dense();
        let e = (&u * u.adjoint()) - CMatrix::<f32>::identity(6, 6);
        assert!(crate::sim::operators::max_abs(&e) < 1e-5);
    }
}

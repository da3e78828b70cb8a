use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use super::expm::Plan;
use super::operators::operator_matrix;
use super::state::StateVector;
use super::SimError;
use crate::gates::Prim;
use crate::measure::{Basis, BasisSchema, MeasureError, Outcome};
use crate::scalar::Real;
use crate::types::WireType;

/// Eigenvectors (columns) and eigenvalues of the truncated quadrature.
fn quadrature_eigen<T: Real>(
    dim: usize,
) -> Result<(super::operators::CMatrix<T>, Vec<f64>), SimError> {
    let e = operator_matrix::<T>(&Prim::X(0), dim)?.symmetric_eigen();
    Ok((
        e.eigenvectors,
        e.eigenvalues.iter().map(|x| x.as_f64()).collect(),
    ))
}

/// Draws `shots` joint outcomes over the schema's wires, in schema order.
pub fn sample<T: Real, R: Rng + ?Sized>(
    state: &StateVector<T>,
    schema: &BasisSchema,
    shots: u64,
    rng: &mut R,
) -> Result<Vec<Vec<Outcome>>, SimError> {
    let mut rotated = state.clone();
    let mut positions = Vec::new();
    let mut nodes: Vec<Option<Vec<f64>>> = Vec::new();
    for (w, b) in schema.entries() {
        let p = state.position(w)?;
        positions.push(p);
        match b {
            Basis::Discrete => nodes.push(None),
            Basis::Position => {
                if state.types()[p] != WireType::Qumode {
                    return Err(MeasureError::PositionOnQubit(w.clone()).into());
                }
                let (v, l) = quadrature_eigen::<T>(state.dims()[p])?;
                rotated.apply_plan(&Plan::Dense(v.adjoint()), &[p]);
                nodes.push(Some(l));
            }
        }
    }
    let dims = state.dims();
    let sub_dims: Vec<usize> = positions.iter().map(|&p| dims[p]).collect();
    let mut probs = vec![0f64; sub_dims.iter().product()];
    let mut digits = vec![0usize; dims.len()];
    for a in rotated.amplitudes() {
        let mut j = 0;
        for (&p, &d) in positions.iter().zip(&sub_dims) {
            j = j * d + digits[p];
        }
        probs[j] += a.norm_sqr().as_f64();
        // advance the mixed-radix counter
        for k in (0..dims.len()).rev() {
            digits[k] += 1;
            if digits[k] < dims[k] {
                break;
            }
            digits[k] = 0;
        }
    }
    let dist =
        WeightedIndex::new(&probs).map_err(|e| SimError::Unsupported(format!("sampling: {e}")))?;
    let mut out = Vec::with_capacity(shots as usize);
    let mut levels = vec![0usize; sub_dims.len()];
    for _ in 0..shots {
        let mut j = dist.sample(rng);
        for k in (0..sub_dims.len()).rev() {
            levels[k] = j % sub_dims[k];
            j /= sub_dims[k];
        }
        out.push(
            levels
                .iter()
                .zip(&positions)
                .zip(&nodes)
                .map(|((&l, &p), node)| match node {
                    Some(x) => Outcome::Real(x[l]),
                    None if state.types()[p] == WireType::Qubit => Outcome::Bit(l as u8),
                    None => Outcome::Count(l as u64),
                })
                .collect(),
        );
    }
    Ok(out)
}

use std::fmt;

use num_complex::Complex64;

/// Gate parameter. Complex amplitudes are stored as a polar pair of two
/// `Real` parameters `(r, phi)`; see [`polar`].
#[derive(Clone, Debug, PartialEq)]
pub enum Param {
    Real(f64),
    /// One entry per Fock level, starting at level 0.
    Vector(Vec<f64>),
}

impl Param {
    pub fn as_real(&self) -> Option<f64> {
        match self {
            Param::Real(x) => Some(*x),
            Param::Vector(_) => None,
        }
    }

    pub fn as_vector(&self) -> Option<&[f64]> {
        match self {
            Param::Vector(v) => Some(v),
            Param::Real(_) => None,
        }
    }

    /// Multiplies every component by `k`.
    pub fn scaled(&self, k: f64) -> Param {
        match self {
            Param::Real(x) => Param::Real(x * k),
            Param::Vector(v) => Param::Vector(v.iter().map(|x| x * k).collect()),
        }
    }
}

impl From<f64> for Param {
    fn from(x: f64) -> Self {
        Param::Real(x)
    }
}

impl From<Vec<f64>> for Param {
    fn from(v: Vec<f64>) -> Self {
        Param::Vector(v)
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Real(x) => write!(f, "{x}"),
            Param::Vector(v) => {
                f.write_str("[")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str("]")
            }
        }
    }
}

/// Splits a complex amplitude into the `(r, phi)` parameter pair used by the IR.
pub fn polar(z: Complex64) -> [Param; 2] {
    let (r, phi) = z.to_polar();
    [Param::Real(r), Param::Real(phi)]
}

/// Rebuilds `r * e^{i phi}`.
pub fn rect(r: f64, phi: f64) -> Complex64 {
    Complex64::from_polar(r, phi)
}

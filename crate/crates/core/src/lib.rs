//! Compiler toolkit for hybrid qubit/qumode circuits: typed IR, symbolic gate
//! library, rewrite engine, truncated Fock-space simulator, and OpenQASM and
//! JAQAL codecs.

pub mod demos;
pub mod gates;
pub mod ir;
pub mod jaqal;
pub mod measure;
pub mod qasm;
pub mod rewrite;
pub mod scalar;
pub mod sim;
pub mod types;

pub use scalar::Real;

pub type StateVector64 = sim::StateVector<f64>;
pub type StateVector32 = sim::StateVector<f32>;
pub type CMatrix64 = sim::operators::CMatrix<f64>;

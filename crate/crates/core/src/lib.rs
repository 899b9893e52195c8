//! Conditional orthogonalization of partly unknown qubit states by quantum
//! filtering, with the tomography and channel bounds needed to evaluate it.
//!
//! Everything numeric is generic over [`scalar::Real`]; the aliases below fix
//! the common `f64` and `f32` instantiations.

pub mod bounds;
pub mod channel;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod ortho;
pub mod rng;
pub mod scalar;
pub mod states;
pub mod tomo;

pub use error::{Error, Result};
pub use scalar::Real;

pub type C64 = num_complex::Complex<f64>;
pub type C32 = num_complex::Complex<f32>;

pub type Matrix = linalg::ComplexMatrix<f64>;
pub type Matrix32 = linalg::ComplexMatrix<f32>;
pub type State = states::StateVector<f64>;
pub type State32 = states::StateVector<f32>;
pub type Density = states::DensityMatrix<f64>;
pub type Density32 = states::DensityMatrix<f32>;
pub type QubitState = states::PureQubitState<f64>;
pub type Choi = bounds::ChoiOperator<f64>;
pub type Filter = ortho::QuantumFilter<f64>;

//! Deterministic quantum operations acting on density matrices.

use crate::error::Result;
use crate::linalg::ComplexMatrix;
use crate::scalar::Real;
use crate::states::DensityMatrix;

pub trait Channel<T: Real> {
    fn apply(&self, rho: &DensityMatrix<T>) -> Result<DensityMatrix<T>>;
}

/// `ρ → U ρ U†`.
#[derive(Debug, Clone)]
pub struct UnitaryChannel<T> {
    unitary: ComplexMatrix<T>,
}

impl<T: Real> UnitaryChannel<T> {
    pub fn new(unitary: ComplexMatrix<T>) -> Self {
        Self { unitary }
    }

    pub fn unitary(&self) -> &ComplexMatrix<T> {
        &self.unitary
    }
}

impl<T: Real> Channel<T> for UnitaryChannel<T> {
    fn apply(&self, rho: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
        rho.evolve(&self.unitary)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityChannel;

impl<T: Real> Channel<T> for IdentityChannel {
    fn apply(&self, rho: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
        Ok(rho.clone())
    }
}

impl<T: Real, F> Channel<T> for F
where
    F: Fn(&DensityMatrix<T>) -> Result<DensityMatrix<T>>,
{
    fn apply(&self, rho: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
        self(rho)
    }
}

//! Two-qubit density matrices in the `{↑↑, ↑↓, ↓↑, ↓↓}` basis.

use nalgebra::{DMatrix, Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};

const TOL: f64 = 1e-10;

/// Validated 4×4 density matrix: Hermitian with unit trace.
///
/// Positivity is not enforced here; [`DensityMatrix4::min_eigenvalue`] lets
/// callers decide how much negative rounding noise to accept.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix4(Matrix4<Complex64>);

impl DensityMatrix4 {
    pub fn new(m: Matrix4<Complex64>) -> Result<Self> {
        let herm = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > TOL {
            return Err(Error::Contract(format!("matrix is not Hermitian (defect {herm:e})")));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > TOL || tr.im.abs() > TOL {
            return Err(Error::Contract(format!("trace is {tr}, expected 1")));
        }
        // symmetrize away sub-tolerance noise
        Ok(Self((m + m.adjoint()) * Complex64::new(0.5, 0.0)))
    }

    pub fn from_dynamic(m: &DMatrix<Complex64>) -> Result<Self> {
        if m.shape() != (4, 4) {
            return Err(Error::Contract(format!("expected 4x4 matrix, got {:?}", m.shape())));
        }
        Self::new(Matrix4::from_fn(|r, c| m[(r, c)]))
    }

    /// `|ψ⟩⟨ψ| / ⟨ψ|ψ⟩`
    pub fn from_pure(psi: &Vector4<Complex64>) -> Result<Self> {
        let n = psi.norm_squared();
        if n < 1e-14 {
            return Err(Error::ZeroNormState { norm_sqr: n });
        }
        Self::new(psi * psi.adjoint() / Complex64::new(n, 0.0))
    }

    pub fn maximally_mixed() -> Self {
        Self(Matrix4::identity() * Complex64::new(0.25, 0.0))
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.0
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.0).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        [ev[0], ev[1], ev[2], ev[3]]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Largest entry-wise modulus of the difference.
    pub fn distance(&self, other: &DensityMatrix4) -> f64 {
        (self.0 - other.0).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_non_hermitian_and_bad_trace() {
        let mut m = Matrix4::identity() * c(0.25, 0.0);
        m[(0, 1)] = c(0.1, 0.0);
        assert!(matches!(DensityMatrix4::new(m), Err(Error::Contract(_))));
        let m = Matrix4::identity() * c(0.3, 0.0);
        assert!(matches!(DensityMatrix4::new(m), Err(Error::Contract(_))));
    }

    #[test]
    fn pure_state_spectrum() {
        let psi = Vector4::new(c(0.0, 0.0), c(1.0, 0.0), c(0.0, -1.0), c(0.0, 0.0));
        let rho = DensityMatrix4::from_pure(&psi).unwrap();
        let ev = rho.eigenvalues();
        assert!(ev[..3].iter().all(|x| x.abs() < 1e-14));
        assert!((ev[3] - 1.0).abs() < 1e-14);
        assert!((rho.purity() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn mixed_state() {
        let mixed = DensityMatrix4::maximally_mixed();
        assert!((mixed.min_eigenvalue() - 0.25).abs() < 1e-15);
        assert!((mixed.purity() - 0.25).abs() < 1e-15);
        assert_eq!(mixed.distance(&mixed), 0.0);
    }
}

//! Matrix exponentials `exp(scale * H)`.
//!
//! Hermitian generators go through an eigendecomposition, which keeps
//! `exp(-i t H)` unitary to rounding. Everything else uses scaling and
//! squaring with a Pade approximant.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::operator::{Operator, STRUCTURE_TOL};
use crate::error::{Error, Result};

pub fn mat_exp(h: &Operator, scale: Complex64) -> Result<Operator> {
    if !scale.re.is_finite() || !scale.im.is_finite() {
        return Err(Error::NonFinite("exponential scale"));
    }
    if h.matrix().iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
        return Err(Error::NonFinite("exponential generator"));
    }
    let m = if h.flagged_hermitian() || h.is_hermitian(STRUCTURE_TOL) {
        exp_hermitian(h.matrix(), scale)
    } else {
        exp_general(h.matrix(), scale)
    };
    Ok(Operator::from_parts(h.signature().clone(), m, false))
}

/// Scaling-and-squaring route regardless of structure. Exposed so callers can
/// cross-check the eigendecomposition route.
pub fn mat_exp_general(h: &Operator, scale: Complex64) -> Result<Operator> {
    if !scale.re.is_finite() || !scale.im.is_finite() {
        return Err(Error::NonFinite("exponential scale"));
    }
    Ok(Operator::from_parts(
        h.signature().clone(),
        exp_general(h.matrix(), scale),
        false,
    ))
}

/// `exp(scale * h)` for Hermitian `h`; valid for any complex `scale` because
/// `scale * h` is normal.
pub(crate) fn exp_hermitian(h: &DMatrix<Complex64>, scale: Complex64) -> DMatrix<Complex64> {
    let n = h.nrows();
    if n == 1 {
        return DMatrix::from_element(1, 1, (scale * h[(0, 0)].re).exp());
    }
    // Symmetrize so rounding noise in the input cannot leak into the decomposition.
    let sym = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, lambda) in eig.eigenvalues.iter().enumerate() {
        let f = (scale * *lambda).exp();
        for i in 0..n {
            scaled[(i, j)] *= f;
        }
    }
    scaled * v.adjoint()
}

pub(crate) fn exp_general(h: &DMatrix<Complex64>, scale: Complex64) -> DMatrix<Complex64> {
    (h * scale).exp()
}

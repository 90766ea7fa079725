use nalgebra::DMatrix;
use num_complex::Complex64;

use super::ket::Ket;
use super::signature::SpaceSignature;
use crate::error::{Error, Result};

/// Tolerance used when a Hermitian or unitary claim is verified.
pub const STRUCTURE_TOL: f64 = 1e-12;

/// Dense complex square matrix tagged with its [`SpaceSignature`].
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    signature: SpaceSignature,
    matrix: DMatrix<Complex64>,
    hermitian: bool,
}

impl Operator {
    pub fn new(signature: SpaceSignature, matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        if matrix.nrows() != signature.dim() {
            return Err(Error::DimensionMismatch {
                expected: signature.dim(),
                found: matrix.nrows(),
            });
        }
        if matrix.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite("operator matrix"));
        }
        Ok(Self {
            signature,
            matrix,
            hermitian: false,
        })
    }

    /// Construct and flag as Hermitian; the claim is checked to [`STRUCTURE_TOL`].
    pub fn hermitian(signature: SpaceSignature, matrix: DMatrix<Complex64>) -> Result<Self> {
        let mut op = Self::new(signature, matrix)?;
        if !op.is_hermitian(STRUCTURE_TOL) {
            return Err(crate::error::invalid("matrix", "not Hermitian within 1e-12"));
        }
        op.hermitian = true;
        Ok(op)
    }

    /// Row-major construction from nested rows; used for small literal matrices.
    pub fn from_rows(signature: SpaceSignature, rows: &[&[Complex64]]) -> Result<Self> {
        let n = rows.len();
        let mut m = DMatrix::zeros(n, rows.first().map_or(0, |r| r.len()));
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m.ncols() {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        Self::new(signature, m)
    }

    pub fn identity(signature: SpaceSignature) -> Self {
        let d = signature.dim();
        Self {
            signature,
            matrix: DMatrix::identity(d, d),
            hermitian: true,
        }
    }

    pub fn zeros(signature: SpaceSignature) -> Self {
        let d = signature.dim();
        Self {
            signature,
            matrix: DMatrix::zeros(d, d),
            hermitian: true,
        }
    }

    /// Diagonal operator from real entries (always Hermitian).
    pub fn diagonal(signature: SpaceSignature, diag: &[f64]) -> Result<Self> {
        if diag.len() != signature.dim() {
            return Err(Error::DimensionMismatch {
                expected: signature.dim(),
                found: diag.len(),
            });
        }
        let mut m = DMatrix::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(*d, 0.0);
        }
        let mut op = Self::new(signature, m)?;
        op.hermitian = true;
        Ok(op)
    }

    /// Outer product `|a><b|`.
    pub fn outer(a: &Ket, b: &Ket) -> Result<Self> {
        a.signature().ensure_eq(b.signature())?;
        let m = a.vector() * b.vector().adjoint();
        Self::new(a.signature().clone(), m)
    }

    pub(crate) fn from_parts(signature: SpaceSignature, matrix: DMatrix<Complex64>, hermitian: bool) -> Self {
        Self {
            signature,
            matrix,
            hermitian,
        }
    }

    pub fn signature(&self) -> &SpaceSignature {
        &self.signature
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Whether the Hermitian flag is set (the structure was verified at construction).
    pub fn flagged_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn dagger(&self) -> Self {
        Self {
            signature: self.signature.clone(),
            matrix: self.matrix.adjoint(),
            hermitian: self.hermitian,
        }
    }

    /// Matrix product `self * other` (apply `other` first).
    pub fn compose(&self, other: &Operator) -> Result<Self> {
        self.signature.ensure_eq(&other.signature)?;
        Ok(Self {
            signature: self.signature.clone(),
            matrix: &self.matrix * &other.matrix,
            hermitian: false,
        })
    }

    pub fn add(&self, other: &Operator) -> Result<Self> {
        self.signature.ensure_eq(&other.signature)?;
        Ok(Self {
            signature: self.signature.clone(),
            matrix: &self.matrix + &other.matrix,
            hermitian: self.hermitian && other.hermitian,
        })
    }

    pub fn sub(&self, other: &Operator) -> Result<Self> {
        self.add(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            signature: self.signature.clone(),
            matrix: &self.matrix * c,
            hermitian: self.hermitian && c.im == 0.0,
        }
    }

    pub fn scaled_re(&self, c: f64) -> Self {
        self.scaled(Complex64::new(c, 0.0))
    }

    /// Kronecker product; signatures are concatenated.
    pub fn tensor(&self, other: &Operator) -> Result<Self> {
        let signature = self.signature.concat(&other.signature)?;
        Ok(Self {
            signature,
            matrix: self.matrix.kronecker(&other.matrix),
            hermitian: self.hermitian && other.hermitian,
        })
    }

    /// Tensor with identities on every factor of `target` missing from `self`,
    /// laid out in `target` order.
    pub fn extend(&self, target: &SpaceSignature) -> Result<Self> {
        if &self.signature == target {
            return Ok(self.clone());
        }
        let positions = target.embed_positions(&self.signature)?;
        let tstrides = target.strides();
        let sub_dim = self.dim();

        // Offset of each sub-basis index inside the target index.
        let sub_offsets: Vec<usize> = (0..sub_dim)
            .map(|i| {
                self.signature
                    .split_index(i)
                    .iter()
                    .zip(&positions)
                    .map(|(d, p)| d * tstrides[*p])
                    .sum()
            })
            .collect();

        let d = target.dim();
        let mut m = DMatrix::zeros(d, d);
        for r in 0..d {
            let digits = target.split_index(r);
            let mut sub_r = 0;
            let mut own = 0;
            for (f, p) in self.signature.factors().iter().zip(&positions) {
                sub_r = sub_r * f.dim + digits[*p];
                own += digits[*p] * tstrides[*p];
            }
            let base = r - own;
            for (sc, off) in sub_offsets.iter().enumerate() {
                let v = self.matrix[(sub_r, sc)];
                if v != Complex64::new(0.0, 0.0) {
                    m[(r, base + off)] = v;
                }
            }
        }
        Ok(Self {
            signature: target.clone(),
            matrix: m,
            hermitian: self.hermitian,
        })
    }

    pub fn apply(&self, ket: &Ket) -> Result<Ket> {
        self.signature.ensure_eq(ket.signature())?;
        Ok(Ket::from_dvector(self.signature.clone(), &self.matrix * ket.vector()))
    }

    /// `<bra| self |ket>`.
    pub fn sandwich(&self, bra: &Ket, ket: &Ket) -> Result<Complex64> {
        let applied = self.apply(ket)?;
        bra.inner(&applied)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let scale = self.max_abs().max(1.0);
        let d = self.dim();
        for i in 0..d {
            for j in i..d {
                if (self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm() > tol * scale {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let d = self.dim();
        let prod = self.matrix.adjoint() * &self.matrix;
        let id: DMatrix<Complex64> = DMatrix::identity(d, d);
        (prod - id).iter().all(|x| x.norm() <= tol)
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Operator) -> Result<f64> {
        self.signature.ensure_eq(&other.signature)?;
        Ok((&self.matrix - &other.matrix)
            .iter()
            .map(|x| x.norm())
            .fold(0.0, f64::max))
    }

    /// Spectral norm (largest singular value).
    pub fn operator_norm(&self) -> f64 {
        self.matrix
            .clone()
            .singular_values()
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{labels, SpaceSignature};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sigma_z() -> Operator {
        Operator::diagonal(SpaceSignature::polarization(), &[1.0, -1.0]).unwrap()
    }

    fn proj_l() -> Operator {
        Operator::diagonal(SpaceSignature::path(), &[1.0, 0.0]).unwrap()
    }

    #[test]
    fn identity_tensor_identity() {
        let a = Operator::identity(SpaceSignature::single("a", 2));
        let b = Operator::identity(SpaceSignature::single("b", 3));
        let ab = a.tensor(&b).unwrap();
        assert_eq!(ab.dim(), 6);
        assert!(ab.max_abs_diff(&Operator::identity(ab.signature().clone())).unwrap() == 0.0);
    }

    #[test]
    fn projector_tensor_sigma_z_by_hand() {
        // Pi_L (x) sigma_z = diag(1, -1, 0, 0) in (L+, L-, R+, R-) order.
        let m = proj_l().tensor(&sigma_z()).unwrap();
        let expected = [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, -1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
        ];
        for (i, row) in expected.iter().enumerate() {
            for (j, &want) in row.iter().enumerate() {
                assert_eq!(m.matrix()[(i, j)], c(want, 0.0));
            }
        }
    }

    #[test]
    fn tensor_duplicate_label_is_conflict() {
        let err = sigma_z().tensor(&sigma_z()).unwrap_err();
        assert!(matches!(err, Error::SignatureConflict(_)));
    }

    #[test]
    fn extend_places_identities_by_target_order() {
        let target = SpaceSignature::product(&[
            &SpaceSignature::path(),
            &SpaceSignature::orbital(),
            &SpaceSignature::polarization(),
        ])
        .unwrap();
        let ext = sigma_z().extend(&target).unwrap();
        let by_hand = Operator::identity(SpaceSignature::path())
            .tensor(&Operator::identity(SpaceSignature::orbital()))
            .unwrap()
            .tensor(&sigma_z())
            .unwrap();
        assert_eq!(ext.max_abs_diff(&by_hand).unwrap(), 0.0);
    }

    #[test]
    fn extend_missing_label_errors() {
        let err = sigma_z().extend(&SpaceSignature::path()).unwrap_err();
        assert_eq!(err, Error::MissingFactor(labels::POLARIZATION.into()));
    }

    #[test]
    fn extend_projector_r_over_path_polarization() {
        let pr = Operator::diagonal(SpaceSignature::path(), &[0.0, 1.0]).unwrap();
        let sig = SpaceSignature::path().concat(&SpaceSignature::polarization()).unwrap();
        let ext = pr.extend(&sig).unwrap();
        let by_hand = pr.tensor(&Operator::identity(SpaceSignature::polarization())).unwrap();
        assert_eq!(ext.max_abs_diff(&by_hand).unwrap(), 0.0);
    }

    #[test]
    fn hermitian_constructor_rejects_non_hermitian() {
        let sig = SpaceSignature::polarization();
        let m = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(Operator::hermitian(sig, m).is_err());
    }
}

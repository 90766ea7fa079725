use nalgebra::DVector;
use num_complex::Complex64;

use super::signature::SpaceSignature;
use crate::error::{Error, Result};

/// Complex amplitude vector over the product basis of a [`SpaceSignature`].
///
/// Kets are not required to be normalized; post-selection produces
/// unnormalized meter states whose squared norm is a probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    signature: SpaceSignature,
    amps: DVector<Complex64>,
}

impl Ket {
    pub fn new(signature: SpaceSignature, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != signature.dim() {
            return Err(Error::DimensionMismatch {
                expected: signature.dim(),
                found: amps.len(),
            });
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite("ket amplitudes"));
        }
        Ok(Self {
            signature,
            amps: DVector::from_vec(amps),
        })
    }

    pub(crate) fn from_dvector(signature: SpaceSignature, amps: DVector<Complex64>) -> Self {
        debug_assert_eq!(signature.dim(), amps.len());
        Self { signature, amps }
    }

    pub fn zeros(signature: SpaceSignature) -> Self {
        let d = signature.dim();
        Self {
            signature,
            amps: DVector::zeros(d),
        }
    }

    /// Product basis ket with one digit per factor.
    pub fn basis(signature: SpaceSignature, digits: &[usize]) -> Result<Self> {
        if digits.len() != signature.len() {
            return Err(Error::DimensionMismatch {
                expected: signature.len(),
                found: digits.len(),
            });
        }
        let mut index = 0;
        for (d, f) in digits.iter().zip(signature.factors()) {
            if *d >= f.dim {
                return Err(crate::error::invalid(
                    "digit",
                    format!("{} out of range for factor `{}`", d, f.label),
                ));
            }
            index = index * f.dim + d;
        }
        let mut ket = Self::zeros(signature);
        ket.amps[index] = Complex64::new(1.0, 0.0);
        Ok(ket)
    }

    pub fn signature(&self) -> &SpaceSignature {
        &self.signature
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        self.amps.as_slice()
    }

    pub(crate) fn vector(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroState);
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            signature: self.signature.clone(),
            amps: &self.amps * c,
        }
    }

    pub fn add(&self, other: &Ket) -> Result<Self> {
        self.signature.ensure_eq(&other.signature)?;
        Ok(Self {
            signature: self.signature.clone(),
            amps: &self.amps + &other.amps,
        })
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Ket) -> Result<Complex64> {
        self.signature.ensure_eq(&other.signature)?;
        Ok(self.amps.dotc(&other.amps))
    }

    /// Kronecker product; the signature is the concatenation of both signatures.
    pub fn tensor(&self, other: &Ket) -> Result<Self> {
        let signature = self.signature.concat(&other.signature)?;
        let amps = self.amps.kronecker(&other.amps);
        Ok(Self { signature, amps })
    }

    /// `|<a|b>| = |a| |b|` within `tol` (relative), i.e. equal up to a global phase
    /// and positive scale.
    pub fn parallel_to(&self, other: &Ket, tol: f64) -> bool {
        match self.inner(other) {
            Ok(ov) => {
                let nn = self.norm() * other.norm();
                (nn - ov.norm()).abs() <= tol * nn.max(1.0)
            }
            Err(_) => false,
        }
    }

    /// Equal up to a global phase: parallel and of equal norm.
    pub fn equal_up_to_phase(&self, other: &Ket, tol: f64) -> bool {
        self.parallel_to(other, tol) && (self.norm() - other.norm()).abs() <= tol
    }

    pub fn max_abs_diff(&self, other: &Ket) -> Result<f64> {
        self.signature.ensure_eq(&other.signature)?;
        Ok(self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Rearrange the factors into the order of `target`, which must carry the same factors.
    pub fn reorder(&self, target: &SpaceSignature) -> Result<Self> {
        if target.len() != self.signature.len() {
            return Err(Error::SignatureMismatch {
                expected: target.to_string(),
                found: self.signature.to_string(),
            });
        }
        let positions = target.embed_positions(&self.signature)?;
        let tstrides = target.strides();
        let mut out = DVector::zeros(self.dim());
        for (i, a) in self.amps.iter().enumerate() {
            let digits = self.signature.split_index(i);
            let j: usize = digits.iter().zip(&positions).map(|(d, p)| d * tstrides[*p]).sum();
            out[j] = *a;
        }
        Ok(Self {
            signature: target.clone(),
            amps: out,
        })
    }

    /// Partial inner product `<self| (x) I |joint>`: contracts the factors of `self`
    /// against `joint` and returns the (unnormalized) ket on the remaining factors.
    pub fn contract(&self, joint: &Ket) -> Result<Ket> {
        let jsig = &joint.signature;
        let positions = jsig.embed_positions(&self.signature)?;
        let rest = jsig.without(&self.signature);
        let rest_positions = jsig.embed_positions(&rest)?;
        let jstrides = jsig.strides();

        let sub_offsets: Vec<usize> = (0..self.dim())
            .map(|i| {
                self.signature
                    .split_index(i)
                    .iter()
                    .zip(&positions)
                    .map(|(d, p)| d * jstrides[*p])
                    .sum()
            })
            .collect();

        let mut out = DVector::zeros(rest.dim());
        for r in 0..rest.dim() {
            let base: usize = rest
                .split_index(r)
                .iter()
                .zip(&rest_positions)
                .map(|(d, p)| d * jstrides[*p])
                .sum();
            let mut acc = Complex64::new(0.0, 0.0);
            for (s, off) in sub_offsets.iter().enumerate() {
                acc += self.amps[s].conj() * joint.amps[base + off];
            }
            out[r] = acc;
        }
        Ok(Ket {
            signature: rest,
            amps: out,
        })
    }
}

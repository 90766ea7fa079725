use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Conventional factor labels used throughout the crate.
pub mod labels {
    pub const PATH: &str = "path";
    pub const ORBITAL: &str = "orbital";
    pub const POLARIZATION: &str = "polarization";
    pub const METER: &str = "meter";
}

/// One tensor factor of a composite space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Factor {
    pub label: String,
    pub dim: usize,
}

/// Ordered list of labeled factors. Order is part of the identity:
/// `path (x) polarization` and `polarization (x) path` are different spaces.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceSignature {
    factors: Vec<Factor>,
}

impl SpaceSignature {
    pub fn new<I, S>(factors: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut out: Vec<Factor> = Vec::new();
        for (label, dim) in factors {
            let label = label.into();
            if dim == 0 {
                return Err(crate::error::invalid(
                    "dim",
                    format!("factor `{label}` has dimension 0"),
                ));
            }
            if out.iter().any(|f| f.label == label) {
                return Err(Error::SignatureConflict(label));
            }
            out.push(Factor { label, dim });
        }
        Ok(Self { factors: out })
    }

    /// Single-factor signature. Panics on a zero dimension.
    pub fn single(label: &str, dim: usize) -> Self {
        assert!(dim > 0, "factor dimension must be positive");
        Self {
            factors: vec![Factor {
                label: label.to_string(),
                dim,
            }],
        }
    }

    pub fn path() -> Self {
        Self::single(labels::PATH, 2)
    }

    pub fn orbital() -> Self {
        Self::single(labels::ORBITAL, 2)
    }

    pub fn polarization() -> Self {
        Self::single(labels::POLARIZATION, 2)
    }

    /// Meter with grid half-width `n` (dimension 2n+1).
    pub fn meter(n: usize) -> Self {
        Self::single(labels::METER, 2 * n + 1)
    }

    /// Concatenate several signatures, rejecting duplicate labels.
    pub fn product(parts: &[&SpaceSignature]) -> Result<Self> {
        Self::new(
            parts
                .iter()
                .flat_map(|s| s.factors.iter().map(|f| (f.label.clone(), f.dim))),
        )
    }

    pub fn concat(&self, other: &SpaceSignature) -> Result<Self> {
        Self::product(&[self, other])
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.factors.iter().map(|f| f.label.as_str())
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Total dimension (product of factor dimensions; 1 for the empty signature).
    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.label == label)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.position(label).is_some()
    }

    pub fn factor_dim(&self, label: &str) -> Option<usize> {
        self.position(label).map(|i| self.factors[i].dim)
    }

    /// Factors of `self` that are not in `other`, in `self` order.
    pub fn without(&self, other: &SpaceSignature) -> SpaceSignature {
        SpaceSignature {
            factors: self
                .factors
                .iter()
                .filter(|f| !other.contains(&f.label))
                .cloned()
                .collect(),
        }
    }

    /// Row-major strides: the last factor varies fastest.
    pub(crate) fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.factors.len()];
        for i in (0..self.factors.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.factors[i + 1].dim;
        }
        strides
    }

    pub(crate) fn split_index(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.factors.len()];
        for (i, f) in self.factors.iter().enumerate().rev() {
            digits[i] = index % f.dim;
            index /= f.dim;
        }
        digits
    }

    /// Checks that every factor of `sub` is present in `self` with the same dimension
    /// and returns their positions in `self`.
    pub(crate) fn embed_positions(&self, sub: &SpaceSignature) -> Result<Vec<usize>> {
        sub.factors
            .iter()
            .map(|f| {
                let pos = self
                    .position(&f.label)
                    .ok_or_else(|| Error::MissingFactor(f.label.clone()))?;
                if self.factors[pos].dim != f.dim {
                    return Err(Error::DimensionMismatch {
                        expected: self.factors[pos].dim,
                        found: f.dim,
                    });
                }
                Ok(pos)
            })
            .collect()
    }

    pub(crate) fn ensure_eq(&self, other: &SpaceSignature) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SignatureMismatch {
                expected: self.to_string(),
                found: other.to_string(),
            })
        }
    }
}

impl fmt::Display for SpaceSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|x| format!("{}:{}", x.label, x.dim)).collect();
        write!(f, "{}", parts.join(" (x) "))
    }
}

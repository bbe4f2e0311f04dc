//! Target spaces E and their cotype registry.
//!
//! Matrices are real `d×d`, stored row-major in the value vector.
//!
//! | space            | ambient dim | (Q, C(E))      |
//! |------------------|-------------|----------------|
//! | scalar           | 1           | (2, 1)         |
//! | euclidean(d)     | d           | (2, 1)         |
//! | schatten(p, d)   | d²          | (p, 1)         |
//! | operator(d), d≥3 | d²          | (ln d, 1)      |
//!
//! The scalar/Euclidean pair is the Hilbert-space value (cotype 2 with
//! constant 1); the matrix pairs are the registered Schatten-class values.
//! `ln` is the natural logarithm.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{lp_of, singular_values};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpaceKind {
    Scalar,
    Euclidean { d: usize },
    Schatten { p: f64, d: usize },
    Operator { d: usize },
}

/// A normed space E.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpace", into = "RawSpace")]
pub struct SpaceDescriptor {
    kind: SpaceKind,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawSpace {
    kind: String,
    #[serde(default)]
    d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
}

impl TryFrom<RawSpace> for SpaceDescriptor {
    type Error = Error;

    fn try_from(raw: RawSpace) -> Result<Self> {
        let need_d = || {
            raw.d
                .ok_or_else(|| Error::Config(format!("space `{}` needs \"d\"", raw.kind)))
        };
        match raw.kind.as_str() {
            "scalar" => Ok(Self::scalar()),
            "euclidean" => Self::euclidean(need_d()?),
            "schatten" => {
                let p = raw
                    .p
                    .ok_or_else(|| Error::Config("space `schatten` needs \"p\"".into()))?;
                Self::schatten(p, need_d()?)
            }
            "operator" => Self::operator(need_d()?),
            other => Err(Error::UnsupportedSpace(other.to_string())),
        }
    }
}

impl From<SpaceDescriptor> for RawSpace {
    fn from(s: SpaceDescriptor) -> Self {
        let (kind, d, p) = match s.kind {
            SpaceKind::Scalar => ("scalar", 1, None),
            SpaceKind::Euclidean { d } => ("euclidean", d, None),
            SpaceKind::Schatten { p, d } => ("schatten", d, Some(p)),
            SpaceKind::Operator { d } => ("operator", d, None),
        };
        RawSpace {
            kind: kind.to_string(),
            d: Some(d),
            p,
        }
    }
}

fn check_d(d: usize) -> Result<()> {
    if d == 0 {
        Err(Error::Config("space dimension d must be >= 1".into()))
    } else {
        Ok(())
    }
}

impl SpaceDescriptor {
    pub fn scalar() -> Self {
        Self {
            kind: SpaceKind::Scalar,
        }
    }

    pub fn euclidean(d: usize) -> Result<Self> {
        check_d(d)?;
        Ok(Self {
            kind: SpaceKind::Euclidean { d },
        })
    }

    /// Schatten class `S_p` on `d×d` matrices, `2 ≤ p < ∞`.
    pub fn schatten(p: f64, d: usize) -> Result<Self> {
        check_d(d)?;
        if !(p.is_finite() && p >= 2.0) {
            return Err(Error::InvalidExponent(p));
        }
        Ok(Self {
            kind: SpaceKind::Schatten { p, d },
        })
    }

    pub fn operator(d: usize) -> Result<Self> {
        check_d(d)?;
        Ok(Self {
            kind: SpaceKind::Operator { d },
        })
    }

    /// `S_p` for finite `p`, the operator norm for `p = ∞`.
    pub fn matrix(p: f64, d: usize) -> Result<Self> {
        if p == f64::INFINITY {
            Self::operator(d)
        } else {
            Self::schatten(p, d)
        }
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    /// Length of the value vectors living in this space.
    pub fn ambient_dim(&self) -> usize {
        match self.kind {
            SpaceKind::Scalar => 1,
            SpaceKind::Euclidean { d } => d,
            SpaceKind::Schatten { d, .. } | SpaceKind::Operator { d } => d * d,
        }
    }

    /// Side length for matrix spaces.
    pub fn matrix_dim(&self) -> Option<usize> {
        match self.kind {
            SpaceKind::Schatten { d, .. } | SpaceKind::Operator { d } => Some(d),
            _ => None,
        }
    }

    /// Schatten exponent; `∞` for the operator norm, `None` for vector spaces.
    pub fn schatten_exponent(&self) -> Option<f64> {
        match self.kind {
            SpaceKind::Schatten { p, .. } => Some(p),
            SpaceKind::Operator { .. } => Some(f64::INFINITY),
            _ => None,
        }
    }

    pub fn is_hilbert(&self) -> bool {
        matches!(self.kind, SpaceKind::Scalar | SpaceKind::Euclidean { .. })
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        let expected = self.ambient_dim();
        if v.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: v.len(),
            });
        }
        Ok(())
    }

    /// `‖v‖_E`.
    pub fn norm(&self, v: &[f64]) -> Result<f64> {
        self.check_len(v)?;
        Ok(match self.kind {
            SpaceKind::Scalar => v[0].abs(),
            SpaceKind::Euclidean { .. } => lp_of(v, 2.0),
            SpaceKind::Schatten { p, d } => lp_of(&singular_values(v, d)?, p),
            SpaceKind::Operator { d } => singular_values(v, d)?[0],
        })
    }

    /// Norm of `v` seen as an element of the dual `E*` under the
    /// trace / dot pairing.
    pub fn dual_norm(&self, v: &[f64]) -> Result<f64> {
        self.check_len(v)?;
        Ok(match self.kind {
            SpaceKind::Scalar => v[0].abs(),
            SpaceKind::Euclidean { .. } => lp_of(v, 2.0),
            SpaceKind::Schatten { p, d } => lp_of(&singular_values(v, d)?, p / (p - 1.0)),
            SpaceKind::Operator { d } => singular_values(v, d)?.iter().sum(),
        })
    }

    /// Registered cotype pair `(Q, C(E))`.
    pub fn cotype(&self) -> Result<(f64, f64)> {
        match self.kind {
            SpaceKind::Scalar | SpaceKind::Euclidean { .. } => Ok((2.0, 1.0)),
            SpaceKind::Schatten { p, .. } => Ok((p, 1.0)),
            SpaceKind::Operator { d } if d >= 3 => Ok(((d as f64).ln(), 1.0)),
            SpaceKind::Operator { d } => Err(Error::UnsupportedSpace(format!(
                "operator({d}): cotype registry needs d >= 3 so that ln d > 1"
            ))),
        }
    }
}

/// Free-function form of [`SpaceDescriptor::cotype`].
pub fn cotype_of(space: &SpaceDescriptor) -> Result<(f64, f64)> {
    space.cotype()
}

impl fmt::Display for SpaceDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SpaceKind::Scalar => write!(f, "scalar"),
            SpaceKind::Euclidean { d } => write!(f, "euclidean({d})"),
            SpaceKind::Schatten { p, d } => write!(f, "schatten({p},{d})"),
            SpaceKind::Operator { d } => write!(f, "operator({d})"),
        }
    }
}

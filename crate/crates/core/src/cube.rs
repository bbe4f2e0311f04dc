//! Functions on the Hamming cube {-1,1}^n with vector values.
//!
//! Vertex index `b` encodes the point `x(b)` with `x(b)_i = +1` when bit `i`
//! of `b` is 0 and `-1` when it is 1 (coordinates are 0-based in the API).
//! Fourier mask `m` encodes the subset `S(m) = { i : bit i of m is 1 }`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reduce::tree_mean;

/// Largest supported number of coordinates.
pub const MAX_N: usize = 24;

/// Values of `f` on all `2^n` vertices, stored flat in vertex order.
#[derive(Clone, Debug, PartialEq)]
pub struct CubeFunction {
    n: usize,
    dim: usize,
    values: Vec<f64>,
}

/// Walsh–Fourier coefficients `f̂(S)`, stored flat in mask order.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierCoefficients {
    n: usize,
    dim: usize,
    coeffs: Vec<f64>,
}

/// Coordinate `i` of vertex `b` as ±1.
#[inline]
pub fn coordinate(b: usize, i: usize) -> f64 {
    if (b >> i) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// The point x(b) in {-1,1}^n.
pub fn vertex_point(n: usize, b: usize) -> Vec<f64> {
    (0..n).map(|i| coordinate(b, i)).collect()
}

/// Inverse of [`vertex_point`]; entries are read by sign.
pub fn vertex_index(point: &[f64]) -> usize {
    point
        .iter()
        .enumerate()
        .fold(0, |b, (i, &x)| if x < 0.0 { b | (1 << i) } else { b })
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Config("the cube needs n >= 1".into()));
    }
    if n > MAX_N {
        return Err(Error::NTooLarge(n));
    }
    Ok(())
}

impl CubeFunction {
    /// Builds a function from one value vector per vertex.
    pub fn from_values(n: usize, dim: usize, values: &[Vec<f64>]) -> Result<Self> {
        check_n(n)?;
        let len = 1usize << n;
        if values.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                got: values.len(),
            });
        }
        let mut flat = Vec::with_capacity(len * dim);
        for v in values {
            if v.len() != dim {
                return Err(Error::LengthMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
            flat.extend_from_slice(v);
        }
        Self::from_flat(n, dim, flat)
    }

    /// Builds a function from a flat vertex-major buffer of length `2^n * dim`.
    pub fn from_flat(n: usize, dim: usize, values: Vec<f64>) -> Result<Self> {
        check_n(n)?;
        if dim == 0 {
            return Err(Error::LengthMismatch {
                expected: 1,
                got: 0,
            });
        }
        let len = (1usize << n) * dim;
        if values.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                got: values.len(),
            });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { vertex: k / dim });
        }
        Ok(Self { n, dim, values })
    }

    /// Scalar function from a closure on points.
    pub fn from_fn<F: Fn(&[f64]) -> f64>(n: usize, f: F) -> Result<Self> {
        check_n(n)?;
        let vals = (0..1usize << n).map(|b| f(&vertex_point(n, b))).collect();
        Self::from_flat(n, 1, vals)
    }

    /// Vector function from a closure on points.
    pub fn from_vec_fn<F: Fn(&[f64]) -> Vec<f64>>(n: usize, dim: usize, f: F) -> Result<Self> {
        check_n(n)?;
        let vals: Vec<Vec<f64>> = (0..1usize << n).map(|b| f(&vertex_point(n, b))).collect();
        Self::from_values(n, dim, &vals)
    }

    pub fn constant(n: usize, value: &[f64]) -> Result<Self> {
        check_n(n)?;
        let vals = value.repeat(1usize << n);
        Self::from_flat(n, value.len(), vals)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of vertices, `2^n`.
    pub fn len(&self) -> usize {
        1 << self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, b: usize) -> &[f64] {
        &self.values[b * self.dim..(b + 1) * self.dim]
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.values
    }

    /// Values as one vector per vertex (index order).
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    /// Mean of the values, `E f`.
    pub fn expectation(&self) -> Vec<f64> {
        let len = self.len();
        (0..self.dim)
            .map(|k| tree_mean(len, |b| self.values[b * self.dim + k]))
            .collect()
    }

    /// `f - E f`.
    pub fn centered(&self) -> Self {
        let mean = self.expectation();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(j, v)| v - mean[j % self.dim])
            .collect();
        Self {
            n: self.n,
            dim: self.dim,
            values,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n: self.n,
            dim: self.dim,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// Pointwise map of scalar values; the result is scalar.
    pub fn map_vertices<F: Fn(&[f64]) -> f64>(&self, f: F) -> Self {
        Self {
            n: self.n,
            dim: 1,
            values: (0..self.len()).map(|b| f(self.value(b))).collect(),
        }
    }

    /// `(D_i f)(x) = (f(x) - f(x with coordinate i flipped)) / 2`.
    pub fn discrete_derivative(&self, i: usize) -> Result<Self> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange {
                index: i,
                n: self.n,
            });
        }
        let d = self.dim;
        let mut values = vec![0.0; self.values.len()];
        for b in 0..self.len() {
            let flipped = b ^ (1 << i);
            for k in 0..d {
                values[b * d + k] = (self.values[b * d + k] - self.values[flipped * d + k]) / 2.0;
            }
        }
        Ok(Self {
            n: self.n,
            dim: d,
            values,
        })
    }

    /// All discrete derivatives at vertex `b`, as `n` rows of length `dim`.
    pub fn derivatives_at(&self, b: usize) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| {
                let here = self.value(b);
                let there = self.value(b ^ (1 << i));
                here.iter().zip(there).map(|(a, c)| (a - c) / 2.0).collect()
            })
            .collect()
    }

    /// Walsh–Fourier coefficients via the fast Walsh–Hadamard transform.
    pub fn to_coefficients(&self) -> FourierCoefficients {
        let mut coeffs = self.values.clone();
        fwht(&mut coeffs, self.dim);
        let scale = 1.0 / self.len() as f64;
        coeffs.iter_mut().for_each(|c| *c *= scale);
        FourierCoefficients {
            n: self.n,
            dim: self.dim,
            coeffs,
        }
    }
}

/// Unnormalized in-place butterfly over blocks of `dim` entries.
fn fwht(data: &mut [f64], dim: usize) {
    let len = data.len() / dim;
    let mut h = 1;
    while h < len {
        for start in (0..len).step_by(2 * h) {
            for j in start..start + h {
                for k in 0..dim {
                    let a = data[j * dim + k];
                    let c = data[(j + h) * dim + k];
                    data[j * dim + k] = a + c;
                    data[(j + h) * dim + k] = a - c;
                }
            }
        }
        h *= 2;
    }
}

impl FourierCoefficients {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coefficient vector at mask `m`.
    pub fn coeff(&self, m: usize) -> &[f64] {
        &self.coeffs[m * self.dim..(m + 1) * self.dim]
    }

    /// Inverse transform back to vertex values.
    pub fn to_function(&self) -> CubeFunction {
        let mut values = self.coeffs.clone();
        fwht(&mut values, self.dim);
        CubeFunction {
            n: self.n,
            dim: self.dim,
            values,
        }
    }

    /// Multilinear extension `F(point) = Σ_S f̂(S) Π_{i∈S} point_i`.
    pub fn evaluate_extension(&self, point: &[f64]) -> Result<Vec<f64>> {
        if point.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: point.len(),
            });
        }
        if point.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { vertex: 0 });
        }
        let len = 1usize << self.n;
        // monomial[m] = Π_{i∈S(m)} point_i, built from m with its lowest bit cleared
        let mut monomial = vec![1.0; len];
        for m in 1..len {
            let low = m.trailing_zeros() as usize;
            monomial[m] = monomial[m & (m - 1)] * point[low];
        }
        let mut out = vec![0.0; self.dim];
        for (k, o) in out.iter_mut().enumerate() {
            *o = crate::reduce::tree_sum(len, |m| self.coeffs[m * self.dim + k] * monomial[m]);
        }
        Ok(out)
    }
}

/// On-disk function representation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FunctionFile {
    pub n: usize,
    pub dim: usize,
    pub values: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<crate::spaces::SpaceDescriptor>,
}

impl FunctionFile {
    pub fn from_function(f: &CubeFunction, space: Option<crate::spaces::SpaceDescriptor>) -> Self {
        Self {
            n: f.n(),
            dim: f.dim(),
            values: f.to_rows(),
            space,
        }
    }

    pub fn to_function(&self) -> Result<CubeFunction> {
        CubeFunction::from_values(self.n, self.dim, &self.values)
    }
}

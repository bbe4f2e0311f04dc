//! Small dense Jacobi routines for real d×d matrices (row-major slices).

use crate::error::{Error, Result};

/// Sweep cap for both Jacobi iterations.
pub const MAX_SWEEPS: usize = 60;

/// Singular values of a square `d×d` matrix, nonincreasing.
///
/// One-sided (Hestenes) Jacobi: columns are rotated pairwise until every pair
/// is orthogonal to within `1e-14` relative; the column norms are then the
/// singular values.
pub fn singular_values(a: &[f64], d: usize) -> Result<Vec<f64>> {
    singular_values_rect(a, d, d)
}

/// Singular values of a row-major `rows×cols` matrix; returns `cols` values.
pub fn singular_values_rect(a: &[f64], rows: usize, cols: usize) -> Result<Vec<f64>> {
    if a.len() != rows * cols {
        return Err(Error::DimensionMismatch {
            expected: rows * cols,
            got: a.len(),
        });
    }
    if let Some(k) = a.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { vertex: k });
    }
    let mut w = a.to_vec();
    let frob_sq: f64 = w.iter().map(|v| v * v).sum();
    let floor = (1e-14 * frob_sq.sqrt()).powi(2);
    let col = |w: &[f64], j: usize, k: usize| -> (f64, f64, f64) {
        let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
        for r in 0..rows {
            let x = w[r * cols + j];
            let y = w[r * cols + k];
            alpha += x * x;
            beta += y * y;
            gamma += x * y;
        }
        (alpha, beta, gamma)
    };

    let mut converged = cols < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for j in 0..cols - 1 {
            for k in j + 1..cols {
                let (alpha, beta, gamma) = col(&w, j, k);
                if gamma.abs() <= 1e-14 * (alpha * beta).sqrt() || gamma.abs() <= floor {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..rows {
                    let x = w[r * cols + j];
                    let y = w[r * cols + k];
                    w[r * cols + j] = c * x - s * y;
                    w[r * cols + k] = s * x + c * y;
                }
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::NoConvergence(MAX_SWEEPS));
    }
    let mut sv: Vec<f64> = (0..cols)
        .map(|j| (0..rows).map(|r| w[r * cols + j].powi(2)).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    Ok(sv)
}

/// Eigenvalues of a symmetric `d×d` matrix by cyclic Jacobi rotations,
/// nonincreasing. The input is symmetrized first.
pub fn symmetric_eigenvalues(a: &[f64], d: usize) -> Result<Vec<f64>> {
    if a.len() != d * d {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            got: a.len(),
        });
    }
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            m[i * d + j] = 0.5 * (a[i * d + j] + a[j * d + i]);
        }
    }
    let total: f64 = m.iter().map(|v| v * v).sum::<f64>().sqrt();
    let off = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    s += m[i * d + j] * m[i * d + j];
                }
            }
        }
        s.sqrt()
    };
    let tol = 1e-12 * total;
    let mut sweeps = 0;
    while off(&m) > tol {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence(MAX_SWEEPS));
        }
        sweeps += 1;
        for p in 0..d {
            for q in p + 1..d {
                let apq = m[p * d + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q * d + q] - m[p * d + p]) / (2.0 * apq);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let kp = m[k * d + p];
                    let kq = m[k * d + q];
                    m[k * d + p] = c * kp - s * kq;
                    m[k * d + q] = s * kp + c * kq;
                }
                for k in 0..d {
                    let pk = m[p * d + k];
                    let qk = m[q * d + k];
                    m[p * d + k] = c * pk - s * qk;
                    m[q * d + k] = s * pk + c * qk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..d).map(|i| m[i * d + i]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    Ok(ev)
}

/// `A Aᵀ` for a row-major `d×d` matrix.
pub fn a_at(a: &[f64], d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            out[i * d + j] = (0..d).map(|k| a[i * d + k] * a[j * d + k]).sum();
        }
    }
    out
}

/// `Aᵀ A` for a row-major `d×d` matrix.
pub fn at_a(a: &[f64], d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            out[i * d + j] = (0..d).map(|k| a[k * d + i] * a[k * d + j]).sum();
        }
    }
    out
}

/// `(Σ σ_kᵖ)^{1/p}` for `p ≥ 1`, the maximum for `p = ∞`; scaled by the
/// largest entry to avoid overflow.
pub fn lp_of(values: &[f64], p: f64) -> f64 {
    let top = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if top == 0.0 || p.is_infinite() {
        return top;
    }
    let s: f64 = values.iter().map(|v| (v.abs() / top).powf(p)).sum();
    top * s.powf(1.0 / p)
}

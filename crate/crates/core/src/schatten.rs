//! Singular values and Schatten–von Neumann norms.

use std::fmt;

use crate::error::{Error, Result};
use crate::hermitian::{householder, tridiagonal_eigenvalues};
use crate::matrix::{CMatrix, C64, ZERO};
use crate::par;

/// The index `p ∈ [1, ∞]` of a Schatten class.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SchattenExponent {
    Finite(f64),
    Infinity,
}

impl SchattenExponent {
    /// Trace class.
    pub const TRACE: SchattenExponent = SchattenExponent::Finite(1.0);
    /// Hilbert–Schmidt class.
    pub const HILBERT_SCHMIDT: SchattenExponent = SchattenExponent::Finite(2.0);
    /// Operator norm.
    pub const OPERATOR: SchattenExponent = SchattenExponent::Infinity;

    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(SchattenExponent::Infinity)
        } else if p >= 1.0 && p.is_finite() {
            Ok(SchattenExponent::Finite(p))
        } else {
            Err(Error::InvalidArgument(format!(
                "Schatten exponent must lie in [1, inf], got {p}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        match self {
            SchattenExponent::Finite(p) => p,
            SchattenExponent::Infinity => f64::INFINITY,
        }
    }
}

impl fmt::Display for SchattenExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchattenExponent::Finite(p) => write!(f, "S_{p}"),
            SchattenExponent::Infinity => write!(f, "S_inf"),
        }
    }
}

/// Singular values in descending order.
///
/// `M` is reduced to bidiagonal form by Householder reflections from both
/// sides; the singular values of a bidiagonal `B` are the nonnegative
/// eigenvalues of the `2n × 2n` tridiagonal matrix with zero diagonal and
/// couplings `d_0, e_0, d_1, e_1, …`. Unlike the square roots of the
/// eigenvalues of `M* M`, this keeps the error near `ε ‖M‖` even for the
/// smallest singular values, which matters for trace norms of low-rank
/// matrices.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    let n = m.dim();
    if n == 0 {
        return Ok(vec![]);
    }
    let (d, e) = bidiagonalize(m);
    let mut diag = vec![0.0; 2 * n];
    let mut off = vec![0.0; 2 * n];
    for k in 0..n {
        off[2 * k] = d[k];
        if k + 1 < n {
            off[2 * k + 1] = e[k];
        }
    }
    let scale = off.iter().copied().fold(0.0, f64::max);
    tridiagonal_eigenvalues(&mut diag, &mut off, 0.5 * f64::EPSILON * scale).map_err(|err| match err {
        Error::NoConvergence { iterations, .. } => Error::NoConvergence { dim: n, iterations },
        other => other,
    })?;
    diag.sort_by(|a, b| b.total_cmp(a));
    diag.truncate(n);
    Ok(diag.into_iter().map(|s| s.max(0.0)).collect())
}

/// Moduli of the diagonal and superdiagonal of a bidiagonal form of `m`.
fn bidiagonalize(m: &CMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = m.dim();
    let mut a = m.as_slice().to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n.saturating_sub(1)];
    for k in 0..n {
        // Left reflection: zero column k below the diagonal.
        let x: Vec<C64> = (k..n).map(|i| a[i * n + k]).collect();
        match householder(&x) {
            Some((alpha, v, beta)) => {
                let mut w = vec![ZERO; n - k];
                for (i, &vi) in v.iter().enumerate() {
                    let row = &a[(k + i) * n + k..(k + i + 1) * n];
                    let vc = vi.conj();
                    for (wj, &aij) in w.iter_mut().zip(row) {
                        *wj += vc * aij;
                    }
                }
                par::for_each_row(&mut a[k * n..], n, |i, row| {
                    let f = v[i] * beta;
                    for (aij, &wj) in row[k..].iter_mut().zip(&w) {
                        *aij -= f * wj;
                    }
                });
                d[k] = alpha.norm();
            }
            None => d[k] = x[0].norm(),
        }
        if k + 1 == n {
            break;
        }
        // Right reflection: zero row k right of the superdiagonal.
        let x: Vec<C64> = a[k * n + k + 1..(k + 1) * n].iter().map(|z| z.conj()).collect();
        match householder(&x) {
            Some((alpha, v, beta)) => {
                par::for_each_row(&mut a[(k + 1) * n..], n, |_, row| {
                    let tail = &mut row[k + 1..];
                    let s: C64 = tail.iter().zip(&v).map(|(a, b)| a * b).sum::<C64>() * beta;
                    for (aij, vj) in tail.iter_mut().zip(&v) {
                        *aij -= s * vj.conj();
                    }
                });
                e[k] = alpha.norm();
            }
            None => e[k] = x[0].norm(),
        }
    }
    (d, e)
}

/// `(Σ σ_k^p)^{1/p}`, or `σ_1` for `p = ∞`.
pub fn schatten_norm(m: &CMatrix, p: SchattenExponent) -> Result<f64> {
    let sv = singular_values(m)?;
    Ok(norm_from_singular_values(&sv, p))
}

pub fn trace_norm(m: &CMatrix) -> Result<f64> {
    schatten_norm(m, SchattenExponent::TRACE)
}

/// Frobenius norm, identical to the `S_2` norm but without an SVD.
pub fn hilbert_schmidt_norm(m: &CMatrix) -> f64 {
    m.frobenius_norm()
}

pub fn norm_from_singular_values(sv: &[f64], p: SchattenExponent) -> f64 {
    let top = sv.iter().copied().fold(0.0, f64::max);
    match p {
        SchattenExponent::Infinity => top,
        SchattenExponent::Finite(1.0) => sv.iter().sum(),
        SchattenExponent::Finite(p) => {
            if top == 0.0 {
                return 0.0;
            }
            // scaled to keep σ^p finite
            let s: f64 = sv.iter().map(|&x| (x / top).powf(p)).sum();
            top * s.powf(1.0 / p)
        }
    }
}

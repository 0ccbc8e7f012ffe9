//! Hermitian matrices and their eigendecomposition.
//!
//! The solver reduces the matrix to a real symmetric tridiagonal form with
//! complex Householder reflections, rotates the off-diagonal phases away, and
//! finishes with the implicit-shift QL iteration. Eigenvectors are
//! accumulated throughout, so the reconstruction `H = Σ λ v v*` holds to a
//! few ulps of `‖H‖`.

use crate::error::{Error, Result};
use crate::matrix::{CMatrix, C64, ZERO};

/// Relative tolerance for the Hermitian symmetry check at construction.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// QL iterations allowed per eigenvalue before giving up.
pub const MAX_QL_ITERATIONS: usize = 60;

/// A square complex matrix equal to its own adjoint.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    /// Validates `|m_jk - conj(m_kj)| ≤ 1e-12 · max(1, max|m|)` and then
    /// symmetrizes exactly (real diagonal, mirrored off-diagonal).
    pub fn new(m: CMatrix) -> Result<Self> {
        let defect = m.hermitian_defect();
        let scale = m.max_abs().max(1.0);
        if !(defect <= HERMITIAN_TOL * scale) {
            return Err(Error::NotHermitian { defect });
        }
        Ok(Self::symmetrized(m))
    }

    /// Hermitian part `(m + m*) / 2`, without any check.
    pub fn symmetrized(mut m: CMatrix) -> Self {
        let n = m.dim();
        for i in 0..n {
            m[(i, i)] = C64::new(m[(i, i)].re, 0.0);
            for j in i + 1..n {
                let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                m[(i, j)] = avg;
                m[(j, i)] = avg.conj();
            }
        }
        HermitianMatrix(m)
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        HermitianMatrix(CMatrix::from_diag(diag))
    }

    pub fn zeros(n: usize) -> Self {
        HermitianMatrix(CMatrix::zeros(n))
    }

    /// `s · P` for the orthogonal projection onto the span of unit vector `v`.
    pub fn rank_one(v: &[C64], s: f64) -> Self {
        HermitianMatrix::symmetrized(CMatrix::outer(v, v).scale_real(s))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn scale(&self, s: f64) -> Self {
        HermitianMatrix(self.0.scale_real(s))
    }

    pub fn add(&self, other: &HermitianMatrix) -> Result<Self> {
        self.0.check_same(&other.0)?;
        Ok(HermitianMatrix(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &HermitianMatrix) -> Result<Self> {
        self.0.check_same(&other.0)?;
        Ok(HermitianMatrix(&self.0 - &other.0))
    }

    pub fn eig(&self) -> Result<Eigen> {
        hermitian_eig(self)
    }
}

impl AsRef<CMatrix> for HermitianMatrix {
    fn as_ref(&self) -> &CMatrix {
        &self.0
    }
}

/// Eigenpairs sorted by ascending eigenvalue; column `j` of `vectors`
/// belongs to `values[j]`.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigen {
    pub fn vector(&self, j: usize) -> Vec<C64> {
        self.vectors.column(j)
    }

    /// `Σ_j g(λ_j) v_j v_j*`.
    pub fn reconstruct_with(&self, g: impl Fn(f64) -> C64) -> CMatrix {
        let n = self.values.len();
        let u = &self.vectors;
        let scaled = CMatrix::from_fn(n, |i, j| u[(i, j)] * g(self.values[j]));
        &scaled * &u.adjoint()
    }
}

/// Eigendecomposition of a Hermitian matrix.
pub fn hermitian_eig(h: &HermitianMatrix) -> Result<Eigen> {
    let a = h.as_matrix();
    let n = a.dim();
    if n == 0 {
        return Ok(Eigen {
            values: vec![],
            vectors: CMatrix::zeros(0),
        });
    }
    if a.is_diagonal() {
        let diag: Vec<f64> = a.diagonal().iter().map(|z| z.re).collect();
        let order = ascending_order(&diag);
        let values = order.iter().map(|&i| diag[i]).collect();
        let vectors = CMatrix::from_fn(n, |i, j| if order[j] == i { C64::new(1.0, 0.0) } else { ZERO });
        return Ok(Eigen { values, vectors });
    }

    let (mut d, mut e, mut w) = tridiagonalize(a);
    tql_implicit(&mut d, &mut e, Some(&mut w), 0.0)?;

    // Rows of `w` are eigenvectors.
    let order = ascending_order(&d);
    let values = order.iter().map(|&k| d[k]).collect();
    let vectors = CMatrix::from_fn(n, |i, j| w[order[j] * n + i]);
    Ok(Eigen { values, vectors })
}

fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    order
}

/// Householder reduction `A = Q' T Q'*` with `T` real tridiagonal.
///
/// Returns the diagonal, the sub-diagonal (padded with a trailing zero) and
/// `Q'` transposed, row-major, so that the QL rotations touch contiguous rows.
fn tridiagonalize(a: &CMatrix) -> (Vec<f64>, Vec<f64>, Vec<C64>) {
    let n = a.dim();
    let mut s: Vec<C64> = a.as_slice().to_vec();
    // (start index k+1, beta, v) per reflection
    let mut reflectors: Vec<(usize, f64, Vec<C64>)> = Vec::new();

    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| s[i * n + k]).collect();
        let Some((alpha, v, beta)) = householder(&x) else {
            continue;
        };
        let m = n - k - 1;
        let off = k + 1;

        // p = beta * S v over the trailing block
        let mut p = vec![ZERO; m];
        for (r, pr) in p.iter_mut().enumerate() {
            let row = &s[(off + r) * n + off..(off + r) * n + n];
            let dot: C64 = row.iter().zip(&v).map(|(a, b)| a * b).sum();
            *pr = dot * beta;
        }
        let vp: C64 = v.iter().zip(&p).map(|(a, b)| a.conj() * b).sum();
        let kk = 0.5 * beta * vp.re;
        let q: Vec<C64> = p.iter().zip(&v).map(|(pi, vi)| pi - vi * kk).collect();
        for r in 0..m {
            let (vr, qr) = (v[r], q[r]);
            let row = &mut s[(off + r) * n + off..(off + r) * n + n];
            for c in 0..m {
                row[c] -= vr * q[c].conj() + qr * v[c].conj();
            }
        }
        s[off * n + k] = alpha;
        s[k * n + off] = alpha.conj();
        for i in off + 1..n {
            s[i * n + k] = ZERO;
            s[k * n + i] = ZERO;
        }
        reflectors.push((off, beta, v));
    }

    // Q = H_0 H_1 ... accumulated right to left.
    let mut q = CMatrix::identity(n);
    for (off, beta, v) in reflectors.iter().rev() {
        let off = *off;
        // Only columns >= off are touched by the reflections applied so far.
        let mut coef = vec![ZERO; n - off];
        for (r, &vr) in v.iter().enumerate() {
            let row = &q.row(off + r)[off..];
            let vc = vr.conj();
            for (c, &z) in coef.iter_mut().zip(row) {
                *c += vc * z;
            }
        }
        for (r, &vr) in v.iter().enumerate() {
            let f = vr * *beta;
            let row = &mut q.row_mut(off + r)[off..];
            for (z, &c) in row.iter_mut().zip(&coef) {
                *z -= f * c;
            }
        }
    }

    let mut d = Vec::with_capacity(n);
    let mut e = vec![0.0; n];
    let mut phases = vec![C64::new(1.0, 0.0); n];
    for k in 0..n {
        d.push(s[k * n + k].re);
        if k + 1 < n {
            let t = s[(k + 1) * n + k];
            let r = t.norm();
            e[k] = r;
            phases[k + 1] = if r > 0.0 { phases[k] * (t / r) } else { phases[k] };
        }
    }

    let mut w = vec![ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            w[j * n + i] = q[(i, j)] * phases[j];
        }
    }
    (d, e, w)
}

/// `(alpha, v, beta)` with `(I - beta v v*) x = alpha e_0`, or `None` if
/// `x` is already a multiple of `e_0`.
pub(crate) fn householder(x: &[C64]) -> Option<(C64, Vec<C64>, f64)> {
    // The reflection only depends on the direction of `x`; rescaling keeps
    // the squared norms clear of underflow.
    let scale = x.iter().map(|z| z.re.abs().max(z.im.abs())).fold(0.0, f64::max);
    if scale == 0.0 || x[1..].iter().all(|&z| z == ZERO) {
        return None;
    }
    let mut v: Vec<C64> = x.iter().map(|z| z / scale).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let phase = if v[0] == ZERO { C64::new(1.0, 0.0) } else { v[0] / v[0].norm() };
    let alpha = -phase * norm;
    v[0] -= alpha;
    let beta = 2.0 / v.iter().map(|z| z.norm_sqr()).sum::<f64>();
    Some((alpha * scale, v, beta))
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `d` and
/// subdiagonal `e[..n-1]` (`e.len() == n`), left in `d`, unsorted.
/// Couplings below `floor` are treated as zero.
pub(crate) fn tridiagonal_eigenvalues(d: &mut [f64], e: &mut [f64], floor: f64) -> Result<()> {
    tql_implicit(d, e, None, floor)
}

/// Implicit-shift QL on a symmetric tridiagonal matrix; `e[i]` couples
/// `d[i]` and `d[i+1]`. Rotations are applied to the rows of `w` if given.
fn tql_implicit(d: &mut [f64], e: &mut [f64], mut w: Option<&mut [C64]>, floor: f64) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITERATIONS {
                return Err(Error::NoConvergence {
                    dim: n,
                    iterations: MAX_QL_ITERATIONS,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(w) = w.as_deref_mut() {
                    rotate_rows(w, n, i, c, s);
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[inline]
fn rotate_rows(w: &mut [C64], n: usize, i: usize, c: f64, s: f64) {
    let (head, tail) = w.split_at_mut((i + 1) * n);
    let ri = &mut head[i * n..];
    let rj = &mut tail[..n];
    for (zi, zj) in ri.iter_mut().zip(rj.iter_mut()) {
        let f = *zj;
        *zj = *zi * s + f * c;
        *zi = *zi * c - f * s;
    }
}

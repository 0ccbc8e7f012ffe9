//! Double and triple operator integrals over atomic spectral measures.
//!
//! With `E_i` atomic, the integrals are the finite sums
//!
//! ```text
//! doi = Σ_{j,k}   Φ(a_j, b_k)      E1(a_j) T  E2(b_k)
//! toi = Σ_{j,k,l} Φ(a_j, b_k, c_l) E1(a_j) T1 E2(b_k) T2 E3(c_l)
//! ```
//!
//! They are evaluated in the eigenbases of the measures: with `E_i` given
//! by orthonormal bases `U_i`, `doi = U1 (Φ̃ ∘ U1* T U2) U2*`, where `Φ̃`
//! repeats `Φ(a_j, b_k)` over the basis columns of each atom. The triple
//! integral applies the same idea slice by slice over the atoms of `E2`.
//! Only atom values are ever passed to the symbol.

use crate::error::{Error, Result};
use crate::field::{first_non_finite, Field2, Field3};
use crate::hermitian::HermitianMatrix;
use crate::matrix::{CMatrix, C64, ZERO};
use crate::par;
use crate::schatten::hilbert_schmidt_norm;
use crate::spectral::{spectral_measure, SpectralMeasure};

/// Upper bound on symbol entries evaluated at once by [`toi`].
const TOI_GRID_CHUNK: usize = 1 << 22;

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

fn checked_grid(values: Vec<C64>, describe: impl Fn(usize) -> String) -> Result<Vec<C64>> {
    match first_non_finite(&values) {
        Some(i) => Err(Error::Evaluation { at: describe(i) }),
        None => Ok(values),
    }
}

/// Double operator integral `Σ Φ(a_j, b_k) E1({a_j}) T E2({b_k})`.
pub fn doi<P: Field2 + ?Sized>(
    phi: &P,
    e1: &SpectralMeasure,
    t: &CMatrix,
    e2: &SpectralMeasure,
) -> Result<CMatrix> {
    let n = e1.dim();
    check_dims(n, t.dim())?;
    check_dims(n, e2.dim())?;
    let (v1, v2) = (e1.values(), e2.values());
    let grid = checked_grid(phi.eval_grid(&v1, &v2), |i| {
        format!("({}, {})", v1[i / v2.len()], v2[i % v2.len()])
    })?;
    let nb = v2.len();

    let mut inner = e2.pull_right(&e1.pull_left(t));
    let (ca, cb) = (e1.column_atoms(), e2.column_atoms());
    par::for_each_row(inner.as_mut_slice(), n, |p, row| {
        let g = &grid[ca[p] * nb..(ca[p] + 1) * nb];
        for (x, &b) in row.iter_mut().zip(cb) {
            *x *= g[b];
        }
    });
    Ok(e2.push_right(&e1.push_left(&inner)))
}

/// Triple operator integral
/// `Σ Φ(a_j, b_k, c_l) E1({a_j}) T1 E2({b_k}) T2 E3({c_l})`.
pub fn toi<P: Field3 + ?Sized>(
    phi: &P,
    e1: &SpectralMeasure,
    t1: &CMatrix,
    e2: &SpectralMeasure,
    t2: &CMatrix,
    e3: &SpectralMeasure,
) -> Result<CMatrix> {
    let n = e1.dim();
    for d in [t1.dim(), e2.dim(), t2.dim(), e3.dim()] {
        check_dims(n, d)?;
    }
    let (va, vb, vc) = (e1.values(), e2.values(), e3.values());
    let x = e2.pull_right(&e1.pull_left(t1)); // U1* T1 U2
    let y = e3.pull_right(&e2.pull_left(t2)); // U2* T2 U3
    let (ca, cc) = (e1.column_atoms(), e3.column_atoms());
    let (na, nc) = (va.len(), vc.len());

    let slices_per_chunk = (TOI_GRID_CHUNK / (na * nc).max(1)).max(1);
    let mut acc = CMatrix::zeros(n);
    for (chunk_index, chunk) in vb.chunks(slices_per_chunk).enumerate() {
        let grid = checked_grid(phi.eval_grid(&va, chunk, &vc), |i| {
            let (a, rest) = (i / (chunk.len() * nc), i % (chunk.len() * nc));
            format!("({}, {}, {})", va[a], chunk[rest / nc], vc[rest % nc])
        })?;
        let first_atom = chunk_index * slices_per_chunk;
        par::for_each_row(acc.as_mut_slice(), n, |p, out| {
            let mut tmp = vec![ZERO; n];
            for (s, atom) in e2.atoms()[first_atom..first_atom + chunk.len()].iter().enumerate() {
                tmp.iter_mut().for_each(|z| *z = ZERO);
                for k in atom.columns() {
                    let xpk = x[(p, k)];
                    if xpk == ZERO {
                        continue;
                    }
                    for (t, &ykq) in tmp.iter_mut().zip(y.row(k)) {
                        *t += xpk * ykq;
                    }
                }
                let g = &grid[(ca[p] * chunk.len() + s) * nc..(ca[p] * chunk.len() + s + 1) * nc];
                for ((o, &t), &c) in out.iter_mut().zip(&tmp).zip(cc) {
                    *o += g[c] * t;
                }
            }
        });
    }
    Ok(e3.push_right(&e1.push_left(&acc)))
}

/// `f(A, B) = Σ f(λ_j, μ_k) P_j Q_k`.
pub fn func_calc_pair<F: Field2 + ?Sized>(
    f: &F,
    a: &HermitianMatrix,
    b: &HermitianMatrix,
) -> Result<CMatrix> {
    check_dims(a.dim(), b.dim())?;
    func_calc_pair_measures(f, &spectral_measure(a)?, &spectral_measure(b)?)
}

pub fn func_calc_pair_measures<F: Field2 + ?Sized>(
    f: &F,
    ea: &SpectralMeasure,
    eb: &SpectralMeasure,
) -> Result<CMatrix> {
    doi(f, ea, &CMatrix::identity(ea.dim()), eb)
}

/// `f(A, B, C) = Σ f(λ, μ, ν) E_A({λ}) E_B({μ}) E_C({ν})`.
pub fn func_calc_triple<F: Field3 + ?Sized>(
    f: &F,
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    c: &HermitianMatrix,
) -> Result<CMatrix> {
    check_dims(a.dim(), b.dim())?;
    check_dims(a.dim(), c.dim())?;
    func_calc_triple_measures(
        f,
        &spectral_measure(a)?,
        &spectral_measure(b)?,
        &spectral_measure(c)?,
    )
}

pub fn func_calc_triple_measures<F: Field3 + ?Sized>(
    f: &F,
    ea: &SpectralMeasure,
    eb: &SpectralMeasure,
    ec: &SpectralMeasure,
) -> Result<CMatrix> {
    let id = CMatrix::identity(ea.dim());
    toi(f, ea, &id, eb, &id, ec)
}

/// Both sides of the Hilbert–Schmidt bound
/// `‖doi(Φ, E1, T, E2)‖_{S2} ≤ max_{j,k} |Φ(a_j, b_k)| · ‖T‖_{S2}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct S2Bound {
    pub lhs: f64,
    pub rhs: f64,
}

impl S2Bound {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs + tol
    }
}

pub fn s2_contraction_check<P: Field2 + ?Sized>(
    phi: &P,
    e1: &SpectralMeasure,
    e2: &SpectralMeasure,
    t: &CMatrix,
) -> Result<S2Bound> {
    let image = doi(phi, e1, t, e2)?;
    let sup = symbol_sup(phi, e1, e2)?.0;
    Ok(S2Bound {
        lhs: hilbert_schmidt_norm(&image),
        rhs: sup * hilbert_schmidt_norm(t),
    })
}

/// `max |Φ(a_j, b_k)|` and the maximizing atom pair.
pub fn symbol_sup<P: Field2 + ?Sized>(
    phi: &P,
    e1: &SpectralMeasure,
    e2: &SpectralMeasure,
) -> Result<(f64, usize, usize)> {
    let (v1, v2) = (e1.values(), e2.values());
    let grid = checked_grid(phi.eval_grid(&v1, &v2), |i| {
        format!("({}, {})", v1[i / v2.len()], v2[i % v2.len()])
    })?;
    let (mut best, mut at) = (0.0, 0);
    for (i, z) in grid.iter().enumerate() {
        if z.norm() > best {
            best = z.norm();
            at = i;
        }
    }
    Ok((best, at / v2.len(), at % v2.len()))
}

/// Rank-one `u v*` with `u` in the range of `E1({a_j})` and `v` in the range
/// of `E2({b_k})` at the maximizing pair. The double operator integral maps
/// it to `Φ(a_j, b_k) u v*`, so it attains the `S2` transformer norm.
pub fn s2_maximizing_unit<P: Field2 + ?Sized>(
    phi: &P,
    e1: &SpectralMeasure,
    e2: &SpectralMeasure,
) -> Result<CMatrix> {
    let (_, j, k) = symbol_sup(phi, e1, e2)?;
    let u = e1.basis().column(e1.atoms()[j].columns().start);
    let v = e2.basis().column(e2.atoms()[k].columns().start);
    Ok(CMatrix::outer(&u, &v))
}

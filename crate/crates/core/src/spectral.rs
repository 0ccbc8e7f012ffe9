//! Finite atomic spectral measures and the one-variable functional calculus.
//!
//! A measure is stored as an orthonormal basis whose columns are grouped
//! into atoms: the projection `E({a_k})` is `V_k V_k*` for the block `V_k` of
//! columns belonging to atom `k`. Dense projections are materialized only on
//! request.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::field::{first_non_finite, Field1};
use crate::hermitian::{hermitian_eig, Eigen, HermitianMatrix};
use crate::matrix::{CMatrix, C64};

/// Eigenvalues closer than this are merged into one atom by default.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;

/// Tolerance for the projection axioms checked by [`SpectralMeasure::from_projections`].
pub const PROJECTION_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub value: f64,
    columns: Range<usize>,
}

impl Atom {
    /// Rank of the atom's projection.
    pub fn rank(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> Range<usize> {
        self.columns.clone()
    }
}

#[derive(Clone, Debug)]
pub struct SpectralMeasure {
    basis: CMatrix,
    basis_is_identity: bool,
    atoms: Vec<Atom>,
    /// atom index of each basis column
    column_atom: Vec<usize>,
}

impl SpectralMeasure {
    /// Spectral measure of `h`; sorted eigenvalues whose consecutive gaps are
    /// at most `cluster_tol` share an atom valued at their mean.
    pub fn from_hermitian(h: &HermitianMatrix, cluster_tol: f64) -> Result<Self> {
        if !(cluster_tol >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "cluster tolerance must be nonnegative, got {cluster_tol}"
            )));
        }
        let eig = hermitian_eig(h)?;
        Ok(Self::from_eigen(eig, cluster_tol))
    }

    pub fn from_eigen(eig: Eigen, cluster_tol: f64) -> Self {
        let Eigen { values, vectors } = eig;
        let mut atoms = Vec::new();
        let mut start = 0;
        for i in 1..=values.len() {
            if i == values.len() || values[i] - values[i - 1] > cluster_tol {
                let members = &values[start..i];
                let value = members.iter().sum::<f64>() / members.len() as f64;
                atoms.push(Atom {
                    value,
                    columns: start..i,
                });
                start = i;
            }
        }
        let basis_is_identity = vectors == CMatrix::identity(vectors.dim());
        Self::assemble(vectors, basis_is_identity, atoms)
    }

    /// Measure of the standard basis: coordinate `i` carries value `values[i]`.
    /// Equal values share an atom.
    pub fn coordinate(values: &[f64]) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite atom value {v}")));
        }
        Self::from_hermitian(&HermitianMatrix::from_diag(values), 0.0)
    }

    /// Builds a measure from explicit `(value, projection)` atoms, checking
    /// that projections are Hermitian, idempotent, mutually orthogonal,
    /// nonzero and sum to the identity, and that values strictly increase.
    pub fn from_projections(atoms: &[(f64, CMatrix)]) -> Result<Self> {
        let Some((_, first)) = atoms.first() else {
            return Err(Error::InvalidMeasure("no atoms".into()));
        };
        let n = first.dim();
        let mut total = CMatrix::zeros(n);
        for (k, (value, p)) in atoms.iter().enumerate() {
            p.check_same(first)?;
            if !value.is_finite() {
                return Err(Error::InvalidMeasure(format!("atom {k} has value {value}")));
            }
            if k > 0 && *value <= atoms[k - 1].0 {
                return Err(Error::InvalidMeasure("atom values must strictly increase".into()));
            }
            if p.hermitian_defect() > PROJECTION_TOL {
                return Err(Error::InvalidMeasure(format!("projection {k} is not Hermitian")));
            }
            if (&(p * p) - p).max_abs() > PROJECTION_TOL {
                return Err(Error::InvalidMeasure(format!("projection {k} is not idempotent")));
            }
            for (j, (_, q)) in atoms.iter().enumerate().take(k) {
                if (p * q).max_abs() > PROJECTION_TOL {
                    return Err(Error::InvalidMeasure(format!(
                        "projections {j} and {k} are not orthogonal"
                    )));
                }
            }
            total = &total + p;
        }
        if (&total - &CMatrix::identity(n)).max_abs() > PROJECTION_TOL {
            return Err(Error::InvalidMeasure("projections do not sum to the identity".into()));
        }

        // Orthonormal range of each projection: eigenvectors with eigenvalue ~1.
        let mut basis = CMatrix::zeros(n);
        let mut out_atoms = Vec::with_capacity(atoms.len());
        let mut col = 0;
        for (k, (value, p)) in atoms.iter().enumerate() {
            let eig = hermitian_eig(&HermitianMatrix::symmetrized(p.clone()))?;
            let start = col;
            for (j, &lambda) in eig.values.iter().enumerate() {
                if lambda > 0.5 {
                    if col >= n {
                        return Err(Error::InvalidMeasure("ranks exceed the dimension".into()));
                    }
                    for i in 0..n {
                        basis[(i, col)] = eig.vectors[(i, j)];
                    }
                    col += 1;
                }
            }
            if col == start {
                return Err(Error::InvalidMeasure(format!("atom {k} has a zero projection")));
            }
            out_atoms.push(Atom {
                value: *value,
                columns: start..col,
            });
        }
        if col != n {
            return Err(Error::InvalidMeasure("ranks do not add up to the dimension".into()));
        }
        let basis_is_identity = basis == CMatrix::identity(n);
        Ok(Self::assemble(basis, basis_is_identity, out_atoms))
    }

    fn assemble(basis: CMatrix, basis_is_identity: bool, atoms: Vec<Atom>) -> Self {
        let mut column_atom = vec![0; basis.dim()];
        for (k, atom) in atoms.iter().enumerate() {
            for c in atom.columns() {
                column_atom[c] = k;
            }
        }
        SpectralMeasure {
            basis,
            basis_is_identity,
            atoms,
            column_atom,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.value).collect()
    }

    /// Orthonormal basis; its columns are grouped by atom.
    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    /// Atom index of every basis column.
    pub fn column_atoms(&self) -> &[usize] {
        &self.column_atom
    }

    /// Dense projection `E({a_k})`.
    pub fn projection(&self, k: usize) -> CMatrix {
        let n = self.dim();
        let cols = self.atoms[k].columns();
        CMatrix::from_fn(n, |i, j| {
            cols.clone()
                .map(|c| self.basis[(i, c)] * self.basis[(j, c)].conj())
                .sum()
        })
    }

    /// Atom containing `value`, if any atom value equals it within `tol`.
    pub fn atom_at(&self, value: f64, tol: f64) -> Option<usize> {
        self.atoms.iter().position(|a| (a.value - value).abs() <= tol)
    }

    /// `Σ_k g(a_k) E({a_k})`.
    pub fn apply_scalar<G: Field1 + ?Sized>(&self, g: &G) -> Result<CMatrix> {
        let at_atoms = g.eval_many(&self.values());
        if let Some(k) = first_non_finite(&at_atoms) {
            return Err(Error::Evaluation {
                at: format!("atom value {}", self.atoms[k].value),
            });
        }
        let per_column: Vec<C64> = self.column_atom.iter().map(|&k| at_atoms[k]).collect();
        Ok(self.synthesize_diagonal(&per_column))
    }

    /// `U diag(d) U*`.
    pub(crate) fn synthesize_diagonal(&self, d: &[C64]) -> CMatrix {
        let n = self.dim();
        if self.basis_is_identity {
            let mut m = CMatrix::zeros(n);
            for (i, &z) in d.iter().enumerate() {
                m[(i, i)] = z;
            }
            return m;
        }
        let scaled = CMatrix::from_fn(n, |i, j| self.basis[(i, j)] * d[j]);
        &scaled * &self.basis.adjoint()
    }

    /// `Σ a_k E({a_k})`; equals the source matrix for exact multiplicities.
    pub fn reconstruct(&self) -> CMatrix {
        let d: Vec<C64> = self
            .column_atom
            .iter()
            .map(|&k| C64::new(self.atoms[k].value, 0.0))
            .collect();
        self.synthesize_diagonal(&d)
    }

    /// `U* T`, skipping the product for the standard basis.
    pub(crate) fn pull_left(&self, t: &CMatrix) -> CMatrix {
        if self.basis_is_identity {
            t.clone()
        } else {
            self.basis.adjoint_mul(t)
        }
    }

    /// `T U`.
    pub(crate) fn pull_right(&self, t: &CMatrix) -> CMatrix {
        if self.basis_is_identity {
            t.clone()
        } else {
            t * &self.basis
        }
    }

    /// `U M`.
    pub(crate) fn push_left(&self, m: &CMatrix) -> CMatrix {
        if self.basis_is_identity {
            m.clone()
        } else {
            &self.basis * m
        }
    }

    /// `M U*`.
    pub(crate) fn push_right(&self, m: &CMatrix) -> CMatrix {
        if self.basis_is_identity {
            m.clone()
        } else {
            m * &self.basis.adjoint()
        }
    }
}

/// Measure from a Hermitian matrix with the default clustering tolerance.
pub fn spectral_measure(h: &HermitianMatrix) -> Result<SpectralMeasure> {
    SpectralMeasure::from_hermitian(h, DEFAULT_CLUSTER_TOL)
}

//! Seeded property suites behind `xplab verify`.
//!
//! Each suite draws its cases from its own ChaCha stream (seed, suite,
//! trial), so results do not depend on thread scheduling. The double
//! operator integral is injectable so a deliberately broken implementation
//! can be shown to fail.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::besov::{bandlimit_check, Axis, SampledField};
use crate::counterexample::{build_instance, eta, phi_from_coeffs, psi, scale_instance, CoeffMatrix, EtaPrime, Eta};
use crate::error::{Error, Result};
use crate::field::{Constant, Field1, Field2, Polynomial, Real1};
use crate::hermitian::HermitianMatrix;
use crate::integral::{doi, func_calc_triple, symbol_sup};
use crate::matrix::{CMatrix, C64};
use crate::par;
use crate::perturbation::{DividedDifference, OffDiagonalQuotient};
use crate::random::{random_hermitian, random_matrix, random_unit_vector, random_unitary};
use crate::schatten::{schatten_norm, trace_norm, SchattenExponent};
use crate::spectral::{spectral_measure, SpectralMeasure};

/// Signature of a double operator integral.
pub type DoiFn = fn(&dyn Field2, &SpectralMeasure, &CMatrix, &SpectralMeasure) -> Result<CMatrix>;

pub fn reference_doi(phi: &dyn Field2, e1: &SpectralMeasure, t: &CMatrix, e2: &SpectralMeasure) -> Result<CMatrix> {
    doi(phi, e1, t, e2)
}

/// Mutation-testing hook: the reference integral with a relative error of 1e-6.
pub fn tampered_doi(phi: &dyn Field2, e1: &SpectralMeasure, t: &CMatrix, e2: &SpectralMeasure) -> Result<CMatrix> {
    Ok(doi(phi, e1, t, e2)?.scale_real(1.0 + 1e-6))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub cases: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// First error raised by a case, if any.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub trials: usize,
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }
}

fn case_rng(seed: u64, suite: u64, case: usize) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream((suite << 32) | case as u64);
    r
}

/// Runs `cases` independent cases and folds their residuals.
fn run_suite(
    name: &str,
    suite: u64,
    seed: u64,
    cases: usize,
    tolerance: f64,
    case: impl Fn(&mut ChaCha8Rng, usize) -> Result<f64> + Sync + Send,
) -> SuiteResult {
    let outcomes = par::map_indices(cases, |i| case(&mut case_rng(seed, suite, i), i));
    let mut max_residual: f64 = 0.0;
    let mut error = None;
    for o in outcomes {
        match o {
            Ok(r) if r.is_nan() => max_residual = f64::NAN,
            Ok(r) => max_residual = max_residual.max(r),
            Err(e) => {
                error.get_or_insert_with(|| e.to_string());
            }
        }
    }
    SuiteResult {
        name: name.to_string(),
        cases,
        passed: error.is_none() && max_residual <= tolerance,
        max_residual,
        tolerance,
        error,
    }
}

fn operator_norm(h: &HermitianMatrix) -> Result<f64> {
    schatten_norm(h.as_matrix(), SchattenExponent::OPERATOR)
}

/// Random Hermitian matrix rescaled to an operator norm drawn from `[1, 2π]`.
pub fn scaled_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<HermitianMatrix> {
    let h = random_hermitian(rng, n);
    let target = rng.gen_range(1.0..2.0 * PI);
    let norm = operator_norm(&h)?;
    Ok(if norm > 0.0 { h.scale(target / norm) } else { h })
}

/// `U diag(values) U*` for a random unitary `U`.
fn with_spectrum<R: Rng + ?Sized>(rng: &mut R, values: &[f64]) -> Result<HermitianMatrix> {
    let u = random_unitary(rng, values.len());
    let m = &(&u * &CMatrix::from_diag(values)) * &u.adjoint();
    Ok(HermitianMatrix::symmetrized(m))
}

fn random_coeffs<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Result<CoeffMatrix> {
    let entries = (0..rows * cols)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    CoeffMatrix::new(rows, cols, entries)
}

fn dim_for(case: usize, lo: usize, hi: usize) -> usize {
    lo + case % (hi - lo + 1)
}

/// `‖f(A) - f(B) - doi(Δf, E_A, A - B, E_B)‖_{S1} / (1 + ‖A‖ + ‖B‖)` for
/// polynomials of degree ≤ 5, `η` and `ψ`, dimensions 2–16.
pub fn perturbation_suite(seed: u64, cases: usize, doi_fn: DoiFn) -> SuiteResult {
    run_suite("perturbation identity", 1, seed, cases, 1e-9, |rng, i| {
        let n = dim_for(i, 2, 16);
        let a = scaled_hermitian(rng, n)?;
        let b = scaled_hermitian(rng, n)?;
        let poly = Polynomial::new((0..=rng.gen_range(0..=5)).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let dpoly = poly.derivative();
        let (f, fp): (&dyn Field1, &dyn Field1) = match i % 3 {
            0 => (&poly, &dpoly),
            1 => (&Eta { shift: 0.0 }, &EtaPrime { shift: 0.0 }),
            _ => (&Eta { shift: 2.0 * PI }, &EtaPrime { shift: 2.0 * PI }),
        };
        let (ea, eb) = (spectral_measure(&a)?, spectral_measure(&b)?);
        let lhs = &ea.apply_scalar(f)? - &eb.apply_scalar(f)?;
        let dd = DividedDifference { base: f, diagonal: fp };
        let rhs = doi_fn(&dd, &ea, a.sub(&b)?.as_matrix(), &eb)?;
        let scale = 1.0 + operator_norm(&a)? + operator_norm(&b)?;
        Ok(trace_norm(&(&lhs - &rhs))? / scale)
    })
}

/// Disjoint spectra: the diagonal of the divided difference is never sampled.
pub fn diagonal_irrelevance_suite(seed: u64, cases: usize, doi_fn: DoiFn) -> SuiteResult {
    run_suite("diagonal irrelevance", 2, seed, cases, 1e-10, |rng, i| {
        let n = dim_for(i, 2, 12);
        let neg: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0 * PI..-0.1)).collect();
        let pos: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..2.0 * PI)).collect();
        let (a, b) = (with_spectrum(rng, &neg)?, with_spectrum(rng, &pos)?);
        let (ea, eb) = (spectral_measure(&a)?, spectral_measure(&b)?);
        let t = a.sub(&b)?;
        let f = Eta::new(0.0);
        let with = |g: &dyn Field1| {
            let dd = DividedDifference { base: &f as &dyn Field1, diagonal: g };
            doi_fn(&dd, &ea, t.as_matrix(), &eb)
        };
        trace_norm(&(&with(&Constant::real(0.0))? - &with(&Constant::real(1e6))?))
    })
}

/// `Q = Σ_{λ≠μ} Δψ(λ, μ) E_{B1}(λ)(B1 - B2)E_{B2}(μ)` against `ψ(B1) - ψ(B2)`.
pub fn psi_difference_suite(seed: u64, cases: usize, doi_fn: DoiFn) -> SuiteResult {
    run_suite("psi difference", 3, seed, cases, 1e-9, |rng, i| {
        let n = dim_for(i, 2, 16);
        let (b1, b2) = (scaled_hermitian(rng, n)?, scaled_hermitian(rng, n)?);
        let (e1, e2) = (spectral_measure(&b1)?, spectral_measure(&b2)?);
        let p = psi();
        let q = doi_fn(&OffDiagonalQuotient(&p as &dyn Field1), &e1, b1.sub(&b2)?.as_matrix(), &e2)?;
        let direct = &e1.apply_scalar(&p)? - &e2.apply_scalar(&p)?;
        trace_norm(&(&q - &direct))
    })
}

/// `doi(φ, E_A, ψ(B1) - ψ(B2), E_C)` against the triple calculus of `φ ⊗ ψ`.
pub fn separated_difference_suite(seed: u64, cases: usize, doi_fn: DoiFn) -> SuiteResult {
    run_suite("separated difference", 4, seed, cases, 1e-9, |rng, i| {
        let n = dim_for(i, 2, 8);
        let a = scaled_hermitian(rng, n)?;
        let (b1, b2) = (scaled_hermitian(rng, n)?, scaled_hermitian(rng, n)?);
        let c = scaled_hermitian(rng, n)?;
        let phi = phi_from_coeffs(random_coeffs(rng, 3, 3)?);
        let p = psi();
        let (e1, e2) = (spectral_measure(&b1)?, spectral_measure(&b2)?);
        let q = doi_fn(&OffDiagonalQuotient(&p as &dyn Field1), &e1, b1.sub(&b2)?.as_matrix(), &e2)?;
        let sep = doi_fn(&phi, &spectral_measure(&a)?, &q, &spectral_measure(&c)?)?;
        let f = crate::field::Separated::new(phi, p);
        let triple = &func_calc_triple(&f, &a, &b1, &c)? - &func_calc_triple(&f, &a, &b2, &c)?;
        trace_norm(&(&sep - &triple))
    })
}

/// Coordinate measures at the lattice `2πj`: the double operator integral
/// of `φ = Σ c_jk η_j ⊗ η_k` is the Schur product with `{c_jk}`.
pub fn rank_one_reduction_suite(seed: u64, cases: usize, doi_fn: DoiFn) -> SuiteResult {
    run_suite("rank-one reduction", 5, seed, cases, 1e-12, |rng, i| {
        let n = dim_for(i, 1, 8);
        let lattice: Vec<f64> = (0..n).map(|j| 2.0 * PI * j as f64).collect();
        let e = SpectralMeasure::coordinate(&lattice)?;
        let c = random_coeffs(rng, n, n)?;
        let v = random_unit_vector(rng, n);
        let p = CMatrix::outer(&v, &v);
        let lhs = doi_fn(&phi_from_coeffs(c.clone()), &e, &p, &e)?;
        Ok((&lhs - &c.schur(&p)?).max_abs())
    })
}

/// `‖doi(Φ, E1, T, E2)‖_{S2} ≤ sup|Φ| ‖T‖_{S2}`, with equality on the
/// maximizing matrix unit. Residual: excess of lhs over rhs, plus the
/// equality gap.
pub fn s2_contraction_suite(seed: u64, cases: usize, doi_fn: DoiFn) -> SuiteResult {
    run_suite("S2 contraction", 6, seed, cases, 1e-10, |rng, i| {
        let n = dim_for(i, 2, 8);
        let (a, b) = (scaled_hermitian(rng, n)?, scaled_hermitian(rng, n)?);
        let (e1, e2) = (spectral_measure(&a)?, spectral_measure(&b)?);
        let phi = phi_from_coeffs(random_coeffs(rng, 2, 2)?);
        let t = random_matrix(rng, n);
        let sup = symbol_sup(&phi, &e1, &e2)?.0;
        let lhs = doi_fn(&phi, &e1, &t, &e2)?.frobenius_norm();
        let excess = (lhs - sup * t.frobenius_norm()).max(0.0);
        let unit = crate::integral::s2_maximizing_unit(&phi, &e1, &e2)?;
        let attained = doi_fn(&phi, &e1, &unit, &e2)?.frobenius_norm();
        Ok(excess.max((attained - sup * unit.frobenius_norm()).abs()))
    })
}

/// `η(0) = 1` and `η(2πk) = 0` for `0 < |k| ≤ 20`.
pub fn eta_values_suite() -> SuiteResult {
    run_suite("eta lattice values", 7, 0, 1, 1e-12, |_, _| {
        let zeros = (1..=20)
            .flat_map(|k| [k, -k])
            .map(|k| eta(2.0 * PI * k as f64).abs())
            .fold(0.0, f64::max);
        Ok(zeros.max((eta(0.0) - 1.0).abs()))
    })
}

/// Spectral mass of `η` outside `‖ξ‖ ≤ 1` on `[-64π, 64π)` with 2¹⁴ samples.
pub fn eta_band_limit_suite() -> SuiteResult {
    run_suite("eta band limit", 8, 0, 1, 1e-6, |_, _| {
        let axis = Axis::centered(0.0, 64.0 * PI, 1 << 14)?;
        bandlimit_check(&SampledField::sample1(&Real1(eta), axis), 1.0)
    })
}

/// `‖g(εA, εB1, εC) - g(εA, εB2, εC)‖_{S1} = ε ‖f(A, B1, C) - f(A, B2, C)‖_{S1}`
/// and `‖εB1 - εB2‖_{S1} = 2πε` for `ε ∈ {1/2, 1/4, 1/8}`, `n = 8`.
pub fn scaling_suite() -> SuiteResult {
    run_suite("epsilon scaling", 9, 0, 3, 1e-10, |_, i| {
        let eps = 0.5f64.powi(i as i32 + 1);
        let inst = build_instance(8)?;
        let base = trace_norm(&inst.difference()?)?;
        let scaled = scale_instance(&inst, eps)?;
        let norm = trace_norm(&scaled.difference()?)?;
        Ok((norm - eps * base).abs().max((scaled.perturbation_s1()? - 2.0 * PI * eps).abs()))
    })
}

/// Every suite; `trials` cases for the randomized ones (ten times as many
/// for the cheap S2 check).
pub fn run_all(seed: u64, trials: usize, doi_fn: DoiFn) -> Result<VerifyReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let suites = vec![
        perturbation_suite(seed, trials, doi_fn),
        diagonal_irrelevance_suite(seed, trials, doi_fn),
        psi_difference_suite(seed, trials, doi_fn),
        separated_difference_suite(seed, trials, doi_fn),
        rank_one_reduction_suite(seed, trials, doi_fn),
        s2_contraction_suite(seed, 10 * trials, doi_fn),
        eta_values_suite(),
        eta_band_limit_suite(),
        scaling_suite(),
    ];
    Ok(VerifyReport { seed, trials, suites })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_passes_and_is_deterministic() {
        let a = run_all(7, 12, reference_doi).unwrap();
        for s in &a.suites {
            assert!(s.passed, "{s:?}");
        }
        let b = run_all(7, 12, reference_doi).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tampered_integral_is_caught() {
        let r = perturbation_suite(7, 12, tampered_doi);
        assert!(!r.passed, "{r:?}");
        assert!(psi_difference_suite(7, 12, tampered_doi).max_residual > 1e-9);
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(run_all(1, 0, reference_doi).is_err());
    }

    #[test]
    fn seeds_change_cases() {
        let a = perturbation_suite(1, 4, reference_doi);
        let b = perturbation_suite(2, 4, reference_doi);
        assert_ne!(a.max_residual, b.max_residual);
    }
}

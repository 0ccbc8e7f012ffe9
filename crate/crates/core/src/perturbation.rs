//! Divided differences and the finite-spectrum perturbation identities.
//!
//! For Hermitian `A`, `B` with finite spectra,
//!
//! ```text
//! f(A) - f(B) = Σ_{λ,μ} (Δf)(λ, μ) E_A({λ}) (A - B) E_B({μ})
//! ```
//!
//! holds for every `f`, whatever value `Δf` takes on the diagonal `λ = μ`:
//! those terms carry `E_A({λ})(A - B)E_B({λ}) = λ E_A E_B - E_A λ E_B = 0`.

use crate::error::Result;
use crate::field::{Field1, Field2};
use crate::hermitian::HermitianMatrix;
use crate::integral::doi;
use crate::matrix::{CMatrix, C64};
use crate::schatten::trace_norm;
use crate::spectral::spectral_measure;

/// `(Δφ)(x, y) = (φ(x) - φ(y)) / (x - y)` for `x ≠ y`, `diag(x)` for `x = y`.
#[derive(Clone, Debug)]
pub struct DividedDifference<F, D> {
    pub base: F,
    pub diagonal: D,
}

impl<F: Field1, D: Field1> Field2 for DividedDifference<F, D> {
    fn eval(&self, x: f64, y: f64) -> C64 {
        if x == y {
            self.diagonal.eval(x)
        } else {
            (self.base.eval(x) - self.base.eval(y)) / (x - y)
        }
    }

    fn eval_grid(&self, xs: &[f64], ys: &[f64]) -> Vec<C64> {
        let fx = self.base.eval_many(xs);
        let fy = self.base.eval_many(ys);
        let mut out = Vec::with_capacity(xs.len() * ys.len());
        for (&x, &vx) in xs.iter().zip(&fx) {
            for (&y, &vy) in ys.iter().zip(&fy) {
                out.push(if x == y {
                    self.diagonal.eval(x)
                } else {
                    (vx - vy) / (x - y)
                });
            }
        }
        out
    }
}

/// Divided difference of `phi` with its derivative on the diagonal.
pub fn divided_difference<F: Field1, D: Field1>(phi: F, phi_prime: D) -> DividedDifference<F, D> {
    DividedDifference {
        base: phi,
        diagonal: phi_prime,
    }
}

/// The quotient `(ψ(x) - ψ(y)) / (x - y)` with the diagonal removed (zero).
#[derive(Clone, Debug)]
pub struct OffDiagonalQuotient<F>(pub F);

impl<F: Field1> Field2 for OffDiagonalQuotient<F> {
    fn eval(&self, x: f64, y: f64) -> C64 {
        if x == y {
            C64::new(0.0, 0.0)
        } else {
            (self.0.eval(x) - self.0.eval(y)) / (x - y)
        }
    }

    fn eval_grid(&self, xs: &[f64], ys: &[f64]) -> Vec<C64> {
        let zero = crate::field::Constant::real(0.0);
        DividedDifference {
            base: &self.0 as &dyn Field1,
            diagonal: zero,
        }
        .eval_grid(xs, ys)
    }
}

impl Field1 for &dyn Field1 {
    fn eval(&self, x: f64) -> C64 {
        (**self).eval(x)
    }

    fn eval_many(&self, xs: &[f64]) -> Vec<C64> {
        (**self).eval_many(xs)
    }
}

/// `‖f(A) - f(B) - doi(Δf, E_A, A - B, E_B)‖_{S1}`.
pub fn perturbation_identity_residual<F: Field1, D: Field1>(
    f: &F,
    f_prime: &D,
    a: &HermitianMatrix,
    b: &HermitianMatrix,
) -> Result<f64> {
    let ea = spectral_measure(a)?;
    let eb = spectral_measure(b)?;
    let diff = a.sub(b)?;
    let lhs = &ea.apply_scalar(f)? - &eb.apply_scalar(f)?;
    let dd = DividedDifference {
        base: f as &dyn Field1,
        diagonal: f_prime as &dyn Field1,
    };
    let rhs = doi(&dd, &ea, diff.as_matrix(), &eb)?;
    trace_norm(&(&lhs - &rhs))
}

/// `‖doi(Δf|g1, E_A, A - B, E_B) - doi(Δf|g2, E_A, A - B, E_B)‖_{S1}` where
/// `Δf|g` is the divided difference with `g` on the diagonal.
pub fn diagonal_irrelevance_check<F: Field1, G1: Field1, G2: Field1>(
    f: &F,
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    g1: &G1,
    g2: &G2,
) -> Result<f64> {
    let ea = spectral_measure(a)?;
    let eb = spectral_measure(b)?;
    let diff = a.sub(b)?;
    let with = |g: &dyn Field1| {
        doi(
            &DividedDifference {
                base: f as &dyn Field1,
                diagonal: g,
            },
            &ea,
            diff.as_matrix(),
            &eb,
        )
    };
    trace_norm(&(&with(g1)? - &with(g2)?))
}

/// `Q = Σ_{λ ≠ μ} (ψ(λ) - ψ(μ)) / (λ - μ) · E_{B1}({λ}) (B1 - B2) E_{B2}({μ})`,
/// which equals `ψ(B1) - ψ(B2)`.
pub fn psi_difference<S: Field1>(psi: &S, b1: &HermitianMatrix, b2: &HermitianMatrix) -> Result<CMatrix> {
    let e1 = spectral_measure(b1)?;
    let e2 = spectral_measure(b2)?;
    let diff = b1.sub(b2)?;
    doi(&OffDiagonalQuotient(psi as &dyn Field1), &e1, diff.as_matrix(), &e2)
}

/// `Σ φ(λ, ν) E_A({λ}) Q E_C({ν})` with `Q` from [`psi_difference`]; this is
/// `f(A, B1, C) - f(A, B2, C)` for `f(x, y, z) = φ(x, z) ψ(y)`.
pub fn separated_difference<P: Field2, S: Field1>(
    phi: &P,
    psi: &S,
    a: &HermitianMatrix,
    b1: &HermitianMatrix,
    b2: &HermitianMatrix,
    c: &HermitianMatrix,
) -> Result<CMatrix> {
    let q = psi_difference(psi, b1, b2)?;
    let ea = spectral_measure(a)?;
    let ec = spectral_measure(c)?;
    doi(phi, &ea, &q, &ec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counterexample::{eta, Eta, EtaPrime};
    use crate::field::{Constant, Polynomial, Real1, Real2, Separated};
    use crate::integral::func_calc_triple;
    use crate::random::random_hermitian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn square() -> (Polynomial, Polynomial) {
        let p = Polynomial::new(vec![0.0, 0.0, 1.0]);
        let d = p.derivative();
        (p, d)
    }

    #[test]
    fn divided_difference_values() {
        let (p, d) = square();
        let dd = divided_difference(p, d);
        assert_eq!(dd.eval(1.0, 3.0).re, 4.0);
        assert_eq!(dd.eval(2.0, 2.0).re, 4.0);
        let de = divided_difference(Eta::new(0.0), EtaPrime::new(0.0));
        assert!((de.eval(0.0, 2.0 * PI).re + 1.0 / (2.0 * PI)).abs() < 1e-15);
        // grid path agrees with pointwise
        let grid = de.eval_grid(&[0.0, 1.0], &[1.0, 2.0 * PI]);
        assert_eq!(grid[1], de.eval(0.0, 2.0 * PI));
        assert_eq!(grid[2], de.eval(1.0, 1.0));
    }

    #[test]
    fn identity_function_has_zero_residual() {
        let mut r = ChaCha8Rng::seed_from_u64(1);
        let (a, b) = (random_hermitian(&mut r, 6), random_hermitian(&mut r, 6));
        let res = perturbation_identity_residual(&Real1(|x: f64| x), &Constant::real(1.0), &a, &b).unwrap();
        assert!(res < 1e-12);
        let (p, d) = square();
        assert!(perturbation_identity_residual(&p, &d, &a, &a).unwrap() < 1e-12);
    }

    #[test]
    fn eta_residual_on_random_pair() {
        let mut r = ChaCha8Rng::seed_from_u64(2);
        let a = random_hermitian(&mut r, 6).scale(3.0);
        let b = random_hermitian(&mut r, 6).scale(3.0);
        let res = perturbation_identity_residual(&Eta::new(0.0), &EtaPrime::new(0.0), &a, &b).unwrap();
        assert!(res < 1e-9 * (1.0 + 2.0 * 3.0 * 6.0), "{res}");
    }

    #[test]
    fn diagonal_values_never_sampled_for_disjoint_spectra() {
        let a = HermitianMatrix::from_diag(&[0.0, 1.0, 5.0]);
        let b = HermitianMatrix::from_diag(&[2.0, 3.0, 4.0]);
        let diff = diagonal_irrelevance_check(&Eta::new(0.0), &a, &b, &Constant::real(0.0), &Constant::real(1e6)).unwrap();
        assert_eq!(diff, 0.0);
    }

    #[test]
    fn equal_operators_make_every_diagonal_irrelevant() {
        let a = HermitianMatrix::from_diag(&[1.0, 2.0]);
        let (p, d) = square();
        let shifted = Real1(|x: f64| 2.0 * x + 1.0);
        assert_eq!(diagonal_irrelevance_check(&p, &a, &a, &d, &shifted).unwrap(), 0.0);
    }

    #[test]
    fn shared_eigenvalue_leaves_identity_intact() {
        // A and B share eigenvalue 1 on e0 and differ on span{e1, e2};
        // E_A({1}) (A - B) E_B({1}) = 0.
        let a = HermitianMatrix::new(
            CMatrix::from_real_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 3.0]]).unwrap(),
        )
        .unwrap();
        let b = HermitianMatrix::new(
            CMatrix::from_real_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 2.5, 0.5], vec![0.0, 0.5, 2.5]]).unwrap(),
        )
        .unwrap();
        let ea = spectral_measure(&a).unwrap();
        let eb = spectral_measure(&b).unwrap();
        assert!(ea.atom_at(1.0, 1e-12).is_some() && eb.atom_at(1.0, 1e-12).is_some());
        let (p, d) = square();
        let bumped = Real1(|x: f64| 2.0 * x + 1e3);
        let r1 = perturbation_identity_residual(&p, &d, &a, &b).unwrap();
        let r2 = perturbation_identity_residual(&p, &bumped, &a, &b).unwrap();
        assert!(r1 < 1e-12 && r2 < 1e-12, "{r1} {r2}");
        assert!(diagonal_irrelevance_check(&p, &a, &b, &d, &bumped).unwrap() < 1e-11);
    }

    #[test]
    fn psi_difference_for_rank_one_projection() {
        let n = 5;
        let v = vec![C64::new(1.0 / (n as f64).sqrt(), 0.0); n];
        let p = CMatrix::outer(&v, &v);
        let b1 = HermitianMatrix::rank_one(&v, 2.0 * PI);
        let b2 = HermitianMatrix::zeros(n);
        let q = psi_difference(&Eta::new(2.0 * PI), &b1, &b2).unwrap();
        assert!((&q - &p).max_abs() < 1e-12);
        assert!(psi_difference(&Eta::new(2.0 * PI), &b1, &b1).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn psi_difference_matches_functional_calculus() {
        let mut r = ChaCha8Rng::seed_from_u64(3);
        let (b1, b2) = (random_hermitian(&mut r, 5).scale(4.0), random_hermitian(&mut r, 5).scale(4.0));
        let psi = Eta::new(2.0 * PI);
        let q = psi_difference(&psi, &b1, &b2).unwrap();
        let direct = &spectral_measure(&b1).unwrap().apply_scalar(&psi).unwrap()
            - &spectral_measure(&b2).unwrap().apply_scalar(&psi).unwrap();
        assert!((&q - &direct).max_abs() < 1e-10);
    }

    #[test]
    fn separated_difference_examples() {
        let mut r = ChaCha8Rng::seed_from_u64(4);
        let hs: Vec<_> = (0..3).map(|_| random_hermitian(&mut r, 4).scale(3.0)).collect();
        let (a, b1, c) = (&hs[0], &hs[1], &hs[2]);
        let psi = Real1(|y: f64| eta(y - 2.0 * PI));
        let phi = Real2(|x: f64, z: f64| (x * z).cos());
        assert!(separated_difference(&phi, &psi, a, b1, b1, c).unwrap().max_abs() < 1e-12);

        let q = psi_difference(&psi, b1, &HermitianMatrix::zeros(4)).unwrap();
        let one = separated_difference(&Constant::real(1.0), &psi, a, b1, &HermitianMatrix::zeros(4), c).unwrap();
        assert!((&one - &q).max_abs() < 1e-12);

        let b2 = random_hermitian(&mut r, 4);
        let f = Separated::new(phi, psi);
        let via_triple = &func_calc_triple(&f, a, b1, c).unwrap() - &func_calc_triple(&f, a, &b2, c).unwrap();
        let sep = separated_difference(&phi, &psi, a, b1, &b2, c).unwrap();
        assert!((&via_triple - &sep).max_abs() < 1e-10);
    }
}

//! The trace-class counterexample for triples.
//!
//! With `A = C = diag(0, 2π, …, 2π(n-1))`, `B1 = 2πP` for the rank-one
//! projection `P` onto the uniform vector and `B2 = 0`, the function
//! `f(x, y, z) = φ(x, z) ψ(y)` with `ψ = η(· - 2π)` and `φ` interpolating the
//! triangular pattern `1_{j ≤ k}` at the lattice `(2πj, 2πk)` gives
//!
//! ```text
//! f(A, B1, C) - f(A, B2, C) = (1/n) U_n,        U_n = upper-triangular ones,
//! ```
//!
//! whose trace norm grows like `log n` while `sup |f| = 1` and
//! `‖B1 - B2‖_{S1} = 2π` stay fixed.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{Field1, Field2, Field3};
use crate::hermitian::HermitianMatrix;
use crate::integral::func_calc_triple;
use crate::matrix::{matmul_real, CMatrix, C64};
use crate::par;
use crate::schatten::trace_norm;

const TWO_PI: f64 = 2.0 * PI;

/// Below this `|x|` the Taylor polynomial replaces the closed form of `η`.
const ETA_SERIES_CUTOFF: f64 = 1e-3;
/// Below this `|x|` `η'` is summed from its power series.
const ETA_PRIME_SERIES_CUTOFF: f64 = 0.5;

/// `η(x) = 2(1 - cos x) / x² = (sin(x/2) / (x/2))²`.
///
/// `η(0) = 1`, `η(2πk) = 0` for `k ≠ 0`, `0 ≤ η ≤ 1`, and the Fourier
/// transform of `η` is the tent supported on `[-1, 1]`.
pub fn eta(x: f64) -> f64 {
    if x.abs() < ETA_SERIES_CUTOFF {
        let x2 = x * x;
        1.0 - x2 / 12.0 + x2 * x2 / 360.0
    } else {
        // The half-angle form avoids the cancellation in 1 - cos x.
        let u = 0.5 * x;
        let s = u.sin() / u;
        s * s
    }
}

pub fn eta_prime(x: f64) -> f64 {
    if x.abs() < ETA_PRIME_SERIES_CUTOFF {
        // η'(x) = Σ_{m≥1} (-1)^m 4m x^{2m-1} / (2m+2)!
        let x2 = x * x;
        let mut power = x; // x^{2m-1}
        let mut fact = 24.0; // (2m+2)!
        let mut sum = 0.0;
        for m in 1..=10 {
            let sign = if m % 2 == 1 { -1.0 } else { 1.0 };
            sum += sign * 4.0 * m as f64 * power / fact;
            power *= x2;
            let k = 2.0 * m as f64 + 2.0;
            fact *= (k + 1.0) * (k + 2.0);
        }
        sum
    } else {
        let u = 0.5 * x;
        let (sin, cos) = u.sin_cos();
        (sin / u) * (u * cos - sin) / (u * u)
    }
}

/// `η(x - shift)`; `η_j` has shift `2πj`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eta {
    pub shift: f64,
}

impl Eta {
    pub fn new(shift: f64) -> Self {
        Eta { shift }
    }

    /// `η_j = η(· - 2πj)`.
    pub fn lattice(j: i64) -> Self {
        Eta::new(TWO_PI * j as f64)
    }

    pub fn value(&self, x: f64) -> f64 {
        eta(x - self.shift)
    }
}

impl Field1 for Eta {
    fn eval(&self, x: f64) -> C64 {
        C64::new(self.value(x), 0.0)
    }
}

/// Derivative of [`Eta`] with the same shift.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EtaPrime {
    pub shift: f64,
}

impl EtaPrime {
    pub fn new(shift: f64) -> Self {
        EtaPrime { shift }
    }
}

impl Field1 for EtaPrime {
    fn eval(&self, x: f64) -> C64 {
        C64::new(eta_prime(x - self.shift), 0.0)
    }
}

/// The middle symbol `ψ = η(· - 2π)`: `ψ(2π) = 1`, `ψ(0) = 0`.
pub fn psi() -> Eta {
    Eta::lattice(1)
}

/// A finite `rows × cols` family of complex coefficients `c_jk`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<C64>,
    sup: f64,
}

impl CoeffMatrix {
    /// Row-major entries; all must be finite.
    pub fn new(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(
                "coefficient family must be nonempty".into(),
            ));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        if let Some(i) = crate::field::first_non_finite(&entries) {
            return Err(Error::InvalidArgument(format!(
                "coefficient ({}, {}) is not finite",
                i / cols,
                i % cols
            )));
        }
        let sup = entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
        Ok(CoeffMatrix {
            rows,
            cols,
            entries,
            sup,
        })
    }

    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::new(rows, cols, entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> C64) -> Result<Self> {
        let entries = (0..rows)
            .flat_map(|j| (0..cols).map(move |k| (j, k)))
            .map(|(j, k)| f(j, k))
            .collect();
        Self::new(rows, cols, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, j: usize, k: usize) -> C64 {
        self.entries[j * self.cols + k]
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    /// `sup |c_jk|`.
    pub fn sup(&self) -> f64 {
        self.sup
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|z| z.im == 0.0)
    }

    /// Schur product `{c_jk m_jk}` with a square matrix of matching size.
    pub fn schur(&self, m: &CMatrix) -> Result<CMatrix> {
        if self.rows != self.cols || self.rows != m.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: m.dim(),
            });
        }
        let data = m
            .as_slice()
            .iter()
            .zip(&self.entries)
            .map(|(a, c)| a * c)
            .collect();
        CMatrix::from_row_major(m.dim(), data)
    }
}

/// `c_jk = 1` for `j ≤ k`, else `0`.
pub fn triangular_coeffs(n: usize) -> Result<CoeffMatrix> {
    CoeffMatrix::from_fn(n, n, |j, k| C64::new(if j <= k { 1.0 } else { 0.0 }, 0.0))
}

/// `φ(x, y) = Σ_{j,k} c_jk η_j(x) η_k(y)`; `φ(2πj, 2πk) = c_jk`.
#[derive(Clone, Debug)]
pub struct CoeffField {
    coeffs: CoeffMatrix,
    re: Vec<f64>,
    im: Option<Vec<f64>>,
}

pub fn phi_from_coeffs(coeffs: CoeffMatrix) -> CoeffField {
    let re = coeffs.entries.iter().map(|z| z.re).collect();
    let im = (!coeffs.is_real()).then(|| coeffs.entries.iter().map(|z| z.im).collect());
    CoeffField { coeffs, re, im }
}

impl CoeffField {
    pub fn coeffs(&self) -> &CoeffMatrix {
        &self.coeffs
    }

    /// `xs.len() × count` table of `η(x - 2πj)`.
    fn basis_rows(xs: &[f64], count: usize) -> Vec<f64> {
        let mut out = vec![0.0; xs.len() * count];
        par::for_each_row(&mut out, count, |i, row| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = eta(xs[i] - TWO_PI * j as f64);
            }
        });
        out
    }

    /// `count × ys.len()` table of `η(y - 2πk)`.
    fn basis_cols(ys: &[f64], count: usize) -> Vec<f64> {
        let mut out = vec![0.0; count * ys.len()];
        par::for_each_row(&mut out, ys.len(), |k, row| {
            let shift = TWO_PI * k as f64;
            for (v, &y) in row.iter_mut().zip(ys) {
                *v = eta(y - shift);
            }
        });
        out
    }

    /// Real and imaginary tables `Ex · C · Eyᵀ`, row-major `xs × ys`.
    fn grid_parts(&self, xs: &[f64], ys: &[f64]) -> (Vec<f64>, Option<Vec<f64>>) {
        let (r, c) = (self.coeffs.rows, self.coeffs.cols);
        let ex = Self::basis_rows(xs, r);
        let ey = Self::basis_cols(ys, c);
        let part = |coef: &[f64]| {
            let right = matmul_real(coef, r, c, &ey, ys.len());
            matmul_real(&ex, xs.len(), r, &right, ys.len())
        };
        (part(&self.re), self.im.as_deref().map(part))
    }

    /// `max |φ|` over the product grid `xs × ys`.
    pub fn max_abs_on(&self, xs: &[f64], ys: &[f64]) -> f64 {
        // Bound the table size; the grid is processed in row bands.
        const BAND: usize = 512;
        xs.chunks(BAND)
            .map(|band| match self.grid_parts(band, ys) {
                (re, None) => re.iter().fold(0.0, |m: f64, v| m.max(v.abs())),
                (re, Some(im)) => re
                    .iter()
                    .zip(&im)
                    .fold(0.0, |m: f64, (a, b)| m.max(a.hypot(*b))),
            })
            .fold(0.0, f64::max)
    }
}

impl Field2 for CoeffField {
    fn eval(&self, x: f64, y: f64) -> C64 {
        let ey: Vec<f64> = (0..self.coeffs.cols)
            .map(|k| eta(y - TWO_PI * k as f64))
            .collect();
        let mut sum = C64::new(0.0, 0.0);
        for j in 0..self.coeffs.rows {
            let ex = eta(x - TWO_PI * j as f64);
            if ex == 0.0 {
                continue;
            }
            let row = &self.coeffs.entries[j * self.coeffs.cols..(j + 1) * self.coeffs.cols];
            let inner: C64 = row.iter().zip(&ey).map(|(c, &e)| c * e).sum();
            sum += inner * ex;
        }
        sum
    }

    fn eval_grid(&self, xs: &[f64], ys: &[f64]) -> Vec<C64> {
        match self.grid_parts(xs, ys) {
            (re, None) => re.into_iter().map(|v| C64::new(v, 0.0)).collect(),
            (re, Some(im)) => re
                .into_iter()
                .zip(im)
                .map(|(a, b)| C64::new(a, b))
                .collect(),
        }
    }
}

/// Uniform sampling grid `{-radius + i·step}` covering `[-radius, radius]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupGrid {
    pub radius: f64,
    pub step: f64,
}

impl SupGrid {
    pub const BASE_STEP: f64 = PI / 8.0;

    pub fn new(radius: f64, step: f64) -> Result<Self> {
        if !(radius > 0.0 && step > 0.0 && radius.is_finite() && step.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "sup-norm grid needs positive radius and step, got radius {radius}, step {step}"
            )));
        }
        Ok(SupGrid { radius, step })
    }

    /// Square `[-2πn - π, 2πn + π]²`. The step is `π/8` up to `n = 64` and
    /// doubles with `n` beyond that, capped at `π`, so the table stays
    /// around 2000² points; every step divides `2π`, so the lattice
    /// `2πj` is always sampled.
    pub fn for_size(n: usize) -> Self {
        let mut step = Self::BASE_STEP;
        let mut m = 64;
        while m < n && step < PI {
            step *= 2.0;
            m *= 2;
        }
        SupGrid {
            radius: TWO_PI * n as f64 + PI,
            step,
        }
    }

    pub fn refined(self) -> Self {
        SupGrid {
            step: self.step / 2.0,
            ..self
        }
    }

    pub fn points(&self) -> Vec<f64> {
        sample_points(-self.radius, self.radius, self.step)
    }
}

/// `lo, lo + step, …` up to `hi` (inclusive within rounding).
pub fn sample_points(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|i| lo + i as f64 * step).collect()
}

/// `max |φ|` over `grid × grid`.
pub fn sup_norm_estimate<P: Field2 + ?Sized>(phi: &P, grid: SupGrid) -> f64 {
    let pts = grid.points();
    pts.chunks(256)
        .map(|band| {
            phi.eval_grid(band, &pts)
                .iter()
                .fold(0.0, |m: f64, z| m.max(z.norm()))
        })
        .fold(0.0, f64::max)
}

/// `max |φ|` for a coefficient expansion, via real products.
pub fn coeff_sup_norm_estimate(phi: &CoeffField, grid: SupGrid) -> f64 {
    let pts = grid.points();
    phi.max_abs_on(&pts, &pts)
}

/// `max |ψ|` over `lo, lo + step, …, hi`.
pub fn sup_norm_1d<S: Field1 + ?Sized>(psi: &S, lo: f64, hi: f64, step: f64) -> f64 {
    psi.eval_many(&sample_points(lo, hi, step))
        .iter()
        .fold(0.0, |m, z| m.max(z.norm()))
}

/// `g(x, y, z) = ε φ(x/ε, z/ε) ψ(y/ε)`; `ε = 1` is the unscaled `f`.
#[derive(Clone, Debug)]
pub struct CounterexampleField {
    pub epsilon: f64,
    pub phi: CoeffField,
    pub psi: Eta,
}

impl Field3 for CounterexampleField {
    fn eval(&self, x: f64, y: f64, z: f64) -> C64 {
        let e = self.epsilon;
        self.phi.eval(x / e, z / e) * self.psi.value(y / e) * e
    }

    fn eval_grid(&self, xs: &[f64], ys: &[f64], zs: &[f64]) -> Vec<C64> {
        let e = self.epsilon;
        let sx: Vec<f64> = xs.iter().map(|x| x / e).collect();
        let sz: Vec<f64> = zs.iter().map(|z| z / e).collect();
        let outer = self.phi.eval_grid(&sx, &sz);
        let middle: Vec<f64> = ys.iter().map(|y| e * self.psi.value(y / e)).collect();
        let nz = zs.len();
        let mut out = Vec::with_capacity(xs.len() * ys.len() * nz);
        for i in 0..xs.len() {
            let row = &outer[i * nz..(i + 1) * nz];
            for &m in &middle {
                out.extend(row.iter().map(|&o| o * m));
            }
        }
        out
    }
}

/// The uniform unit vector `n^{-1/2} (1, …, 1)`.
pub fn witness_vector(n: usize) -> Vec<C64> {
    vec![C64::new(1.0 / (n as f64).sqrt(), 0.0); n]
}

/// `U_n`: ones on and above the diagonal.
pub fn upper_triangular_ones(n: usize) -> CMatrix {
    CMatrix::from_fn(n, |j, k| C64::new(if j <= k { 1.0 } else { 0.0 }, 0.0))
}

#[derive(Clone, Debug)]
pub struct CounterexampleInstance {
    pub n: usize,
    pub epsilon: f64,
    pub phi: CoeffField,
    pub a: HermitianMatrix,
    pub b1: HermitianMatrix,
    pub b2: HermitianMatrix,
    pub c: HermitianMatrix,
    /// Sampled `sup |f|` (already scaled by `ε`).
    pub sup_norm: f64,
    pub sup_grid: SupGrid,
}

/// Builds the size-`n` instance, estimating `sup |f|` on [`SupGrid::for_size`].
pub fn build_instance(n: usize) -> Result<CounterexampleInstance> {
    build_instance_with_grid(n, SupGrid::for_size(n))
}

pub fn build_instance_with_grid(n: usize, grid: SupGrid) -> Result<CounterexampleInstance> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "counterexample size must be at least 2, got {n}"
        )));
    }
    let lattice: Vec<f64> = (0..n).map(|j| TWO_PI * j as f64).collect();
    let a = HermitianMatrix::from_diag(&lattice);
    let phi = phi_from_coeffs(triangular_coeffs(n)?);
    let sup_phi = coeff_sup_norm_estimate(&phi, grid);
    let sup_psi = sup_norm_1d(&psi(), 0.0, 2.0 * TWO_PI, SupGrid::BASE_STEP);
    Ok(CounterexampleInstance {
        n,
        epsilon: 1.0,
        phi,
        c: a.clone(),
        a,
        b1: HermitianMatrix::rank_one(&witness_vector(n), TWO_PI),
        b2: HermitianMatrix::zeros(n),
        sup_norm: sup_phi * sup_psi,
        sup_grid: grid,
    })
}

/// Norms of one instance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthMeasurement {
    /// `‖f(A, B1, C) - f(A, B2, C)‖_{S1}` via the triple calculus.
    pub s1_diff_norm: f64,
    /// The same norm from the closed form `(ε/n) U_n`.
    pub closed_form_s1: f64,
    /// `max(‖A - A‖, ‖B1 - B2‖, ‖C - C‖)` in `S1`.
    pub perturbation_s1: f64,
    pub sup_norm: f64,
    pub ratio: f64,
    pub closed_form_ratio: f64,
}

impl CounterexampleInstance {
    pub fn field(&self) -> CounterexampleField {
        CounterexampleField {
            epsilon: self.epsilon,
            phi: self.phi.clone(),
            psi: psi(),
        }
    }

    /// `f(A, B1, C) - f(A, B2, C)` through the triple functional calculus.
    pub fn difference(&self) -> Result<CMatrix> {
        let f = self.field();
        let first = func_calc_triple(&f, &self.a, &self.b1, &self.c)?;
        let second = func_calc_triple(&f, &self.a, &self.b2, &self.c)?;
        Ok(&first - &second)
    }

    /// `(ε/n) U_n`.
    pub fn closed_form_difference(&self) -> CMatrix {
        upper_triangular_ones(self.n).scale_real(self.epsilon / self.n as f64)
    }

    /// `max` of the trace norms of the three operator increments.
    pub fn perturbation_s1(&self) -> Result<f64> {
        let db = self.b1.sub(&self.b2)?;
        let da = self.a.sub(&self.a)?;
        let dc = self.c.sub(&self.c)?;
        Ok(trace_norm(da.as_matrix())?
            .max(trace_norm(db.as_matrix())?)
            .max(trace_norm(dc.as_matrix())?))
    }

    pub fn measure(&self) -> Result<GrowthMeasurement> {
        let s1_diff_norm = trace_norm(&self.difference()?)?;
        let closed_form_s1 = trace_norm(&self.closed_form_difference())?;
        let perturbation_s1 = self.perturbation_s1()?;
        let denom = self.sup_norm * perturbation_s1;
        if !(denom > 0.0) {
            return Err(Error::ZeroDenominator("growth ratio"));
        }
        Ok(GrowthMeasurement {
            s1_diff_norm,
            closed_form_s1,
            perturbation_s1,
            sup_norm: self.sup_norm,
            ratio: s1_diff_norm / denom,
            closed_form_ratio: closed_form_s1 / denom,
        })
    }
}

/// `‖f(A,B1,C) - f(A,B2,C)‖_{S1} / (sup|f| · max_i ‖X_i - Y_i‖_{S1})`.
pub fn growth_ratio(inst: &CounterexampleInstance) -> Result<f64> {
    Ok(inst.measure()?.ratio)
}

/// `g = ε f(·/ε)` with every operator multiplied by `ε`.
pub fn scale_instance(inst: &CounterexampleInstance, eps: f64) -> Result<CounterexampleInstance> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "scale must be positive and finite, got {eps}"
        )));
    }
    Ok(CounterexampleInstance {
        n: inst.n,
        epsilon: inst.epsilon * eps,
        phi: inst.phi.clone(),
        a: inst.a.scale(eps),
        b1: inst.b1.scale(eps),
        b2: inst.b2.scale(eps),
        c: inst.c.scale(eps),
        sup_norm: inst.sup_norm * eps,
        sup_grid: inst.sup_grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integral::doi;
    use crate::spectral::{spectral_measure, SpectralMeasure};

    #[test]
    fn eta_values() {
        assert_eq!(eta(0.0), 1.0);
        assert!(eta(TWO_PI).abs() < 1e-30);
        assert!((eta(PI) - 4.0 / (PI * PI)).abs() < 1e-15);
        for k in 1..=20 {
            assert!(eta(TWO_PI * k as f64).abs() < 1e-12);
            assert!(eta(-TWO_PI * k as f64).abs() < 1e-12);
        }
        // series and closed form meet continuously at the cutoff
        let x = ETA_SERIES_CUTOFF;
        let closed = ((x / 2.0).sin() / (x / 2.0)).powi(2);
        assert!((eta(x * (1.0 - 1e-12)) - closed).abs() < 1e-15);
    }

    #[test]
    fn eta_prime_matches_finite_differences() {
        for &x in &[-7.0, -0.49, -1e-4, 0.0, 0.2, 0.5, 0.51, 1.0, 3.0, 20.0] {
            let h = 1e-5;
            let fd = (eta(x + h) - eta(x - h)) / (2.0 * h);
            assert!((eta_prime(x) - fd).abs() < 1e-9, "x = {x}");
        }
        assert_eq!(eta_prime(0.0), 0.0);
        // η'(2π) = 0 (double zero), η'(π) = 2 sin π/π² - 4(1 - cos π)/π³
        assert!(eta_prime(TWO_PI).abs() < 1e-15);
        assert!((eta_prime(PI) + 8.0 / PI.powi(3)).abs() < 1e-14);
    }

    #[test]
    fn eta_bounded_by_one() {
        for x in sample_points(-50.0, 50.0, 0.01) {
            let v = eta(x);
            assert!((0.0..=1.0).contains(&v), "η({x}) = {v}");
        }
    }

    #[test]
    fn interpolation() {
        let id = phi_from_coeffs(CoeffMatrix::from_real(1, 1, &[1.0]).unwrap());
        assert_eq!(id.eval(0.0, 0.0).re, 1.0);
        assert!(id.eval(TWO_PI, 0.0).norm() < 1e-30);

        let zero = phi_from_coeffs(CoeffMatrix::from_real(2, 2, &[0.0; 4]).unwrap());
        assert_eq!(zero.eval(1.3, -0.2), C64::new(0.0, 0.0));

        let tri = phi_from_coeffs(triangular_coeffs(3).unwrap());
        assert!((tri.eval(TWO_PI, 2.0 * TWO_PI).re - 1.0).abs() < 1e-12);
        assert!(tri.eval(2.0 * TWO_PI, TWO_PI).norm() < 1e-12);

        let c = CoeffMatrix::from_fn(4, 5, |j, k| C64::new(j as f64 - k as f64, (j * k) as f64)).unwrap();
        let phi = phi_from_coeffs(c.clone());
        for j in 0..4 {
            for k in 0..5 {
                let v = phi.eval(TWO_PI * j as f64, TWO_PI * k as f64);
                assert!((v - c.get(j, k)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn coeff_grid_matches_pointwise() {
        let c = CoeffMatrix::from_fn(3, 4, |j, k| C64::new((j + k) as f64, j as f64 - 1.0)).unwrap();
        let phi = phi_from_coeffs(c);
        let xs = [-1.0, 0.3, 7.0];
        let ys = [2.0, 9.5];
        let g = phi.eval_grid(&xs, &ys);
        for (i, &x) in xs.iter().enumerate() {
            for (j, &y) in ys.iter().enumerate() {
                assert!((g[i * 2 + j] - phi.eval(x, y)).norm() < 1e-12);
            }
        }
        let grid = SupGrid::new(8.0, 0.5).unwrap();
        let generic = sup_norm_estimate(&phi, grid);
        assert!((coeff_sup_norm_estimate(&phi, grid) - generic).abs() < 1e-12);
    }

    #[test]
    fn triangular_pattern() {
        assert_eq!(triangular_coeffs(1).unwrap().entries(), &[C64::new(1.0, 0.0)]);
        let t2 = triangular_coeffs(2).unwrap();
        let re: Vec<f64> = t2.entries().iter().map(|z| z.re).collect();
        assert_eq!(re, vec![1.0, 1.0, 0.0, 1.0]);
        let t3 = triangular_coeffs(3).unwrap();
        let sums: Vec<f64> = (0..3).map(|j| (0..3).map(|k| t3.get(j, k).re).sum()).collect();
        assert_eq!(sums, vec![3.0, 2.0, 1.0]);
        assert!(triangular_coeffs(0).is_err());
    }

    #[test]
    fn sup_norms() {
        let zero = phi_from_coeffs(CoeffMatrix::from_real(2, 2, &[0.0; 4]).unwrap());
        assert_eq!(coeff_sup_norm_estimate(&zero, SupGrid::for_size(2)), 0.0);
        let id = phi_from_coeffs(CoeffMatrix::from_real(1, 1, &[1.0]).unwrap());
        assert_eq!(coeff_sup_norm_estimate(&id, SupGrid::for_size(1)), 1.0);
        // Σ_j η(x - 2πj) ≤ 1, so the triangular expansion is bounded by one.
        let tri = phi_from_coeffs(triangular_coeffs(16).unwrap());
        let s = coeff_sup_norm_estimate(&tri, SupGrid::for_size(16));
        assert!((s - 1.0).abs() < 1e-12, "{s}");
        let fine = coeff_sup_norm_estimate(&tri, SupGrid::for_size(16).refined());
        assert!((fine - s).abs() <= 0.01 * s);
    }

    #[test]
    fn sup_grid_schedule() {
        assert_eq!(SupGrid::for_size(64).step, PI / 8.0);
        assert_eq!(SupGrid::for_size(128).step, PI / 4.0);
        assert_eq!(SupGrid::for_size(4096).step, PI);
        for n in [4, 64, 512] {
            let g = SupGrid::for_size(n);
            let pts = g.points();
            assert_eq!(pts.len() as f64, (2.0 * g.radius / g.step).round() + 1.0);
            let per_period = (TWO_PI / g.step).round() as usize;
            let origin = pts.len() / 2;
            assert!(pts[origin].abs() < 1e-9);
            assert!((pts[origin + per_period] - TWO_PI).abs() < 1e-9);
        }
        assert!(SupGrid::new(0.0, 1.0).is_err());
    }

    #[test]
    fn instance_shape() {
        let inst = build_instance(4).unwrap();
        assert!(inst.a.as_matrix().is_diagonal());
        assert_eq!(inst.a, inst.c);
        let db = inst.b1.sub(&inst.b2).unwrap();
        assert!((trace_norm(db.as_matrix()).unwrap() - TWO_PI).abs() < 1e-10);
        let rank = crate::schatten::singular_values(db.as_matrix())
            .unwrap()
            .iter()
            .filter(|&&s| s > 1e-9)
            .count();
        assert_eq!(rank, 1);
        assert!(build_instance(1).is_err());
    }

    #[test]
    fn difference_is_scaled_triangle() {
        for n in [2, 3, 4, 7] {
            let inst = build_instance(n).unwrap();
            let f = inst.field();
            let at_b2 = func_calc_triple(&f, &inst.a, &inst.b2, &inst.c).unwrap();
            assert!(at_b2.max_abs() < 1e-12);
            let d = inst.difference().unwrap();
            assert!((&d - &inst.closed_form_difference()).max_abs() < 1e-12, "n = {n}");
        }
        let m = build_instance(2).unwrap().measure().unwrap();
        assert!((m.s1_diff_norm - 5f64.sqrt() / 2.0).abs() < 1e-12);
        let want = (5f64.sqrt() / 2.0) / (TWO_PI * m.sup_norm);
        assert!((m.ratio - want).abs() < 1e-12);
        assert!((m.ratio - m.closed_form_ratio).abs() < 1e-9);
    }

    #[test]
    fn rank_one_reduction_is_a_schur_product() {
        for n in 1..=8 {
            let lattice: Vec<f64> = (0..n).map(|j| TWO_PI * j as f64).collect();
            let e = SpectralMeasure::coordinate(&lattice).unwrap();
            let v = witness_vector(n);
            let p = CMatrix::outer(&v, &v);
            let c = triangular_coeffs(n).unwrap();
            let phi = phi_from_coeffs(c.clone());
            let lhs = doi(&phi, &e, &p, &e).unwrap();
            assert!((&lhs - &c.schur(&p).unwrap()).max_abs() < 1e-12);
        }
    }

    #[test]
    fn scaling_is_homogeneous() {
        let inst = build_instance(8).unwrap();
        let base = trace_norm(&inst.difference().unwrap()).unwrap();
        let same = scale_instance(&inst, 1.0).unwrap();
        assert_eq!(trace_norm(&same.difference().unwrap()).unwrap(), base);
        for eps in [0.5, 0.25, 0.125] {
            let s = scale_instance(&inst, eps).unwrap();
            let norm = trace_norm(&s.difference().unwrap()).unwrap();
            assert!((norm - eps * base).abs() < 1e-10, "ε = {eps}");
            assert!((s.perturbation_s1().unwrap() - TWO_PI * eps).abs() < 1e-10);
            let m = s.measure().unwrap();
            assert!((m.ratio - m.closed_form_ratio).abs() < 1e-9);
        }
        assert!(scale_instance(&inst, 0.0).is_err());
        assert!(scale_instance(&inst, -1.0).is_err());
    }

    #[test]
    fn psi_recovers_projection() {
        let n = 6;
        let b1 = HermitianMatrix::rank_one(&witness_vector(n), TWO_PI);
        let p = spectral_measure(&b1).unwrap().apply_scalar(&psi()).unwrap();
        let v = witness_vector(n);
        assert!((&p - &CMatrix::outer(&v, &v)).max_abs() < 1e-12);
    }
}

//! Littlewood–Paley pieces and the homogeneous `B¹_{∞,1}` seminorm of
//! sampled functions.
//!
//! A window `w` on `(0, ∞)` with `supp w ⊆ [1/2, 2]` and
//! `w(s) = 1 - w(s/2)` on `[1, 2]` gives a dyadic partition of unity
//! `Σ_n w(s / 2ⁿ) = 1`. The piece `f_n` has Fourier transform
//! `w(‖ξ‖ / 2ⁿ) f̂(ξ)` and the seminorm is `Σ_n 2ⁿ ‖f_n‖_∞`.
//!
//! Everything here works on uniform periodic grids through the FFT, with
//! angular frequencies `ξ = 2πk / (len · step)`. Estimates are
//! window-dependent (equivalent norms), so only their behaviour across a
//! family of functions is meaningful.

use std::f64::consts::PI;

use rustfft::{FftDirection, FftPlanner};

use crate::counterexample::{phi_from_coeffs, psi, triangular_coeffs};
use crate::error::{Error, Result};
use crate::field::{Field1, Field2, Field3};
use crate::matrix::C64;
use crate::par;

/// `ρ(t) = exp(-1/t)` for `t > 0`, else `0`.
fn rho(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// The dyadic window built from the smooth step
/// `h(t) = ρ(2t - 1) / (ρ(2t - 1) + ρ(2 - 2t))` on `[1/2, 1]`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Window;

pub fn make_window() -> Window {
    Window
}

impl Window {
    /// Increasing profile: `0` at `1/2`, `1` at `1`, flat to all orders at both ends.
    pub fn profile(&self, t: f64) -> f64 {
        let s = (t - 0.5) * 2.0;
        let (a, b) = (rho(s), rho(1.0 - s));
        if a + b == 0.0 {
            0.0
        } else {
            a / (a + b)
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        if (0.5..=1.0).contains(&s) {
            self.profile(s)
        } else if s > 1.0 && s <= 2.0 {
            1.0 - self.profile(s / 2.0)
        } else {
            0.0
        }
    }

    /// `Σ_{n=lo}^{hi} w(s / 2ⁿ)`.
    pub fn partition_sum(&self, s: f64, lo: i32, hi: i32) -> f64 {
        (lo..=hi).map(|n| self.eval(s / 2f64.powi(n))).sum()
    }
}

/// One axis of a uniform grid: `start + i·step`, `i < len`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl Axis {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        if !(step > 0.0 && step.is_finite() && start.is_finite()) || len == 0 {
            return Err(Error::InvalidArgument(format!(
                "grid axis needs positive step and length, got step {step}, len {len}"
            )));
        }
        Ok(Axis { start, step, len })
    }

    /// `len` points covering `[center - half_extent, center + half_extent)`.
    pub fn centered(center: f64, half_extent: f64, len: usize) -> Result<Self> {
        if !(half_extent > 0.0) || len == 0 {
            return Err(Error::InvalidArgument(format!(
                "grid axis needs positive extent and length, got extent {half_extent}, len {len}"
            )));
        }
        Self::new(center - half_extent, 2.0 * half_extent / len as f64, len)
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len)
            .map(|i| self.start + i as f64 * self.step)
            .collect()
    }

    /// Angular frequencies in FFT order.
    pub fn frequencies(&self) -> Vec<f64> {
        let base = 2.0 * PI / (self.len as f64 * self.step);
        (0..self.len)
            .map(|k| {
                let k = if k < self.len.div_ceil(2) {
                    k as f64
                } else {
                    k as f64 - self.len as f64
                };
                k * base
            })
            .collect()
    }

    pub fn nyquist(&self) -> f64 {
        PI / self.step
    }

    /// Spacing of the frequency lattice.
    pub fn resolution(&self) -> f64 {
        2.0 * PI / (self.len as f64 * self.step)
    }
}

/// Samples of a function of one to three variables on a uniform grid,
/// row-major with the last axis fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledField {
    axes: Vec<Axis>,
    samples: Vec<C64>,
}

impl SampledField {
    pub fn new(axes: Vec<Axis>, samples: Vec<C64>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 3 {
            return Err(Error::InvalidArgument(format!(
                "sampled fields have 1 to 3 axes, got {}",
                axes.len()
            )));
        }
        let count: usize = axes.iter().map(|a| a.len).product();
        if samples.len() != count {
            return Err(Error::DimensionMismatch {
                expected: count,
                found: samples.len(),
            });
        }
        Ok(SampledField { axes, samples })
    }

    pub fn sample1<F: Field1 + ?Sized>(f: &F, axis: Axis) -> Self {
        SampledField {
            samples: f.eval_many(&axis.points()),
            axes: vec![axis],
        }
    }

    pub fn sample2<F: Field2 + ?Sized>(f: &F, x: Axis, y: Axis) -> Self {
        SampledField {
            samples: f.eval_grid(&x.points(), &y.points()),
            axes: vec![x, y],
        }
    }

    pub fn sample3<F: Field3 + ?Sized>(f: &F, x: Axis, y: Axis, z: Axis) -> Self {
        SampledField {
            samples: f.eval_grid(&x.points(), &y.points(), &z.points()),
            axes: vec![x, y, z],
        }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.samples)
    }

    fn spectrum(&self) -> Result<Vec<C64>> {
        check_transformable(&self.axes)?;
        let mut data = self.samples.clone();
        fft_nd(&mut data, &self.dims(), FftDirection::Forward);
        Ok(data)
    }

    fn dims(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.len).collect()
    }
}

/// `f(x, y, z) = φ(x, z) ψ(y)` stored as its two factors; the 3-D
/// spectrum is their outer product and is never materialized.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparableSample {
    /// Samples of `φ` over `(x, z)`.
    pub outer: SampledField,
    /// Samples of `ψ` over `y`.
    pub middle: SampledField,
}

impl SeparableSample {
    pub fn new(outer: SampledField, middle: SampledField) -> Result<Self> {
        if outer.dim() != 2 || middle.dim() != 1 {
            return Err(Error::InvalidArgument(
                "separable sample needs a 2-D outer and a 1-D middle factor".into(),
            ));
        }
        Ok(SeparableSample { outer, middle })
    }

    /// Axes in `(x, y, z)` order.
    pub fn axes(&self) -> [Axis; 3] {
        [self.outer.axes[0], self.middle.axes[0], self.outer.axes[1]]
    }

    pub fn max_abs(&self) -> f64 {
        self.outer.max_abs() * self.middle.max_abs()
    }

    /// The full 3-D table; only for small grids and tests.
    pub fn to_dense(&self) -> SampledField {
        let [x, y, z] = self.axes();
        let mut samples = Vec::with_capacity(x.len * y.len * z.len);
        for i in 0..x.len {
            let row = &self.outer.samples[i * z.len..(i + 1) * z.len];
            for &m in &self.middle.samples {
                samples.extend(row.iter().map(|&o| o * m));
            }
        }
        SampledField {
            axes: vec![x, y, z],
            samples,
        }
    }
}

/// Result of [`besov_norm_estimate`].
#[derive(Clone, Debug, PartialEq)]
pub struct BesovEstimate {
    /// `Σ_{n_min}^{n_max} 2ⁿ ‖f_n‖_∞`.
    pub value: f64,
    /// `Σ_{n < n_min} 2ⁿ ‖f‖_∞ = 2^{n_min} ‖f‖_∞`, the truncated low end.
    pub tail_bound: f64,
    /// `(n, ‖f_n‖_∞)` for every band.
    pub pieces: Vec<(i32, f64)>,
}

impl BesovEstimate {
    pub fn piece(&self, n: i32) -> Option<f64> {
        self.pieces.iter().find(|p| p.0 == n).map(|p| p.1)
    }
}

/// Spectrum of a grid function, dense or as a separable product.
enum Spectrum<'a> {
    Dense(Vec<C64>),
    Separable { outer: Vec<C64>, middle: Vec<C64>, nz: usize, _src: &'a SeparableSample },
}

/// Frequencies of up to three axes, padded to exactly three.
struct FreqGrid {
    dims: [usize; 3],
    freqs: [Vec<f64>; 3],
}

impl FreqGrid {
    fn new(axes: &[Axis]) -> Self {
        let pad = 3 - axes.len();
        let mut dims = [1; 3];
        let mut freqs = [vec![0.0], vec![0.0], vec![0.0]];
        for (i, a) in axes.iter().enumerate() {
            dims[pad + i] = a.len;
            freqs[pad + i] = a.frequencies();
        }
        FreqGrid { dims, freqs }
    }

    fn total(&self) -> usize {
        self.dims.iter().product()
    }
}

impl Spectrum<'_> {
    /// Spectrum value at the padded 3-D index `(i, j, k)`.
    #[inline]
    fn at(&self, flat: usize, i: usize, j: usize, k: usize) -> C64 {
        match self {
            Spectrum::Dense(d) => d[flat],
            Spectrum::Separable { outer, middle, nz, .. } => outer[i * nz + k] * middle[j],
        }
    }
}

fn max_abs(values: &[C64]) -> f64 {
    values.iter().fold(0.0, |m: f64, z| m.max(z.norm()))
}

fn check_transformable(axes: &[Axis]) -> Result<()> {
    match axes.iter().find(|a| !a.len.is_power_of_two()) {
        Some(a) => Err(Error::InvalidArgument(format!(
            "grid lengths must be powers of two for the transform, got {}",
            a.len
        ))),
        None => Ok(()),
    }
}

/// Largest frequency norm representable on the grid.
fn corner_nyquist(axes: &[Axis]) -> f64 {
    axes.iter().map(|a| a.nyquist().powi(2)).sum::<f64>().sqrt()
}

fn check_band(axes: &[Axis], n: i32) -> Result<()> {
    let radius = 2f64.powi(n - 1);
    let nyquist = corner_nyquist(axes);
    if radius >= nyquist {
        Err(Error::Nyquist {
            band: n,
            radius,
            nyquist,
        })
    } else {
        Ok(())
    }
}

/// In-place unnormalized FFT over every axis of a row-major array.
fn fft_nd(data: &mut [C64], dims: &[usize], direction: FftDirection) {
    let mut planner = FftPlanner::<f64>::new();
    let total: usize = dims.iter().product();
    debug_assert_eq!(total, data.len());
    for (axis, &len) in dims.iter().enumerate() {
        if len <= 1 {
            continue;
        }
        let fft = planner.plan_fft(len, direction);
        let inner: usize = dims[axis + 1..].iter().product();
        let block = len * inner;
        if inner == 1 {
            par::for_each_row(data, len, |_, line| fft.process(line));
            continue;
        }
        // Gather the strided lines of each outer block into contiguous rows.
        par::for_each_row(data, block, |_, chunk| {
            let mut lines = vec![C64::new(0.0, 0.0); block];
            for l in 0..len {
                for s in 0..inner {
                    lines[s * len + l] = chunk[l * inner + s];
                }
            }
            fft.process(&mut lines);
            for l in 0..len {
                for s in 0..inner {
                    chunk[l * inner + s] = lines[s * len + l];
                }
            }
        });
    }
}

/// Inverse of the masked spectrum `w(‖ξ‖ / 2ⁿ) f̂`, or `None` if the mask
/// misses every grid frequency.
fn band_samples(spec: &Spectrum<'_>, grid: &FreqGrid, w: &Window, n: i32) -> Option<Vec<C64>> {
    let scale = 2f64.powi(n);
    let [d0, d1, d2] = grid.dims;
    // Rows of the first two padded axes are independent.
    let mut data = vec![C64::new(0.0, 0.0); grid.total()];
    let row_len = d2;
    let any = std::sync::atomic::AtomicBool::new(false);
    par::for_each_row(&mut data, row_len, |r, row| {
        let (i, j) = (r / d1, r % d1);
        let base = grid.freqs[0][i].powi(2) + grid.freqs[1][j].powi(2);
        let mut hit = false;
        for (k, out) in row.iter_mut().enumerate() {
            let m = w.eval((base + grid.freqs[2][k].powi(2)).sqrt() / scale);
            if m != 0.0 {
                *out = spec.at(r * row_len + k, i, j, k) * m;
                hit = true;
            }
        }
        if hit {
            any.store(true, std::sync::atomic::Ordering::Relaxed);
        }
    });
    let _ = d0;
    if !any.into_inner() {
        return None;
    }
    fft_nd(&mut data, &grid.dims, FftDirection::Inverse);
    let norm = 1.0 / grid.total() as f64;
    data.iter_mut().for_each(|z| *z *= norm);
    Some(data)
}

fn estimate(
    spec: &Spectrum<'_>,
    axes: &[Axis],
    sup: f64,
    w: &Window,
    n_min: i32,
    n_max: i32,
) -> Result<BesovEstimate> {
    if n_min > n_max {
        return Err(Error::InvalidArgument(format!(
            "empty band range {n_min}..={n_max}"
        )));
    }
    let grid = FreqGrid::new(axes);
    let mut value = 0.0;
    let mut pieces = Vec::with_capacity((n_max - n_min + 1) as usize);
    for n in n_min..=n_max {
        check_band(axes, n)?;
        let m = band_samples(spec, &grid, w, n).map_or(0.0, |d| max_abs(&d));
        value += 2f64.powi(n) * m;
        pieces.push((n, m));
    }
    Ok(BesovEstimate {
        value,
        tail_bound: 2f64.powi(n_min) * sup,
        pieces,
    })
}

/// The piece `f_n` with spectrum `w(‖ξ‖ / 2ⁿ) f̂(ξ)`.
pub fn lp_piece(f: &SampledField, n: i32, w: &Window) -> Result<SampledField> {
    check_band(&f.axes, n)?;
    let spec = Spectrum::Dense(f.spectrum()?);
    let grid = FreqGrid::new(&f.axes);
    let samples = band_samples(&spec, &grid, w, n)
        .unwrap_or_else(|| vec![C64::new(0.0, 0.0); f.samples.len()]);
    Ok(SampledField {
        axes: f.axes.clone(),
        samples,
    })
}

/// `Σ_{n=n_min}^{n_max} 2ⁿ ‖f_n‖_∞` with the low-frequency tail bound.
pub fn besov_norm_estimate(f: &SampledField, w: &Window, n_min: i32, n_max: i32) -> Result<BesovEstimate> {
    let spec = Spectrum::Dense(f.spectrum()?);
    estimate(&spec, &f.axes, f.max_abs(), w, n_min, n_max)
}

/// [`besov_norm_estimate`] of `φ(x, z) ψ(y)` from its factors.
pub fn besov_norm_estimate_separable(
    f: &SeparableSample,
    w: &Window,
    n_min: i32,
    n_max: i32,
) -> Result<BesovEstimate> {
    let axes = f.axes();
    let spec = Spectrum::Separable {
        outer: f.outer.spectrum()?,
        middle: f.middle.spectrum()?,
        nz: axes[2].len,
        _src: f,
    };
    estimate(&spec, &axes, f.max_abs(), w, n_min, n_max)
}

/// Fraction of spectral energy outside the ball of radius `σ(1 + δ)`,
/// `δ = 2 · (frequency resolution)`.
pub fn bandlimit_check(f: &SampledField, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    bandlimit_mass(&Spectrum::Dense(f.spectrum()?), &f.axes, sigma)
}

/// [`bandlimit_check`] of `φ(x, z) ψ(y)` from its factors.
pub fn bandlimit_check_separable(f: &SeparableSample, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    let axes = f.axes();
    let spec = Spectrum::Separable {
        outer: f.outer.spectrum()?,
        middle: f.middle.spectrum()?,
        nz: axes[2].len,
        _src: f,
    };
    bandlimit_mass(&spec, &axes, sigma)
}

/// Highest band `n` whose annulus stays inside the grid's Nyquist corner.
pub fn highest_band(axes: &[Axis]) -> i32 {
    let nyquist = corner_nyquist(axes);
    let mut n = nyquist.log2().ceil() as i32 + 1;
    while 2f64.powi(n - 1) >= nyquist {
        n -= 1;
    }
    n
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "band limit must be positive, got {sigma}"
        )))
    }
}

fn bandlimit_mass(spec: &Spectrum<'_>, axes: &[Axis], sigma: f64) -> Result<f64> {
    let grid = FreqGrid::new(axes);
    let delta = 2.0 * axes.iter().map(|a| a.resolution()).fold(0.0, f64::max);
    let cutoff = sigma * (1.0 + delta);
    let [d0, d1, d2] = grid.dims;
    let (mut total, mut outside) = (0.0, 0.0);
    for i in 0..d0 {
        for j in 0..d1 {
            let base = grid.freqs[0][i].powi(2) + grid.freqs[1][j].powi(2);
            for k in 0..d2 {
                let flat = (i * d1 + j) * d2 + k;
                let e = spec.at(flat, i, j, k).norm_sqr();
                total += e;
                if (base + grid.freqs[2][k].powi(2)).sqrt() > cutoff {
                    outside += e;
                }
            }
        }
    }
    Ok(if total == 0.0 { 0.0 } else { outside / total })
}

/// Sampling layout for the counterexample family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CounterexampleGrid {
    /// Step on every axis.
    pub step: f64,
    /// Distance kept between the lattice `{2πj}` and the edge of the x/z grid.
    pub margin: f64,
    /// Lower bound on x/z grid lengths.
    pub min_points: usize,
    /// Length of the y grid (centred on `2π`).
    pub middle_points: usize,
}

impl Default for CounterexampleGrid {
    fn default() -> Self {
        CounterexampleGrid {
            step: PI / 2.0,
            margin: 32.0 * PI,
            min_points: 256,
            middle_points: 64,
        }
    }
}

impl CounterexampleGrid {
    /// x/z axis for size `n`: a power-of-two grid centred on the lattice.
    pub fn outer_axis(&self, n: usize) -> Result<Axis> {
        let span = 2.0 * PI * (n.max(1) - 1) as f64 + 2.0 * self.margin;
        let len = ((span / self.step).ceil() as usize)
            .max(self.min_points)
            .next_power_of_two();
        let center = PI * (n.max(1) - 1) as f64;
        Axis::new(center - self.step * len as f64 / 2.0, self.step, len)
    }

    pub fn middle_axis(&self) -> Result<Axis> {
        let len = self.middle_points.next_power_of_two();
        Axis::new(2.0 * PI - self.step * len as f64 / 2.0, self.step, len)
    }
}

/// Samples of the size-`n` triangular `φ` on the x/z grid.
pub fn sample_phi_tri(n: usize, grid: &CounterexampleGrid) -> Result<SampledField> {
    let phi = phi_from_coeffs(triangular_coeffs(n)?);
    let axis = grid.outer_axis(n)?;
    Ok(SampledField::sample2(&phi, axis, axis))
}

/// Samples of `ψ = η(· - 2π)` on the y grid.
pub fn sample_psi(grid: &CounterexampleGrid) -> Result<SampledField> {
    Ok(SampledField::sample1(&psi(), grid.middle_axis()?))
}

/// Factors of `f = φ(x, z) ψ(y)` for size `n`.
pub fn sample_counterexample(n: usize, grid: &CounterexampleGrid) -> Result<SeparableSample> {
    SeparableSample::new(sample_phi_tri(n, grid)?, sample_psi(grid)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counterexample::eta;
    use crate::field::{Constant, Real1};

    fn line(half_extent: f64, points: usize) -> Axis {
        Axis::centered(0.0, half_extent, points).unwrap()
    }

    #[test]
    fn window_identities() {
        let w = make_window();
        assert_eq!(w.eval(0.5), 0.0);
        assert_eq!(w.eval(1.0), 1.0);
        assert_eq!(w.eval(3.0), 0.0);
        assert_eq!(w.eval(2.0), 0.0);
        assert!((w.eval(1.3) + w.eval(0.65) - 1.0).abs() < 1e-15);
        for i in 0..1000 {
            let s = 1.0 + i as f64 / 999.0;
            assert!((w.eval(s) - (1.0 - w.eval(s / 2.0))).abs() < 1e-10);
            assert!(w.eval(s) >= 0.0);
        }
        let mut worst: f64 = 0.0;
        for i in 0..=600 {
            let s = 10f64.powf(-3.0 + i as f64 / 100.0);
            worst = worst.max((w.partition_sum(s, -20, 20) - 1.0).abs());
        }
        assert!(worst < 1e-9, "{worst}");
    }

    #[test]
    fn frequencies_in_fft_order() {
        let a = Axis::new(0.0, PI / 2.0, 8).unwrap();
        let f = a.frequencies();
        assert_eq!(f[0], 0.0);
        assert!((f[1] - 0.5).abs() < 1e-15);
        assert!((f[4] + 2.0).abs() < 1e-15); // Nyquist bin, negative side
        assert!((f[7] + 0.5).abs() < 1e-15);
        assert_eq!(a.nyquist(), 2.0);
    }

    #[test]
    fn fft_roundtrip_3d() {
        let dims = [4, 2, 8];
        let orig: Vec<C64> = (0..64).map(|i| C64::new(i as f64, (i * i % 7) as f64)).collect();
        let mut data = orig.clone();
        fft_nd(&mut data, &dims, FftDirection::Forward);
        assert!((data[0] - orig.iter().sum::<C64>()).norm() < 1e-9);
        fft_nd(&mut data, &dims, FftDirection::Inverse);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a / 64.0 - b).norm() < 1e-12);
        }
    }

    #[test]
    fn constant_has_no_pieces() {
        let f = SampledField::sample1(&Constant::real(3.0), line(8.0 * PI, 256));
        let w = make_window();
        for n in -6..=2 {
            assert!(lp_piece(&f, n, &w).unwrap().max_abs() < 1e-12);
        }
        assert_eq!(besov_norm_estimate(&f, &w, -10, 2).unwrap().value, 0.0);
    }

    #[test]
    fn sine_lives_in_band_zero() {
        // 16π extent holds eight periods of sin x exactly.
        let f = SampledField::sample1(&Real1(f64::sin), line(8.0 * PI, 256));
        let w = make_window();
        for n in -4..=3 {
            let m = lp_piece(&f, n, &w).unwrap().max_abs();
            if n == 0 {
                assert!((m - 1.0).abs() < 1e-12);
            } else {
                assert!(m < 1e-12, "band {n}: {m}");
            }
        }
    }

    #[test]
    fn pieces_reconstruct_band_limited_input() {
        let f = SampledField::sample1(&Real1(eta), line(64.0 * PI, 4096));
        let w = make_window();
        let mean = f.samples().iter().sum::<C64>() / f.samples().len() as f64;
        let mut sum = vec![C64::new(0.0, 0.0); f.samples().len()];
        for n in -12..=3 {
            for (s, p) in sum.iter_mut().zip(lp_piece(&f, n, &w).unwrap().samples()) {
                *s += p;
            }
        }
        for (s, v) in sum.iter().zip(f.samples()) {
            assert!((s - (v - mean)).norm() < 1e-6);
        }
    }

    #[test]
    fn piece_spectrum_stays_in_annulus() {
        let f = SampledField::sample1(&Real1(|x: f64| eta(x) * (3.0 * x).cos()), line(32.0 * PI, 2048));
        let w = make_window();
        let res = f.axes()[0].resolution();
        for n in -2..=2 {
            let p = lp_piece(&f, n, &w).unwrap();
            let spec = p.spectrum().unwrap();
            let total: f64 = spec.iter().map(|z| z.norm_sqr()).sum();
            let lo = 2f64.powi(n - 1) * (1.0 - res);
            let hi = 2f64.powi(n + 1) * (1.0 + res);
            let stray: f64 = spec
                .iter()
                .zip(f.axes()[0].frequencies())
                .filter(|(_, xi)| xi.abs() < lo || xi.abs() > hi)
                .map(|(z, _)| z.norm_sqr())
                .sum();
            assert!(stray <= 1e-20 * total.max(1.0), "band {n}");
        }
    }

    #[test]
    fn nyquist_violation_names_band() {
        let f = SampledField::sample1(&Real1(eta), line(8.0 * PI, 64)); // step π/4, Nyquist 4
        let w = make_window();
        assert!(lp_piece(&f, 2, &w).is_ok());
        match lp_piece(&f, 3, &w) {
            Err(Error::Nyquist { band, .. }) => assert_eq!(band, 3),
            other => panic!("expected Nyquist error, got {other:?}"),
        }
        assert!(matches!(besov_norm_estimate(&f, &w, 0, 5), Err(Error::Nyquist { band: 3, .. })));
        let odd = SampledField::sample1(&Real1(eta), line(8.0 * PI, 100));
        assert!(lp_piece(&odd, 0, &w).is_err());
    }

    #[test]
    fn eta_estimate_and_band_limit() {
        let f = SampledField::sample1(&Real1(eta), line(64.0 * PI, 16384));
        let w = make_window();
        let est = besov_norm_estimate(&f, &w, -20, 5).unwrap();
        assert!(est.value.is_finite() && est.value > 0.0);
        // Cutting η off at ±64π leaves a |t|³-type kink at the periodic
        // wrap; its ξ⁻⁴ tail puts ~1.3e-8 into band 2 and falls off like R⁻³.
        assert!(est.piece(2).unwrap() < 2e-8);
        for n in 3..=5 {
            assert!(est.piece(n).unwrap() < 1e-8, "band {n}: {:?}", est.pieces);
        }
        let wide = SampledField::sample1(&Real1(eta), line(128.0 * PI, 32768));
        let est_wide = besov_norm_estimate(&wide, &w, -20, 5).unwrap();
        for n in 2..=5 {
            assert!(est_wide.piece(n).unwrap() < 1e-8, "band {n}: {:?}", est_wide.pieces);
        }
        assert!((est_wide.value - est.value).abs() < 1e-6);
        assert!((est.tail_bound - 2f64.powi(-20)).abs() < 1e-18);
        assert!(bandlimit_check(&f, 1.0).unwrap() < 1e-6);
        let zero = SampledField::sample1(&Constant::real(0.0), line(PI, 8));
        assert_eq!(besov_norm_estimate(&zero, &w, -3, 1).unwrap().value, 0.0);
    }

    #[test]
    fn bandlimit_examples() {
        let ax = line(32.0 * PI, 1024);
        let slow = SampledField::sample1(&Real1(|x: f64| (x / 2.0).sin()), ax);
        let fast = SampledField::sample1(&Real1(|x: f64| (4.0 * x).sin()), ax);
        assert!(bandlimit_check(&slow, 1.0).unwrap() < 1e-20);
        assert!((bandlimit_check(&fast, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(bandlimit_check(&slow, 0.0).is_err());
    }

    #[test]
    fn dilation_covariance() {
        let ax = line(64.0 * PI, 16384);
        let w = make_window();
        let base = besov_norm_estimate(&SampledField::sample1(&Real1(eta), ax), &w, -20, 5)
            .unwrap()
            .value;
        for eps in [0.5, 0.25] {
            let g = SampledField::sample1(&Real1(move |x: f64| eps * eta(x / eps)), ax);
            let v = besov_norm_estimate(&g, &w, -20, 5).unwrap().value;
            assert!((v - base).abs() < 0.02 * base, "ε = {eps}: {v} vs {base}");
        }
    }

    #[test]
    fn separable_matches_dense() {
        let grid = CounterexampleGrid {
            min_points: 64,
            middle_points: 16,
            margin: 8.0 * PI,
            ..Default::default()
        };
        let sep = sample_counterexample(3, &grid).unwrap();
        let dense = sep.to_dense();
        let w = make_window();
        let a = besov_norm_estimate_separable(&sep, &w, -6, 2).unwrap();
        let b = besov_norm_estimate(&dense, &w, -6, 2).unwrap();
        assert!((a.value - b.value).abs() < 1e-12 * b.value.max(1.0));
        assert_eq!(a.tail_bound, b.tail_bound);
        let (ma, mb) = (
            bandlimit_check_separable(&sep, 3f64.sqrt()).unwrap(),
            bandlimit_check(&dense, 3f64.sqrt()).unwrap(),
        );
        assert!((ma - mb).abs() < 1e-12, "{ma} vs {mb}");
    }

    #[test]
    fn highest_band_respects_nyquist() {
        let ax = Axis::new(0.0, PI / 4.0, 64).unwrap();
        assert_eq!(highest_band(&[ax]), 2);
        let g = CounterexampleGrid::default();
        let axes = sample_counterexample(4, &g).unwrap().axes();
        assert_eq!(highest_band(&axes), 2);
        assert!(check_band(&axes, highest_band(&axes)).is_ok());
        assert!(check_band(&axes, highest_band(&axes) + 1).is_err());
    }

    #[test]
    fn counterexample_axes() {
        let g = CounterexampleGrid::default();
        assert_eq!(g.outer_axis(4).unwrap().len, 256);
        assert_eq!(g.outer_axis(32).unwrap().len, 256);
        assert_eq!(g.outer_axis(64).unwrap().len, 512);
        let ax = g.outer_axis(16).unwrap();
        let pts = ax.points();
        assert!(pts[0] < -g.margin + 1e-9);
        assert!(*pts.last().unwrap() > 2.0 * PI * 15.0 + g.margin - ax.step - 1e-9);
        let mid = g.middle_axis().unwrap();
        assert!(mid.points().iter().any(|&y| (y - 2.0 * PI).abs() < 1e-12));
    }
}

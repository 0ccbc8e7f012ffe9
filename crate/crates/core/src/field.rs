//! Scalar functions of one, two or three real variables.
//!
//! Every operator integral only ever samples its symbol on a product of
//! finite spectra, so besides pointwise `eval` each arity has a grid
//! evaluator. The defaults loop over `eval`; coefficient expansions override
//! them with matrix products.

use crate::matrix::C64;
use crate::par;

pub trait Field1: Send + Sync {
    fn eval(&self, x: f64) -> C64;

    fn eval_many(&self, xs: &[f64]) -> Vec<C64> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }
}

pub trait Field2: Send + Sync {
    fn eval(&self, x: f64, y: f64) -> C64;

    /// Row-major `xs.len() × ys.len()` table of values.
    fn eval_grid(&self, xs: &[f64], ys: &[f64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); xs.len() * ys.len()];
        par::for_each_row(&mut out, ys.len(), |i, row| {
            for (o, &y) in row.iter_mut().zip(ys) {
                *o = self.eval(xs[i], y);
            }
        });
        out
    }
}

pub trait Field3: Send + Sync {
    fn eval(&self, x: f64, y: f64, z: f64) -> C64;

    /// Table indexed `(i * ys.len() + j) * zs.len() + k`.
    fn eval_grid(&self, xs: &[f64], ys: &[f64], zs: &[f64]) -> Vec<C64> {
        let plane = ys.len() * zs.len();
        let mut out = vec![C64::new(0.0, 0.0); xs.len() * plane];
        par::for_each_row(&mut out, plane, |i, block| {
            for (j, &y) in ys.iter().enumerate() {
                for (k, &z) in zs.iter().enumerate() {
                    block[j * zs.len() + k] = self.eval(xs[i], y, z);
                }
            }
        });
        out
    }
}

impl<F: Fn(f64) -> C64 + Send + Sync> Field1 for F {
    fn eval(&self, x: f64) -> C64 {
        self(x)
    }
}

impl<F: Fn(f64, f64) -> C64 + Send + Sync> Field2 for F {
    fn eval(&self, x: f64, y: f64) -> C64 {
        self(x, y)
    }
}

impl<F: Fn(f64, f64, f64) -> C64 + Send + Sync> Field3 for F {
    fn eval(&self, x: f64, y: f64, z: f64) -> C64 {
        self(x, y, z)
    }
}

/// Wraps a real-valued closure of one variable.
#[derive(Clone, Copy)]
pub struct Real1<F>(pub F);

impl<F: Fn(f64) -> f64 + Send + Sync> Field1 for Real1<F> {
    fn eval(&self, x: f64) -> C64 {
        C64::new((self.0)(x), 0.0)
    }
}

/// Wraps a real-valued closure of two variables.
#[derive(Clone, Copy)]
pub struct Real2<F>(pub F);

impl<F: Fn(f64, f64) -> f64 + Send + Sync> Field2 for Real2<F> {
    fn eval(&self, x: f64, y: f64) -> C64 {
        C64::new((self.0)(x, y), 0.0)
    }
}

/// Wraps a real-valued closure of three variables.
#[derive(Clone, Copy)]
pub struct Real3<F>(pub F);

impl<F: Fn(f64, f64, f64) -> f64 + Send + Sync> Field3 for Real3<F> {
    fn eval(&self, x: f64, y: f64, z: f64) -> C64 {
        C64::new((self.0)(x, y, z), 0.0)
    }
}

/// The same constant in any arity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constant(pub C64);

impl Constant {
    pub fn real(v: f64) -> Self {
        Constant(C64::new(v, 0.0))
    }
}

impl Field1 for Constant {
    fn eval(&self, _: f64) -> C64 {
        self.0
    }
}

impl Field2 for Constant {
    fn eval(&self, _: f64, _: f64) -> C64 {
        self.0
    }
}

impl Field3 for Constant {
    fn eval(&self, _: f64, _: f64, _: f64) -> C64 {
        self.0
    }
}

/// Real polynomial, coefficients in ascending degree.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    pub coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Polynomial { coeffs }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }
}

impl Field1 for Polynomial {
    fn eval(&self, x: f64) -> C64 {
        C64::new(self.value(x), 0.0)
    }
}

/// `f(x, y) = g(x) h(y)`.
#[derive(Clone, Copy, Debug)]
pub struct Tensor2<G, H>(pub G, pub H);

impl<G: Field1, H: Field1> Field2 for Tensor2<G, H> {
    fn eval(&self, x: f64, y: f64) -> C64 {
        self.0.eval(x) * self.1.eval(y)
    }

    fn eval_grid(&self, xs: &[f64], ys: &[f64]) -> Vec<C64> {
        let gx = self.0.eval_many(xs);
        let hy = self.1.eval_many(ys);
        gx.iter()
            .flat_map(|&g| hy.iter().map(move |&h| g * h))
            .collect()
    }
}

/// `f(x, y, z) = g(x) h(y) k(z)`.
#[derive(Clone, Copy, Debug)]
pub struct Tensor3<G, H, K>(pub G, pub H, pub K);

impl<G: Field1, H: Field1, K: Field1> Field3 for Tensor3<G, H, K> {
    fn eval(&self, x: f64, y: f64, z: f64) -> C64 {
        self.0.eval(x) * self.1.eval(y) * self.2.eval(z)
    }

    fn eval_grid(&self, xs: &[f64], ys: &[f64], zs: &[f64]) -> Vec<C64> {
        let gx = self.0.eval_many(xs);
        let hy = self.1.eval_many(ys);
        let kz = self.2.eval_many(zs);
        let mut out = Vec::with_capacity(xs.len() * ys.len() * zs.len());
        for &g in &gx {
            for &h in &hy {
                out.extend(kz.iter().map(|&k| g * h * k));
            }
        }
        out
    }
}

/// `f(x, y, z) = φ(x, z) ψ(y)`: a two-variable symbol on the outer
/// operators times a one-variable symbol on the middle one.
#[derive(Clone, Debug)]
pub struct Separated<P, S> {
    pub outer: P,
    pub middle: S,
}

impl<P: Field2, S: Field1> Separated<P, S> {
    pub fn new(outer: P, middle: S) -> Self {
        Separated { outer, middle }
    }
}

impl<P: Field2, S: Field1> Field3 for Separated<P, S> {
    fn eval(&self, x: f64, y: f64, z: f64) -> C64 {
        self.outer.eval(x, z) * self.middle.eval(y)
    }

    fn eval_grid(&self, xs: &[f64], ys: &[f64], zs: &[f64]) -> Vec<C64> {
        let outer = self.outer.eval_grid(xs, zs);
        let middle = self.middle.eval_many(ys);
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

/// Adapts a two-variable field by ignoring the middle variable:
/// `f(x, y, z) = g(x, z)`.
#[derive(Clone, Copy, Debug)]
pub struct IgnoreMiddle<G>(pub G);

impl<G: Field2> Field3 for IgnoreMiddle<G> {
    fn eval(&self, x: f64, _: f64, z: f64) -> C64 {
        self.0.eval(x, z)
    }

    fn eval_grid(&self, xs: &[f64], ys: &[f64], zs: &[f64]) -> Vec<C64> {
        let outer = self.0.eval_grid(xs, zs);
        let nz = zs.len();
        let mut out = Vec::with_capacity(xs.len() * ys.len() * nz);
        for row in outer.chunks(nz.max(1)).take(xs.len()) {
            for _ in ys {
                out.extend_from_slice(row);
            }
        }
        out
    }
}

/// Index of the first non-finite value.
pub(crate) fn first_non_finite(values: &[C64]) -> Option<usize> {
    values.iter().position(|z| !(z.re.is_finite() && z.im.is_finite()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_derivative() {
        let p = Polynomial::new(vec![1.0, -2.0, 3.0]); // 1 - 2x + 3x^2
        assert_eq!(p.value(2.0), 9.0);
        assert_eq!(p.derivative().value(2.0), 10.0);
        assert_eq!(p.degree(), 2);
    }

    #[test]
    fn grid_defaults_match_pointwise() {
        let f = Real2(|x: f64, y: f64| x * 10.0 + y);
        let g = f.eval_grid(&[1.0, 2.0], &[3.0, 4.0, 5.0]);
        let want: Vec<f64> = vec![13.0, 14.0, 15.0, 23.0, 24.0, 25.0];
        assert_eq!(g.iter().map(|z| z.re).collect::<Vec<_>>(), want);
    }

    #[test]
    fn separated_grid_layout() {
        let f = Separated::new(Real2(|x: f64, z: f64| x - z), Real1(|y: f64| y));
        let xs = [1.0, 2.0];
        let ys = [3.0, 5.0];
        let zs = [7.0, 11.0, 13.0];
        let g = f.eval_grid(&xs, &ys, &zs);
        for (i, &x) in xs.iter().enumerate() {
            for (j, &y) in ys.iter().enumerate() {
                for (k, &z) in zs.iter().enumerate() {
                    assert_eq!(g[(i * 2 + j) * 3 + k], f.eval(x, y, z));
                }
            }
        }
    }

    #[test]
    fn tensor3_grid_matches_eval() {
        let f = Tensor3(Real1(|x: f64| x), Real1(|y: f64| y * y), Real1(|z: f64| 1.0 - z));
        let xs = [0.5, 2.0];
        let g = f.eval_grid(&xs, &xs, &xs);
        assert_eq!(g[2 * 2 + 1], f.eval(2.0, 0.5, 2.0));
    }
}

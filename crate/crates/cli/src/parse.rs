//! Parsers for the small argument languages: size lists, extents, band
//! ranges and function names.

use std::f64::consts::PI;
use std::str::FromStr;

use anyhow::{bail, ensure, Context, Result};

/// Comma-separated sizes. An ellipsis (`…` or `...`) continues the
/// progression of the terms before it up to the term after it: geometric
/// when those terms have an integer ratio, otherwise arithmetic.
/// `4,8,…,64` is `4,8,16,32,64`.
pub fn parse_sizes(s: &str) -> Result<Vec<usize>> {
    let items: Vec<&str> = s.split(',').map(str::trim).collect();
    let mut out: Vec<usize> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let item = items[i];
        if item == "…" || item == "..." {
            ensure!(out.len() >= 2, "an ellipsis needs two terms before it in {s:?}");
            let end: usize = items
                .get(i + 1)
                .with_context(|| format!("an ellipsis needs a final term in {s:?}"))?
                .parse()
                .with_context(|| format!("bad size list {s:?}"))?;
            let (a, b) = (out[out.len() - 2], out[out.len() - 1]);
            ensure!(b > a, "sizes before an ellipsis must increase in {s:?}");
            let geometric = a > 0 && b % a == 0;
            let mut next = b;
            loop {
                next = if geometric { next * (b / a) } else { next + (b - a) };
                if next >= end {
                    break;
                }
                out.push(next);
            }
            ensure!(next == end, "{end} is not reached by the progression {a}, {b}, … in {s:?}");
            out.push(end);
            i += 2;
            continue;
        }
        out.push(item.parse().with_context(|| format!("bad size {item:?} in {s:?}"))?);
        i += 1;
    }
    Ok(out)
}

/// A length such as `64pi`, `64π`, `2.5*pi`, `pi` or `200`.
pub fn parse_extent(s: &str) -> Result<f64> {
    let t = s.trim().to_ascii_lowercase();
    let (coeff, unit) = match t.strip_suffix("pi").or_else(|| t.strip_suffix('π')) {
        Some(c) => (c.trim_end_matches('*').trim(), PI),
        None => (t.as_str(), 1.0),
    };
    let c = if coeff.is_empty() {
        1.0
    } else {
        coeff.parse::<f64>().with_context(|| format!("bad extent {s:?}"))?
    };
    let v = c * unit;
    ensure!(v > 0.0 && v.is_finite(), "extent must be positive, got {s:?}");
    Ok(v)
}

/// Band range `lo:hi`, inclusive.
pub fn parse_bands(s: &str) -> Result<(i32, i32)> {
    let (lo, hi) = s.split_once(':').with_context(|| format!("band range {s:?} is not lo:hi"))?;
    let (lo, hi): (i32, i32) = (
        lo.trim().parse().with_context(|| format!("bad band range {s:?}"))?,
        hi.trim().parse().with_context(|| format!("bad band range {s:?}"))?,
    );
    ensure!(lo <= hi, "empty band range {s:?}");
    Ok((lo, hi))
}

/// Functions `xplab besov` knows how to sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BesovFn {
    Eta,
    Psi,
    Constant,
    PhiTri(usize),
    F3(usize),
}

impl BesovFn {
    pub fn is_one_dimensional(self) -> bool {
        matches!(self, BesovFn::Eta | BesovFn::Psi | BesovFn::Constant)
    }
}

impl FromStr for BesovFn {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let sized = |arg: &str| -> Result<usize> {
            let n: usize = arg.parse().with_context(|| format!("bad size in {s:?}"))?;
            ensure!(n >= 2, "size must be at least 2 in {s:?}");
            Ok(n)
        };
        Ok(match s.trim() {
            "eta" => BesovFn::Eta,
            "psi" => BesovFn::Psi,
            "constant" => BesovFn::Constant,
            other => match other.split_once(':') {
                Some(("phi_tri", n)) => BesovFn::PhiTri(sized(n)?),
                Some(("f3", n)) => BesovFn::F3(sized(n)?),
                _ => bail!("unknown function {s:?} (expected eta, psi, constant, phi_tri:<n> or f3:<n>)"),
            },
        })
    }
}

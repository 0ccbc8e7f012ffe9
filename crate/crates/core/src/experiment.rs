//! The growth experiment: counterexample instances over a range of sizes,
//! optionally rescaled by an ε schedule, with a logarithmic fit of the
//! Lipschitz ratio.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::besov::{besov_norm_estimate_separable, make_window, sample_counterexample, CounterexampleGrid};
use crate::counterexample::{build_instance, scale_instance};
use crate::error::{Error, Result};
use crate::par;

/// How the instance of size `n` is rescaled before measuring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonSchedule {
    /// `ε_n = 1`.
    Constant,
    /// `ε_n = 1/n`.
    OneOverSize,
    /// `ε_n = 1 / max(1, ln ln n)`.
    OneOverLoglog,
}

impl EpsilonSchedule {
    pub fn epsilon(self, n: usize) -> f64 {
        match self {
            EpsilonSchedule::Constant => 1.0,
            EpsilonSchedule::OneOverSize => 1.0 / n as f64,
            EpsilonSchedule::OneOverLoglog => 1.0 / (n as f64).ln().ln().max(1.0),
        }
    }
}

impl FromStr for EpsilonSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "constant" | "1" => Ok(EpsilonSchedule::Constant),
            "1/n" | "one_over_size" => Ok(EpsilonSchedule::OneOverSize),
            "1/loglog" | "one_over_loglog" => Ok(EpsilonSchedule::OneOverLoglog),
            other => Err(Error::InvalidArgument(format!(
                "unknown epsilon schedule {other:?} (expected constant, 1/n or 1/loglog)"
            ))),
        }
    }
}

impl fmt::Display for EpsilonSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EpsilonSchedule::Constant => "constant",
            EpsilonSchedule::OneOverSize => "1/n",
            EpsilonSchedule::OneOverLoglog => "1/loglog",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    /// Strictly increasing, each at least 2.
    pub sizes: Vec<usize>,
    pub epsilon: EpsilonSchedule,
    /// Besov estimates are computed for sizes up to this bound only; the 3-D
    /// grids grow with `n`.
    pub besov_max_size: usize,
    pub besov_grid: CounterexampleGrid,
    /// Band range `n_min..=n_max` of the Besov sum.
    pub besov_bands: (i32, i32),
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            sizes: (2..=9).map(|k| 1 << k).collect(),
            epsilon: EpsilonSchedule::Constant,
            besov_max_size: 64,
            besov_grid: CounterexampleGrid::default(),
            // f is band-limited to ‖ξ‖ ≤ √3, so bands above 2 vanish.
            besov_bands: (-20, 2),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::InvalidArgument("no sizes given".into()));
        }
        if let Some(&n) = self.sizes.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidArgument(format!("sizes must be at least 2, got {n}")));
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!(
                "sizes must be strictly increasing, got {:?}",
                self.sizes
            )));
        }
        if self.besov_bands.0 > self.besov_bands.1 {
            return Err(Error::InvalidArgument(format!(
                "empty band range {}..={}",
                self.besov_bands.0, self.besov_bands.1
            )));
        }
        Ok(())
    }
}

/// One size of the growth experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub n: usize,
    pub epsilon: f64,
    pub s1_diff_norm: f64,
    pub perturbation_s1: f64,
    pub sup_norm: f64,
    /// Omitted beyond [`ExperimentConfig::besov_max_size`].
    pub besov_estimate: Option<f64>,
    pub besov_tail_bound: Option<f64>,
    pub ratio: f64,
    pub closed_form_ratio: f64,
    pub wall_time_ms: f64,
}

/// Least-squares fit `y ≈ a + b ln n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub a: f64,
    pub b: f64,
    pub r_squared: f64,
}

/// `None` with fewer than two distinct sizes.
pub fn fit_log(ns: &[usize], ys: &[f64]) -> Option<LogFit> {
    assert_eq!(ns.len(), ys.len());
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if xs.len() < 2 || sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - a - b * x).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Some(LogFit { a, b, r_squared })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub epsilon_schedule: EpsilonSchedule,
    pub rows: Vec<GrowthRow>,
    /// Fit of `ratio` against `ln n`.
    pub fit: Option<LogFit>,
}

fn growth_row(n: usize, config: &ExperimentConfig) -> Result<GrowthRow> {
    let start = Instant::now();
    let eps = config.epsilon.epsilon(n);
    let inst = scale_instance(&build_instance(n)?, eps)?;
    let m = inst.measure()?;
    // The homogeneous seminorm is invariant under g = ε f(·/ε), so the
    // estimate is taken on the unscaled f.
    let besov = if n <= config.besov_max_size {
        let sample = sample_counterexample(n, &config.besov_grid)?;
        let (lo, hi) = config.besov_bands;
        Some(besov_norm_estimate_separable(&sample, &make_window(), lo, hi)?)
    } else {
        None
    };
    Ok(GrowthRow {
        n,
        epsilon: eps,
        s1_diff_norm: m.s1_diff_norm,
        perturbation_s1: m.perturbation_s1,
        sup_norm: m.sup_norm,
        besov_estimate: besov.as_ref().map(|b| b.value),
        besov_tail_bound: besov.as_ref().map(|b| b.tail_bound),
        ratio: m.ratio,
        closed_form_ratio: m.closed_form_ratio,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Runs every size (in parallel) and assembles the rows in size order.
pub fn run_growth(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let rows = par::map_slice(&config.sizes, |&n| growth_row(n, config).map_err(|e| e.at_size(n)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    Ok(ExperimentReport {
        epsilon_schedule: config.epsilon,
        fit: fit_log(&ns, &ratios),
        rows,
    })
}

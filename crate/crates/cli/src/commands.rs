use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use xplab_core::besov::{
    bandlimit_check, bandlimit_check_separable, besov_norm_estimate, besov_norm_estimate_separable, highest_band,
    make_window, sample_counterexample, sample_phi_tri, Axis, BesovEstimate, CounterexampleGrid, SampledField,
};
use xplab_core::counterexample::{psi, Eta};
use xplab_core::experiment::{run_growth, EpsilonSchedule, ExperimentConfig, ExperimentReport};
use xplab_core::field::Constant;
use xplab_core::suites::{reference_doi, run_all, DoiFn, VerifyReport};

use crate::parse::{parse_bands, parse_extent, parse_sizes, BesovFn};
use crate::report::{open_output, write_growth_csv, write_json};
use crate::{BesovArgs, GrowthArgs, VerifyArgs};

const DEFAULT_EXTENT: f64 = 64.0 * PI;
const DEFAULT_POINTS: usize = 16384;
const LOWEST_BAND: i32 = -20;

pub fn growth_config(args: &GrowthArgs) -> Result<ExperimentConfig> {
    let config = ExperimentConfig {
        sizes: parse_sizes(&args.sizes)?,
        epsilon: args.epsilon.parse::<EpsilonSchedule>()?,
        besov_max_size: args.besov_max,
        ..Default::default()
    };
    config.validate()?;
    Ok(config)
}

fn to_stdout(path: Option<&PathBuf>) -> bool {
    path.is_some_and(|p| p == Path::new("-"))
}

pub fn growth(args: &GrowthArgs) -> Result<ExperimentReport> {
    let config = growth_config(args)?;
    // Fail on bad paths before the long computation.
    let csv_out = open_output(&args.out)?;
    let json_out = args.json.as_deref().map(open_output).transpose()?;
    let report = run_growth(&config)?;
    write_growth_csv(csv_out, &report).with_context(|| format!("writing {}", args.out.display()))?;
    if let Some(out) = json_out {
        write_json(out, &report).context("writing the JSON report")?;
    }
    if !to_stdout(args.json.as_ref()) && args.out != Path::new("-") {
        print_growth(&report);
    }
    Ok(report)
}

fn print_growth(report: &ExperimentReport) {
    println!("epsilon schedule: {}", report.epsilon_schedule);
    println!(
        "{:>6} {:>12} {:>14} {:>14} {:>10} {:>12} {:>12}",
        "n", "epsilon", "s1_diff", "perturbation", "sup", "besov", "ratio"
    );
    for r in &report.rows {
        let besov = r.besov_estimate.map_or("-".to_string(), |b| format!("{b:.6}"));
        println!(
            "{:>6} {:>12.6e} {:>14.6e} {:>14.6e} {:>10.6} {:>12} {:>12.6}",
            r.n, r.epsilon, r.s1_diff_norm, r.perturbation_s1, r.sup_norm, besov, r.ratio
        );
    }
    if let Some(fit) = report.fit {
        println!(
            "fit: ratio ≈ {:.6} + {:.6} ln n (r² = {:.6})",
            fit.a, fit.b, fit.r_squared
        );
    }
}

fn doi_for(args: &VerifyArgs) -> DoiFn {
    #[cfg(debug_assertions)]
    if args.tamper_doi {
        return xplab_core::suites::tampered_doi;
    }
    let _ = args;
    reference_doi
}

/// `Ok(false)` if any suite failed.
pub fn verify(args: &VerifyArgs) -> Result<bool> {
    if args.trials == 0 {
        bail!("--trials must be at least 1");
    }
    let json_out = args.json.as_deref().map(open_output).transpose()?;
    let report: VerifyReport = run_all(args.seed, args.trials, doi_for(args))?;
    if let Some(out) = json_out {
        write_json(out, &report).context("writing the JSON report")?;
    }
    if !to_stdout(args.json.as_ref()) {
        println!("seed {}, {} trials", report.seed, report.trials);
        for s in &report.suites {
            println!(
                "{} {:<24} cases {:>5}  max residual {:>10.3e}  tolerance {:.0e}{}",
                if s.passed { "PASS" } else { "FAIL" },
                s.name,
                s.cases,
                s.max_residual,
                s.tolerance,
                s.error.as_ref().map_or(String::new(), |e| format!("  error: {e}")),
            );
        }
    }
    Ok(report.all_passed())
}

#[derive(Debug, Serialize)]
pub struct BandPiece {
    pub band: i32,
    pub sup: f64,
}

#[derive(Debug, Serialize)]
pub struct BesovReport {
    pub function: String,
    pub dimension: usize,
    pub grid_points: Vec<usize>,
    pub grid_step: f64,
    pub bands: (i32, i32),
    pub estimate: f64,
    pub tail_bound: f64,
    /// Band limit σ used for the spectral mass check.
    pub band_limit: f64,
    pub band_limit_mass: f64,
    pub pieces: Vec<BandPiece>,
}

fn one_dimensional_axis(args: &BesovArgs, center: f64) -> Result<Axis> {
    let extent = args.extent.as_deref().map(parse_extent).transpose()?.unwrap_or(DEFAULT_EXTENT);
    let points = args.points.unwrap_or(DEFAULT_POINTS);
    if !points.is_power_of_two() || points < 2 {
        bail!("--points must be a power of two, got {points}");
    }
    Ok(Axis::centered(center, extent, points)?)
}

fn bands_for(args: &BesovArgs, axes: &[Axis]) -> Result<(i32, i32)> {
    match &args.bands {
        Some(b) => parse_bands(b),
        None => Ok((LOWEST_BAND, highest_band(axes))),
    }
}

pub fn besov(args: &BesovArgs) -> Result<BesovReport> {
    let f: BesovFn = args.function.parse()?;
    let json_out = args.json.as_deref().map(open_output).transpose()?;
    if !f.is_one_dimensional() && (args.extent.is_some() || args.points.is_some()) {
        bail!("--extent and --points apply to eta, psi and constant; {} uses the counterexample grid", args.function);
    }
    let w = make_window();
    let grid = CounterexampleGrid::default();
    let (estimate, mass, sigma, axes, bands): (BesovEstimate, f64, f64, Vec<Axis>, (i32, i32)) = match f {
        BesovFn::Eta | BesovFn::Psi | BesovFn::Constant => {
            let center = if f == BesovFn::Psi { 2.0 * PI } else { 0.0 };
            let axis = one_dimensional_axis(args, center)?;
            let field = match f {
                BesovFn::Eta => SampledField::sample1(&Eta::new(0.0), axis),
                BesovFn::Psi => SampledField::sample1(&psi(), axis),
                _ => SampledField::sample1(&Constant::real(1.0), axis),
            };
            let bands = bands_for(args, &[axis])?;
            let est = besov_norm_estimate(&field, &w, bands.0, bands.1)?;
            (est, bandlimit_check(&field, 1.0)?, 1.0, vec![axis], bands)
        }
        BesovFn::PhiTri(n) => {
            let field = sample_phi_tri(n, &grid)?;
            let axes = field.axes().to_vec();
            let bands = bands_for(args, &axes)?;
            let est = besov_norm_estimate(&field, &w, bands.0, bands.1)?;
            let sigma = 2f64.sqrt();
            (est, bandlimit_check(&field, sigma)?, sigma, axes, bands)
        }
        BesovFn::F3(n) => {
            let sample = sample_counterexample(n, &grid)?;
            let axes = sample.axes().to_vec();
            let bands = bands_for(args, &axes)?;
            let est = besov_norm_estimate_separable(&sample, &w, bands.0, bands.1)?;
            let sigma = 3f64.sqrt();
            (est, bandlimit_check_separable(&sample, sigma)?, sigma, axes, bands)
        }
    };
    let report = BesovReport {
        function: args.function.clone(),
        dimension: axes.len(),
        grid_points: axes.iter().map(|a| a.len).collect(),
        grid_step: axes[0].step,
        bands,
        estimate: estimate.value,
        tail_bound: estimate.tail_bound,
        band_limit: sigma,
        band_limit_mass: mass,
        pieces: estimate.pieces.iter().map(|&(band, sup)| BandPiece { band, sup }).collect(),
    };
    if let Some(out) = json_out {
        write_json(out, &report).context("writing the JSON report")?;
    }
    if !to_stdout(args.json.as_ref()) {
        print_besov(&report);
    }
    Ok(report)
}

fn print_besov(r: &BesovReport) {
    println!(
        "{}: {}-D grid {:?}, step {:.6}",
        r.function, r.dimension, r.grid_points, r.grid_step
    );
    println!("besov_norm_estimate {:.12e}  (bands {}..={})", r.estimate, r.bands.0, r.bands.1);
    println!("tail_bound {:.3e}", r.tail_bound);
    println!("band_limit_mass {:.3e}  (outside ‖ξ‖ ≤ {:.6})", r.band_limit_mass, r.band_limit);
    for p in r.pieces.iter().filter(|p| p.sup > 0.0) {
        println!("  band {:>3}: sup |f_n| = {:.6e}", p.band, p.sup);
    }
}

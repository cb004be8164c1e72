//! Estimated Poincaré kernels and their spectral diagnostics.

use std::path::Path;

use serde::Serialize;

use super::analysis::linear_fit;
use super::config::{ExperimentConfig, Provenance};
use super::{create_dir, write_json};
use crate::error::{Error, Result};
use crate::kernel::{eig_sandwich, estimate_kernel, gap_bound, laplace_identity, principal_eigs, GapBound, Grid, KernelEstimate, Sandwich, SpectralResult};
use crate::sim::exit::with_threads;
use crate::sim::Variant;

/// Relative half-width of the Ku eigenvalue window, in units of δ.
pub const KU_WINDOW: f64 = 5.0;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LaplaceSummary {
    pub u: f64,
    pub gamma: f64,
    pub residual: f64,
}

/// `(1 ± 5δ) e^{-2λ₊T₊}` around the Ku principal eigenvalue.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EigenWindow {
    pub lower: f64,
    pub upper: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelReport {
    pub variant: Variant,
    pub sigma: f64,
    pub delta: f64,
    pub cells: usize,
    pub samples_per_row: usize,
    pub lambda0: f64,
    pub one_minus_lambda0: f64,
    pub log_one_minus_lambda0: f64,
    pub lambda1_mod: f64,
    pub eigen_residuals: (f64, f64),
    /// Cells of the set `A`.
    pub set: Vec<usize>,
    /// Radius of `A` used for the gap bound (shrunk until every column has mass).
    pub gap_radius: Option<f64>,
    pub sandwiches: Vec<Sandwich>,
    pub gap: Option<GapBound>,
    pub gap_holds: Option<bool>,
    pub gap_note: Option<String>,
    pub laplace: Option<LaplaceSummary>,
    pub laplace_note: Option<String>,
    pub window: Option<EigenWindow>,
    pub passed: bool,
    pub provenance: Provenance,
}

impl KernelReport {
    pub fn check(&self) -> Result<()> {
        if self.passed {
            return Ok(());
        }
        Err(Error::ToleranceExceeded(format!(
            "{:?} kernel at sigma {}: sandwich {:?}, gap {:?}, window {:?}",
            self.variant,
            self.sigma,
            self.sandwiches.iter().map(|s| s.holds).collect::<Vec<_>>(),
            self.gap_holds,
            self.window.map(|w| w.holds)
        )))
    }
}

/// Log-linear trend of `1 - λ0` in `1/σ²` across Ks kernels.
#[derive(Debug, Clone, Serialize)]
pub struct KernelTrend {
    pub inverse_sigma_sq: Vec<f64>,
    pub log_one_minus_lambda0: Vec<f64>,
    pub secant_slopes: Vec<f64>,
    pub fitted_slope: f64,
    pub fitted_slope_se: f64,
    pub monotone: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralSweep {
    pub reports: Vec<KernelReport>,
    pub trend: Option<KernelTrend>,
}

fn set_cells(grid: &Grid, variant: Variant, delta: f64, radius: f64) -> Vec<usize> {
    match variant {
        Variant::Ks => grid.cells_where(|x| (x + 1.0).abs() < radius),
        Variant::Ku => grid.cells_where(|x| (x - delta).abs() < radius),
    }
}

/// Gap bound on `A`, halving its radius while some column of `A` has no mass.
fn gap_on_shrinking_set(k: &KernelEstimate, lambda0: f64, delta: f64, radius: f64) -> (Option<(f64, GapBound)>, Option<String>) {
    let mut r = radius;
    let mut last = String::new();
    for _ in 0..12 {
        let a = set_cells(&k.grid, k.variant, delta, r);
        if a.is_empty() {
            break;
        }
        match gap_bound(k, lambda0, &a) {
            Ok(g) => return (Some((r, g)), (r != radius).then(|| format!("set radius reduced to {r} ({last})"))),
            Err(e) => last = e.to_string(),
        }
        r *= 0.5;
    }
    (None, Some(format!("no set with positive minimal density: {last}")))
}

/// Estimates and analyses one kernel.
pub fn analyse_kernel(cfg: &ExperimentConfig, k: &KernelEstimate, spectral: &SpectralResult) -> Result<KernelReport> {
    let spec = &cfg.kernel;
    let model = cfg.model.build()?;
    let set = set_cells(&k.grid, k.variant, cfg.delta, spec.set_radius);
    if set.is_empty() {
        return Err(Error::InvalidInput(format!("set A of radius {} contains no cell", spec.set_radius)));
    }
    let lambda0 = spectral.lambda0;
    let sandwiches = spec.sandwich_powers.iter().map(|&n| eig_sandwich(k, lambda0, &set, n)).collect::<Result<Vec<_>>>()?;
    let (gap, gap_note) = gap_on_shrinking_set(k, lambda0, cfg.delta, spec.set_radius);
    let gap_holds = gap.map(|(_, g)| g.bound >= spectral.lambda1_mod);
    let (laplace, laplace_note) = match laplace_identity(k, &set, spec.laplace_u) {
        Ok(l) => (Some(LaplaceSummary { u: l.u, gamma: l.gamma, residual: l.residual }), None),
        Err(e @ Error::OutsideConvergenceRegion { .. }) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let window = (k.variant == Variant::Ku).then(|| {
        let centre = (-2.0 * model.lambda_plus * model.t_plus).exp();
        let (lower, upper) = ((1.0 - KU_WINDOW * cfg.delta) * centre, (1.0 + KU_WINDOW * cfg.delta) * centre);
        EigenWindow { lower, upper, holds: lower < lambda0 && lambda0 < upper }
    });
    let passed = sandwiches.iter().all(|s| s.holds) && gap_holds.unwrap_or(true) && window.map_or(true, |w| w.holds);
    Ok(KernelReport {
        variant: k.variant,
        sigma: k.sigma,
        delta: k.delta,
        cells: k.n(),
        samples_per_row: spec.samples_per_row,
        lambda0,
        one_minus_lambda0: spectral.one_minus_lambda0,
        log_one_minus_lambda0: spectral.one_minus_lambda0.ln(),
        lambda1_mod: spectral.lambda1_mod,
        eigen_residuals: spectral.residuals,
        set,
        gap_radius: gap.map(|g| g.0),
        sandwiches,
        gap: gap.map(|g| g.1),
        gap_holds,
        gap_note,
        laplace,
        laplace_note,
        window,
        passed,
        provenance: Provenance::of(cfg),
    })
}

/// Kernel, spectrum and report at one noise level.
pub fn run_kernel_at(cfg: &ExperimentConfig, sigma: f64, threads: Option<usize>) -> Result<(KernelReport, KernelEstimate, SpectralResult)> {
    let model = cfg.model.build()?;
    let spec = &cfg.kernel;
    let grid = Grid::default_for(spec.variant, cfg.delta, spec.cells)?;
    let sim = cfg.sim_config(sigma);
    let k = with_threads(threads, || estimate_kernel(&model, &sim, &grid, spec.variant, spec.samples_per_row))??;
    let spectral = principal_eigs(&k)?;
    let report = analyse_kernel(cfg, &k, &spectral)?;
    Ok((report, k, spectral))
}

/// Trend of `log(1 - λ0)` against `1/σ²`: decreasing, with negative secants.
pub fn kernel_trend(reports: &[KernelReport]) -> Result<KernelTrend> {
    let mut pts: Vec<(f64, f64)> = reports.iter().map(|r| (1.0 / (r.sigma * r.sigma), r.log_one_minus_lambda0)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let secant_slopes: Vec<f64> = pts.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
    let (_, slope, se, _) = linear_fit(&x, &y)?;
    let monotone = y.windows(2).all(|w| w[1] < w[0]);
    Ok(KernelTrend {
        passed: monotone && slope < 0.0 && secant_slopes.iter().all(|s| *s < 0.0),
        inverse_sigma_sq: x,
        log_one_minus_lambda0: y,
        secant_slopes,
        fitted_slope: slope,
        fitted_slope_se: se,
        monotone,
    })
}

/// Kernels at every configured σ, each written as `kernel_<σ>.json` under `out`
/// when given, with the trend across σ for Ks.
pub fn run_kernel_spectral(cfg: &ExperimentConfig, threads: Option<usize>, out: Option<&Path>) -> Result<SpectralSweep> {
    if let Some(dir) = out {
        create_dir(dir)?;
    }
    let mut reports = Vec::new();
    for &sigma in &cfg.sigmas {
        let (report, k, spectral) = run_kernel_at(cfg, sigma, threads)?;
        if let Some(dir) = out {
            k.write_json(&dir.join(format!("kernel_{sigma}.json")), Some(&spectral))?;
            write_json(&dir.join(format!("report_{sigma}.json")), &report)?;
        }
        reports.push(report);
    }
    let trend = if cfg.kernel.variant == Variant::Ks && reports.len() >= 2 { Some(kernel_trend(&reports)?) } else { None };
    let sweep = SpectralSweep { reports, trend };
    if let Some(dir) = out {
        write_json(&dir.join("spectral.json"), &sweep)?;
    }
    Ok(sweep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_ks_kernel_report() {
        let mut cfg = ExperimentConfig::default();
        cfg.kernel.cells = 16;
        cfg.kernel.samples_per_row = 200;
        cfg.sigmas = vec![0.5];
        cfg.dt = 2.5e-3;
        let (r, _, _) = run_kernel_at(&cfg, 0.5, None).unwrap();
        assert!(r.lambda0 > 0.0 && r.lambda0 < 1.0);
        assert!(r.sandwiches.iter().all(|s| s.holds));
        assert!(r.laplace.map_or(true, |l| l.residual < 1e-10));
    }
}

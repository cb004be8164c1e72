//! Monte Carlo first passage of the linear model against the reflection formula.

use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, Provenance};
use crate::error::{Error, Result};
use crate::model::PolarModel;
use crate::numerics::special::norm_cdf;
use crate::sim::exit::{run_exit, with_threads};
use crate::sim::rng::stream_seed;
use crate::sim::{SimConfig, Stepper};
use crate::theory::LinearProcess;

/// Largest accepted checkpoint discrepancy, in Monte Carlo standard errors.
pub const SE_GATE: f64 = 3.0;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Checkpoint {
    pub t: f64,
    pub empirical: f64,
    pub theory: f64,
    /// `√(F(1-F)/n)` at the theoretical value.
    pub standard_error: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DensityBin {
    pub t_left: f64,
    pub empirical: f64,
    pub theory: f64,
}

/// One Monte Carlo run at a fixed step.
#[derive(Debug, Clone, Serialize)]
pub struct LinearRun {
    pub dt: f64,
    pub n_paths: usize,
    pub hits: usize,
    pub checkpoints: Vec<Checkpoint>,
    pub density: Vec<DensityBin>,
    pub max_z: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LinearReport {
    pub sigma: f64,
    pub distance: f64,
    pub lambda: f64,
    pub period: f64,
    pub t_max: f64,
    pub coarse: LinearRun,
    pub fine: LinearRun,
    /// Largest checkpoint difference between the two steps, in standard errors.
    pub dt_shift_se: f64,
    pub passed: bool,
    pub note: Option<String>,
    pub provenance: Provenance,
}

impl LinearReport {
    pub fn check(&self) -> Result<()> {
        if self.passed {
            return Ok(());
        }
        Err(Error::ToleranceExceeded(format!(
            "first-passage CDF off by {:.2} SE at dt = {} and {:.2} SE at dt = {} (gate {SE_GATE})",
            self.coarse.max_z, self.coarse.dt, self.fine.max_z, self.fine.dt
        )))
    }
}

fn run_at(
    model: &PolarModel,
    lp: &LinearProcess,
    cfg: &ExperimentConfig,
    sigma: f64,
    dt: f64,
    threads: Option<usize>,
) -> Result<LinearRun> {
    let spec = &cfg.linear;
    let sim = SimConfig { dt, max_phase: f64::INFINITY, ..cfg.sim_config(sigma) };
    let st = Stepper::new(model, sigma, dt);
    let dmax = (0..256).map(|i| lp.diffusion(i as f64 / 256.0 * lp.period)).fold(0.0, f64::max);
    let scale = sigma * (dmax / (2.0 * lp.lambda)).sqrt();
    let level = sim.exit_level();
    let (t_max, early) = (spec.t_max, spec.early_stop);
    let n = cfg.paths;
    let r0 = level - spec.distance;
    let times: Vec<Option<f64>> = with_threads(threads, || {
        (0..n as u64)
            .into_par_iter()
            .map(|i| {
                // A path is abandoned once even the widest linear spread cannot bring it back.
                let stop = |s: &crate::sim::State| {
                    let d = level - s.r;
                    s.t >= t_max || (d > 0.0 && (scale == 0.0 || 2.0 * norm_cdf(-d / scale) < early))
                };
                run_exit(&st, &sim, r0, 0.0, stream_seed(sim.master_seed, i), i, stop).map(|e| (!e.censored).then_some(e.tau_time))
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let hits: Vec<f64> = times.iter().flatten().copied().collect();
    let theory_cdf = |t: f64| -> Result<f64> { if sigma > 0.0 { lp.reflection_cdf(spec.distance, sigma, t) } else { Ok(0.0) } };
    let nf = n as f64;
    let mut checkpoints = Vec::with_capacity(spec.checkpoints);
    for k in 1..=spec.checkpoints {
        let t = t_max * k as f64 / spec.checkpoints as f64;
        let empirical = hits.iter().filter(|&&h| h <= t).count() as f64 / nf;
        let theory = theory_cdf(t)?;
        let se = (theory * (1.0 - theory) / nf).sqrt().max(1.0 / nf);
        checkpoints.push(Checkpoint { t, empirical, theory, standard_error: se, z: (empirical - theory).abs() / se });
    }
    let bins = spec.checkpoints;
    let w = t_max / bins as f64;
    let mut density = Vec::with_capacity(bins);
    for k in 0..bins {
        let (a, b) = (k as f64 * w, (k + 1) as f64 * w);
        let count = hits.iter().filter(|&&h| h > a && h <= b).count() as f64;
        density.push(DensityBin { t_left: a, empirical: count / nf / w, theory: (theory_cdf(b)? - theory_cdf(a)?) / w });
    }
    let max_z = checkpoints.iter().map(|c| c.z).fold(0.0, f64::max);
    Ok(LinearRun { dt, n_paths: n, hits: hits.len(), checkpoints, density, max_z, passed: max_z < SE_GATE })
}

/// First-passage validation at the first configured σ, at `dt` and `dt/2`.
pub fn run_linear_validation(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<LinearReport> {
    run_linear_validation_at(cfg, cfg.sigmas[0], threads)
}

/// As [`run_linear_validation`] at an explicit σ; `σ = 0` is accepted and yields no events.
pub fn run_linear_validation_at(cfg: &ExperimentConfig, sigma: f64, threads: Option<usize>) -> Result<LinearReport> {
    if cfg.model.name != "linear" {
        return Err(Error::InvalidInput(format!("linear validation needs the 'linear' model, got '{}'", cfg.model.name)));
    }
    if !(sigma >= 0.0) {
        return Err(Error::InvalidInput(format!("sigma must be non-negative, got {sigma}")));
    }
    let spec = &cfg.linear;
    if !(spec.distance > 0.0 && spec.t_max > 0.0 && spec.checkpoints > 0) {
        return Err(Error::InvalidInput("linear validation needs positive distance, horizon and checkpoint count".into()));
    }
    let model = cfg.model.build()?;
    let lp = LinearProcess::from_model(&model)?;
    let coarse = run_at(&model, &lp, cfg, sigma, cfg.dt, threads)?;
    let fine = run_at(&model, &lp, cfg, sigma, cfg.dt / 2.0, threads)?;
    let dt_shift_se = coarse
        .checkpoints
        .iter()
        .zip(&fine.checkpoints)
        .map(|(a, b)| (a.empirical - b.empirical).abs() / a.standard_error)
        .fold(0.0, f64::max);
    let note = (coarse.hits == 0 && fine.hits == 0).then(|| "no path reached the orbit".to_string());
    Ok(LinearReport {
        sigma,
        distance: spec.distance,
        lambda: lp.lambda,
        period: lp.period,
        t_max: spec.t_max,
        passed: coarse.passed && fine.passed,
        coarse,
        fine,
        dt_shift_se,
        note,
        provenance: Provenance::of(cfg),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_cfg() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::from_toml("kind = \"linear-validation\"\nsigmas = [0.1]\ndt = 1e-3\npaths = 2000\n[model]\nname = \"linear\"\n").unwrap();
        cfg.linear.t_max = 2.0;
        cfg
    }

    #[test]
    fn zero_noise_never_hits() {
        let r = run_linear_validation_at(&linear_cfg(), 0.0, Some(1)).unwrap();
        assert_eq!(r.coarse.hits, 0);
        assert!(r.note.is_some() && r.passed);
    }

    #[test]
    fn small_batch_matches_reflection() {
        let r = run_linear_validation(&linear_cfg(), None).unwrap();
        assert!(r.coarse.hits > 100);
        assert!(r.passed, "{} {}", r.coarse.max_z, r.fine.max_z);
    }

    #[test]
    fn other_models_rejected() {
        let cfg = ExperimentConfig::default();
        assert!(matches!(run_linear_validation(&cfg, None), Err(Error::InvalidInput(_))));
    }
}

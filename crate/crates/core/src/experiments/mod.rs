//! End-to-end experiments: configuration, sampling runs, fitted reports and
//! their on-disk artifacts.

pub mod analysis;
pub mod config;
pub mod cycling;
pub mod linear;
pub mod runners;
pub mod spectral;

use std::path::Path;

use serde::Serialize;

pub use config::{ExperimentConfig, ExperimentKind, Integrand, ModelSpec, Provenance, SamplingMethod};
pub use cycling::{run_cycling, run_descent_profile, run_sigma_sweep, CyclingReport, CyclingRun, DescentReport, SweepReport};
pub use runners::{run_bernstein, run_ldp, run_orbit, run_theory_table, BernsteinReport, LdpReport, OrbitReport};
pub use linear::{run_linear_validation, LinearReport};
pub use spectral::{run_kernel_spectral, KernelReport, SpectralSweep};

use crate::error::{Error, Result};
use crate::ldp::{find_heteroclinic, HeteroclinicOptions};
use crate::model::PolarModel;

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |e| Error::Io { path: path.display().to_string(), source: e }
}

pub fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(io_err(path))
}

/// Pretty JSON; floats keep their shortest round-trip form.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::InvalidInput(format!("json: {e}")))?;
    std::fs::write(path, text + "\n").map_err(io_err(path))
}

/// Where the phase `s*` of a report came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SStarSource {
    Minimiser,
    Config,
    /// No transversal minimiser exists (symmetric model); `s* = 0` is a placeholder.
    Absent,
}

/// `s*` from the configuration when given, otherwise from the minimiser search.
pub fn resolve_s_star(model: &PolarModel, cfg: &ExperimentConfig) -> Result<(f64, SStarSource)> {
    if let Some(s) = cfg.s_star {
        return Ok((crate::numerics::frac(s), SStarSource::Config));
    }
    if !model.has_stable_orbit {
        return Ok((0.0, SStarSource::Absent));
    }
    match find_heteroclinic(model, &HeteroclinicOptions { delta: cfg.delta, ..Default::default() }) {
        Ok(h) => Ok((h.s_star, SStarSource::Minimiser)),
        Err(Error::NoIntersection { .. }) => Ok((0.0, SStarSource::Absent)),
        Err(e) => Err(e),
    }
}

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{BenchmarkParams, PolarModel};
use crate::sim::{AmsConfig, SimConfig, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    CyclingHistogram,
    SigmaSweep,
    KernelSpectral,
    LdpMinimizer,
    LinearValidation,
    Bernstein,
    DescentProfile,
}

/// How exits are sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingMethod {
    /// Independent paths from `r0`; gives windings as well as phases.
    Direct,
    /// Adaptive multilevel splitting from equilibrium entrances; phases only.
    Ams,
}

/// Built-in model by name, with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSpec {
    /// `benchmark-asym`, `benchmark-sym` or `linear`.
    pub name: String,
    pub lambda: f64,
    pub period: f64,
    pub a: f64,
    pub eps_phi: f64,
}

impl Default for ModelSpec {
    fn default() -> Self {
        let p = BenchmarkParams::default();
        Self { name: "benchmark-asym".into(), lambda: p.lambda, period: p.period, a: p.a, eps_phi: p.eps_phi }
    }
}

impl ModelSpec {
    pub fn build(&self) -> Result<PolarModel> {
        PolarModel::by_name(&self.name, BenchmarkParams { lambda: self.lambda, period: self.period, a: self.a, eps_phi: self.eps_phi })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSpec {
    pub variant: Variant,
    pub cells: usize,
    pub samples_per_row: usize,
    /// Set `A`: cells within this distance of the stable orbit (Ks) or of `δ` (Ku).
    pub set_radius: f64,
    pub sandwich_powers: Vec<usize>,
    pub laplace_u: f64,
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self { variant: Variant::Ks, cells: 128, samples_per_row: 1000, set_radius: 0.2, sandwich_powers: vec![1, 2, 4], laplace_u: -0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearSpec {
    /// Initial distance below the orbit.
    pub distance: f64,
    /// Time horizon (physical time units).
    pub t_max: f64,
    pub checkpoints: usize,
    /// Paths stop once the chance of a later hit falls below this.
    pub early_stop: f64,
}

impl Default for LinearSpec {
    fn default() -> Self {
        Self { distance: 0.1, t_max: 5.0, checkpoints: 20, early_stop: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrand {
    /// The phase row `g_φ` of the noise matrix.
    Phase,
    /// The radial row `g_r`.
    Radial,
    /// `g = (1, 0, …)`: standard Brownian motion.
    Unit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BernsteinSpec {
    pub integrand: Integrand,
    pub levels: Vec<f64>,
    /// Time horizon (physical time units).
    pub t: f64,
    /// Constant envelope `G`; the supremum of `|g|` over the domain when absent.
    pub envelope: Option<f64>,
}

impl Default for BernsteinSpec {
    fn default() -> Self {
        Self { integrand: Integrand::Phase, levels: vec![0.5, 1.0, 2.0], t: 2.0, envelope: None }
    }
}

/// Full description of one experiment, read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub model: ModelSpec,
    pub sigmas: Vec<f64>,
    pub delta: f64,
    /// Histogram bin width Δ (fraction of a period).
    pub bin_width: f64,
    /// Exits (or paths) per noise level.
    pub paths: usize,
    pub seed: u64,
    pub output: PathBuf,
    /// Time step (physical time units).
    pub dt: f64,
    pub exit_offset: f64,
    pub refine: bool,
    pub bridge: bool,
    pub method: SamplingMethod,
    /// Start radius of direct paths.
    pub r0: f64,
    /// Phase cap of direct paths; `50 / |log λ0|` rule when absent.
    pub max_phase: Option<f64>,
    /// Overrides the phase `s*` found by the minimiser search.
    pub s_star: Option<f64>,
    pub ams: AmsConfig,
    pub kernel: KernelSpec,
    pub linear: LinearSpec,
    pub bernstein: BernsteinSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::CyclingHistogram,
            model: ModelSpec::default(),
            sigmas: vec![0.15],
            delta: 0.1,
            bin_width: 0.02,
            paths: 10_000,
            seed: 0,
            output: PathBuf::from("out"),
            dt: 2.5e-3,
            exit_offset: 0.0,
            refine: true,
            bridge: true,
            method: SamplingMethod::Ams,
            r0: -1.0,
            max_phase: None,
            s_star: None,
            ams: AmsConfig::default(),
            kernel: KernelSpec::default(),
            linear: LinearSpec::default(),
            bernstein: BernsteinSpec::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.display().to_string(), source: e })?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Smallest budget accepted for the experiment kind.
    pub fn minimum_budget(&self) -> usize {
        match self.kind {
            ExperimentKind::KernelSpectral | ExperimentKind::LdpMinimizer => 0,
            _ => 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bin_width > 0.0 && self.bin_width < 1.0) {
            return Err(Error::Config(format!("bin_width must lie in (0, 1), got {}", self.bin_width)));
        }
        if let Some(s) = self.sigmas.iter().find(|s| !(**s > 0.0 && **s < 1.0)) {
            return Err(Error::Config(format!("sigma values must lie in (0, 1), got {s}")));
        }
        if self.sigmas.is_empty() {
            return Err(Error::Config("sigmas must not be empty".into()));
        }
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return Err(Error::Config(format!("delta must lie in (0, 1/2), got {}", self.delta)));
        }
        if self.paths < self.minimum_budget() {
            return Err(Error::Config(format!("paths = {} is below the minimum {} for this experiment", self.paths, self.minimum_budget())));
        }
        if self.kind == ExperimentKind::KernelSpectral && self.kernel.samples_per_row < 1000 {
            return Err(Error::Config(format!("samples_per_row = {} is below the minimum 1000", self.kernel.samples_per_row)));
        }
        Ok(())
    }

    pub fn sim_config(&self, sigma: f64) -> SimConfig {
        SimConfig {
            sigma,
            dt: self.dt,
            master_seed: self.seed,
            path_budget: self.paths,
            max_phase: self.max_phase.unwrap_or(1e4),
            delta: self.delta,
            refine: self.refine,
            bridge: self.bridge,
            exit_offset: self.exit_offset,
        }
    }

    /// Canonical TOML rendering, the input of the configuration hash.
    pub fn canonical(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }
}

/// Everything needed to regenerate an output bit for bit.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub config_sha256: String,
    pub config: String,
    pub seed: u64,
    pub crate_name: String,
    pub crate_version: String,
    pub scheme: String,
    pub rng: String,
}

impl Provenance {
    pub fn of(cfg: &ExperimentConfig) -> Self {
        let canonical = cfg.canonical();
        let digest = Sha256::digest(canonical.as_bytes());
        Self {
            config_sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
            config: canonical,
            seed: cfg.seed,
            crate_name: env!("CARGO_PKG_NAME").into(),
            crate_version: env!("CARGO_PKG_VERSION").into(),
            scheme: "euler-maruyama with Brownian-bridge crossing test".into(),
            rng: crate::sim::RNG_VARIANT.into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_validation() {
        let cfg = ExperimentConfig::from_toml("kind = \"sigma-sweep\"\nsigmas = [0.2, 0.1]\n[model]\nname = \"benchmark-sym\"\n").unwrap();
        assert_eq!(cfg.kind, ExperimentKind::SigmaSweep);
        assert_eq!(ExperimentConfig::from_toml(&cfg.canonical()).unwrap(), cfg);
        assert!(ExperimentConfig::from_toml("bin_width = 1.5").is_err());
        assert!(ExperimentConfig::from_toml("sigmas = [1.2]").is_err());
        assert!(ExperimentConfig::from_toml("unknown_key = 3").is_err());
        assert_eq!(Provenance::of(&cfg).config_sha256, Provenance::of(&cfg.clone()).config_sha256);
    }
}

//! Monte Carlo engine: Euler–Maruyama integration of the polar SDE, first
//! exits, random Poincaré chains, rare-event splitting and diagnostics.

pub mod ams;
pub mod chain;
pub mod diagnostics;
pub mod exit;
pub mod rng;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use ams::{equilibrium_entrances, run_ams, AmsConfig, AmsExit, AmsResult, Entrance, Entrances};
pub use chain::{one_period, sample_poincare_chain, ChainRecord, KillCause, Landing, Variant};
pub use diagnostics::{bernstein_diagnostic, strong_error_ratio, BernsteinRow, StrongErrorReport};
pub use exit::{batch_sample, fmt17, sample_exit, write_samples_csv, Batch, BatchSummary, ExitSample, SampleMeta};
pub use rng::{path_rng, SimRng, RNG_VARIANT};

use crate::error::{Error, Result};
use crate::model::{PolarModel, MAX_NOISE};

/// Simulation parameters shared by all samplers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub sigma: f64,
    pub dt: f64,
    pub master_seed: u64,
    pub path_budget: usize,
    /// Cap on the unwrapped phase; paths reaching it are censored.
    pub max_phase: f64,
    /// Offset of the level `1 - δ` whose first crossing is recorded.
    pub delta: f64,
    /// Locate crossings by linear interpolation between bracketing steps.
    pub refine: bool,
    /// Brownian-bridge test for level crossings between grid points.
    pub bridge: bool,
    /// Exit is detected at `r ≥ 1 - exit_offset`.
    pub exit_offset: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            sigma: 0.2,
            dt: 1e-3,
            master_seed: 0,
            path_budget: 10_000,
            max_phase: 1e4,
            delta: 0.1,
            refine: true,
            bridge: true,
            exit_offset: 0.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self, model: &PolarModel) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidInput(format!("sigma must be non-negative, got {}", self.sigma)));
        }
        let t_min = if model.has_stable_orbit { model.t_plus.min(model.t_minus) } else { model.t_plus };
        if !(self.dt > 0.0 && self.dt <= t_min / 200.0 * (1.0 + 1e-12)) {
            return Err(Error::InvalidInput(format!("dt = {} must lie in (0, {}]", self.dt, t_min / 200.0)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidInput(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.max_phase > 0.0) {
            return Err(Error::InvalidInput("max_phase must be positive".into()));
        }
        Ok(())
    }

    pub fn exit_level(&self) -> f64 {
        1.0 - self.exit_offset
    }
}

/// Position of a simulated path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct State {
    pub r: f64,
    pub phi: f64,
    pub t: f64,
}

/// Euler–Maruyama stepper for one model and configuration.
#[derive(Clone, Copy)]
pub struct Stepper<'a> {
    pub model: &'a PolarModel,
    pub sigma: f64,
    pub dt: f64,
    sqrt_dt: f64,
    k: usize,
}

impl<'a> Stepper<'a> {
    pub fn new(model: &'a PolarModel, sigma: f64, dt: f64) -> Self {
        Self { model, sigma, dt, sqrt_dt: dt.sqrt(), k: model.noise_dim }
    }

    /// One step with fresh Gaussian increments; returns `σ² D_rr dt` at the
    /// start point, the conditional variance used by the bridge test.
    #[inline]
    pub fn step(&self, s: &mut State, rng: &mut SimRng) -> f64 {
        let mut dw = [0.0; MAX_NOISE];
        for w in dw.iter_mut().take(self.k) {
            *w = self.sqrt_dt * rng.sample::<f64, _>(StandardNormal);
        }
        self.step_with(s, &dw, self.dt)
    }

    /// One step of length `h` with given Brownian increments.
    #[inline]
    pub fn step_with(&self, s: &mut State, dw: &[f64; MAX_NOISE], h: f64) -> f64 {
        let c = self.model.coefficients(s.r, s.phi);
        let mut nr = 0.0;
        let mut np = 0.0;
        let mut drr = 0.0;
        for i in 0..self.k {
            nr += c.g_r[i] * dw[i];
            np += c.g_phi[i] * dw[i];
            drr += c.g_r[i] * c.g_r[i];
        }
        s.r += c.f_r * h + self.sigma * nr;
        s.phi += c.f_phi * h + self.sigma * np;
        s.t += h;
        self.sigma * self.sigma * drr * h
    }

    pub fn check_domain(&self, s: &State, path: u64) -> Result<()> {
        if s.r.abs() < self.model.half_width && s.r.is_finite() {
            Ok(())
        } else {
            Err(Error::DomainEscape { path, r: s.r, half_width: self.model.half_width })
        }
    }
}

/// Probability that a Brownian bridge with end distances `d0, d1 > 0` below a
/// level and conditional variance `var` touches it.
#[inline]
pub fn bridge_probability(d0: f64, d1: f64, var: f64) -> f64 {
    if d0 <= 0.0 || d1 <= 0.0 {
        return 1.0;
    }
    let e = 2.0 * d0 * d1 / var;
    if e > 40.0 {
        0.0
    } else {
        (-e).exp()
    }
}

/// Auxiliary stream of a path, used for bridge tests so that the Gaussian
/// stream is identical with and without killing.
pub(crate) fn aux_rng(seed: u64) -> SimRng {
    rng::rng_from_seed(rng::mix64(seed ^ 0xA5A5_5A5A_F00D_BEEF))
}

/// Euler–Maruyama path from `(r0, φ0)` over `[0, t_end]`, every `stride`-th step.
pub fn integrate_path(
    model: &PolarModel,
    cfg: &SimConfig,
    r0: f64,
    phi0: f64,
    t_end: f64,
    seed: u64,
    stride: usize,
) -> Result<Vec<State>> {
    let st = Stepper::new(model, cfg.sigma, cfg.dt);
    let mut rng = rng::rng_from_seed(seed);
    let mut s = State { r: r0, phi: phi0, t: 0.0 };
    let n = (t_end / cfg.dt).round() as usize;
    let stride = stride.max(1);
    let mut out = Vec::with_capacity(n / stride + 2);
    out.push(s);
    for i in 1..=n {
        st.step(&mut s, &mut rng);
        st.check_domain(&s, seed)?;
        if i % stride == 0 || i == n {
            out.push(s);
        }
    }
    Ok(out)
}

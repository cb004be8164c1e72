use rand::Rng;
use serde::{Deserialize, Serialize};

use super::exit::lerp;
use super::rng::rng_from_seed;
use super::{aux_rng, bridge_probability, SimConfig, SimRng, State, Stepper};
use crate::error::{Error, Result};
use crate::model::PolarModel;

/// Which subchain of the random Poincaré map is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Near the stable orbit, on `[-L, 1-δ]`, killed on reaching `1-δ` or `-L`.
    Ks,
    /// Near the unstable orbit in the recentred coordinate `ρ = 1 - r` on
    /// `(0, 2δ)`, killed at `ρ = 0` and `ρ = 2δ`.
    Ku,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KillCause {
    UnstableOrbit,
    LowerBoundary,
    Level,
}

impl Variant {
    /// Chain coordinate of a radius.
    pub fn coord(self, r: f64) -> f64 {
        match self {
            Variant::Ks => r,
            Variant::Ku => 1.0 - r,
        }
    }

    pub fn radius(self, x: f64) -> f64 {
        match self {
            Variant::Ks => x,
            Variant::Ku => 1.0 - x,
        }
    }

    /// Killing levels in `r`: `(upper, cause, lower, cause)`.
    fn levels(self, model: &PolarModel, delta: f64) -> (f64, KillCause, f64, KillCause) {
        match self {
            Variant::Ks => (1.0 - delta, KillCause::Level, -model.half_width, KillCause::LowerBoundary),
            Variant::Ku => (1.0, KillCause::UnstableOrbit, 1.0 - 2.0 * delta, KillCause::Level),
        }
    }

    /// Open chain domain in chain coordinates.
    pub fn domain(self, model: &PolarModel, delta: f64) -> (f64, f64) {
        match self {
            Variant::Ks => (-model.half_width, 1.0 - delta),
            Variant::Ku => (0.0, 2.0 * delta),
        }
    }
}

/// Outcome of one period of a chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Landing {
    /// Chain coordinate at the next integer phase.
    Survived(f64),
    Killed(KillCause),
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainRecord {
    pub variant: Variant,
    /// Chain coordinates `R_0, R_1, …` at successive integer phases.
    pub states: Vec<f64>,
    /// Step `n` during which the chain was killed (`R_n` does not exist).
    pub killed_at: Option<(usize, KillCause)>,
}

fn touches(a: f64, b: f64, level: f64, above: bool, var: f64, cfg: &SimConfig, aux: &mut SimRng) -> bool {
    let (d0, d1) = if above { (level - a, level - b) } else { (a - level, b - level) };
    if d1 <= 0.0 {
        return true;
    }
    cfg.bridge && var > 0.0 && {
        let p = bridge_probability(d0, d1, var);
        p > 0.0 && aux.random::<f64>() < p
    }
}

/// Advances `s` until `φ` first passes `target`, or until killing.
#[allow(clippy::too_many_arguments)]
pub(crate) fn advance(
    st: &Stepper,
    cfg: &SimConfig,
    variant: Variant,
    s: &mut State,
    target: f64,
    rng: &mut SimRng,
    aux: &mut SimRng,
    path: u64,
) -> Result<Landing> {
    let (hi, hi_cause, lo, lo_cause) = variant.levels(st.model, cfg.delta);
    let max_steps = (4.0 * (target - s.phi).max(1.0) * st.model.t_plus.max(st.model.t_minus) / cfg.dt) as u64 + 1_000_000;
    for _ in 0..max_steps {
        let a = *s;
        let var = st.step(s, rng);
        if touches(a.r, s.r, hi, true, var, cfg, aux) {
            return Ok(Landing::Killed(hi_cause));
        }
        if touches(a.r, s.r, lo, false, var, cfg, aux) {
            return Ok(Landing::Killed(lo_cause));
        }
        st.check_domain(s, path)?;
        if s.phi >= target {
            let r = if cfg.refine && s.phi > a.phi { lerp(a.r, s.r, (target - a.phi) / (s.phi - a.phi)) } else { s.r };
            return Ok(Landing::Survived(variant.coord(r)));
        }
    }
    Err(Error::PhaseSpeedVanishes { phi: s.phi, phi_dot: 0.0 })
}

/// One period from chain coordinate `x` at phase 0; used for kernel rows.
pub fn one_period(model: &PolarModel, cfg: &SimConfig, variant: Variant, x: f64, seed: u64) -> Result<Landing> {
    let st = Stepper::new(model, cfg.sigma, cfg.dt);
    let mut s = State { r: variant.radius(x), phi: 0.0, t: 0.0 };
    advance(&st, cfg, variant, &mut s, 1.0, &mut rng_from_seed(seed), &mut aux_rng(seed), seed)
}

/// Chain of up to `n_steps` periods started at chain coordinate `x0` at phase 0.
pub fn sample_poincare_chain(
    model: &PolarModel,
    cfg: &SimConfig,
    x0: f64,
    variant: Variant,
    n_steps: usize,
    seed: u64,
) -> Result<ChainRecord> {
    let (lo, hi) = variant.domain(model, cfg.delta);
    if !(x0 > lo && x0 < hi) {
        return Err(Error::InvalidInput(format!("start {x0} outside the chain domain ({lo}, {hi})")));
    }
    let st = Stepper::new(model, cfg.sigma, cfg.dt);
    let mut rng = rng_from_seed(seed);
    let mut aux = aux_rng(seed);
    let mut s = State { r: variant.radius(x0), phi: 0.0, t: 0.0 };
    let mut states = vec![x0];
    for n in 1..=n_steps {
        match advance(&st, cfg, variant, &mut s, n as f64, &mut rng, &mut aux, seed)? {
            Landing::Survived(x) => states.push(x),
            Landing::Killed(c) => return Ok(ChainRecord { variant, states, killed_at: Some((n, c)) }),
        }
    }
    Ok(ChainRecord { variant, states, killed_at: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BenchmarkParams;
    use crate::sim::integrate_path;

    fn bench() -> PolarModel {
        PolarModel::benchmark(BenchmarkParams::default()).unwrap()
    }

    #[test]
    fn deterministic_limit_attracts_to_stable_orbit() {
        let cfg = SimConfig { sigma: 1e-6, dt: 2e-3, ..Default::default() };
        let rec = sample_poincare_chain(&bench(), &cfg, 0.0, Variant::Ks, 100, 5).unwrap();
        assert!(rec.killed_at.is_none());
        assert!((rec.states[100] + 1.0).abs() < 1e-4);
    }

    #[test]
    fn chain_matches_path_at_integer_phases() {
        let m = bench();
        let cfg = SimConfig { sigma: 0.1, dt: 1e-3, bridge: false, ..Default::default() };
        let rec = sample_poincare_chain(&m, &cfg, -0.5, Variant::Ks, 3, 11).unwrap();
        let path = integrate_path(&m, &cfg, -0.5, 0.0, 3.5, 11, 1).unwrap();
        let mut k = 1;
        for w in path.windows(2) {
            if k < rec.states.len() && w[1].phi >= k as f64 {
                let r = w[0].r + (k as f64 - w[0].phi) / (w[1].phi - w[0].phi) * (w[1].r - w[0].r);
                assert_eq!(r, rec.states[k]);
                k += 1;
            }
        }
        assert_eq!(k, rec.states.len());
    }

    #[test]
    fn ku_is_killed_and_recentred() {
        let m = bench();
        let cfg = SimConfig { sigma: 0.1, dt: 1e-3, ..Default::default() };
        let rec = sample_poincare_chain(&m, &cfg, 0.1, Variant::Ku, 200, 2).unwrap();
        assert!(rec.killed_at.is_some());
        assert!(rec.states.iter().all(|&x| x > 0.0 && x < 0.2));
    }
}

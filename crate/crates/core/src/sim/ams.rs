//! Adaptive multilevel splitting for exits at small noise, where direct
//! simulation would need of order `e^{I/σ²}` periods per exit.
//!
//! Excursions start from entrance points recorded along one long equilibrium
//! path: upward crossings of `r = -1 + σ/2` following a visit to `r ≤ -1`.
//! Each particle runs until it exits through the unstable orbit or falls back
//! to `r ≤ -1`. At every iteration the particles with the lowest running
//! maxima are killed and replaced by branches of survivors at the killing
//! level. The final ensemble consists of exits carrying equal weight `p̂/N`,
//! where `p̂` estimates the probability that an excursion exits.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::exit::{lerp, upward_crossing};
use super::rng::{rng_from_seed, stream_seed_n};
use super::{aux_rng, SimConfig, State, Stepper};
use crate::error::{Error, Result};
use crate::model::PolarModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AmsConfig {
    pub n_particles: usize,
    /// Fraction of particles killed per iteration.
    pub kill_fraction: f64,
    /// Minimal rise of the running maximum between stored branch points.
    pub record_spacing: f64,
    /// Length of the equilibrium path, in periods.
    pub equilibrium_phases: f64,
    pub max_iterations: usize,
}

impl Default for AmsConfig {
    fn default() -> Self {
        Self { n_particles: 10_000, kill_fraction: 0.01, record_spacing: 0.02, equilibrium_phases: 2000.0, max_iterations: 1_000_000 }
    }
}

/// Start point of an excursion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Entrance {
    pub r: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Entrances {
    pub points: Vec<Entrance>,
    /// Entrances per unit phase along the equilibrium path.
    pub rate: f64,
    pub level: f64,
    /// Exits of the equilibrium path itself (restarted at `r = -1`).
    pub restarts: usize,
}

/// Records entrance points along an equilibrium path of `phases` periods.
pub fn equilibrium_entrances(model: &PolarModel, cfg: &SimConfig, phases: f64, seed: u64) -> Result<Entrances> {
    let st = Stepper::new(model, cfg.sigma, cfg.dt);
    let level = -1.0 + 0.5 * cfg.sigma;
    let mut rng = rng_from_seed(seed);
    let mut s = State { r: -1.0, phi: 0.0, t: 0.0 };
    let mut armed = true;
    let mut points = Vec::new();
    let mut restarts = 0;
    while s.phi < phases {
        st.step(&mut s, &mut rng);
        if s.r >= cfg.exit_level() {
            restarts += 1;
            s.r = -1.0;
            armed = true;
            continue;
        }
        st.check_domain(&s, seed)?;
        if s.r <= -1.0 {
            armed = true;
        } else if armed && s.r >= level {
            armed = false;
            points.push(Entrance { r: s.r, phi: s.phi });
        }
    }
    if points.is_empty() {
        return Err(Error::InsufficientData("no entrance recorded along the equilibrium path".into()));
    }
    Ok(Entrances { rate: points.len() as f64 / phases, points, level, restarts })
}

#[derive(Debug, Clone, Copy)]
struct Rec {
    r: f64,
    phi: f64,
    t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmsExit {
    /// Absolute exit phase (entrance phase plus elapsed phase).
    pub phi_tau: f64,
    pub entrance_phi: f64,
    pub phi_tau_minus: Option<f64>,
    /// Time elapsed since the entrance.
    pub elapsed_time: f64,
}

#[derive(Debug, Clone)]
struct Particle {
    records: Vec<Rec>,
    max: f64,
    entrance_phi: f64,
    phi_minus: Option<f64>,
    exit: Option<AmsExit>,
}

struct Runner<'a> {
    st: Stepper<'a>,
    cfg: &'a SimConfig,
    spacing: f64,
    level_a: f64,
}

impl Runner<'_> {
    /// Continues a particle from its last record until exit or fall-back.
    fn run(&self, p: &mut Particle, seed: u64) -> Result<()> {
        let start = *p.records.last().expect("particle has a record");
        let mut s = State { r: start.r, phi: start.phi, t: start.t };
        let mut rng = rng_from_seed(seed);
        let mut aux = aux_rng(seed);
        let level = self.cfg.exit_level();
        let level_minus = 1.0 - self.cfg.delta;
        let mut last = start.r;
        let mut peak: Option<Rec> = None;
        let cap = s.phi + self.cfg.max_phase;
        let result = loop {
            let a = s;
            let var = self.st.step(&mut s, &mut rng);
            self.st.check_domain(&s, seed)?;
            if p.phi_minus.is_none() {
                if let Some(al) = upward_crossing(&a, &s, level_minus, var, self.cfg, &mut aux) {
                    p.phi_minus = Some(lerp(a.phi, s.phi, al));
                }
            }
            if let Some(al) = upward_crossing(&a, &s, level, var, self.cfg, &mut aux) {
                let phi = lerp(a.phi, s.phi, al);
                p.max = f64::INFINITY;
                p.exit = Some(AmsExit {
                    phi_tau: phi,
                    entrance_phi: p.entrance_phi,
                    phi_tau_minus: p.phi_minus.or(Some(phi)),
                    elapsed_time: lerp(a.t, s.t, al),
                });
                break Ok(());
            }
            if s.r <= self.level_a || s.phi >= cap {
                break Ok(());
            }
            if s.r > p.max {
                p.max = s.r;
                let rec = Rec { r: s.r, phi: s.phi, t: s.t };
                if s.r > last + self.spacing {
                    last = s.r;
                    p.records.push(rec);
                    peak = None;
                } else {
                    peak = Some(rec);
                }
            }
        };
        // The state attaining the running maximum is always a branch point.
        if let Some(rec) = peak {
            p.records.push(rec);
        }
        result
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AmsResult {
    /// Estimated probability that an excursion exits.
    pub p_hat: f64,
    /// `sqrt(-ln p̂ / N)`, the asymptotic relative standard error.
    pub relative_se: f64,
    pub n_particles: usize,
    pub iterations: usize,
    pub entrance_rate: f64,
    pub n_entrances: usize,
    /// `exp(-ν p̂)`: per-period survival implied by the exit rate.
    pub lambda0: f64,
    pub extinct: bool,
    /// Exits of the final ensemble, each of weight `p̂ / N`.
    pub exits: Vec<AmsExit>,
}

/// Runs adaptive multilevel splitting with `ams.n_particles` particles.
/// Results depend only on the seeds, not on the thread count.
pub fn run_ams(model: &PolarModel, cfg: &SimConfig, ams: &AmsConfig, entrances: &Entrances) -> Result<AmsResult> {
    cfg.validate(model)?;
    let n = ams.n_particles;
    if n < 2 || !(ams.kill_fraction > 0.0 && ams.kill_fraction < 1.0) {
        return Err(Error::InvalidInput("AMS needs at least two particles and a kill fraction in (0, 1)".into()));
    }
    let k = ((ams.kill_fraction * n as f64).round() as usize).max(1);
    let runner = Runner { st: Stepper::new(model, cfg.sigma, cfg.dt), cfg, spacing: ams.record_spacing, level_a: -1.0 };
    let master = cfg.master_seed;

    let mut pick = rng_from_seed(stream_seed_n(master, &[0xA5, 0]));
    let starts: Vec<Entrance> = (0..n).map(|_| entrances.points[pick.random_range(0..entrances.points.len())]).collect();
    let mut particles: Vec<Particle> = starts
        .into_par_iter()
        .enumerate()
        .map(|(i, e)| {
            let mut p = Particle {
                records: vec![Rec { r: e.r, phi: e.phi, t: 0.0 }],
                max: e.r,
                entrance_phi: e.phi,
                phi_minus: None,
                exit: None,
            };
            runner.run(&mut p, stream_seed_n(master, &[0xA5, 1, i as u64])).map(|_| p)
        })
        .collect::<Result<_>>()?;

    let mut p_hat = 1.0;
    let mut iterations = 0;
    let mut extinct = false;
    let mut maxima = Vec::with_capacity(n);
    while particles.iter().any(|p| p.exit.is_none()) {
        if iterations >= ams.max_iterations {
            return Err(Error::NonConvergence(format!("AMS did not finish in {iterations} iterations")));
        }
        iterations += 1;
        maxima.clear();
        maxima.extend(particles.iter().filter(|p| p.exit.is_none()).map(|p| p.max));
        let z = if maxima.len() <= k {
            maxima.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        } else {
            *maxima.select_nth_unstable_by(k - 1, f64::total_cmp).1
        };
        let killed: Vec<usize> = (0..n).filter(|&i| particles[i].max <= z).collect();
        let survivors: Vec<usize> = (0..n).filter(|&i| particles[i].max > z).collect();
        if survivors.is_empty() {
            extinct = true;
            p_hat = 0.0;
            break;
        }
        p_hat *= 1.0 - killed.len() as f64 / n as f64;
        let mut pick = rng_from_seed(stream_seed_n(master, &[0xA5, 2, iterations as u64]));
        let clones: Vec<(usize, Particle)> = killed
            .iter()
            .map(|&slot| {
                let parent = &particles[survivors[pick.random_range(0..survivors.len())]];
                let Some(&rec) = parent.records.iter().find(|r| r.r > z) else {
                    // Exited in one step from below the level: the branch is the exit itself.
                    return (slot, parent.clone());
                };
                let inherit = rec.r >= 1.0 - cfg.delta;
                let clone = Particle {
                    records: vec![rec],
                    max: rec.r,
                    entrance_phi: parent.entrance_phi,
                    phi_minus: if inherit { parent.phi_minus } else { None },
                    exit: None,
                };
                (slot, clone)
            })
            .collect();
        let clones: Vec<(usize, Particle)> = clones
            .into_par_iter()
            .map(|(slot, mut p)| {
                if p.exit.is_some() {
                    return Ok((slot, p));
                }
                runner.run(&mut p, stream_seed_n(master, &[0xA5, 3, iterations as u64, slot as u64])).map(|_| (slot, p))
            })
            .collect::<Result<_>>()?;
        for (slot, p) in clones {
            particles[slot] = p;
        }
        for p in particles.iter_mut() {
            let keep = p.records.iter().position(|r| r.r > z).unwrap_or(p.records.len());
            if keep > 0 && keep < p.records.len() {
                p.records.drain(..keep);
            }
        }
    }
    let exits: Vec<AmsExit> = particles.iter().filter_map(|p| p.exit).collect();
    Ok(AmsResult {
        p_hat,
        relative_se: if p_hat > 0.0 { (-p_hat.ln() / n as f64).sqrt() } else { f64::NAN },
        n_particles: n,
        iterations,
        entrance_rate: entrances.rate,
        n_entrances: entrances.points.len(),
        lambda0: (-entrances.rate * p_hat).exp(),
        extinct,
        exits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BenchmarkParams;

    #[test]
    fn splitting_agrees_with_direct_simulation() {
        let m = PolarModel::benchmark(BenchmarkParams::default()).unwrap();
        let cfg = SimConfig { sigma: 0.5, dt: 2e-3, master_seed: 9, max_phase: 100.0, ..Default::default() };
        let ent = equilibrium_entrances(&m, &cfg, 200.0, 1).unwrap();
        let res = run_ams(&m, &cfg, &AmsConfig { n_particles: 400, kill_fraction: 0.05, ..Default::default() }, &ent).unwrap();
        assert_eq!(res.exits.len(), 400);
        let runner = Runner { st: Stepper::new(&m, cfg.sigma, cfg.dt), cfg: &cfg, spacing: 0.02, level_a: -1.0 };
        let trials = 20_000;
        let hits = (0..trials)
            .filter(|&i| {
                let e = ent.points[i % ent.points.len()];
                let mut p = Particle { records: vec![Rec { r: e.r, phi: e.phi, t: 0.0 }], max: e.r, entrance_phi: e.phi, phi_minus: None, exit: None };
                runner.run(&mut p, 1_000_000 + i as u64).unwrap();
                p.exit.is_some()
            })
            .count();
        let direct = hits as f64 / trials as f64;
        let se = (direct * (1.0 - direct) / trials as f64).sqrt().hypot(res.p_hat * res.relative_se * 2.0);
        assert!((res.p_hat - direct).abs() < 3.0 * se, "ams {} direct {direct} se {se}", res.p_hat);
    }
}

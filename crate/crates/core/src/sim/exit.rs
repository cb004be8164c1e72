use std::io::Write as _;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::rng::{rng_from_seed, stream_seed, RNG_VARIANT};
use super::{aux_rng, bridge_probability, SimConfig, SimRng, State, Stepper};
use crate::error::{Error, Result};
use crate::model::PolarModel;

/// First exit of one path through the unstable orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExitSample {
    pub path_index: u64,
    pub phi_tau: f64,
    pub winding: i64,
    pub fraction: f64,
    pub tau_time: f64,
    pub phi_tau_minus: Option<f64>,
    pub censored: bool,
}

impl ExitSample {
    fn new(path_index: u64, phi: f64, t: f64, phi_minus: Option<f64>, censored: bool) -> Self {
        let phi_tau = phi.max(0.0);
        let winding = phi_tau.floor();
        Self {
            path_index,
            phi_tau,
            winding: winding as i64,
            fraction: phi_tau - winding,
            tau_time: t,
            phi_tau_minus: phi_minus.map(|p| p.max(0.0).min(phi_tau)),
            censored,
        }
    }
}

/// Crossing of `level` from below during a step from `a` to `b`, as the
/// fraction of the step at which it happened. Uses the bridge test when the
/// endpoints stay below.
#[inline]
pub(crate) fn upward_crossing(
    a: &State,
    b: &State,
    level: f64,
    var: f64,
    cfg: &SimConfig,
    aux: &mut SimRng,
) -> Option<f64> {
    if b.r >= level {
        let alpha = if cfg.refine && b.r > a.r { ((level - a.r) / (b.r - a.r)).clamp(0.0, 1.0) } else { 1.0 };
        return Some(alpha);
    }
    if cfg.bridge && var > 0.0 {
        let (d0, d1) = (level - a.r, level - b.r);
        let p = bridge_probability(d0, d1, var);
        if p > 0.0 && aux.random::<f64>() < p {
            return Some(if cfg.refine { d0 / (d0 + d1) } else { 1.0 });
        }
    }
    None
}

#[inline]
pub(crate) fn lerp(a: f64, b: f64, alpha: f64) -> f64 {
    a + alpha * (b - a)
}

/// Runs one path from `(r0, φ0)` until exit, censoring, or `stop` returning true
/// (reported as censored).
pub(crate) fn run_exit(
    st: &Stepper,
    cfg: &SimConfig,
    r0: f64,
    phi0: f64,
    seed: u64,
    path_index: u64,
    mut stop: impl FnMut(&State) -> bool,
) -> Result<ExitSample> {
    let level = cfg.exit_level();
    let level_minus = 1.0 - cfg.delta;
    let mut s = State { r: r0, phi: phi0, t: 0.0 };
    if r0 >= level {
        return Ok(ExitSample::new(path_index, phi0, 0.0, Some(phi0), false));
    }
    let mut phi_minus = if r0 >= level_minus { Some(phi0) } else { None };
    let mut rng = rng_from_seed(seed);
    let mut aux = aux_rng(seed);
    let cap = phi0 + cfg.max_phase;
    loop {
        let a = s;
        let var = st.step(&mut s, &mut rng);
        st.check_domain(&s, path_index)?;
        if phi_minus.is_none() {
            if let Some(al) = upward_crossing(&a, &s, level_minus, var, cfg, &mut aux) {
                phi_minus = Some(lerp(a.phi, s.phi, al));
            }
        }
        if let Some(al) = upward_crossing(&a, &s, level, var, cfg, &mut aux) {
            let phi = lerp(a.phi, s.phi, al);
            return Ok(ExitSample::new(path_index, phi, lerp(a.t, s.t, al), phi_minus.or(Some(phi)), false));
        }
        if s.phi >= cap || stop(&s) {
            return Ok(ExitSample::new(path_index, s.phi, s.t, phi_minus, true));
        }
    }
}

/// First exit of the path with stream seed `seed`, started at `(r0, 0)`.
pub fn sample_exit(model: &PolarModel, cfg: &SimConfig, r0: f64, seed: u64) -> Result<ExitSample> {
    check_start(model, r0)?;
    run_exit(&Stepper::new(model, cfg.sigma, cfg.dt), cfg, r0, 0.0, seed, 0, |_| false)
}

fn check_start(model: &PolarModel, r0: f64) -> Result<()> {
    if !(r0 > -model.half_width && r0.is_finite()) {
        return Err(Error::InvalidInput(format!("r0 = {r0} outside (-{}, 1]", model.half_width)));
    }
    Ok(())
}

/// Counts and histogram of a batch.
#[derive(Debug, Clone, Serialize)]
pub struct BatchSummary {
    pub count: usize,
    pub exits: usize,
    pub censored: usize,
    pub mean_winding: f64,
    /// Exit counts of `fraction` over equal bins of `[0, 1)`.
    pub fraction_histogram: Vec<usize>,
}

impl BatchSummary {
    pub fn from_samples(samples: &[ExitSample], bins: usize) -> Self {
        let bins = bins.max(1);
        let mut hist = vec![0usize; bins];
        let mut exits = 0;
        let mut wind = 0.0;
        for s in samples.iter().filter(|s| !s.censored) {
            exits += 1;
            wind += s.winding as f64;
            hist[((s.fraction * bins as f64) as usize).min(bins - 1)] += 1;
        }
        Self {
            count: samples.len(),
            exits,
            censored: samples.len() - exits,
            mean_winding: if exits > 0 { wind / exits as f64 } else { f64::NAN },
            fraction_histogram: hist,
        }
    }
}

/// Metadata written next to a sample dump.
#[derive(Debug, Clone, Serialize)]
pub struct SampleMeta {
    pub master_seed: u64,
    pub dt: f64,
    pub sigma: f64,
    pub delta: f64,
    pub exit_offset: f64,
    pub r0: f64,
    pub n_paths: usize,
    pub model: String,
    pub scheme: String,
    pub rng: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Batch {
    pub samples: Vec<ExitSample>,
    pub summary: BatchSummary,
    pub meta: SampleMeta,
}

pub(crate) fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Samples `n_paths` exits; path `i` uses the stream `stream_seed(master_seed, i)`.
/// `threads` only changes wall time.
pub fn batch_sample(
    model: &PolarModel,
    cfg: &SimConfig,
    r0: f64,
    n_paths: usize,
    threads: Option<usize>,
) -> Result<Batch> {
    cfg.validate(model)?;
    check_start(model, r0)?;
    if n_paths == 0 {
        return Err(Error::InvalidInput("n_paths must be at least 1".into()));
    }
    let st = Stepper::new(model, cfg.sigma, cfg.dt);
    let results: Vec<Result<ExitSample>> = with_threads(threads, || {
        (0..n_paths as u64)
            .into_par_iter()
            .map(|i| run_exit(&st, cfg, r0, 0.0, stream_seed(cfg.master_seed, i), i, |_| false))
            .collect()
    })?;
    let samples = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(Batch {
        summary: BatchSummary::from_samples(&samples, 50),
        meta: SampleMeta {
            master_seed: cfg.master_seed,
            dt: cfg.dt,
            sigma: cfg.sigma,
            delta: cfg.delta,
            exit_offset: cfg.exit_offset,
            r0,
            n_paths,
            model: model.name.clone(),
            scheme: "euler-maruyama".into(),
            rng: RNG_VARIANT.into(),
        },
        samples,
    })
}

/// Formats a float with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV dump with header `path_index,phi_tau,winding,fraction,phi_tau_minus,tau_time,censored`.
pub fn write_samples_csv(path: &Path, samples: &[ExitSample]) -> Result<()> {
    let io = |e| Error::Io { path: path.display().to_string(), source: e };
    let mut w = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    writeln!(w, "path_index,phi_tau,winding,fraction,phi_tau_minus,tau_time,censored").map_err(io)?;
    for s in samples {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            s.path_index,
            fmt17(s.phi_tau),
            s.winding,
            fmt17(s.fraction),
            s.phi_tau_minus.map(fmt17).unwrap_or_default(),
            fmt17(s.tau_time),
            s.censored
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BenchmarkParams;

    fn bench() -> PolarModel {
        PolarModel::benchmark(BenchmarkParams::default()).unwrap()
    }

    #[test]
    fn start_on_orbit_exits_immediately() {
        let s = sample_exit(&bench(), &SimConfig::default(), 1.0, 3).unwrap();
        assert_eq!((s.phi_tau, s.winding, s.censored), (0.0, 0, false));
    }

    #[test]
    fn samples_satisfy_invariants() {
        let m = bench();
        let cfg = SimConfig { sigma: 0.5, dt: 2e-3, max_phase: 50.0, ..Default::default() };
        let b = batch_sample(&m, &cfg, 0.5, 64, Some(1)).unwrap();
        for s in &b.samples {
            assert_eq!(s.winding as f64 + s.fraction, s.phi_tau);
            assert!((0.0..1.0).contains(&s.fraction));
            if let Some(pm) = s.phi_tau_minus {
                assert!(pm <= s.phi_tau);
            }
        }
        assert_eq!(b.summary.count, 64);
        let one = batch_sample(&m, &cfg, 0.5, 1, None).unwrap();
        assert_eq!(one.samples[0], b.samples[0]);
        let direct = sample_exit(&m, &cfg, 0.5, stream_seed(cfg.master_seed, 0)).unwrap();
        assert_eq!(direct, b.samples[0]);
    }
}

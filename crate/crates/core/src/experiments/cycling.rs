//! Exit-phase experiments: the wrapped cycling histogram against its profile,
//! the σ sweep of its peak, and the landing profile of the descent.

use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use super::analysis::{
    circular_mode, fit_offset, fit_survival_decay, geometric_window, ks_distance, linear_fit, overlay_peak, phase_distance,
    resultant_length, wrapped_histogram, ProfileCdf, WindowFit,
};
use super::config::{ExperimentConfig, Provenance, SamplingMethod};
use super::{create_dir, io_err, resolve_s_star, write_json, SStarSource};
use crate::error::{Error, Result};
use crate::model::PolarModel;
use crate::numerics::{circ_diff, frac, quad};
use crate::sim::exit::with_threads;
use crate::sim::rng::stream_seed_n;
use crate::sim::{batch_sample, equilibrium_entrances, fmt17, run_ams, write_samples_csv, AmsConfig, ExitSample, SimConfig};
use crate::theory::{cycling_profile, TheoryContext, DEFAULT_SERIES_TOL};

/// Below this many exits a report is flagged low-confidence.
pub const LOW_CONFIDENCE_EXITS: usize = 1000;
pub const MAX_CENSORED_FRACTION: f64 = 0.1;
/// Aligned KS distance accepted between histogram and profile.
pub const KS_TOLERANCE: f64 = 0.05;
/// Accepted distance between the descent landing mode and `s*`.
pub const DESCENT_TOLERANCE: f64 = 0.1;
/// Resultant length below which a landing profile counts as flat.
pub const FLAT_RESULTANT: f64 = 0.05;
/// Accepted error of a pairwise peak shift, in periods.
pub const SHIFT_TOLERANCE: f64 = 0.1;
/// Accepted deviation of the sweep slope from 1.
pub const SLOPE_TOLERANCE: f64 = 0.15;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub standard_error: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct HistogramBin {
    pub bin_left: f64,
    pub mass: f64,
    /// Profile mass of the bin at the predicted centre `|log σ|/(λT)`.
    pub theory_overlay: f64,
    /// Profile mass after the fitted offset.
    pub theory_aligned: f64,
}

/// Geometric decay of the unwrapped exit phase.
#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    /// First winding of the fit, `⌈5|log σ|⌉`.
    pub n_min: u64,
    pub n_end: u64,
    pub lambda0: Estimate,
    /// Censored-geometric ratio over `[n_min, n_end)`.
    pub pooled: Option<WindowFit>,
    /// Two disjoint halves of `[n_min, n_end)`.
    pub windows: Vec<WindowFit>,
    /// Halves agree within 2 combined standard errors.
    pub windows_agree: Option<bool>,
    /// Pooled ratio equals the log-linear λ0 within 2 standard errors.
    pub ratio_matches_fit: Option<bool>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AmsSummary {
    pub p_hat: f64,
    pub relative_se: f64,
    pub n_particles: usize,
    pub iterations: usize,
    /// Excursions per period along the equilibrium path.
    pub entrance_rate: f64,
    pub n_entrances: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DescentExpectation {
    /// Landing phases concentrate near `s*`.
    Concentrated,
    /// No minimiser: landing phases are uniform.
    Flat,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DescentBin {
    pub bin_left: f64,
    pub mass: f64,
    /// `-σ² log(mass)` shifted to minimum 0; absent for empty bins.
    pub j_proxy: Option<f64>,
}

/// Landing profile of `frac(φ_{τ₋})`.
#[derive(Debug, Clone, Serialize)]
pub struct DescentReport {
    pub model: String,
    pub sigma: f64,
    pub delta: f64,
    pub n: usize,
    pub s_star: f64,
    pub s_star_source: SStarSource,
    pub expectation: DescentExpectation,
    pub bins: Vec<DescentBin>,
    pub mode: f64,
    pub mode_distance: f64,
    pub j_proxy_argmin: f64,
    pub resultant_length: f64,
    pub low_confidence: bool,
    pub passed: bool,
}

impl DescentReport {
    fn new(values: &[f64], sigma: f64, bin_width: f64, s_star: f64, source: SStarSource, model: &str, delta: f64) -> Self {
        let mass = wrapped_histogram(values, bin_width);
        let n_bins = mass.len();
        let mode = circular_mode(&mass, 2);
        let raw: Vec<Option<f64>> = mass.iter().map(|&m| (m > 0.0).then(|| -sigma * sigma * m.ln())).collect();
        let floor = raw.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        let bins: Vec<DescentBin> = mass
            .iter()
            .zip(&raw)
            .enumerate()
            .map(|(i, (&m, j))| DescentBin { bin_left: i as f64 / n_bins as f64, mass: m, j_proxy: j.map(|v| v - floor) })
            .collect();
        let argmin = bins.iter().position(|b| b.j_proxy == Some(0.0)).unwrap_or(0);
        let expectation = if source == SStarSource::Absent { DescentExpectation::Flat } else { DescentExpectation::Concentrated };
        let resultant = resultant_length(values);
        let mode_distance = phase_distance(mode, s_star);
        let passed = match expectation {
            DescentExpectation::Concentrated => mode_distance <= DESCENT_TOLERANCE,
            DescentExpectation::Flat => resultant < FLAT_RESULTANT,
        };
        Self {
            model: model.into(),
            sigma,
            delta,
            n: values.len(),
            s_star,
            s_star_source: source,
            expectation,
            bins,
            mode,
            mode_distance,
            j_proxy_argmin: (argmin as f64 + 0.5) / n_bins as f64,
            resultant_length: resultant,
            low_confidence: values.len() < LOW_CONFIDENCE_EXITS,
            passed,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.passed || self.low_confidence {
            return Ok(());
        }
        Err(Error::ToleranceExceeded(match self.expectation {
            DescentExpectation::Concentrated => {
                format!("descent mode {:.4} is {:.4} from s* = {:.4}", self.mode, self.mode_distance, self.s_star)
            }
            DescentExpectation::Flat => format!("landing profile not flat: resultant length {:.4}", self.resultant_length),
        }))
    }
}

/// Everything fitted from one batch of exits at one noise level.
#[derive(Debug, Clone, Serialize)]
pub struct CyclingReport {
    pub model: String,
    pub sigma: f64,
    pub delta: f64,
    pub bin_width: f64,
    pub method: SamplingMethod,
    pub lambda_t: f64,
    /// Predicted profile centre `|log σ|/(λT)`.
    pub shift: f64,
    pub s_star: f64,
    pub s_star_source: SStarSource,
    pub n_launched: usize,
    pub n_exits: usize,
    pub n_censored: usize,
    pub censored_fraction: f64,
    /// Phase cap used by direct paths.
    pub max_phase: f64,
    pub low_confidence: bool,
    pub histogram: Vec<HistogramBin>,
    pub ks_raw: f64,
    pub ks_aligned: f64,
    /// Fitted offset `c` of the profile centre, in periods.
    pub offset: f64,
    /// Peak of the aligned profile.
    pub peak: f64,
    /// Peak of the unaligned profile.
    pub peak_theory: f64,
    /// Mode of the histogram itself (3-bin circular smoothing).
    pub histogram_peak: f64,
    pub lambda0: Estimate,
    pub c0: f64,
    pub decay: Option<DecayFit>,
    pub ams: Option<AmsSummary>,
    pub descent: DescentReport,
    pub ks_passed: bool,
    pub provenance: Provenance,
}

/// A report together with the samples it was computed from.
#[derive(Debug, Clone)]
pub struct CyclingRun {
    pub report: CyclingReport,
    pub samples: Vec<ExitSample>,
}

impl CyclingRun {
    /// Writes `samples.csv`, `histogram.csv`, `descent.csv`, `report.json` and `meta.json`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        create_dir(dir)?;
        write_samples_csv(&dir.join("samples.csv"), &self.samples)?;
        let r = &self.report;
        let path = dir.join("histogram.csv");
        let mut text = String::from("bin_left,mass,theory_overlay,theory_aligned\n");
        for b in &r.histogram {
            text += &format!("{},{},{},{}\n", fmt17(b.bin_left), fmt17(b.mass), fmt17(b.theory_overlay), fmt17(b.theory_aligned));
        }
        std::fs::write(&path, text).map_err(io_err(&path))?;
        let path = dir.join("descent.csv");
        let mut f = std::io::BufWriter::new(std::fs::File::create(&path).map_err(io_err(&path))?);
        writeln!(f, "bin_left,mass,j_proxy").map_err(io_err(&path))?;
        for b in &r.descent.bins {
            writeln!(f, "{},{},{}", fmt17(b.bin_left), fmt17(b.mass), b.j_proxy.map(fmt17).unwrap_or_default()).map_err(io_err(&path))?;
        }
        f.flush().map_err(io_err(&path))?;
        write_json(&dir.join("report.json"), r)?;
        write_json(&dir.join("meta.json"), &r.provenance)
    }
}

struct Sampled {
    samples: Vec<ExitSample>,
    max_phase: f64,
    lambda0: Option<Estimate>,
    ams: Option<AmsSummary>,
}

/// Phase cap `50/|log λ0|`, with λ0 guessed from the mean winding of a pilot batch.
fn pilot_cap(model: &PolarModel, sim: &SimConfig, r0: f64, n: usize, threads: Option<usize>) -> Result<f64> {
    let pilot = SimConfig { max_phase: 1e4, ..*sim };
    let b = batch_sample(model, &pilot, r0, n, threads)?;
    let exits: Vec<f64> = b.samples.iter().filter(|s| !s.censored).map(|s| s.winding as f64).collect();
    if exits.is_empty() {
        return Ok(1e4);
    }
    let m = exits.iter().sum::<f64>() / exits.len() as f64;
    let lambda0 = m / (1.0 + m);
    Ok(if lambda0 > 0.0 { (50.0 / lambda0.ln().abs()).clamp(50.0, 1e4) } else { 50.0 })
}

fn sample(model: &PolarModel, cfg: &ExperimentConfig, sigma: f64, threads: Option<usize>) -> Result<Sampled> {
    let mut sim = cfg.sim_config(sigma);
    match cfg.method {
        SamplingMethod::Direct => {
            if cfg.max_phase.is_none() {
                sim.max_phase = pilot_cap(model, &sim, cfg.r0, cfg.paths.min(256), threads)?;
            }
            let b = batch_sample(model, &sim, cfg.r0, cfg.paths, threads)?;
            Ok(Sampled { samples: b.samples, max_phase: sim.max_phase, lambda0: None, ams: None })
        }
        SamplingMethod::Ams => {
            sim.validate(model)?;
            let ams = AmsConfig { n_particles: cfg.paths, ..cfg.ams };
            let res = with_threads(threads, || -> Result<_> {
                let ent = equilibrium_entrances(model, &sim, ams.equilibrium_phases, stream_seed_n(cfg.seed, &[0xE7, sigma.to_bits()]))?;
                run_ams(model, &sim, &ams, &ent)
            })??;
            if res.extinct {
                return Err(Error::InsufficientExits(format!("splitting went extinct after {} iterations", res.iterations)));
            }
            let samples = res
                .exits
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    let w = e.phi_tau.floor();
                    ExitSample {
                        path_index: i as u64,
                        phi_tau: e.phi_tau,
                        winding: w as i64,
                        fraction: e.phi_tau - w,
                        tau_time: e.elapsed_time,
                        phi_tau_minus: e.phi_tau_minus,
                        censored: false,
                    }
                })
                .collect();
            let rate = res.entrance_rate * res.p_hat;
            Ok(Sampled {
                samples,
                max_phase: sim.max_phase,
                lambda0: Some(Estimate { value: res.lambda0, standard_error: res.lambda0 * rate * res.relative_se }),
                ams: Some(AmsSummary {
                    p_hat: res.p_hat,
                    relative_se: res.relative_se,
                    n_particles: res.n_particles,
                    iterations: res.iterations,
                    entrance_rate: res.entrance_rate,
                    n_entrances: res.n_entrances,
                }),
            })
        }
    }
}

fn decay_fit(samples: &[ExitSample], sigma: f64) -> Option<DecayFit> {
    let n_min = (5.0 * sigma.ln().abs()).ceil() as u64;
    let windings: Vec<(u64, bool)> = samples.iter().map(|s| (s.winding.max(0) as u64, s.censored)).collect();
    let plain: Vec<u64> = windings.iter().map(|w| w.0).collect();
    let (lambda0, se) = fit_survival_decay(&plain, n_min, 50).ok()?;
    let floor = 50.max(samples.len() / 100);
    let mut n_end = n_min;
    while plain.iter().filter(|&&w| w >= n_end).count() >= floor {
        n_end += 1;
    }
    let pooled = geometric_window(&windings, n_min, n_end).ok();
    let mut windows = Vec::new();
    if n_end >= n_min + 4 {
        let mid = (n_min + n_end) / 2;
        windows.extend(geometric_window(&windings, n_min, mid).ok());
        windows.extend(geometric_window(&windings, mid, n_end).ok());
    }
    let windows_agree = (windows.len() == 2).then(|| {
        let (a, b) = (&windows[0], &windows[1]);
        (a.ratio - b.ratio).abs() <= 2.0 * a.standard_error.hypot(b.standard_error)
    });
    let ratio_matches_fit = pooled.map(|p| (p.ratio - lambda0).abs() <= 2.0 * p.standard_error.hypot(se));
    Some(DecayFit {
        n_min,
        n_end,
        lambda0: Estimate { value: lambda0, standard_error: se },
        pooled,
        windows,
        windows_agree,
        ratio_matches_fit,
    })
}

/// `C0` normalising `Σ_n ∫ C0 λ0^{n+s} Q(shift - s) ds` to 1.
fn normalisation(lambda_t: f64, shift: f64, lambda0: f64) -> Result<f64> {
    if !(lambda0 < 1.0) {
        return Ok(lambda_t);
    }
    let q = quad::integrate(|s| lambda0.powf(s) * cycling_profile(lambda_t, shift - s, DEFAULT_SERIES_TOL), 0.0, 1.0, 1e-14, 1e-12)?;
    Ok((1.0 - lambda0) / q.value)
}

fn analyse(
    model: &PolarModel,
    cfg: &ExperimentConfig,
    sigma: f64,
    sampled: Sampled,
    s_star: f64,
    source: SStarSource,
) -> Result<CyclingRun> {
    let samples = sampled.samples;
    let n_launched = samples.len();
    let exits: Vec<&ExitSample> = samples.iter().filter(|s| !s.censored).collect();
    let n_censored = n_launched - exits.len();
    let censored_fraction = n_censored as f64 / n_launched.max(1) as f64;
    if exits.is_empty() || censored_fraction > MAX_CENSORED_FRACTION {
        return Err(Error::InsufficientExits(format!(
            "{n_censored} of {n_launched} paths censored at phase {} (limit {:.0}%)",
            sampled.max_phase,
            100.0 * MAX_CENSORED_FRACTION
        )));
    }
    let ctx = TheoryContext::from_model(model, cfg.delta, s_star)?;
    let lt = ctx.lambda_t;
    let table = ctx.tabulate(2048)?;
    let shift = ctx.shift(sigma);
    let mut ts: Vec<f64> = exits.iter().map(|s| frac(table.theta(s.phi_tau) / lt)).collect();
    ts.sort_by(f64::total_cmp);
    let mass = wrapped_histogram(&ts, cfg.bin_width);
    let nb = mass.len();
    let w = 1.0 / nb as f64;
    let profile = ProfileCdf::new(lt);
    let ks_raw = ks_distance(&ts, &profile, shift);
    let (offset, ks_aligned) = fit_offset(&ts, &profile, shift);
    let bin_mass = |centre: f64, left: f64| profile.cdf(centre, left + w) - profile.cdf(centre, left);
    let histogram = mass
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let left = i as f64 * w;
            HistogramBin { bin_left: left, mass: m, theory_overlay: bin_mass(shift, left), theory_aligned: bin_mass(shift + offset, left) }
        })
        .collect();

    let decay = if cfg.method == SamplingMethod::Direct { decay_fit(&samples, sigma) } else { None };
    let lambda0 = match (sampled.lambda0, &decay) {
        (Some(e), _) => e,
        (None, Some(d)) => d.lambda0,
        (None, None) => {
            let w: Vec<(u64, bool)> = samples.iter().map(|s| (s.winding.max(0) as u64, s.censored)).collect();
            let max = w.iter().map(|x| x.0).max().unwrap_or(0);
            let g = geometric_window(&w, 0, max + 1)?;
            Estimate { value: g.ratio, standard_error: g.standard_error }
        }
    };
    let c0 = normalisation(lt, shift, lambda0.value)?;

    let minus: Vec<f64> = exits.iter().filter_map(|s| s.phi_tau_minus).map(frac).collect();
    let descent = DescentReport::new(&minus, sigma, cfg.bin_width, s_star, source, &model.name, cfg.delta);
    let report = CyclingReport {
        model: model.name.clone(),
        sigma,
        delta: cfg.delta,
        bin_width: cfg.bin_width,
        method: cfg.method,
        lambda_t: lt,
        shift,
        s_star,
        s_star_source: source,
        n_launched,
        n_exits: exits.len(),
        n_censored,
        censored_fraction,
        max_phase: sampled.max_phase,
        low_confidence: exits.len() < LOW_CONFIDENCE_EXITS,
        histogram,
        ks_raw,
        ks_aligned,
        offset,
        peak: overlay_peak(lt, shift + offset),
        peak_theory: overlay_peak(lt, shift),
        histogram_peak: circular_mode(&mass, 1),
        lambda0,
        c0,
        decay,
        ams: sampled.ams,
        descent,
        ks_passed: ks_aligned <= KS_TOLERANCE,
        provenance: Provenance::of(cfg),
    };
    Ok(CyclingRun { report, samples })
}

/// Cycling run at one noise level.
pub fn run_cycling_at(cfg: &ExperimentConfig, sigma: f64, threads: Option<usize>) -> Result<CyclingRun> {
    let model = cfg.model.build()?;
    let (s_star, source) = resolve_s_star(&model, cfg)?;
    let sampled = sample(&model, cfg, sigma, threads)?;
    analyse(&model, cfg, sigma, sampled, s_star, source)
}

/// Cycling run at the first configured noise level.
pub fn run_cycling(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<CyclingRun> {
    run_cycling_at(cfg, cfg.sigmas[0], threads)
}

/// Descent landing profile at the first configured noise level.
pub fn run_descent_profile(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<DescentReport> {
    run_cycling(cfg, threads).map(|r| r.report.descent)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepRow {
    pub sigma: f64,
    /// `|log σ|/(λT)`.
    pub shift: f64,
    pub peak: f64,
    /// Peak lifted by whole periods to follow the predicted translation.
    pub peak_unwrapped: f64,
    pub histogram_peak: f64,
    pub offset: f64,
    pub ks_aligned: f64,
    pub n_exits: usize,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PairShift {
    pub from_sigma: f64,
    pub to_sigma: f64,
    /// Circular displacement of the peak.
    pub shift: f64,
    /// `log(σ_from/σ_to)/(λT)` reduced to `[-½, ½)`.
    pub expected: f64,
    pub deviation: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub lambda_t: f64,
    pub rows: Vec<SweepRow>,
    pub pairs: Vec<PairShift>,
    pub slope: f64,
    pub slope_se: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
    pub passed: bool,
    pub provenance: Provenance,
}

impl SweepReport {
    pub fn check(&self) -> Result<()> {
        if self.passed {
            return Ok(());
        }
        Err(Error::ToleranceExceeded(format!(
            "peak translation: slope {:.4} ± {:.4}, pair deviations {:?}",
            self.slope,
            self.slope_se,
            self.pairs.iter().map(|p| p.deviation).collect::<Vec<_>>()
        )))
    }
}

/// Regresses the wrapped peak on `|log σ|/(λT)` over the configured noise levels.
pub fn run_sigma_sweep(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<(SweepReport, Vec<CyclingRun>)> {
    if cfg.sigmas.len() < 2 {
        return Err(Error::InsufficientData(format!("a sweep needs at least two noise levels, got {}", cfg.sigmas.len())));
    }
    let model = cfg.model.build()?;
    let (s_star, source) = resolve_s_star(&model, cfg)?;
    let mut runs = Vec::with_capacity(cfg.sigmas.len());
    for &sigma in &cfg.sigmas {
        let sampled = sample(&model, cfg, sigma, threads)?;
        runs.push(analyse(&model, cfg, sigma, sampled, s_star, source)?);
    }
    Ok((sweep_report(cfg, &runs)?, runs))
}

fn sweep_report(cfg: &ExperimentConfig, runs: &[CyclingRun]) -> Result<SweepReport> {
    let first = &runs[0].report;
    let lambda_t = first.lambda_t;
    let rows: Vec<SweepRow> = runs
        .iter()
        .map(|run| {
            let r = &run.report;
            let lift = ((r.shift - first.shift) - (r.peak - first.peak)).round();
            SweepRow {
                sigma: r.sigma,
                shift: r.shift,
                peak: r.peak,
                peak_unwrapped: r.peak + lift,
                histogram_peak: r.histogram_peak,
                offset: r.offset,
                ks_aligned: r.ks_aligned,
                n_exits: r.n_exits,
            }
        })
        .collect();
    let pairs: Vec<PairShift> = rows
        .windows(2)
        .map(|w| {
            let shift = circ_diff(w[1].peak, w[0].peak);
            let expected = circ_diff(w[1].shift, w[0].shift);
            let deviation = circ_diff(shift, expected);
            PairShift { from_sigma: w[0].sigma, to_sigma: w[1].sigma, shift, expected, deviation, passed: deviation.abs() <= SHIFT_TOLERANCE }
        })
        .collect();
    let x: Vec<f64> = rows.iter().map(|r| r.shift).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.peak_unwrapped).collect();
    let (intercept, slope, slope_se, residuals) = linear_fit(&x, &y)?;
    let passed = pairs.iter().all(|p| p.passed) && (rows.len() < 3 || (slope - 1.0).abs() <= SLOPE_TOLERANCE);
    Ok(SweepReport { lambda_t, rows, pairs, slope, slope_se, intercept, residuals, passed, provenance: Provenance::of(cfg) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descent_flat_and_concentrated() {
        let flat: Vec<f64> = (0..10_000).map(|i| (i as f64 + 0.5) / 10_000.0).collect();
        let r = DescentReport::new(&flat, 0.2, 0.02, 0.0, SStarSource::Absent, "m", 0.1);
        assert!(r.passed && r.resultant_length < 1e-9);
        let peaked: Vec<f64> = (0..5000).map(|i| frac(0.97 + 0.04 * (i as f64 / 5000.0 - 0.5))).collect();
        let r = DescentReport::new(&peaked, 0.2, 0.02, 0.98, SStarSource::Minimiser, "m", 0.1);
        assert!(r.passed, "{}", r.mode);
        let mass: f64 = r.bins.iter().map(|b| b.mass).sum();
        assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalisation_sums_to_one() {
        let (lt, shift, l0) = (1.0, 1.9, 0.8);
        let c0 = normalisation(lt, shift, l0).unwrap();
        let per = quad::integrate(|s| c0 * l0.powf(s) * cycling_profile(lt, shift - s, DEFAULT_SERIES_TOL), 0.0, 1.0, 1e-14, 1e-12).unwrap().value;
        assert!((per / (1.0 - l0) - 1.0).abs() < 1e-10);
    }
}

//! Smaller experiments: orbit analysis, theory tables, the large-deviation
//! minimiser and the Bernstein martingale diagnostic.

use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use super::config::{ExperimentConfig, Integrand, Provenance};
use super::{create_dir, io_err, write_json};
use crate::error::{Error, Result};
use crate::ldp::{find_heteroclinic, finite_time_action, write_path_csv, Candidate, HeteroclinicOptions};
use crate::model::orbit::det2;
use crate::model::{
    divergence_integral, find_periodic_orbit, lyapunov_exponent, monodromy, BenchmarkParams, OrbitKind, PlanarVectorField,
    Section, ShootingOptions, MAX_NOISE,
};
use crate::sim::exit::with_threads;
use crate::sim::{bernstein_diagnostic, fmt17, BernsteinRow};
use crate::theory::{cycling_profile, phase_rows, TheoryContext, DEFAULT_SERIES_TOL};

/// Floquet data of one orbit of the planar embedding.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OrbitSummary {
    pub kind: &'static str,
    pub period: f64,
    pub closing_residual: f64,
    pub newton_iterations: usize,
    pub lambda_divergence: f64,
    pub lambda_monodromy: f64,
    pub monodromy_det: f64,
    /// `exp(∫₀ᵀ div f)`.
    pub divergence_exp: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitReport {
    pub model: String,
    pub eps: f64,
    pub stable: OrbitSummary,
    pub unstable: OrbitSummary,
    pub max_rate_mismatch: f64,
    pub max_det_mismatch: f64,
    pub provenance: Provenance,
}

fn summarise(field: &PlanarVectorField, guess: [f64; 2], kind: OrbitKind) -> Result<OrbitSummary> {
    let opts = ShootingOptions::default();
    let orbit = find_periodic_orbit(field, &Section::positive_x_axis(5.0), guess, kind, &opts)?;
    let est = lyapunov_exponent(field, &orbit, &opts.ode, 1e-6)?;
    let m = monodromy(field, &orbit, 0.0, &opts.ode)?;
    Ok(OrbitSummary {
        kind: if kind == OrbitKind::Stable { "stable" } else { "unstable" },
        period: orbit.period,
        closing_residual: orbit.residual,
        newton_iterations: orbit.newton_iterations,
        lambda_divergence: est.from_divergence,
        lambda_monodromy: est.from_monodromy,
        monodromy_det: det2(&m),
        divergence_exp: divergence_integral(field, &orbit)?.exp(),
    })
}

/// Both orbits of the benchmark embedded in the plane (`ρ = 2 + r`), perturbed
/// by `ε cos ϑ` in the radial speed.
pub fn run_orbit(cfg: &ExperimentConfig, eps: f64) -> Result<OrbitReport> {
    let m = &cfg.model;
    let field = PlanarVectorField::benchmark_planar(BenchmarkParams { lambda: m.lambda, period: m.period, a: m.a, eps_phi: m.eps_phi }, eps);
    let stable = summarise(&field, [1.0, 0.0], OrbitKind::Stable)?;
    let unstable = summarise(&field, [3.0, 0.0], OrbitKind::Unstable)?;
    let rate = |o: &OrbitSummary| (o.lambda_divergence - o.lambda_monodromy).abs();
    let det = |o: &OrbitSummary| (o.monodromy_det - o.divergence_exp).abs() / o.divergence_exp;
    Ok(OrbitReport {
        model: field.name.clone(),
        eps,
        max_rate_mismatch: rate(&stable).max(rate(&unstable)),
        max_det_mismatch: det(&stable).max(det(&unstable)),
        stable,
        unstable,
        provenance: Provenance::of(cfg),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoryTable {
    pub lambda_t: f64,
    pub s_star: f64,
    pub delta: f64,
    /// `(σ, |log σ|/(λT))` for the configured noise levels.
    pub shifts: Vec<(f64, f64)>,
}

/// Writes `phase_table.csv` (φ, h^per, θ, θ') and `profile.csv` (x, Q(x)) with
/// `n` rows each, plus `theory.json`.
pub fn run_theory_table(cfg: &ExperimentConfig, n: usize, out: &Path) -> Result<TheoryTable> {
    let model = cfg.model.build()?;
    let s_star = cfg.s_star.unwrap_or(0.0);
    let ctx = TheoryContext::from_model(&model, cfg.delta, s_star)?;
    create_dir(out)?;
    let path = out.join("phase_table.csv");
    let mut f = std::io::BufWriter::new(std::fs::File::create(&path).map_err(io_err(&path))?);
    writeln!(f, "phi,h_per,theta,theta_prime").map_err(io_err(&path))?;
    for r in phase_rows(&ctx, n)? {
        writeln!(f, "{},{},{},{}", fmt17(r.phi), fmt17(r.h_per), fmt17(r.theta), fmt17(r.theta_prime)).map_err(io_err(&path))?;
    }
    f.flush().map_err(io_err(&path))?;
    let path = out.join("profile.csv");
    let mut text = String::from("x,q\n");
    for i in 0..n {
        let x = i as f64 / n as f64;
        text += &format!("{},{}\n", fmt17(x), fmt17(cycling_profile(ctx.lambda_t, x, DEFAULT_SERIES_TOL)));
    }
    std::fs::write(&path, text).map_err(io_err(&path))?;
    let table = TheoryTable { lambda_t: ctx.lambda_t, s_star, delta: cfg.delta, shifts: cfg.sigmas.iter().map(|&s| (s, ctx.shift(s))).collect() };
    write_json(&out.join("theory.json"), &table)?;
    Ok(table)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateGapRow {
    pub phi: f64,
    pub gap: f64,
    pub leading_term: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LdpReport {
    pub model: String,
    pub delta: f64,
    pub action_infinity: f64,
    pub s_star: f64,
    pub transversal: bool,
    pub angle: f64,
    pub candidates: Vec<Candidate>,
    pub rate_gap: Vec<RateGapRow>,
    pub provenance: Provenance,
}

/// Heteroclinic minimiser, its landing phase `s*`, and the finite-time rate
/// gap at `φ ∈ {2, 3, 4}`; writes `heteroclinic.csv` and `ldp.json` under `out`.
pub fn run_ldp(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<LdpReport> {
    let model = cfg.model.build()?;
    let h = find_heteroclinic(&model, &HeteroclinicOptions { delta: cfg.delta, ..Default::default() })?;
    let ctx = TheoryContext::from_model(&model, cfg.delta, h.s_star)?;
    let mut rate_gap = Vec::new();
    for phi in [2.0, 3.0, 4.0] {
        let ft = finite_time_action(&model, cfg.delta, h.s_star, phi, 1e-12)?;
        let lead = ctx.rate_gap(phi, h.s_star)?;
        rate_gap.push(RateGapRow { phi, gap: ft.gap, leading_term: lead, relative_error: ft.gap / lead - 1.0 });
    }
    let report = LdpReport {
        model: model.name.clone(),
        delta: cfg.delta,
        action_infinity: h.action_infinity,
        s_star: h.s_star,
        transversal: h.transversal,
        angle: h.angle,
        candidates: h.candidates.clone(),
        rate_gap,
        provenance: Provenance::of(cfg),
    };
    if let Some(dir) = out {
        create_dir(dir)?;
        let path = dir.join("heteroclinic.csv");
        let f = std::fs::File::create(&path).map_err(io_err(&path))?;
        write_path_csv(std::io::BufWriter::new(f), &h.path).map_err(io_err(&path))?;
        write_json(&dir.join("ldp.json"), &report)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct BernsteinReport {
    pub integrand: Integrand,
    pub envelope: f64,
    pub t: f64,
    pub sigma: f64,
    pub n_paths: usize,
    pub rows: Vec<BernsteinRow>,
    pub provenance: Provenance,
}

/// Bernstein bound check for `M_t = ∫ g·dW` with a constant envelope; a
/// violation beyond 3 standard errors is an error.
pub fn run_bernstein(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<BernsteinReport> {
    let model = cfg.model.build()?;
    let spec = &cfg.bernstein;
    let sigma = cfg.sigmas[0];
    let sim = cfg.sim_config(sigma);
    sim.validate(&model)?;
    let integrand = spec.integrand;
    let model_ref = &model;
    let g = |r: f64, phi: f64| -> [f64; MAX_NOISE] {
        let c = model_ref.coefficients(r, phi);
        match integrand {
            Integrand::Phase => c.g_phi,
            Integrand::Radial => c.g_r,
            Integrand::Unit => {
                let mut e = [0.0; MAX_NOISE];
                e[0] = 1.0;
                e
            }
        }
    };
    let envelope = match spec.envelope {
        Some(e) => e,
        None => {
            let hw = model.half_width.min(10.0);
            let mut sup: f64 = 0.0;
            for i in 0..=64 {
                let r = -hw + 2.0 * hw * i as f64 / 64.0;
                for j in 0..256 {
                    let v = g(r, j as f64 / 256.0);
                    sup = sup.max(v.iter().map(|x| x * x).sum::<f64>().sqrt());
                }
            }
            sup * (1.0 + 1e-9)
        }
    };
    if !(envelope > 0.0) {
        return Err(Error::InvalidInput("Bernstein envelope must be positive".into()));
    }
    let rows = with_threads(threads, || bernstein_diagnostic(&model, &sim, g, |_| envelope, &spec.levels, spec.t, cfg.r0, cfg.paths))??;
    Ok(BernsteinReport { integrand, envelope, t: spec.t, sigma, n_paths: cfg.paths, rows, provenance: Provenance::of(cfg) })
}

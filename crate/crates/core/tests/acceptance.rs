//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! `ACCEPTANCE_CRITERIA=1,2,7` restricts the run to a subset. Tolerances and
//! runtime limits are pinned below; a runtime overrun is a failure.

use std::f64::consts::{LN_2, PI};
use std::path::Path;
use std::time::{Duration, Instant};

use cycling_lab::experiments::cycling::run_cycling_at;
use cycling_lab::experiments::linear::run_linear_validation_at;
use cycling_lab::experiments::spectral::{analyse_kernel, run_kernel_at, kernel_trend};
use cycling_lab::experiments::{
    run_bernstein, run_ldp, run_orbit, run_sigma_sweep, CyclingRun, ExperimentConfig, ExperimentKind, Integrand, SamplingMethod,
};
use cycling_lab::kernel::{eig_sandwich, gap_bound, laplace_identity, principal_eigs, KernelEstimate, SpectralResult};
use cycling_lab::ldp::{integrate_characteristics, p_phi_on_shell, CharState};
use cycling_lab::model::{BenchmarkParams, PolarModel};
use cycling_lab::numerics::quad::{integrate, integrate_to_infinity};
use cycling_lab::numerics::roots::brent;
use cycling_lab::sim::{batch_sample, write_samples_csv, Variant};
use cycling_lab::theory::{cycling_profile, gumbel_density, TheoryContext, DEFAULT_SERIES_TOL};

/// Criteria allowed to fail; each one is explained in the decisions ledger.
const KNOWN_UNATTAINABLE: &[usize] = &[11];

const GUMBEL_MASS_TOL: f64 = 1e-8;
const GUMBEL_MODE_TOL: f64 = 1e-9;
const GUMBEL_VAR_TOL: f64 = 1e-6;
const PERIODICITY_TOL: f64 = 1e-12;
const PROFILE_MASS_TOL: f64 = 1e-8;
const H_PER_RESIDUAL_TOL: f64 = 1e-7;
const H_PER_CLOSED_FORM_TOL: f64 = 1e-12;
const RATE_MISMATCH_TOL: f64 = 1e-6;
const DET_MISMATCH_TOL: f64 = 1e-8;
const ENERGY_DRIFT_PER_PHASE: f64 = 1e-9;
const FUNDAMENTAL_MATRIX_TOL: f64 = 1e-6;
const RATE_GAP_TOL: f64 = 0.2;
const LAPLACE_TOL: f64 = 1e-10;
const KS_TOL: f64 = 0.05;

type Outcome = (bool, String);

struct Criterion {
    id: usize,
    limit: Option<Duration>,
    run: fn(&mut Shared) -> Outcome,
}

/// Expensive runs reused by several criteria.
#[derive(Default)]
struct Shared {
    kernels: Vec<(ExperimentConfig, KernelEstimate, SpectralResult)>,
    ku_done: bool,
    ks_done: bool,
    benchmark_015: Option<CyclingRun>,
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

fn bench() -> PolarModel {
    PolarModel::benchmark(BenchmarkParams::default()).unwrap()
}

fn c1_gumbel(_: &mut Shared) -> Outcome {
    let a = gumbel_density;
    let left = integrate(a, -8.0, 0.0, 1e-15, 1e-14).unwrap().value;
    let right = integrate_to_infinity(a, 0.0, 1e-15, 1e-14).unwrap().value;
    let mass = left + right;
    let moment = |k: i32| {
        let f = |x: f64| x.powi(k) * a(x);
        integrate(f, -8.0, 0.0, 1e-15, 1e-14).unwrap().value + integrate_to_infinity(f, 0.0, 1e-15, 1e-14).unwrap().value
    };
    let mean = moment(1);
    let var = moment(2) - mean * mean;
    let h = 1e-5;
    let slope = |x: f64| (a(x + h).ln() - a(x - h).ln()) / (2.0 * h);
    let mode = brent(slope, -1.0, 1.0, slope(-1.0), slope(1.0), 1e-15, 200).unwrap();
    let (em, ed, ev) = ((mass - 1.0).abs(), (mode + LN_2 / 2.0).abs(), (var - PI * PI / 24.0).abs());
    (
        em <= GUMBEL_MASS_TOL && ed <= GUMBEL_MODE_TOL && ev <= GUMBEL_VAR_TOL,
        format!("mass error {em:.1e}, mode error {ed:.1e}, variance error {ev:.1e}"),
    )
}

fn c2_profile(_: &mut Shared) -> Outcome {
    let mut worst_period: f64 = 0.0;
    let mut worst_mass: f64 = 0.0;
    for lt in [1.0, 2.0, 5.0, 10.0] {
        let q = |x: f64| cycling_profile(lt, x, DEFAULT_SERIES_TOL);
        for i in 0..64 {
            let x = i as f64 / 64.0;
            worst_period = worst_period.max((q(x + 1.0) - q(x)).abs()).max((q(x - 1.0) - q(x)).abs());
        }
        let m = integrate(q, 0.0, 1.0, 1e-14, 1e-13).unwrap().value;
        worst_mass = worst_mass.max((m - 1.0 / lt).abs());
    }
    (
        worst_period <= PERIODICITY_TOL && worst_mass <= PROFILE_MASS_TOL,
        format!("periodicity {worst_period:.1e}, mass error {worst_mass:.1e}"),
    )
}

fn c3_h_per(_: &mut Shared) -> Outcome {
    let ctx = TheoryContext::from_model(&bench(), 0.1, 0.0).unwrap();
    let residual = (0..256).map(|i| ctx.h_per_residual(i as f64 / 256.0).unwrap().abs()).fold(0.0, f64::max);
    let mut closed: f64 = 0.0;
    for (lt, d) in [(1.0, 1.0), (2.5, 0.3), (0.4, 2.0)] {
        let c = TheoryContext::constant(lt, d, 0.1, 0.0).unwrap();
        for i in 0..16 {
            closed = closed.max((c.h_per(i as f64 / 16.0).unwrap() - d / (2.0 * lt)).abs());
        }
    }
    (
        residual < H_PER_RESIDUAL_TOL && closed <= H_PER_CLOSED_FORM_TOL,
        format!("ODE residual {residual:.1e}, constant-D error {closed:.1e}"),
    )
}

fn c4_floquet(_: &mut Shared) -> Outcome {
    let r = run_orbit(&ExperimentConfig::default(), 0.1).unwrap();
    (
        r.max_rate_mismatch <= RATE_MISMATCH_TOL && r.max_det_mismatch <= DET_MISMATCH_TOL,
        format!("rate mismatch {:.1e}, determinant mismatch {:.1e}", r.max_rate_mismatch, r.max_det_mismatch),
    )
}

fn linear_cfg() -> ExperimentConfig {
    let mut cfg = ExperimentConfig { kind: ExperimentKind::LinearValidation, paths: 100_000, dt: 1e-3, seed: 5, ..Default::default() };
    cfg.model.name = "linear".into();
    cfg.linear.distance = 0.1;
    cfg.linear.checkpoints = 20;
    cfg
}

fn c5_linear(_: &mut Shared) -> Outcome {
    let r = run_linear_validation_at(&linear_cfg(), 0.1, None).unwrap();
    (
        r.passed && r.coarse.checkpoints.len() == 20,
        format!(
            "{} hits; max {:.2} SE at dt, {:.2} SE at dt/2; dt shift {:.2} SE",
            r.coarse.hits, r.coarse.max_z, r.fine.max_z, r.dt_shift_se
        ),
    )
}

fn c6_hamiltonian(_: &mut Shared) -> Outcome {
    let m = bench();
    let span = 4.0;
    let p_r = 0.05;
    let p_phi = p_phi_on_shell(&m, -0.5, 0.0, p_r, 0.0).unwrap();
    let tr = integrate_characteristics(&m, CharState { r: -0.5, phi: 0.0, p_r, p_phi }, span, 1e-12, 32).unwrap();
    let drift = tr.energy_drift / span;

    // Linear model with λT = 1 but T = 2, so phase time and physical time differ.
    let (lambda, period) = (0.5, 2.0);
    let lin = PolarModel::linear(lambda, period, 0.5).unwrap();
    let ctx = TheoryContext::from_model(&lin, 0.1, 0.0).unwrap();
    let lt = lambda * period;
    let eps = 1e-3;
    let mut worst: f64 = 0.0;
    let mut max_dev: f64 = 0.0;
    for phi0 in [0.0, 0.3] {
        let mut end = |r: f64, p_r: f64| {
            let p_phi = p_phi_on_shell(&lin, r, phi0, p_r, 0.0).unwrap();
            let tr = integrate_characteristics(&lin, CharState { r, phi: phi0, p_r, p_phi }, 1.5, 1e-12, 8).unwrap();
            max_dev = max_dev.max(tr.points.iter().map(|p| (p.r - 1.0).abs()).fold(0.0, f64::max));
            tr.points.iter().map(|p| (p.phi, p.r - 1.0, p.p_r)).collect::<Vec<_>>()
        };
        let col_r = end(1.0 + eps, 0.0);
        let col_p = end(1.0, eps);
        for (a, b) in col_r.iter().zip(&col_p) {
            let d = a.0 - phi0;
            let m12 = (lt * d).exp() * ctx.h_per(phi0).unwrap() - (-lt * d).exp() * ctx.h_per(a.0).unwrap();
            let want = [(lt * d).exp(), m12, 0.0, (-lt * d).exp()];
            let got = [a.1 / eps, b.1 / eps, a.2 / eps, b.2 / eps];
            for (g, w) in got.iter().zip(&want) {
                worst = worst.max((g - w).abs());
            }
        }
    }
    (
        drift <= ENERGY_DRIFT_PER_PHASE && worst <= FUNDAMENTAL_MATRIX_TOL && max_dev < 0.01,
        format!("energy drift {drift:.1e} per phase; fundamental matrix error {worst:.1e} (max |r-1| {max_dev:.1e})"),
    )
}

fn c7_rate_gap(_: &mut Shared) -> Outcome {
    let r = run_ldp(&ExperimentConfig::default(), None).unwrap();
    let errs: Vec<f64> = r.rate_gap.iter().map(|g| g.relative_error).collect();
    (
        errs.len() == 3 && errs.iter().all(|e| e.abs() <= RATE_GAP_TOL),
        format!("s* = {:.4}, relative errors {:?}", r.s_star, errs.iter().map(|e| format!("{e:+.3}")).collect::<Vec<_>>()),
    )
}

fn kernel_cfg(variant: Variant) -> ExperimentConfig {
    let mut cfg = ExperimentConfig { kind: ExperimentKind::KernelSpectral, seed: 11, ..Default::default() };
    cfg.kernel.variant = variant;
    cfg.kernel.cells = 128;
    match variant {
        Variant::Ku => {
            cfg.dt = 1e-3;
            cfg.kernel.samples_per_row = 1000;
            cfg.kernel.set_radius = 0.05;
        }
        Variant::Ks => {
            cfg.dt = 2.5e-3;
            cfg.kernel.samples_per_row = 10_000;
        }
    }
    cfg
}

fn c8_ku_window(sh: &mut Shared) -> Outcome {
    let cfg = kernel_cfg(Variant::Ku);
    let (rep, k, s) = run_kernel_at(&cfg, 0.1, None).unwrap();
    sh.kernels.push((cfg, k, s));
    sh.ku_done = true;
    let w = rep.window.unwrap();
    (w.holds, format!("lambda0 = {:.5} in ({:.5}, {:.5})", rep.lambda0, w.lower, w.upper))
}

fn c9_ks_trend(sh: &mut Shared) -> Outcome {
    let cfg = kernel_cfg(Variant::Ks);
    let mut reports = Vec::new();
    for sigma in [0.25, 0.2, 0.15] {
        let (rep, k, s) = run_kernel_at(&cfg, sigma, None).unwrap();
        sh.kernels.push((cfg.clone(), k, s));
        reports.push(rep);
    }
    sh.ks_done = true;
    let t = kernel_trend(&reports).unwrap();
    (
        t.passed,
        format!(
            "log(1 - lambda0) {:?}, secants {:?}, slope {:.3} ± {:.3}",
            t.log_one_minus_lambda0.iter().map(|v| format!("{v:.2}")).collect::<Vec<_>>(),
            t.secant_slopes.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>(),
            t.fitted_slope,
            t.fitted_slope_se
        ),
    )
}

fn synthetic_kernels() -> Vec<(&'static str, KernelEstimate)> {
    let v = [0.2, 0.5, 0.3];
    let w = [1.0, 0.6, 1.5];
    let c: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
    let rank_one: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| 0.6 * v[i] * w[j] / c).collect()).collect();
    vec![
        ("2x2", KernelEstimate::from_matrix(&[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap()),
        ("rank-one", KernelEstimate::from_matrix(&rank_one).unwrap()),
    ]
}

fn c10_spectral(sh: &mut Shared) -> Outcome {
    // Kernel estimation is charged to criteria 8 and 9; run them first when absent.
    if !sh.ku_done {
        c8_ku_window(sh);
    }
    if !sh.ks_done {
        c9_ks_trend(sh);
    }
    let start = Instant::now();
    let mut ok = true;
    let mut notes = Vec::new();
    for (cfg, k, s) in &sh.kernels {
        let r = analyse_kernel(cfg, k, s).unwrap();
        let sandwich = r.sandwiches.iter().map(|s| s.n).collect::<Vec<_>>() == [1, 2, 4] && r.sandwiches.iter().all(|s| s.holds);
        let gap = r.gap_holds == Some(true);
        let laplace = r.laplace.map(|l| l.residual);
        ok &= sandwich && gap && laplace.is_some_and(|x| x < LAPLACE_TOL);
        notes.push(format!(
            "{:?}@{}: sandwich {sandwich}, gap {:.3e} vs |l1| {:.3e}, laplace {:.1e}",
            r.variant,
            r.sigma,
            r.gap.map_or(f64::NAN, |g| g.bound),
            r.lambda1_mod,
            laplace.unwrap_or(f64::NAN)
        ));
    }
    for (name, k) in synthetic_kernels() {
        let s = principal_eigs(&k).unwrap();
        let all: Vec<usize> = (0..k.n()).collect();
        let sandwich = [1, 2, 4].iter().all(|&n| eig_sandwich(&k, s.lambda0, &all, n).unwrap().holds);
        let g = gap_bound(&k, s.lambda0, &all).unwrap();
        let laplace = laplace_identity(&k, &[0], 0.05).unwrap().residual;
        ok &= sandwich && g.bound >= s.lambda1_mod && laplace < LAPLACE_TOL;
        notes.push(format!("{name}: sandwich {sandwich}, gap {:.3} vs |l1| {:.3}, laplace {laplace:.1e}", g.bound, s.lambda1_mod));
    }
    let analysis = start.elapsed();
    (ok && analysis < Duration::from_secs(60), format!("{} (analysis {:.1}s)", notes.join("; "), analysis.as_secs_f64()))
}

fn ams_cfg(sigma: f64, paths: usize) -> ExperimentConfig {
    ExperimentConfig { sigmas: vec![sigma], paths, seed: 2024, method: SamplingMethod::Ams, ..Default::default() }
}

fn c11_shift(_: &mut Shared) -> Outcome {
    let mut cfg = ams_cfg(0.2, 100_000);
    cfg.kind = ExperimentKind::SigmaSweep;
    cfg.sigmas = vec![0.2, 0.1];
    let (rep, _) = run_sigma_sweep(&cfg, None).unwrap();
    let p = &rep.pairs[0];
    (
        rep.pairs.len() == 1 && p.passed && rep.rows.iter().all(|r| r.n_exits >= 100_000),
        format!("peak shift {:.4} vs log 2/(lambda T) = {:.4}, deviation {:.4}", p.shift, p.expected, p.deviation),
    )
}

fn benchmark_015(sh: &mut Shared) -> &CyclingRun {
    sh.benchmark_015.get_or_insert_with(|| run_cycling_at(&ams_cfg(0.15, 100_000), 0.15, None).unwrap())
}

fn c12_profile_shape(sh: &mut Shared) -> Outcome {
    let r = &benchmark_015(sh).report;
    (
        r.ks_aligned <= KS_TOL && r.n_exits >= 100_000,
        format!("{} exits, KS aligned {:.4} (raw {:.4}, offset {:+.4})", r.n_exits, r.ks_aligned, r.ks_raw, r.offset),
    )
}

fn c13_descent(sh: &mut Shared) -> Outcome {
    let d = benchmark_015(sh).report.descent.clone();
    let mut sym = ams_cfg(0.15, 10_000);
    sym.model.name = "benchmark-sym".into();
    let control = run_cycling_at(&sym, 0.15, None).unwrap().report.descent;
    (
        d.passed && control.passed,
        format!(
            "mode {:.3} vs s* {:.3} (distance {:.3}); symmetric control resultant {:.4}",
            d.mode, d.s_star, d.mode_distance, control.resultant_length
        ),
    )
}

fn c14_winding(_: &mut Shared) -> Outcome {
    let cfg = ExperimentConfig { sigmas: vec![0.55], paths: 10_000, seed: 1, method: SamplingMethod::Direct, ..Default::default() };
    let r = run_cycling_at(&cfg, 0.55, None).unwrap().report;
    let d = r.decay.unwrap();
    let w: Vec<String> = d.windows.iter().map(|w| format!("{:.5} ± {:.5}", w.ratio, w.standard_error)).collect();
    (
        d.windows_agree == Some(true),
        format!("windows [{}, {}): {w:?}, lambda0 {:.5} ± {:.5}", d.n_min, d.n_end, d.lambda0.value, d.lambda0.standard_error),
    )
}

fn c15_determinism(_: &mut Shared) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let model = bench();
    let direct = ExperimentConfig { sigmas: vec![0.5], paths: 2000, seed: 15, max_phase: Some(20.0), ..Default::default() };
    let ams = ams_cfg(0.3, 2000);
    let mut files: Vec<[Vec<u8>; 3]> = Vec::new();
    for threads in [1, 4, 16] {
        let sub = dir.path().join(format!("t{threads}"));
        let batch = batch_sample(&model, &direct.sim_config(0.5), 0.5, direct.paths, Some(threads)).unwrap();
        std::fs::create_dir_all(&sub).unwrap();
        write_samples_csv(&sub.join("direct.csv"), &batch.samples).unwrap();
        run_cycling_at(&ams, 0.3, Some(threads)).unwrap().write(&sub.join("ams")).unwrap();
        let read = |p: &Path| std::fs::read(p).unwrap();
        files.push([read(&sub.join("direct.csv")), read(&sub.join("ams/samples.csv")), read(&sub.join("ams/histogram.csv"))]);
    }
    let same = files.windows(2).all(|w| w[0] == w[1]);
    (same, format!("direct {} bytes, AMS {} bytes; identical across 1/4/16 workers: {same}", files[0][0].len(), files[0][1].len()))
}

fn c16_bernstein(_: &mut Shared) -> Outcome {
    let mut cfg = ExperimentConfig { kind: ExperimentKind::Bernstein, paths: 100_000, seed: 16, ..Default::default() };
    cfg.bernstein.integrand = Integrand::Phase;
    cfg.bernstein.envelope = Some(0.3);
    cfg.bernstein.t = 2.0;
    cfg.bernstein.levels = vec![0.5, 1.0, 2.0];
    let r = run_bernstein(&cfg, None).unwrap();
    let rows: Vec<String> = r.rows.iter().map(|x| format!("L={}: {:.4} vs {:.4}", x.level, x.empirical, x.bound)).collect();
    (r.rows.iter().all(|x| !x.violated), rows.join(", "))
}

fn criteria() -> Vec<Criterion> {
    vec![
        Criterion { id: 1, limit: secs(1), run: c1_gumbel },
        Criterion { id: 2, limit: secs(1), run: c2_profile },
        Criterion { id: 3, limit: secs(1), run: c3_h_per },
        Criterion { id: 4, limit: secs(10), run: c4_floquet },
        Criterion { id: 5, limit: secs(300), run: c5_linear },
        Criterion { id: 6, limit: secs(30), run: c6_hamiltonian },
        Criterion { id: 7, limit: secs(120), run: c7_rate_gap },
        Criterion { id: 8, limit: secs(600), run: c8_ku_window },
        Criterion { id: 9, limit: secs(600), run: c9_ks_trend },
        Criterion { id: 10, limit: None, run: c10_spectral },
        Criterion { id: 11, limit: secs(1800), run: c11_shift },
        Criterion { id: 12, limit: secs(1800), run: c12_profile_shape },
        Criterion { id: 13, limit: secs(900), run: c13_descent },
        Criterion { id: 14, limit: None, run: c14_winding },
        Criterion { id: 15, limit: secs(300), run: c15_determinism },
        Criterion { id: 16, limit: secs(300), run: c16_bernstein },
    ]
}

fn selected() -> Option<Vec<usize>> {
    let v = std::env::var("ACCEPTANCE_CRITERIA").ok()?;
    Some(v.split(',').filter_map(|s| s.trim().parse().ok()).collect())
}

fn main() {
    let only = selected();
    let mut shared = Shared::default();
    let mut unexpected = Vec::new();
    for c in criteria() {
        if only.as_ref().is_some_and(|o| !o.contains(&c.id)) {
            continue;
        }
        let start = Instant::now();
        let (ok, detail) = (c.run)(&mut shared);
        let elapsed = start.elapsed();
        let in_time = c.limit.map_or(true, |l| elapsed <= l);
        let passed = ok && in_time;
        let limit = c.limit.map_or("none".to_string(), |l| format!("{}s", l.as_secs()));
        println!(
            "CRITERION {} {} {} [{:.2}s, limit {limit}]",
            c.id,
            if passed { "PASS" } else { "FAIL" },
            detail,
            elapsed.as_secs_f64()
        );
        if !passed && !KNOWN_UNATTAINABLE.contains(&c.id) {
            unexpected.push(c.id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cycling_lab::experiments::cycling::run_cycling;
use cycling_lab::experiments::{
    create_dir, run_bernstein, run_kernel_spectral, run_ldp, run_linear_validation, run_orbit, run_sigma_sweep, run_theory_table,
    write_json, ExperimentConfig, ExperimentKind, Provenance,
};
use cycling_lab::sim::{batch_sample, write_samples_csv};
use cycling_lab::{Error, Result};

#[derive(Parser)]
#[command(name = "cycling-lab", version, about = "Exit through an unstable periodic orbit: theory, large deviations and simulation")]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, overriding the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; changes wall time only.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Floquet data of both orbits of the planar benchmark.
    Orbit {
        /// Angular perturbation `ε cos ϑ` of the radial speed.
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
    },
    /// Tables of h^per, θ and the cycling profile.
    TheoryTable {
        #[arg(long, default_value_t = 256)]
        rows: usize,
    },
    /// Heteroclinic minimiser, s* and the finite-time rate gap.
    Ldp,
    /// Raw exit samples from direct simulation.
    Simulate,
    /// Poincaré kernels and their spectral diagnostics.
    Kernel,
    /// Wrapped exit histogram against the cycling profile.
    Cycling,
    /// Peak translation across noise levels.
    Sweep,
    /// Linear first passage against the reflection formula.
    ValidateLinear,
    /// Bernstein bound for the noise martingale.
    Bernstein,
}

impl Command {
    fn kind(&self) -> ExperimentKind {
        match self {
            Command::Orbit { .. } | Command::TheoryTable { .. } | Command::Ldp => ExperimentKind::LdpMinimizer,
            Command::Simulate | Command::Cycling => ExperimentKind::CyclingHistogram,
            Command::Kernel => ExperimentKind::KernelSpectral,
            Command::Sweep => ExperimentKind::SigmaSweep,
            Command::ValidateLinear => ExperimentKind::LinearValidation,
            Command::Bernstein => ExperimentKind::Bernstein,
        }
    }
}

fn load(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            let mut cfg = ExperimentConfig { kind: cli.command.kind(), ..Default::default() };
            if cfg.kind == ExperimentKind::LinearValidation {
                cfg.model.name = "linear".into();
            }
            cfg
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn simulate(cfg: &ExperimentConfig, threads: Option<usize>, out: &Path) -> Result<()> {
    let model = cfg.model.build()?;
    let sim = cfg.sim_config(cfg.sigmas[0]);
    let batch = batch_sample(&model, &sim, cfg.r0, cfg.paths, threads)?;
    create_dir(out)?;
    write_samples_csv(&out.join("samples.csv"), &batch.samples)?;
    #[derive(serde::Serialize)]
    struct Meta<'a> {
        sampling: &'a cycling_lab::sim::SampleMeta,
        summary: &'a cycling_lab::sim::BatchSummary,
        provenance: Provenance,
    }
    write_json(&out.join("meta.json"), &Meta { sampling: &batch.meta, summary: &batch.summary, provenance: Provenance::of(cfg) })?;
    println!("{} paths, {} exits, {} censored, mean winding {:.3}", batch.summary.count, batch.summary.exits, batch.summary.censored, batch.summary.mean_winding);
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = load(cli)?;
    let out = cfg.output.clone();
    let threads = cli.threads;
    match &cli.command {
        Command::Orbit { eps } => {
            let r = run_orbit(&cfg, *eps)?;
            create_dir(&out)?;
            write_json(&out.join("orbit.json"), &r)?;
            println!(
                "T+ = {:.12}, lambda+ = {:.12}; T- = {:.12}, lambda- = {:.12}; rate mismatch {:.2e}, det mismatch {:.2e}",
                r.unstable.period, r.unstable.lambda_divergence, r.stable.period, r.stable.lambda_divergence, r.max_rate_mismatch, r.max_det_mismatch
            );
        }
        Command::TheoryTable { rows } => {
            let t = run_theory_table(&cfg, *rows, &out)?;
            println!("lambda*T = {:.12}; shifts {:?}", t.lambda_t, t.shifts);
        }
        Command::Ldp => {
            let r = run_ldp(&cfg, Some(&out))?;
            println!("I_inf = {:.12}, s* = {:.6}, crossing angle {:.3e}", r.action_infinity, r.s_star, r.angle);
            for g in &r.rate_gap {
                println!("phi = {}: gap {:.6e}, leading term {:.6e}, relative error {:+.3}", g.phi, g.gap, g.leading_term, g.relative_error);
            }
        }
        Command::Simulate => simulate(&cfg, threads, &out)?,
        Command::Kernel => {
            let sweep = run_kernel_spectral(&cfg, threads, Some(&out))?;
            for r in &sweep.reports {
                println!("sigma {}: lambda0 = {:.6}, 1 - lambda0 = {:.4e}, |lambda1| = {:.4}", r.sigma, r.lambda0, r.one_minus_lambda0, r.lambda1_mod);
            }
            for r in &sweep.reports {
                r.check()?;
            }
            if let Some(t) = &sweep.trend {
                if !t.passed {
                    return Err(Error::ToleranceExceeded(format!("log(1 - lambda0) not decreasing in 1/sigma^2: {:?}", t.log_one_minus_lambda0)));
                }
            }
        }
        Command::Cycling => {
            let run = run_cycling(&cfg, threads)?;
            run.write(&out)?;
            let r = &run.report;
            println!(
                "sigma {}: {} exits, KS raw {:.4} aligned {:.4} (offset {:+.4}), peak {:.4}, lambda0 {:.6}, descent mode {:.3} (s* {:.3})",
                r.sigma, r.n_exits, r.ks_raw, r.ks_aligned, r.offset, r.peak, r.lambda0.value, r.descent.mode, r.s_star
            );
        }
        Command::Sweep => {
            let (report, runs) = run_sigma_sweep(&cfg, threads)?;
            for run in &runs {
                run.write(&out.join(format!("sigma_{}", run.report.sigma)))?;
            }
            write_json(&out.join("sweep.json"), &report)?;
            println!("slope {:.4} ± {:.4}", report.slope, report.slope_se);
            report.check()?;
        }
        Command::ValidateLinear => {
            let r = run_linear_validation(&cfg, threads)?;
            create_dir(&out)?;
            write_json(&out.join("linear.json"), &r)?;
            println!("max discrepancy {:.2} SE (dt), {:.2} SE (dt/2); dt shift {:.2} SE", r.coarse.max_z, r.fine.max_z, r.dt_shift_se);
            r.check()?;
        }
        Command::Bernstein => {
            let r = run_bernstein(&cfg, threads)?;
            create_dir(&out)?;
            write_json(&out.join("bernstein.json"), &r)?;
            for row in &r.rows {
                println!("L = {}: empirical {:.4e} ± {:.1e}, bound {:.4e}", row.level, row.empirical, row.standard_error, row.bound);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_assertion() { 2 } else { 1 })
        }
    }
}

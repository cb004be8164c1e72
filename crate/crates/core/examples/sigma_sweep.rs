//! Peak translation of the exit-phase histogram across noise levels.

use cycling_lab::experiments::{run_sigma_sweep, ExperimentConfig, ExperimentKind};

fn main() -> cycling_lab::Result<()> {
    let cfg = ExperimentConfig { kind: ExperimentKind::SigmaSweep, sigmas: vec![0.4, 0.3, 0.25], paths: 2000, ..Default::default() };
    let (report, _) = run_sigma_sweep(&cfg, None)?;
    for row in &report.rows {
        println!("sigma {:<5} shift {:.4} peak {:.4} (unwrapped {:.4})", row.sigma, row.shift, row.peak, row.peak_unwrapped);
    }
    for p in &report.pairs {
        println!("{} -> {}: moved {:+.4}, expected {:+.4}", p.from_sigma, p.to_sigma, p.shift, p.expected);
    }
    println!("slope {:.3} ± {:.3} (expected 1), passed {}", report.slope, report.slope_se, report.passed);
    Ok(())
}

//! First passage of the linearised model against the reflection formula, at
//! `dt` and `dt/2`.

use cycling_lab::experiments::{run_linear_validation, ExperimentConfig, ExperimentKind};

fn main() -> cycling_lab::Result<()> {
    let mut cfg = ExperimentConfig { kind: ExperimentKind::LinearValidation, sigmas: vec![0.1], paths: 5000, dt: 1e-3, ..Default::default() };
    cfg.model.name = "linear".into();
    let r = run_linear_validation(&cfg, None)?;
    println!("{:>6} {:>9} {:>9} {:>6}", "t", "MC", "theory", "z");
    for c in &r.coarse.checkpoints {
        println!("{:>6.2} {:>9.5} {:>9.5} {:>6.2}", c.t, c.empirical, c.theory, c.z);
    }
    println!("max z {:.2} (dt), {:.2} (dt/2); passed {}", r.coarse.max_z, r.fine.max_z, r.passed);
    Ok(())
}

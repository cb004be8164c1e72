//! Adaptive multilevel splitting at small noise, where direct simulation
//! would need far more periods than are affordable.

use cycling_lab::model::{BenchmarkParams, PolarModel};
use cycling_lab::sim::{equilibrium_entrances, run_ams, AmsConfig, SimConfig};

fn main() -> cycling_lab::Result<()> {
    let model = PolarModel::benchmark(BenchmarkParams::default())?;
    let cfg = SimConfig { sigma: 0.2, dt: 2.5e-3, master_seed: 3, max_phase: 100.0, ..Default::default() };
    let ams = AmsConfig { n_particles: 1000, ..Default::default() };
    let entrances = equilibrium_entrances(&model, &cfg, ams.equilibrium_phases, 1)?;
    println!("{} entrances, rate {:.4} per period", entrances.points.len(), entrances.rate);
    let r = run_ams(&model, &cfg, &ams, &entrances)?;
    println!(
        "p = {:.4e} (relative SE {:.3}), {} iterations, exit rate {:.4e} per period",
        r.p_hat, r.relative_se, r.iterations, r.entrance_rate * r.p_hat
    );
    let mut bins = [0usize; 10];
    for e in &r.exits {
        bins[(e.phi_tau.rem_euclid(1.0) * 10.0) as usize % 10] += 1;
    }
    println!("exit phase histogram (10 bins): {bins:?}");
    Ok(())
}

//! Direct Euler-Maruyama exits of the benchmark from the stable orbit: exit
//! phases, windings and the wrapped natural phase.

use cycling_lab::model::{BenchmarkParams, PolarModel};
use cycling_lab::sim::{batch_sample, SimConfig};

fn main() -> cycling_lab::Result<()> {
    let model = PolarModel::benchmark(BenchmarkParams::default())?;
    let cfg = SimConfig { sigma: 0.5, dt: 2.5e-3, master_seed: 7, max_phase: 200.0, ..Default::default() };
    let batch = batch_sample(&model, &cfg, -1.0, 400, None)?;
    let s = &batch.summary;
    println!("{} paths: {} exits, {} censored, mean winding {:.2}", s.count, s.exits, s.censored, s.mean_winding);
    for e in batch.samples.iter().take(8) {
        println!("  {e:?}");
    }
    Ok(())
}

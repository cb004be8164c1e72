//! Wrapped natural-phase histogram of exits against the cycling profile, with
//! KS distances, the fitted peak and the descent profile near `s*`.

use cycling_lab::experiments::{run_cycling, ExperimentConfig, SamplingMethod};

fn main() -> cycling_lab::Result<()> {
    let cfg = ExperimentConfig { sigmas: vec![0.3], paths: 2000, seed: 1, method: SamplingMethod::Ams, ..Default::default() };
    let run = run_cycling(&cfg, None)?;
    let r = &run.report;
    println!("{} exits at sigma {}", r.n_exits, r.sigma);
    println!("KS raw {:.4}, aligned {:.4} (offset {:+.4}); peak {:.4}", r.ks_raw, r.ks_aligned, r.offset, r.peak);
    println!("descent mode {:.3}, s* {:.3}, passed {}", r.descent.mode, r.s_star, r.descent.passed);
    for b in r.histogram.iter().step_by(5) {
        println!("  {:.2}  {:.4}  {:.4}", b.bin_left, b.mass, b.theory_aligned);
    }
    let out = std::env::temp_dir().join("cycling-lab-histogram");
    run.write(&out)?;
    println!("artifacts in {}", out.display());
    Ok(())
}

//! Floquet data of the stable and unstable orbits of the planar benchmark:
//! periods, Lyapunov exponents from the divergence integral and from the
//! monodromy matrix, and the determinant identity.

use cycling_lab::experiments::{run_orbit, ExperimentConfig};

fn main() -> cycling_lab::Result<()> {
    for eps in [0.0, 0.1, 0.2] {
        let r = run_orbit(&ExperimentConfig::default(), eps)?;
        println!("eps = {eps}");
        for o in [&r.stable, &r.unstable] {
            println!(
                "  {:<8} T = {:.10}  lambda(div) = {:+.10}  lambda(mono) = {:+.10}  det M = {:.6e}",
                o.kind, o.period, o.lambda_divergence, o.lambda_monodromy, o.monodromy_det
            );
        }
        println!("  rate mismatch {:.1e}, det mismatch {:.1e}", r.max_rate_mismatch, r.max_det_mismatch);
    }
    Ok(())
}

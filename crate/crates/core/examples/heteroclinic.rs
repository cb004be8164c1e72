//! Minimum-action path from the stable to the unstable orbit, its landing
//! phase `s*`, and the finite-time rate gap against its leading term.

use cycling_lab::experiments::{run_ldp, ExperimentConfig};

fn main() -> cycling_lab::Result<()> {
    let out = std::env::temp_dir().join("cycling-lab-heteroclinic");
    let r = run_ldp(&ExperimentConfig::default(), Some(&out))?;
    println!("I_inf = {:.10}, s* = {:.6}, transversal: {} (angle {:.3e})", r.action_infinity, r.s_star, r.transversal, r.angle);
    for c in &r.candidates {
        println!("  candidate {c:?}");
    }
    for g in &r.rate_gap {
        println!("phi = {}: gap {:.5e}, leading term {:.5e} ({:+.1}%)", g.phi, g.gap, g.leading_term, 100.0 * g.relative_error);
    }
    println!("path written to {}", out.join("heteroclinic.csv").display());
    Ok(())
}

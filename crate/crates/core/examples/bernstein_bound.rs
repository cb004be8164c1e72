//! Tail of the noise martingale `sup M_s` against the Bernstein bound.

use cycling_lab::experiments::{run_bernstein, ExperimentConfig, ExperimentKind, Integrand};

fn main() -> cycling_lab::Result<()> {
    let mut cfg = ExperimentConfig { kind: ExperimentKind::Bernstein, paths: 20_000, ..Default::default() };
    for integrand in [Integrand::Phase, Integrand::Radial, Integrand::Unit] {
        cfg.bernstein.integrand = integrand;
        let r = run_bernstein(&cfg, None)?;
        println!("{integrand:?} (envelope {:.4}):", r.envelope);
        for row in &r.rows {
            println!("  L = {}: P = {:.4e} ± {:.1e}, bound {:.4e}", row.level, row.empirical, row.standard_error, row.bound);
        }
    }
    Ok(())
}

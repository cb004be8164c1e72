//! Poincaré kernels of the stable (Ks) and unstable (Ku) variants with their
//! principal eigenvalues, sandwich bounds, gap bound and Laplace identity.

use cycling_lab::experiments::spectral::run_kernel_at;
use cycling_lab::experiments::{ExperimentConfig, ExperimentKind};
use cycling_lab::sim::Variant;

fn main() -> cycling_lab::Result<()> {
    for (variant, sigma, radius) in [(Variant::Ks, 0.3, 0.2), (Variant::Ku, 0.1, 0.05)] {
        let mut cfg = ExperimentConfig { kind: ExperimentKind::KernelSpectral, dt: 2.5e-3, ..Default::default() };
        cfg.kernel.variant = variant;
        cfg.kernel.cells = 32;
        cfg.kernel.set_radius = radius;
        let (r, _, _) = run_kernel_at(&cfg, sigma, None)?;
        println!("{variant:?} at sigma {sigma}: lambda0 = {:.6}, 1 - lambda0 = {:.3e}, |lambda1| = {:.4}", r.lambda0, r.one_minus_lambda0, r.lambda1_mod);
        for s in &r.sandwiches {
            println!("  sandwich n = {}: [{:.5}, {:.5}] holds {}", s.n, s.lower, s.upper, s.holds);
        }
        if let Some(g) = r.gap {
            println!("  gap bound {:.4} (L = {:.3}, hypothesis {})", g.bound, g.l, g.hypothesis_ok);
        }
        if let Some(l) = r.laplace {
            println!("  Laplace identity at u = {}: residual {:.1e}", l.u, l.residual);
        }
        if let Some(w) = r.window {
            println!("  eigenvalue window ({:.4}, {:.4}) holds {}", w.lower, w.upper, w.holds);
        }
    }
    Ok(())
}

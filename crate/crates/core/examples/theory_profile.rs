//! The cycling profile and the natural phase of the benchmark: `h^per`, `θ`,
//! the periodicised Gumbel density and the |log σ| translation of its peak.

use cycling_lab::model::{BenchmarkParams, PolarModel};
use cycling_lab::theory::{cycling_profile, gumbel_density, TheoryContext, DEFAULT_SERIES_TOL};

fn main() -> cycling_lab::Result<()> {
    let model = PolarModel::benchmark(BenchmarkParams::default())?;
    let ctx = TheoryContext::from_model(&model, 0.1, 0.985)?;
    println!("lambda T = {}", ctx.lambda_t);
    println!("{:>6} {:>12} {:>12} {:>12}", "phi", "h_per", "theta", "residual");
    for i in 0..8 {
        let phi = i as f64 / 8.0;
        println!("{phi:>6.3} {:>12.8} {:>12.8} {:>12.1e}", ctx.h_per(phi)?, ctx.theta(phi)?, ctx.h_per_residual(phi)?);
    }
    println!("\nA(x) at the mode -log(2)/2: {:.12}", gumbel_density(-std::f64::consts::LN_2 / 2.0));
    for lt in [0.5, 1.0, 2.0] {
        let q: Vec<String> = (0..5).map(|i| format!("{:.4}", cycling_profile(lt, i as f64 / 5.0, DEFAULT_SERIES_TOL))).collect();
        println!("Q_{lt}(0, 0.2, .., 0.8) = {}", q.join(" "));
    }
    for sigma in [0.2, 0.1, 0.05, 0.01] {
        println!("sigma = {sigma:<5} peak translation |log sigma|/(lambda T) = {:.4}", ctx.shift(sigma));
    }
    Ok(())
}

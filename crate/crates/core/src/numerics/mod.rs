//! Deterministic numerical building blocks: ODE integration, quadrature,
//! root finding and special functions.

pub mod ode;
pub mod quad;
pub mod roots;
pub mod special;

/// Reduces a phase to `[0, 1)`.
pub fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Signed circular difference `a - b` on the unit circle, in `[-1/2, 1/2)`.
pub fn circ_diff(a: f64, b: f64) -> f64 {
    frac(a - b + 0.5) - 0.5
}

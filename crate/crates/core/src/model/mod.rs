//! SDE models on the cylinder and deterministic orbit analysis of planar fields.

pub mod orbit;
pub mod planar;
pub mod polar;

pub use orbit::{
    divergence_integral, find_periodic_orbit, floquet_vector, fundamental_matrix, lyapunov_exponent, monodromy,
    monodromy_eigenvalues, LyapunovEstimate, OrbitData, OrbitKind, PeriodicOrbit, Section, ShootingOptions,
};
pub use planar::PlanarVectorField;
pub use polar::{BenchmarkParams, Coefficients, Partials, PolarModel, MAX_NOISE};

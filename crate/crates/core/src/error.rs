use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("Newton shooting did not converge: residual {residual:.3e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },
    #[error("section is not transversal to the flow: {0}")]
    SectionNotTransversal(String),
    #[error("ODE integration failed at t = {t}: {reason}")]
    IntegrationFailure { t: f64, reason: String },
    #[error("Lyapunov estimators disagree: divergence {divergence:.12e} vs monodromy {monodromy:.12e}")]
    MethodMismatch { divergence: f64, monodromy: f64 },
    #[error("nontrivial monodromy eigenvalue is degenerate ({0:.6e})")]
    DegenerateEigenvalue(f64),
    #[error("quadrature did not reach tolerance: estimate {estimate:.3e}, error {error:.3e}")]
    QuadratureFailure { estimate: f64, error: f64 },
    #[error("phase speed vanished (phi_dot = {phi_dot:.3e} at phi = {phi})")]
    PhaseSpeedVanishes { phi: f64, phi_dot: f64 },
    #[error("no sign change of the crossing functional over {seeds} seeds")]
    NoIntersection { seeds: usize },
    #[error("intersection is tangential (crossing angle {angle:.3e})")]
    TangentialIntersection { angle: f64 },
    #[error("root finding failed: {0}")]
    RootFindFailure(String),
    #[error("path {path} left the domain |r| < {half_width} (r = {r})")]
    DomainEscape { path: u64, r: f64, half_width: f64 },
    #[error("row {row} of the kernel is entirely killed")]
    AllKilled { row: usize },
    #[error("eigen iteration did not converge: {0}")]
    NonConvergence(String),
    #[error("minimal density vanishes on column {column} of the set")]
    ZeroDensity { column: usize },
    #[error("e^-u = {exp_neg_u:.6e} does not exceed gamma(A) = {gamma:.6e}")]
    OutsideConvergenceRegion { exp_neg_u: f64, gamma: f64 },
    #[error("Bernstein bound violated at L = {level}: empirical {empirical:.4e} > bound {bound:.4e} + 3 SE")]
    BoundViolated { level: f64, empirical: f64, bound: f64 },
    #[error("insufficient exits: {0}")]
    InsufficientExits(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("tolerance exceeded: {0}")]
    ToleranceExceeded(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for failures of an assertion-bearing check, as opposed to bad input.
    pub fn is_assertion(&self) -> bool {
        matches!(
            self,
            Error::MethodMismatch { .. }
                | Error::BoundViolated { .. }
                | Error::InsufficientExits(_)
                | Error::InsufficientData(_)
                | Error::ToleranceExceeded(_)
                | Error::NoIntersection { .. }
                | Error::TangentialIntersection { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

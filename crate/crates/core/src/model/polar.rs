use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported Brownian dimension.
pub const MAX_NOISE: usize = 4;

/// Drift and diffusion rows at one point of the cylinder.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Coefficients {
    pub f_r: f64,
    pub f_phi: f64,
    pub g_r: [f64; MAX_NOISE],
    pub g_phi: [f64; MAX_NOISE],
}

impl Coefficients {
    pub fn d_rr(&self) -> f64 {
        dot(&self.g_r, &self.g_r)
    }
    pub fn d_rphi(&self) -> f64 {
        dot(&self.g_r, &self.g_phi)
    }
    pub fn d_phiphi(&self) -> f64 {
        dot(&self.g_phi, &self.g_phi)
    }
    /// `(D_rr, D_rφ, D_φφ)`.
    pub fn diffusion(&self) -> [f64; 3] {
        [self.d_rr(), self.d_rphi(), self.d_phiphi()]
    }
}

fn dot(a: &[f64; MAX_NOISE], b: &[f64; MAX_NOISE]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub type CoefficientFn = Arc<dyn Fn(f64, f64) -> Coefficients + Send + Sync>;

/// Analytic partial derivatives, used by the characteristic system.
#[derive(Clone)]
pub struct Partials {
    /// `[∂r f_r, ∂φ f_r, ∂r f_φ, ∂φ f_φ]`
    pub drift: Arc<dyn Fn(f64, f64) -> [f64; 4] + Send + Sync>,
    /// `[∂r (D_rr, D_rφ, D_φφ), ∂φ (D_rr, D_rφ, D_φφ)]`
    pub diffusion: Arc<dyn Fn(f64, f64) -> [[f64; 3]; 2] + Send + Sync>,
}

/// Parameters of the built-in benchmark family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkParams {
    pub lambda: f64,
    pub period: f64,
    pub a: f64,
    pub eps_phi: f64,
}

impl Default for BenchmarkParams {
    fn default() -> Self {
        Self { lambda: 1.0, period: 1.0, a: 0.5, eps_phi: 0.3 }
    }
}

/// An SDE on the cylinder `(r, φ) ∈ (-L, L) × R/Z` in polar-type form:
/// `dr = f_r dt + σ g_r dW`, `dφ = f_φ dt + σ g_φ dW`, with the unstable orbit
/// at `r = 1` and (when present) the stable orbit at `r = -1`.
#[derive(Clone)]
pub struct PolarModel {
    pub name: String,
    coeffs: CoefficientFn,
    partials: Option<Partials>,
    pub noise_dim: usize,
    pub lambda_plus: f64,
    pub t_plus: f64,
    pub lambda_minus: f64,
    pub t_minus: f64,
    pub has_stable_orbit: bool,
    pub half_width: f64,
    pub nonlinear_bound: f64,
    pub phase_speed_floor: f64,
}

impl fmt::Debug for PolarModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PolarModel")
            .field("name", &self.name)
            .field("noise_dim", &self.noise_dim)
            .field("lambda_plus", &self.lambda_plus)
            .field("t_plus", &self.t_plus)
            .field("lambda_minus", &self.lambda_minus)
            .field("t_minus", &self.t_minus)
            .field("half_width", &self.half_width)
            .finish()
    }
}

const FD_STEP: f64 = 1e-6;

impl PolarModel {
    /// Generic constructor; orbit metadata is declared, not inferred.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        coeffs: CoefficientFn,
        noise_dim: usize,
        (lambda_plus, t_plus): (f64, f64),
        stable: Option<(f64, f64)>,
        half_width: f64,
    ) -> Result<Self> {
        if noise_dim == 0 || noise_dim > MAX_NOISE {
            return Err(Error::InvalidInput(format!("noise dimension {noise_dim} outside 1..={MAX_NOISE}")));
        }
        if !(lambda_plus > 0.0 && t_plus > 0.0) {
            return Err(Error::InvalidInput("unstable orbit needs positive rate and period".into()));
        }
        if half_width <= 1.0 {
            return Err(Error::InvalidInput(format!("domain half width {half_width} must exceed 1")));
        }
        let (lambda_minus, t_minus, has_stable_orbit) = match stable {
            Some((l, t)) if l > 0.0 && t > 0.0 => (l, t, true),
            Some(_) => return Err(Error::InvalidInput("stable orbit needs positive rate and period".into())),
            None => (f64::NAN, f64::NAN, false),
        };
        Ok(Self {
            name: name.into(),
            coeffs,
            partials: None,
            noise_dim,
            lambda_plus,
            t_plus,
            lambda_minus,
            t_minus,
            has_stable_orbit,
            half_width,
            nonlinear_bound: 0.0,
            phase_speed_floor: 0.0,
        })
    }

    pub fn with_partials(mut self, partials: Partials) -> Self {
        self.partials = Some(partials);
        self
    }

    /// `f_r = λ(r²-1)/2`, `f_φ = 1/T`, `g_r = (√(1+a cos 2πφ), 0)`, `g_φ = (0, ε_φ)`.
    pub fn benchmark(p: BenchmarkParams) -> Result<Self> {
        if !(p.a.abs() < 1.0) {
            return Err(Error::InvalidInput(format!("benchmark modulation a = {} must satisfy |a| < 1", p.a)));
        }
        let BenchmarkParams { lambda, period, a, eps_phi } = p;
        let name = if a == 0.0 && eps_phi == 0.0 { "benchmark-sym" } else { "benchmark-asym" };
        let coeffs: CoefficientFn = Arc::new(move |r, phi| {
            let mut c = Coefficients {
                f_r: 0.5 * lambda * (r - 1.0) * (r + 1.0),
                f_phi: 1.0 / period,
                ..Default::default()
            };
            c.g_r[0] = (1.0 + a * (2.0 * PI * phi).cos()).sqrt();
            c.g_phi[1] = eps_phi;
            c
        });
        let partials = Partials {
            drift: Arc::new(move |r, _| [lambda * r, 0.0, 0.0, 0.0]),
            diffusion: Arc::new(move |_, phi| [[0.0; 3], [-2.0 * PI * a * (2.0 * PI * phi).sin(), 0.0, 0.0]]),
        };
        let mut m = Self::new(name, coeffs, 2, (lambda, period), Some((lambda, period)), 3.0)?.with_partials(partials);
        m.nonlinear_bound = 0.5 * lambda;
        m.phase_speed_floor = 1.0 / period;
        Ok(m)
    }

    /// The rotationally symmetric member of the benchmark family.
    pub fn benchmark_symmetric(lambda: f64, period: f64) -> Result<Self> {
        Self::benchmark(BenchmarkParams { lambda, period, a: 0.0, eps_phi: 0.0 })
    }

    /// Linear radial model near the unstable orbit, `f_r = λ(r-1)`, with
    /// `g_r = (√(1+a cos 2πφ), 0)` and no phase noise.
    pub fn linear(lambda: f64, period: f64, a: f64) -> Result<Self> {
        if !(a.abs() < 1.0) {
            return Err(Error::InvalidInput(format!("modulation a = {a} must satisfy |a| < 1")));
        }
        let coeffs: CoefficientFn = Arc::new(move |r, phi| {
            let mut c = Coefficients { f_r: lambda * (r - 1.0), f_phi: 1.0 / period, ..Default::default() };
            c.g_r[0] = (1.0 + a * (2.0 * PI * phi).cos()).sqrt();
            c
        });
        let partials = Partials {
            drift: Arc::new(move |_, _| [lambda, 0.0, 0.0, 0.0]),
            diffusion: Arc::new(move |_, phi| [[0.0; 3], [-2.0 * PI * a * (2.0 * PI * phi).sin(), 0.0, 0.0]]),
        };
        let mut m = Self::new("linear", coeffs, 2, (lambda, period), None, 1e6)?.with_partials(partials);
        m.phase_speed_floor = 1.0 / period;
        Ok(m)
    }

    /// Looks up a built-in model by name.
    pub fn by_name(name: &str, p: BenchmarkParams) -> Result<Self> {
        match name {
            "benchmark-asym" => Self::benchmark(p),
            "benchmark-sym" => Self::benchmark_symmetric(p.lambda, p.period),
            "linear" => Self::linear(p.lambda, p.period, p.a),
            other => Err(Error::Config(format!(
                "unknown model '{other}' (expected benchmark-asym, benchmark-sym or linear)"
            ))),
        }
    }

    #[inline]
    pub fn coefficients(&self, r: f64, phi: f64) -> Coefficients {
        (self.coeffs)(r, phi)
    }

    pub fn f_r(&self, r: f64, phi: f64) -> f64 {
        self.coefficients(r, phi).f_r
    }

    pub fn f_phi(&self, r: f64, phi: f64) -> f64 {
        self.coefficients(r, phi).f_phi
    }

    /// `[∂r f_r, ∂φ f_r, ∂r f_φ, ∂φ f_φ]`, analytic when available.
    pub fn drift_partials(&self, r: f64, phi: f64) -> [f64; 4] {
        if let Some(p) = &self.partials {
            return (p.drift)(r, phi);
        }
        let h = FD_STEP;
        let (rp, rm) = (self.coefficients(r + h, phi), self.coefficients(r - h, phi));
        let (pp, pm) = (self.coefficients(r, phi + h), self.coefficients(r, phi - h));
        [
            (rp.f_r - rm.f_r) / (2.0 * h),
            (pp.f_r - pm.f_r) / (2.0 * h),
            (rp.f_phi - rm.f_phi) / (2.0 * h),
            (pp.f_phi - pm.f_phi) / (2.0 * h),
        ]
    }

    /// `[∂r D, ∂φ D]` for `D = (D_rr, D_rφ, D_φφ)`.
    pub fn diffusion_partials(&self, r: f64, phi: f64) -> [[f64; 3]; 2] {
        if let Some(p) = &self.partials {
            return (p.diffusion)(r, phi);
        }
        let h = FD_STEP;
        let d = |r, phi| self.coefficients(r, phi).diffusion();
        let (rp, rm, pp, pm) = (d(r + h, phi), d(r - h, phi), d(r, phi + h), d(r, phi - h));
        let mut out = [[0.0; 3]; 2];
        for i in 0..3 {
            out[0][i] = (rp[i] - rm[i]) / (2.0 * h);
            out[1][i] = (pp[i] - pm[i]) / (2.0 * h);
        }
        out
    }

    /// `D_rr(1, φ) = g_r(1,φ)·g_r(1,φ)ᵀ`, the transversal diffusion on the unstable orbit.
    pub fn drr_profile(&self) -> impl Fn(f64) -> f64 + Send + Sync + Clone + 'static {
        let c = self.coeffs.clone();
        move |phi| c(1.0, phi).d_rr()
    }

    /// `D_rr(-1, φ)` on the stable orbit.
    pub fn drr_profile_stable(&self) -> impl Fn(f64) -> f64 + Send + Sync + Clone + 'static {
        let c = self.coeffs.clone();
        move |phi| c(-1.0, phi).d_rr()
    }

    /// Checks the declared orbit metadata against the fields.
    pub fn validate(&self, tol: f64) -> ValidationReport {
        let mut checks = Vec::new();
        let n = 64;
        let mut worst_plus: f64 = 0.0;
        let mut worst_minus: f64 = 0.0;
        let mut worst_speed_plus: f64 = 0.0;
        let mut worst_speed_minus: f64 = 0.0;
        for k in 0..n {
            let phi = k as f64 / n as f64;
            let h = 1e-6;
            let d = |r: f64| (self.f_r(r + h, phi) - self.f_r(r - h, phi)) / (2.0 * h);
            worst_plus = worst_plus.max((d(1.0) - self.lambda_plus).abs());
            worst_speed_plus = worst_speed_plus.max((self.f_phi(1.0, phi) - 1.0 / self.t_plus).abs());
            if self.has_stable_orbit {
                worst_minus = worst_minus.max((d(-1.0) + self.lambda_minus).abs());
                worst_speed_minus = worst_speed_minus.max((self.f_phi(-1.0, phi) - 1.0 / self.t_minus).abs());
            }
        }
        checks.push(Check::new("d f_r/dr (1, phi) = lambda_plus", worst_plus, tol));
        checks.push(Check::new("f_phi(1, phi) = 1/T_plus", worst_speed_plus, tol));
        if self.has_stable_orbit {
            checks.push(Check::new("d f_r/dr (-1, phi) = -lambda_minus", worst_minus, tol));
            checks.push(Check::new("f_phi(-1, phi) = 1/T_minus", worst_speed_minus, tol));
            let mut max_fr = f64::NEG_INFINITY;
            for i in 1..40 {
                let r = -1.0 + 2.0 * i as f64 / 40.0;
                for k in 0..16 {
                    max_fr = max_fr.max(self.f_r(r, k as f64 / 16.0));
                }
            }
            checks.push(Check { name: "f_r < 0 on (-1, 1)".into(), value: max_fr, passed: max_fr < 0.0 });
        }
        let mut min_speed = f64::INFINITY;
        for i in 0..=40 {
            let r = -self.half_width.min(4.0) + 2.0 * self.half_width.min(4.0) * i as f64 / 40.0;
            for k in 0..16 {
                min_speed = min_speed.min(self.f_phi(r, k as f64 / 16.0));
            }
        }
        checks.push(Check { name: "f_phi bounded below".into(), value: min_speed, passed: min_speed > 0.0 });
        ValidationReport { checks }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: &str, deviation: f64, tol: f64) -> Self {
        Self { name: name.into(), value: deviation, passed: deviation <= tol }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn benchmark_metadata_is_consistent() {
        let m = PolarModel::benchmark(BenchmarkParams::default()).unwrap();
        let rep = m.validate(1e-8);
        assert!(rep.passed(), "{rep:?}");
        assert_eq!(m.name, "benchmark-asym");
    }

    #[test]
    fn drr_profile_matches_modulation() {
        let m = PolarModel::benchmark(BenchmarkParams::default()).unwrap();
        let d = m.drr_profile();
        for k in 0..10 {
            let phi = k as f64 / 10.0;
            assert!((d(phi) - (1.0 + 0.5 * (2.0 * PI * phi).cos())).abs() < 1e-15);
        }
    }

    #[test]
    fn analytic_partials_match_differences() {
        let m = PolarModel::benchmark(BenchmarkParams::default()).unwrap();
        let mut fd = m.clone();
        fd.partials = None;
        for &(r, phi) in &[(0.3, 0.1), (-0.7, 0.77), (1.0, 0.5)] {
            let (a, b) = (m.drift_partials(r, phi), fd.drift_partials(r, phi));
            for i in 0..4 {
                assert!((a[i] - b[i]).abs() < 1e-8);
            }
            let (a, b) = (m.diffusion_partials(r, phi), fd.diffusion_partials(r, phi));
            for i in 0..2 {
                for j in 0..3 {
                    assert!((a[i][j] - b[i][j]).abs() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn linear_model_has_no_stable_orbit() {
        let m = PolarModel::linear(1.0, 1.0, 0.0).unwrap();
        assert!(!m.has_stable_orbit);
        assert!(m.validate(1e-8).passed());
    }
}

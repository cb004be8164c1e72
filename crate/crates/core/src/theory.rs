//! Closed-form objects of the cycling theory: the Gumbel density, the
//! periodicised profile `Q_{λT}`, the periodic variance `h^per`, the natural
//! phase `θ`, linear first-passage laws and the rate-function gap.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::PolarModel;
use crate::numerics::quad;
use crate::numerics::special::norm_cdf;

/// Type-1 Gumbel density `A(x) = exp{-2x - e^{-2x}/2}`.
pub fn gumbel_density(x: f64) -> f64 {
    (-2.0 * x - 0.5 * (-2.0 * x).exp()).exp()
}

/// Terms `A(λT(n - x))` over the integers `n` whose omission is certified
/// below `tol`, passed to `visit(y)` with `y = λT(n - x)`.
fn for_each_profile_term(lambda_t: f64, x: f64, tol: f64, mut visit: impl FnMut(f64)) {
    let n0 = x.round() as i64;
    let geo = 1.0 - (-2.0 * lambda_t).exp();
    // Right tail: A(y) ≤ e^{-2y}, so the remainder after y is at most
    // e^{-2(y+λT)} / (1 - e^{-2λT}).
    let mut n = n0;
    loop {
        let y = lambda_t * (n as f64 - x);
        visit(y);
        if y > 0.0 && (-2.0 * (y + lambda_t)).exp() / geo < 0.5 * tol {
            break;
        }
        n += 1;
    }
    // Left tail: once the term ratio q drops below 1 it keeps decreasing, so
    // the remainder is at most A(y - λT) / (1 - q).
    let mut n = n0 - 1;
    loop {
        let y = lambda_t * (n as f64 - x);
        visit(y);
        let u = (-2.0 * y).exp();
        let q = (2.0 * lambda_t - 0.5 * u * ((2.0 * lambda_t).exp() - 1.0)).exp();
        if u > 2.0 && q < 1.0 && gumbel_density(y - lambda_t) / (1.0 - q) < 0.5 * tol {
            break;
        }
        n -= 1;
    }
}

/// Periodicised Gumbel profile `Q_{λT}(x) = Σ_n A(λT(n - x))`, truncated with
/// a certified remainder below `tol`.
pub fn cycling_profile(lambda_t: f64, x: f64, tol: f64) -> f64 {
    assert!(lambda_t > 0.0 && tol > 0.0, "cycling_profile needs lambda_t > 0 and tol > 0");
    let mut s = 0.0;
    for_each_profile_term(lambda_t, x, tol, |y| s += gumbel_density(y));
    s
}

pub const DEFAULT_QUAD_TOL: f64 = 1e-10;
pub const DEFAULT_SERIES_TOL: f64 = 1e-12;

/// Inputs shared by the phase-dependent theory objects. All phase functions
/// work in phase time, so `d_rr` is the per-unit-phase transversal diffusion
/// `T₊·D_rr(1, φ)`.
#[derive(Clone)]
pub struct TheoryContext {
    pub lambda_t: f64,
    pub d_rr: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub delta: f64,
    pub s_star: f64,
    pub quadrature_tol: f64,
}

impl std::fmt::Debug for TheoryContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TheoryContext")
            .field("lambda_t", &self.lambda_t)
            .field("delta", &self.delta)
            .field("s_star", &self.s_star)
            .field("quadrature_tol", &self.quadrature_tol)
            .finish()
    }
}

impl TheoryContext {
    pub fn new(lambda_t: f64, d_rr: Arc<dyn Fn(f64) -> f64 + Send + Sync>, delta: f64, s_star: f64) -> Result<Self> {
        if !(lambda_t > 0.0) {
            return Err(Error::InvalidInput(format!("lambda*T must be positive, got {lambda_t}")));
        }
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::InvalidInput(format!("delta must lie in (0, 1/2), got {delta}")));
        }
        let min_d = (0..64).map(|k| d_rr(k as f64 / 64.0)).fold(f64::INFINITY, f64::min);
        if !(min_d > 0.0) {
            return Err(Error::InvalidInput(format!("transversal diffusion must be positive, min {min_d}")));
        }
        Ok(Self { lambda_t, d_rr, delta, s_star: crate::numerics::frac(s_star), quadrature_tol: DEFAULT_QUAD_TOL })
    }

    /// Context for the unstable orbit of a polar model.
    pub fn from_model(model: &PolarModel, delta: f64, s_star: f64) -> Result<Self> {
        let d = model.drr_profile();
        let t = model.t_plus;
        Self::new(model.lambda_plus * t, Arc::new(move |phi| t * d(phi)), delta, s_star)
    }

    /// Context with constant diffusion, mostly for checks.
    pub fn constant(lambda_t: f64, d: f64, delta: f64, s_star: f64) -> Result<Self> {
        Self::new(lambda_t, Arc::new(move |_| d), delta, s_star)
    }

    pub fn with_quadrature_tol(mut self, tol: f64) -> Self {
        self.quadrature_tol = tol;
        self
    }

    /// `h^per(φ) = (1 - e^{-2λT})^{-1} ∫₀¹ e^{-2λTs} D_rr(φ + s) ds`.
    pub fn h_per(&self, phi: f64) -> Result<f64> {
        let k = 2.0 * self.lambda_t;
        let tol = self.quadrature_tol;
        let q = quad::integrate(|s| (-k * s).exp() * (self.d_rr)(phi + s), 0.0, 1.0, tol * 1e-2, tol)?;
        Ok(q.value / -(-k).exp_m1())
    }

    /// Residual of `dh/dφ = 2λT h - D_rr(φ)`, evaluated by central differences.
    pub fn h_per_residual(&self, phi: f64) -> Result<f64> {
        let h = 1e-4;
        let d = (-self.h_per(phi + 2.0 * h)? + 8.0 * self.h_per(phi + h)? - 8.0 * self.h_per(phi - h)?
            + self.h_per(phi - 2.0 * h)?)
            / (12.0 * h);
        Ok(d - 2.0 * self.lambda_t * self.h_per(phi)? + (self.d_rr)(phi))
    }

    /// `θ(φ) = λT φ - ½ log[½δ² h^per(φ) / h^per(s*)²]`.
    pub fn theta(&self, phi: f64) -> Result<f64> {
        let hs = self.h_per(self.s_star)?;
        Ok(self.theta_with(phi, self.h_per(phi)?, hs))
    }

    fn theta_with(&self, phi: f64, h: f64, h_star: f64) -> f64 {
        self.lambda_t * phi - 0.5 * (0.5 * self.delta * self.delta * h / (h_star * h_star)).ln()
    }

    /// `θ'(φ) = D_rr(φ) / (2 h^per(φ))`.
    pub fn theta_prime(&self, phi: f64) -> Result<f64> {
        Ok((self.d_rr)(phi) / (2.0 * self.h_per(phi)?))
    }

    /// Leading term of `I_φ - I_∞` for a descent started at phase `at`:
    /// `½δ² e^{-2λTφ} h^per(at + φ) / h^per(at)²`.
    pub fn rate_gap(&self, phi: f64, at: f64) -> Result<f64> {
        if !(phi > 0.0) {
            return Err(Error::InvalidInput(format!("rate gap needs positive elapsed phase, got {phi}")));
        }
        let h0 = self.h_per(at)?;
        Ok(0.5 * self.delta * self.delta * (-2.0 * self.lambda_t * phi).exp() * self.h_per(at + phi)? / (h0 * h0))
    }

    /// Argument of the profile at noise `σ`: `|log σ| / (λT)`.
    pub fn shift(&self, sigma: f64) -> f64 {
        sigma.ln().abs() / self.lambda_t
    }

    /// Predicted mass of `θ(φ_τ)/(λT) ∈ [t, t+Δ]`: `Δ C0 λ0^t Q_{λT}(|log σ|/(λT) - t)`.
    pub fn main_theorem_density(&self, sigma: f64, t: f64, lambda0: f64, c0: f64, delta_bin: f64) -> Result<f64> {
        check_sigma(sigma)?;
        if !(lambda0 > 0.0 && lambda0 <= 1.0 && delta_bin > 0.0) {
            return Err(Error::InvalidInput(format!("need lambda0 in (0,1] and bin > 0, got {lambda0}, {delta_bin}")));
        }
        Ok(delta_bin * c0 * lambda0.powf(t) * cycling_profile(self.lambda_t, self.shift(sigma) - t, DEFAULT_SERIES_TOL))
    }

    /// Winding-summed profile `Δ λT Q_{λT}(|log σ|/(λT) - t)`, normalised to
    /// unit mass over one period.
    pub fn wrapped_profile(&self, sigma: f64, t: f64, delta_bin: f64) -> Result<f64> {
        check_sigma(sigma)?;
        Ok(delta_bin * self.lambda_t * cycling_profile(self.lambda_t, self.shift(sigma) - t, DEFAULT_SERIES_TOL))
    }

    /// Distribution function on `[0, 1)` of the wrapped profile, shifted by
    /// `offset`: `G(t) = ∫₀ᵗ λT Q(c - s) ds` with `c = |log σ|/(λT) + offset`.
    pub fn wrapped_cdf(&self, sigma: f64, offset: f64, t: f64) -> f64 {
        wrapped_cdf(self.lambda_t, self.shift(sigma) + offset, t)
    }

    /// Tabulated `h^per` and `θ` for bulk evaluation.
    pub fn tabulate(&self, n: usize) -> Result<PhaseTable> {
        PhaseTable::new(self, n)
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("sigma must lie in (0, 1), got {sigma}")))
    }
}

/// `Σ_n [exp(-½e^{-2λT(n-c+t)}) - exp(-½e^{-2λT(n-c)})]` for `t ∈ [0, 1]`.
pub fn wrapped_cdf(lambda_t: f64, c: f64, t: f64) -> f64 {
    let big = |y: f64| (-0.5 * (-2.0 * lambda_t * y).exp()).exp();
    let mut s = 0.0;
    let n0 = c.round() as i64;
    let mut n = n0;
    loop {
        let y = n as f64 - c;
        let term = big(y + t) - big(y);
        s += term;
        if y > 0.0 && term.abs() < 1e-18 {
            break;
        }
        n += 1;
    }
    let mut n = n0 - 1;
    loop {
        let y = n as f64 - c;
        let term = big(y + t) - big(y);
        s += term;
        if y + t < 0.0 && term.abs() < 1e-300_f64.max(1e-18 * s.abs()) {
            break;
        }
        n -= 1;
    }
    s
}

/// `h^per` and `θ` on a uniform grid, interpolated by cubic Hermite splines
/// using the exact derivatives `h' = 2λT h - D` and `θ' = D/(2h)`.
#[derive(Debug, Clone)]
pub struct PhaseTable {
    lambda_t: f64,
    h: Vec<f64>,
    dh: Vec<f64>,
    theta: Vec<f64>,
    dtheta: Vec<f64>,
}

impl PhaseTable {
    fn new(ctx: &TheoryContext, n: usize) -> Result<Self> {
        let n = n.max(8);
        let hs = ctx.h_per(ctx.s_star)?;
        let mut out = Self { lambda_t: ctx.lambda_t, h: vec![], dh: vec![], theta: vec![], dtheta: vec![] };
        for i in 0..=n {
            let phi = i as f64 / n as f64;
            let h = ctx.h_per(phi)?;
            let d = (ctx.d_rr)(phi);
            out.h.push(h);
            out.dh.push(2.0 * ctx.lambda_t * h - d);
            out.theta.push(ctx.theta_with(phi, h, hs));
            out.dtheta.push(d / (2.0 * h));
        }
        Ok(out)
    }

    fn hermite(v: &[f64], dv: &[f64], x: f64) -> f64 {
        let m = v.len() - 1;
        let xs = x * m as f64;
        let i = (xs.floor() as usize).min(m - 1);
        let t = xs - i as f64;
        let h = 1.0 / m as f64;
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * v[i]
            + (t3 - 2.0 * t2 + t) * h * dv[i]
            + (-2.0 * t3 + 3.0 * t2) * v[i + 1]
            + (t3 - t2) * h * dv[i + 1]
    }

    pub fn h_per(&self, phi: f64) -> f64 {
        Self::hermite(&self.h, &self.dh, crate::numerics::frac(phi))
    }

    /// `θ(φ)` for unwrapped `φ`, using `θ(φ + 1) = θ(φ) + λT`.
    pub fn theta(&self, phi: f64) -> f64 {
        let k = phi.floor();
        let mut f = phi - k;
        if f >= 1.0 {
            f = 0.0;
        }
        Self::hermite(&self.theta, &self.dtheta, f) + self.lambda_t * k
    }
}

/// The linear transversal process `dr = λ r dt + σ g_r dW` near the unstable
/// orbit, with diffusion `D(t) = D_rr(1, t/T)` periodic in physical time.
#[derive(Clone)]
pub struct LinearProcess {
    pub lambda: f64,
    pub period: f64,
    d: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    one_period: f64,
}

impl std::fmt::Debug for LinearProcess {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LinearProcess").field("lambda", &self.lambda).field("period", &self.period).finish()
    }
}

impl LinearProcess {
    pub fn new(lambda: f64, period: f64, d_phase: Arc<dyn Fn(f64) -> f64 + Send + Sync>) -> Result<Self> {
        if !(lambda > 0.0 && period > 0.0) {
            return Err(Error::InvalidInput("linear process needs positive rate and period".into()));
        }
        let mut lp = Self { lambda, period, d: d_phase, one_period: 0.0 };
        lp.one_period = lp.partial(period)?;
        Ok(lp)
    }

    pub fn from_model(model: &PolarModel) -> Result<Self> {
        Self::new(model.lambda_plus, model.t_plus, Arc::new(model.drr_profile()))
    }

    pub fn constant(lambda: f64, d: f64) -> Result<Self> {
        Self::new(lambda, 1.0, Arc::new(move |_| d))
    }

    pub fn diffusion(&self, t: f64) -> f64 {
        (self.d)(t / self.period)
    }

    fn partial(&self, tau: f64) -> Result<f64> {
        if tau <= 0.0 {
            return Ok(0.0);
        }
        let l = self.lambda;
        quad::integrate(|s| (-2.0 * l * s).exp() * self.diffusion(s), 0.0, tau, 1e-15, 1e-13).map(|q| q.value)
    }

    /// `v_t = ∫₀ᵗ e^{-2λs} D(s) ds`.
    pub fn variance(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        let k = (t / self.period).floor();
        let decay = (-2.0 * self.lambda * self.period * k).exp();
        let rest = t - k * self.period;
        Ok(self.variance_infinity() * (1.0 - decay) + decay * self.partial(rest)?)
    }

    /// `v_∞ = (1 - e^{-2λT})^{-1} ∫₀ᵀ e^{-2λs} D(s) ds`.
    pub fn variance_infinity(&self) -> f64 {
        self.one_period / -(-2.0 * self.lambda * self.period).exp_m1()
    }

    /// `P(τ⁰ ≤ t) = 2Φ(-r0 / (σ√v_t))`, first hitting of the orbit from
    /// distance `r0`.
    pub fn reflection_cdf(&self, r0: f64, sigma: f64, t: f64) -> Result<f64> {
        check_positive(r0, sigma)?;
        let v = self.variance(t)?;
        if v <= 0.0 {
            return Ok(0.0);
        }
        Ok(2.0 * norm_cdf(-r0 / (sigma * v.sqrt())))
    }

    /// `lim_{t→∞}` of the reflection CDF.
    pub fn reflection_cdf_limit(&self, r0: f64, sigma: f64) -> Result<f64> {
        check_positive(r0, sigma)?;
        Ok(2.0 * norm_cdf(-r0 / (sigma * self.variance_infinity().sqrt())))
    }

    /// Density of the hitting time: `D(t) e^{-2λt} / (√(2π) v_t) · F(r0/(σ√v_t))`
    /// with `F(u) = u e^{-u²/2}`.
    pub fn hitting_density(&self, r0: f64, sigma: f64, t: f64) -> Result<f64> {
        check_positive(r0, sigma)?;
        if t <= 0.0 {
            return Ok(0.0);
        }
        let v = self.variance(t)?;
        let u = r0 / (sigma * v.sqrt());
        Ok(self.diffusion(t) * (-2.0 * self.lambda * t).exp() / ((2.0 * PI).sqrt() * v) * hitting_shape(u))
    }

    /// Leading factor of the upper bound on staying in `(0, δ)` up to time `t`:
    /// `(2π)^{-1/2} δ² r0 / (σ³ v_t^{3/2}) e^{-r0²/(2σ²v_t)} e^{-2λt}`.
    pub fn stay_prob_upper(&self, r0: f64, delta: f64, sigma: f64, t: f64) -> Result<f64> {
        check_positive(r0, sigma)?;
        if !(r0 < delta && t > 0.0) {
            return Err(Error::InvalidInput(format!("need 0 < r0 < delta and t > 0 (r0 = {r0}, delta = {delta})")));
        }
        let v = self.variance(t)?;
        Ok(delta * delta * r0 / ((2.0 * PI).sqrt() * sigma.powi(3) * v.powf(1.5))
            * (-r0 * r0 / (2.0 * sigma * sigma * v)).exp()
            * (-2.0 * self.lambda * t).exp())
    }
}

/// `F(u) = u e^{-u²/2}`.
pub fn hitting_shape(u: f64) -> f64 {
    u * (-0.5 * u * u).exp()
}

fn check_positive(r0: f64, sigma: f64) -> Result<()> {
    if r0 > 0.0 && sigma > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("need r0 > 0 and sigma > 0, got {r0}, {sigma}")))
    }
}

/// One row of a phase table.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PhaseRow {
    pub phi: f64,
    pub h_per: f64,
    pub theta: f64,
    pub theta_prime: f64,
}

pub fn phase_rows(ctx: &TheoryContext, n: usize) -> Result<Vec<PhaseRow>> {
    (0..n)
        .map(|i| {
            let phi = i as f64 / n as f64;
            Ok(PhaseRow { phi, h_per: ctx.h_per(phi)?, theta: ctx.theta(phi)?, theta_prime: ctx.theta_prime(phi)? })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::ode::{solve, OdeOptions};
    use crate::numerics::roots::brent;
    use approx::assert_relative_eq;

    #[test]
    fn gumbel_basics() {
        assert_relative_eq!(gumbel_density(0.0), (-0.5f64).exp(), max_relative = 1e-15);
        // Stationary point of log A: -2 + e^{-2x} = 0.
        let dlog = |x: f64| -2.0 + (-2.0 * x).exp();
        let x = brent(dlog, -2.0, 2.0, dlog(-2.0), dlog(2.0), 1e-15, 200).unwrap();
        assert!((x + 0.5 * 2f64.ln()).abs() < 1e-9);
        assert_eq!(gumbel_density(-400.0), 0.0);
        assert_eq!(gumbel_density(400.0), 0.0);
    }

    #[test]
    fn profile_is_periodic_with_period_mass() {
        for &lt in &[0.3, 1.0, 10.0] {
            for &x in &[0.0, 0.17, 0.5, 0.93] {
                let a = cycling_profile(lt, x, 1e-13);
                let b = cycling_profile(lt, x + 1.0, 1e-13);
                assert!((a - b).abs() < 1e-12);
                assert!(a > 0.0);
            }
            let q = quad::integrate(|x| cycling_profile(lt, x, 1e-14), 0.0, 1.0, 1e-13, 1e-12).unwrap();
            assert!((q.value - 1.0 / lt).abs() < 1e-9, "{lt}: {}", q.value);
        }
    }

    #[test]
    fn profile_sharpens_with_growth() {
        let ratio = |lt: f64| {
            let v: Vec<f64> = (0..2000).map(|i| cycling_profile(lt, i as f64 / 2000.0, 1e-12)).collect();
            v.iter().cloned().fold(0.0, f64::max) / v.iter().cloned().fold(f64::INFINITY, f64::min)
        };
        assert!(ratio(10.0) > 100.0);
        assert!(ratio(1.0) < 10.0);
    }

    #[test]
    fn constant_diffusion_closed_forms() {
        let ctx = TheoryContext::constant(2.0, 1.5, 0.1, 0.3).unwrap();
        for &phi in &[0.0, 0.4, 0.99] {
            assert_relative_eq!(ctx.h_per(phi).unwrap(), 1.5 / 4.0, max_relative = 1e-12);
            assert_relative_eq!(ctx.theta_prime(phi).unwrap(), 2.0, max_relative = 1e-12);
        }
        let g = ctx.rate_gap(2.0, 0.1).unwrap();
        assert_relative_eq!(g, 0.5 * 0.01 * (-8.0f64).exp() * 4.0 / 1.5, max_relative = 1e-12);
    }

    #[test]
    fn h_per_matches_periodic_bvp() {
        let ctx = TheoryContext::new(1.0, Arc::new(|p| 1.0 + 0.5 * (2.0 * PI * p).cos()), 0.1, 0.0).unwrap();
        // Unit-period flow of h' = 2λT h - D from 0; the periodic solution
        // satisfies h0 = e^{2λT} h0 + c with c the flow of 0.
        let opts = OdeOptions::with_tol(1e-13);
        let c = solve(|p, y: &[f64; 1]| Ok([2.0 * y[0] - (ctx.d_rr)(p)]), 0.0, [0.0], 1.0, &opts).unwrap()[0];
        let h0 = -c / (2f64.exp() - 1.0);
        assert!((ctx.h_per(0.0).unwrap() - h0).abs() < 1e-8);
        let h_half = solve(|p, y: &[f64; 1]| Ok([2.0 * y[0] - (ctx.d_rr)(p)]), 0.0, [h0], 0.5, &opts).unwrap()[0];
        assert!((ctx.h_per(0.5).unwrap() - h_half).abs() < 1e-8);
        assert!((ctx.h_per(0.31).unwrap() - ctx.h_per(1.31).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn theta_derivative_and_period_shift() {
        let ctx = TheoryContext::new(1.0, Arc::new(|p| 1.0 + 0.5 * (2.0 * PI * p).cos()), 0.1, 0.37).unwrap();
        for &phi in &[0.05, 0.4, 0.77] {
            let h = 1e-5;
            let fd = (ctx.theta(phi + h).unwrap() - ctx.theta(phi - h).unwrap()) / (2.0 * h);
            assert!((fd - ctx.theta_prime(phi).unwrap()).abs() < 1e-6);
        }
        let d = ctx.theta(1.37).unwrap() - ctx.theta(0.37).unwrap();
        assert!((d - 1.0).abs() < 1e-10);
        let tab = ctx.tabulate(2048).unwrap();
        for &phi in &[0.013, 3.5, 7.999] {
            assert!((tab.theta(phi) - ctx.theta(phi).unwrap()).abs() < 1e-11);
        }
    }

    #[test]
    fn variance_and_reflection() {
        let lp = LinearProcess::constant(1.0, 1.0).unwrap();
        assert_eq!(lp.variance(0.0).unwrap(), 0.0);
        for &t in &[0.3, 1.0, 2.7] {
            assert_relative_eq!(lp.variance(t).unwrap(), (1.0 - (-2.0 * t).exp()) / 2.0, max_relative = 1e-12);
        }
        assert_eq!(lp.reflection_cdf(0.1, 0.1, 0.0).unwrap(), 0.0);
        assert!((lp.reflection_cdf(1e-12, 0.1, 1.0).unwrap() - 1.0).abs() < 1e-9);
        assert_relative_eq!(hitting_shape(1.0), (-0.5f64).exp(), max_relative = 1e-15);
    }

    #[test]
    fn modulated_variance_two_routes() {
        let lp = LinearProcess::new(1.0, 1.0, Arc::new(|p| 1.0 + 0.5 * (2.0 * PI * p).cos())).unwrap();
        let direct = quad::integrate(|s| (-2.0 * s).exp() * (1.0 + 0.5 * (2.0 * PI * s).cos()), 0.0, 40.0, 1e-15, 1e-14)
            .unwrap()
            .value;
        assert!((lp.variance_infinity() - direct).abs() < 1e-10);
        let v = lp.variance(3.4).unwrap();
        let d = quad::integrate(|s| (-2.0 * s).exp() * (1.0 + 0.5 * (2.0 * PI * s).cos()), 0.0, 3.4, 1e-15, 1e-14)
            .unwrap()
            .value;
        assert!((v - d).abs() < 1e-12);
    }

    #[test]
    fn wrapped_cdf_matches_profile_integral() {
        let ctx = TheoryContext::constant(1.3, 1.0, 0.1, 0.0).unwrap();
        let sigma = 0.15;
        for &t in &[0.2, 0.6, 1.0] {
            let q = quad::integrate(|s| ctx.wrapped_profile(sigma, s, 1.0).unwrap(), 0.0, t, 1e-13, 1e-12).unwrap();
            assert!((ctx.wrapped_cdf(sigma, 0.0, t) - q.value).abs() < 1e-10);
        }
        assert!((ctx.wrapped_cdf(sigma, 0.0, 1.0) - 1.0).abs() < 1e-12);
    }
}

//! Periodic orbits of planar fields: Newton shooting on a section, monodromy,
//! Lyapunov exponents and Floquet vectors.

use std::sync::Arc;

use serde::Serialize;

use super::planar::{Mat2, PlanarVectorField, Point};
use crate::error::{Error, Result};
use crate::numerics::ode::{integrate, DenseStep, Flow, OdeOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OrbitKind {
    Stable,
    Unstable,
}

/// A line segment `point + s·direction`, `s ∈ s_range`.
#[derive(Debug, Clone, Copy)]
pub struct Section {
    pub point: Point,
    pub direction: Point,
    pub s_range: (f64, f64),
}

impl Section {
    /// The ray from the origin along the positive x axis.
    pub fn positive_x_axis(max: f64) -> Self {
        Self { point: [0.0, 0.0], direction: [1.0, 0.0], s_range: (1e-9, max) }
    }

    fn at(&self, s: f64) -> Point {
        [self.point[0] + s * self.direction[0], self.point[1] + s * self.direction[1]]
    }

    fn normal(&self) -> Point {
        let n = self.direction[0].hypot(self.direction[1]);
        [-self.direction[1] / n, self.direction[0] / n]
    }

    fn coordinate(&self, z: Point) -> f64 {
        let n2 = self.direction[0].powi(2) + self.direction[1].powi(2);
        ((z[0] - self.point[0]) * self.direction[0] + (z[1] - self.point[1]) * self.direction[1]) / n2
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ShootingOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub ode: OdeOptions,
    pub max_return_time: f64,
    pub samples: usize,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 50, ode: OdeOptions::with_tol(1e-12), max_return_time: 1e3, samples: 1024 }
    }
}

/// One periodic orbit with an equal-time parametrisation `Γ(φ) = γ(Tφ)`.
#[derive(Debug, Clone)]
pub struct PeriodicOrbit {
    pub kind: OrbitKind,
    pub period: f64,
    /// Closing residual `‖Γ(1) - Γ(0)‖`.
    pub residual: f64,
    pub newton_iterations: usize,
    points: Vec<Point>,
    tangents: Vec<Point>,
}

impl PeriodicOrbit {
    /// `Γ(φ)`, 1-periodic, by cubic Hermite interpolation of the sampled orbit.
    pub fn gamma(&self, phi: f64) -> Point {
        let m = self.points.len() - 1;
        let x = crate::numerics::frac(phi) * m as f64;
        let i = (x.floor() as usize).min(m - 1);
        let t = x - i as f64;
        let h = 1.0 / m as f64;
        let (h00, h10, h01, h11) =
            (2.0 * t.powi(3) - 3.0 * t * t + 1.0, t.powi(3) - 2.0 * t * t + t, -2.0 * t.powi(3) + 3.0 * t * t, t.powi(3) - t * t);
        let mut out = [0.0; 2];
        for k in 0..2 {
            out[k] = h00 * self.points[i][k]
                + h10 * h * self.tangents[i][k]
                + h01 * self.points[i + 1][k]
                + h11 * h * self.tangents[i + 1][k];
        }
        out
    }

    /// `dΓ/dφ = T f(Γ(φ))` at a sample node, for checking the parametrisation.
    pub fn samples(&self) -> (&[Point], &[Point]) {
        (&self.points, &self.tangents)
    }
}

fn variational_rhs(field: &PlanarVectorField, sign: f64) -> impl Fn(f64, &[f64; 6]) -> Result<[f64; 6]> + '_ {
    move |_, y| {
        let z = [y[0], y[1]];
        let f = field.drift(z).map(|v| sign * v);
        let j = field.jacobian(z).map(|row| row.map(|v| sign * v));
        Ok([
            f[0],
            f[1],
            j[0][0] * y[2] + j[0][1] * y[4],
            j[0][0] * y[3] + j[0][1] * y[5],
            j[1][0] * y[2] + j[1][1] * y[4],
            j[1][0] * y[3] + j[1][1] * y[5],
        ])
    }
}

struct Return {
    time: f64,
    landing: Point,
    jac: Mat2,
}

fn first_return(field: &PlanarVectorField, sign: f64, section: &Section, s: f64, opts: &ShootingOptions) -> Result<Return> {
    let z0 = section.at(s);
    let n = section.normal();
    let f0 = field.drift(z0).map(|v| sign * v);
    let nf0 = n[0] * f0[0] + n[1] * f0[1];
    let fnorm = f0[0].hypot(f0[1]);
    if nf0.abs() <= 1e-8 * fnorm.max(1e-300) || fnorm == 0.0 {
        return Err(Error::SectionNotTransversal(format!("flow tangent to the section at s = {s}")));
    }
    let orient = nf0.signum();
    let g = move |_: f64, y: &[f64; 6]| orient * (n[0] * (y[0] - z0[0]) + n[1] * (y[1] - z0[1]));
    let mut escaped = false;
    let sol = integrate(
        variational_rhs(field, sign),
        0.0,
        [z0[0], z0[1], 1.0, 0.0, 0.0, 1.0],
        opts.max_return_time,
        &opts.ode,
        |step: &DenseStep<6>| {
            if !field.contains([step.y1[0], step.y1[1]]) {
                escaped = true;
                return Flow::Stop { t: step.t1, y: step.y1 };
            }
            match step.crossing(g, 1) {
                Some((t, y)) => Flow::Stop { t, y },
                None => Flow::Continue,
            }
        },
    )?;
    if escaped {
        return Err(Error::NoConvergence { residual: f64::INFINITY, iterations: 0 });
    }
    if !sol.stopped {
        return Err(Error::SectionNotTransversal(format!("no return within t = {}", opts.max_return_time)));
    }
    let y = sol.y;
    Ok(Return { time: sol.t, landing: [y[0], y[1]], jac: [[y[2], y[3]], [y[4], y[5]]] })
}

/// Newton shooting on the section return map. Unstable orbits are shot in
/// reversed time, where they attract.
pub fn find_periodic_orbit(
    field: &PlanarVectorField,
    section: &Section,
    initial_guess: Point,
    kind: OrbitKind,
    opts: &ShootingOptions,
) -> Result<PeriodicOrbit> {
    let mut s = section.coordinate(initial_guess);
    let n = section.normal();
    let d = section.direction;
    let dn = d[0].hypot(d[1]);
    let sign = match kind {
        OrbitKind::Stable => 1.0,
        OrbitKind::Unstable => -1.0,
    };
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iter {
        if !(s >= section.s_range.0 && s <= section.s_range.1) {
            return Err(Error::NoConvergence { residual, iterations: it });
        }
        let ret = match first_return(field, sign, section, s, opts) {
            Ok(r) => r,
            Err(Error::IntegrationFailure { .. }) | Err(Error::NoConvergence { .. }) => {
                return Err(Error::NoConvergence { residual, iterations: it })
            }
            Err(e) => return Err(e),
        };
        let p = section.coordinate(ret.landing);
        residual = p - s;
        if residual.abs() < opts.tol * (1.0 + s.abs()) {
            return build_orbit(field, sign, section.at(p), ret.time, kind, it, opts);
        }
        // Derivative of the landing coordinate including the return-time shift.
        let yd = [ret.jac[0][0] * d[0] + ret.jac[0][1] * d[1], ret.jac[1][0] * d[0] + ret.jac[1][1] * d[1]];
        let fl = field.drift(ret.landing).map(|v| sign * v);
        let nf = n[0] * fl[0] + n[1] * fl[1];
        let ny = n[0] * yd[0] + n[1] * yd[1];
        let corr = [yd[0] - fl[0] * ny / nf, yd[1] - fl[1] * ny / nf];
        let dp = (corr[0] * d[0] + corr[1] * d[1]) / (dn * dn);
        let denom = dp - 1.0;
        if denom.abs() < 1e-14 || !denom.is_finite() {
            return Err(Error::NoConvergence { residual, iterations: it });
        }
        s -= residual / denom;
    }
    Err(Error::NoConvergence { residual: residual.abs(), iterations: opts.max_iter })
}

fn build_orbit(
    field: &PlanarVectorField,
    sign: f64,
    z0: Point,
    period: f64,
    kind: OrbitKind,
    iterations: usize,
    opts: &ShootingOptions,
) -> Result<PeriodicOrbit> {
    let m = opts.samples;
    let mut points = Vec::with_capacity(m + 1);
    points.push(z0);
    let mut next = 1usize;
    let rhs = |_: f64, y: &[f64; 2]| Ok(field.drift(*y).map(|v| sign * v));
    let sol = integrate(rhs, 0.0, z0, period, &opts.ode, |step: &DenseStep<2>| {
        while next <= m {
            let t = period * next as f64 / m as f64;
            if t > step.t1 {
                break;
            }
            points.push(step.eval(t));
            next += 1;
        }
        Flow::Continue
    })?;
    while points.len() < m + 1 {
        points.push(sol.y);
    }
    let residual = (sol.y[0] - z0[0]).hypot(sol.y[1] - z0[1]);
    points[m] = sol.y;
    if sign < 0.0 {
        points.reverse();
    }
    let tangents = points.iter().map(|z| {
        let f = field.drift(*z);
        [period * f[0], period * f[1]]
    });
    let tangents = tangents.collect();
    Ok(PeriodicOrbit { kind, period, residual, newton_iterations: iterations, points, tangents })
}

/// Fundamental matrix `U(φ1, φ0)` of the variational equation, integrated
/// in phase along the interpolated orbit so that unstable orbits are handled
/// without the trajectory drifting off.
pub fn fundamental_matrix(field: &PlanarVectorField, orbit: &PeriodicOrbit, phi0: f64, phi1: f64, ode: &OdeOptions) -> Result<Mat2> {
    if phi1 < phi0 {
        return Err(Error::InvalidInput("fundamental matrix needs phi1 >= phi0".into()));
    }
    let t = orbit.period;
    let y = crate::numerics::ode::solve(
        |phi, y: &[f64; 4]| {
            let j = field.jacobian(orbit.gamma(phi));
            Ok([
                t * (j[0][0] * y[0] + j[0][1] * y[2]),
                t * (j[0][0] * y[1] + j[0][1] * y[3]),
                t * (j[1][0] * y[0] + j[1][1] * y[2]),
                t * (j[1][0] * y[1] + j[1][1] * y[3]),
            ])
        },
        phi0,
        [1.0, 0.0, 0.0, 1.0],
        phi1,
        ode,
    )?;
    Ok([[y[0], y[1]], [y[2], y[3]]])
}

/// Monodromy `U(φ0 + 1, φ0)`.
pub fn monodromy(field: &PlanarVectorField, orbit: &PeriodicOrbit, phi0: f64, ode: &OdeOptions) -> Result<Mat2> {
    fundamental_matrix(field, orbit, phi0, phi0 + 1.0, ode)
}

pub fn det2(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// `T ∫₀¹ div f(Γ(φ)) dφ`.
pub fn divergence_integral(field: &PlanarVectorField, orbit: &PeriodicOrbit) -> Result<f64> {
    let q = crate::numerics::quad::integrate(|phi| field.divergence(orbit.gamma(phi)), 0.0, 1.0, 1e-13, 1e-13)?;
    Ok(orbit.period * q.value)
}

/// The two monodromy eigenvalues ordered as (trivial ≈ 1, nontrivial).
pub fn monodromy_eigenvalues(m: &Mat2) -> Result<(f64, f64)> {
    let tr = m[0][0] + m[1][1];
    let det = det2(m);
    let disc = tr * tr - 4.0 * det;
    if disc < 0.0 {
        return Err(Error::DegenerateEigenvalue(disc));
    }
    let sq = disc.sqrt();
    let big = if tr >= 0.0 { 0.5 * (tr + sq) } else { 0.5 * (tr - sq) };
    let small = if big != 0.0 { det / big } else { 0.0 };
    let (a, b) = if (big.abs().ln()).abs() <= (small.abs().ln()).abs() { (big, small) } else { (small, big) };
    if (b - a).abs() < 1e-10 * a.abs().max(1.0) {
        return Err(Error::DegenerateEigenvalue(b));
    }
    Ok((a, b))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LyapunovEstimate {
    /// Positive rate from the divergence integral.
    pub lambda: f64,
    pub from_divergence: f64,
    pub from_monodromy: f64,
}

/// Lyapunov rate by the divergence integral, cross-checked against the
/// monodromy eigenvalue; the two must agree within `agree_tol`.
pub fn lyapunov_exponent(field: &PlanarVectorField, orbit: &PeriodicOrbit, ode: &OdeOptions, agree_tol: f64) -> Result<LyapunovEstimate> {
    let div = divergence_integral(field, orbit)? / orbit.period;
    let (_, mu) = monodromy_eigenvalues(&monodromy(field, orbit, 0.0, ode)?)?;
    let from_mono = mu.abs().ln() / orbit.period;
    if (div - from_mono).abs() > agree_tol {
        return Err(Error::MethodMismatch { divergence: div, monodromy: from_mono });
    }
    let expected_sign = match orbit.kind {
        OrbitKind::Stable => -1.0,
        OrbitKind::Unstable => 1.0,
    };
    if div * expected_sign <= 0.0 {
        return Err(Error::InvalidInput(format!("orbit declared {:?} but divergence average is {div}", orbit.kind)));
    }
    Ok(LyapunovEstimate { lambda: div.abs(), from_divergence: div, from_monodromy: from_mono })
}

/// Floquet eigenvector of the nontrivial multiplier, transported to phase
/// `φ ≥ 0` and normalised: `u(φ) ∝ U(φ, 0) u(0)`.
pub fn floquet_vector(field: &PlanarVectorField, orbit: &PeriodicOrbit, mono: &Mat2, phi: f64, ode: &OdeOptions) -> Result<Point> {
    let (_, mu) = monodromy_eigenvalues(mono)?;
    let c1 = [mono[0][1], mu - mono[0][0]];
    let c2 = [mu - mono[1][1], mono[1][0]];
    let u0 = if c1[0].hypot(c1[1]) >= c2[0].hypot(c2[1]) { c1 } else { c2 };
    let n0 = u0[0].hypot(u0[1]);
    let u0 = [u0[0] / n0, u0[1] / n0];
    if phi == 0.0 {
        return Ok(u0);
    }
    let u = fundamental_matrix(field, orbit, 0.0, phi, ode)?;
    let v = [u[0][0] * u0[0] + u[0][1] * u0[1], u[1][0] * u0[0] + u[1][1] * u0[1]];
    let nv = v[0].hypot(v[1]);
    Ok([v[0] / nv, v[1] / nv])
}

/// Orbit data for both orbits of a planar model.
#[derive(Clone)]
pub struct OrbitData {
    pub plus: PeriodicOrbit,
    pub minus: PeriodicOrbit,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    /// Transversal diffusion on the unstable orbit, when known.
    pub d_rr: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
}

impl std::fmt::Debug for OrbitData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OrbitData")
            .field("T_plus", &self.plus.period)
            .field("T_minus", &self.minus.period)
            .field("lambda_plus", &self.lambda_plus)
            .field("lambda_minus", &self.lambda_minus)
            .finish()
    }
}

impl OrbitData {
    pub fn analyse(
        field: &PlanarVectorField,
        section: &Section,
        guess_plus: Point,
        guess_minus: Point,
        opts: &ShootingOptions,
    ) -> Result<Self> {
        let plus = find_periodic_orbit(field, section, guess_plus, OrbitKind::Unstable, opts)?;
        let minus = find_periodic_orbit(field, section, guess_minus, OrbitKind::Stable, opts)?;
        let lp = lyapunov_exponent(field, &plus, &opts.ode, 1e-6)?;
        let lm = lyapunov_exponent(field, &minus, &opts.ode, 1e-6)?;
        Ok(Self { plus, minus, lambda_plus: lp.lambda, lambda_minus: lm.lambda, d_rr: None })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn symmetric_circles() {
        let f = PlanarVectorField::cubic_circles(0.0);
        let sec = Section::positive_x_axis(5.0);
        let opts = ShootingOptions::default();
        let stable = find_periodic_orbit(&f, &sec, [1.2, 0.0], OrbitKind::Stable, &opts).unwrap();
        assert!((stable.period - 2.0 * PI).abs() < 1e-9);
        let g = stable.gamma(0.37);
        assert!((g[0].hypot(g[1]) - 1.0).abs() < 1e-9);
        let unstable = find_periodic_orbit(&f, &sec, [2.9, 0.0], OrbitKind::Unstable, &opts).unwrap();
        let g = unstable.gamma(0.81);
        assert!((g[0].hypot(g[1]) - 3.0).abs() < 1e-9);
        let ls = lyapunov_exponent(&f, &stable, &opts.ode, 1e-6).unwrap();
        let lu = lyapunov_exponent(&f, &unstable, &opts.ode, 1e-6).unwrap();
        assert!((ls.lambda - 1.0).abs() < 1e-8);
        assert!((lu.lambda - 3.0).abs() < 1e-8);
    }

    #[test]
    fn far_guess_fails() {
        let f = PlanarVectorField::cubic_circles(0.0);
        let sec = Section::positive_x_axis(5.9);
        let err = find_periodic_orbit(&f, &sec, [5.5, 0.0], OrbitKind::Stable, &ShootingOptions::default()).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { .. }), "{err:?}");
    }

    #[test]
    fn floquet_vector_is_radial_for_symmetric_model() {
        let f = PlanarVectorField::cubic_circles(0.0);
        let opts = ShootingOptions::default();
        let orbit = find_periodic_orbit(&f, &Section::positive_x_axis(5.0), [1.1, 0.0], OrbitKind::Stable, &opts).unwrap();
        let m = monodromy(&f, &orbit, 0.0, &opts.ode).unwrap();
        for &phi in &[0.0, 0.25, 0.6] {
            let u = floquet_vector(&f, &orbit, &m, phi, &opts.ode).unwrap();
            let g = orbit.gamma(phi);
            let radial = [g[0] / g[0].hypot(g[1]), g[1] / g[0].hypot(g[1])];
            let cross = u[0] * radial[1] - u[1] * radial[0];
            assert!(cross.abs() < 1e-7, "phi {phi}: {u:?} vs {radial:?}");
        }
    }
}

//! Characteristics of the Freidlin–Wentzell rate function: the Hamiltonian
//! `H = ½ψᵀDψ + fᵀψ`, its flow with the phase as independent variable, the
//! heteroclinic minimiser and finite-time actions.

mod finite;
mod heteroclinic;

use std::io::Write;

use serde::Serialize;

pub use finite::{finite_time_action, infinite_action_from, FiniteTimeAction, InfiniteDescent};
pub use heteroclinic::{find_heteroclinic, return_map, Candidate, HeteroclinicOptions, HeteroclinicResult};

use crate::error::{Error, Result};
use crate::model::PolarModel;
use crate::numerics::ode::{integrate, DenseStep, Flow, OdeOptions, Solution};

/// A point of the characteristic system: position `(r, φ)` and momenta `ψ = (p_r, p_φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharState {
    pub r: f64,
    pub phi: f64,
    pub p_r: f64,
    pub p_phi: f64,
}

/// `H = ½ψᵀDψ + fᵀψ`.
pub fn hamiltonian(model: &PolarModel, s: &CharState) -> f64 {
    let c = model.coefficients(s.r, s.phi);
    let [drr, drp, dpp] = c.diffusion();
    0.5 * (drr * s.p_r * s.p_r + 2.0 * drp * s.p_r * s.p_phi + dpp * s.p_phi * s.p_phi) + c.f_r * s.p_r + c.f_phi * s.p_phi
}

/// Hamilton's equations in physical time: `(ṙ, φ̇, ṗ_r, ṗ_φ)`.
pub fn hamilton_rhs(model: &PolarModel, s: &CharState) -> [f64; 4] {
    let c = model.coefficients(s.r, s.phi);
    let [drr, drp, dpp] = c.diffusion();
    let (pr, pp) = (s.p_r, s.p_phi);
    let r_dot = drr * pr + drp * pp + c.f_r;
    let phi_dot = drp * pr + dpp * pp + c.f_phi;
    if pr == 0.0 && pp == 0.0 {
        return [r_dot, phi_dot, 0.0, 0.0];
    }
    let [frr, frp, fpr, fpp] = model.drift_partials(s.r, s.phi);
    let dd = model.diffusion_partials(s.r, s.phi);
    let quad = |d: &[f64; 3]| 0.5 * (d[0] * pr * pr + 2.0 * d[1] * pr * pp + d[2] * pp * pp);
    [r_dot, phi_dot, -(quad(&dd[0]) + frr * pr + fpr * pp), -(quad(&dd[1]) + frp * pr + fpp * pp)]
}

/// Lagrangian density `½ψᵀDψ` per unit time.
pub fn lagrangian(model: &PolarModel, s: &CharState) -> f64 {
    let [drr, drp, dpp] = model.coefficients(s.r, s.phi).diffusion();
    0.5 * (drr * s.p_r * s.p_r + 2.0 * drp * s.p_r * s.p_phi + dpp * s.p_phi * s.p_phi)
}

/// The root `p_φ` of `H(r, φ, p_r, p_φ) = energy` continuous with `p_φ = 0` at `p_r = 0`.
pub fn p_phi_on_shell(model: &PolarModel, r: f64, phi: f64, p_r: f64, energy: f64) -> Result<f64> {
    let c = model.coefficients(r, phi);
    let [drr, drp, dpp] = c.diffusion();
    let a = 0.5 * dpp;
    let b = drp * p_r + c.f_phi;
    let cc = 0.5 * drr * p_r * p_r + c.f_r * p_r - energy;
    let disc = b * b - 4.0 * a * cc;
    if disc < 0.0 || b <= 0.0 {
        return Err(Error::PhaseSpeedVanishes { phi, phi_dot: b });
    }
    Ok(-2.0 * cc / (b + disc.sqrt()))
}

/// One sample of a characteristic: state, physical time and cumulative action.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathPoint {
    pub phi: f64,
    pub r: f64,
    pub p_r: f64,
    pub p_phi: f64,
    pub time: f64,
    pub action: f64,
}

impl PathPoint {
    pub fn state(&self) -> CharState {
        CharState { r: self.r, phi: self.phi, p_r: self.p_r, p_phi: self.p_phi }
    }
}

/// Integrator state in phase time: `[r, p_r, p_φ, t, S]`.
pub(crate) type PhaseState = [f64; 5];

pub(crate) fn point_of(phi: f64, y: &PhaseState) -> PathPoint {
    PathPoint { phi, r: y[0], p_r: y[1], p_phi: y[2], time: y[3], action: y[4] }
}

/// Right-hand side with `φ` as independent variable; fails once `φ̇` drops
/// below `floor`.
pub(crate) fn phase_rhs(model: &PolarModel, floor: f64) -> impl Fn(f64, &PhaseState) -> Result<PhaseState> + '_ {
    move |phi, y| {
        if !(y[0].abs() < model.half_width) {
            return Err(Error::DomainEscape { path: 0, r: y[0], half_width: model.half_width });
        }
        let s = CharState { r: y[0], phi, p_r: y[1], p_phi: y[2] };
        let [rd, pd, prd, ppd] = hamilton_rhs(model, &s);
        if !(pd >= floor) {
            return Err(Error::PhaseSpeedVanishes { phi, phi_dot: pd });
        }
        Ok([rd / pd, prd / pd, ppd / pd, 1.0 / pd, lagrangian(model, &s) / pd])
    }
}

pub(crate) fn speed_floor(model: &PolarModel) -> f64 {
    if model.phase_speed_floor > 0.0 {
        1e-3 * model.phase_speed_floor
    } else {
        1e-6
    }
}

/// Integrates the phase-time characteristic system from `phi0`, handing every
/// accepted step to `observe`.
pub(crate) fn flow_phase(
    model: &PolarModel,
    phi0: f64,
    y0: PhaseState,
    phi_end: f64,
    opts: &OdeOptions,
    observe: impl FnMut(&DenseStep<5>) -> Flow<5>,
) -> Result<Solution<5>> {
    integrate(phase_rhs(model, speed_floor(model)), phi0, y0, phi_end, opts, observe)
}

/// A sampled characteristic.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub points: Vec<PathPoint>,
    /// `max |H - H(0)|` over the samples.
    pub energy_drift: f64,
}

/// Integrates the characteristics from `state0` over `phi_span` phases, with
/// `φ` as time, sampling every `1/samples_per_phase` and checking energy.
pub fn integrate_characteristics(
    model: &PolarModel,
    state0: CharState,
    phi_span: f64,
    tol: f64,
    samples_per_phase: usize,
) -> Result<Trajectory> {
    let opts = OdeOptions::with_tol(tol);
    let h0 = hamiltonian(model, &state0);
    let y0 = [state0.r, state0.p_r, state0.p_phi, 0.0, 0.0];
    let mut points = vec![point_of(state0.phi, &y0)];
    let dphi = 1.0 / samples_per_phase.max(1) as f64;
    let mut next = 1usize;
    let end = state0.phi + phi_span;
    let sol = flow_phase(model, state0.phi, y0, end, &opts, |step| {
        loop {
            let phi = state0.phi + next as f64 * dphi;
            if phi > step.t1 || phi > end {
                break;
            }
            points.push(point_of(phi, &step.eval(phi)));
            next += 1;
        }
        Flow::Continue
    })?;
    if points.last().map(|p| p.phi < sol.t).unwrap_or(true) {
        points.push(point_of(sol.t, &sol.y));
    }
    let energy_drift = points.iter().map(|p| (hamiltonian(model, &p.state()) - h0).abs()).fold(0.0, f64::max);
    Ok(Trajectory { points, energy_drift })
}

/// Trapezoidal action `∫ ½ψᵀDψ / φ̇ dφ` over the samples of a path.
pub fn action(model: &PolarModel, path: &[PathPoint]) -> f64 {
    let density = |p: &PathPoint| {
        let s = p.state();
        let phi_dot = hamilton_rhs(model, &s)[1];
        lagrangian(model, &s) / phi_dot
    };
    path.windows(2).map(|w| 0.5 * (w[1].phi - w[0].phi) * (density(&w[0]) + density(&w[1]))).sum()
}

/// Reduced action `½ ∫ D_rr p_r² / φ̇ dφ`, the leading term near the unstable orbit.
pub fn reduced_action(model: &PolarModel, path: &[PathPoint]) -> f64 {
    let density = |p: &PathPoint| {
        let s = p.state();
        let phi_dot = hamilton_rhs(model, &s)[1];
        0.5 * model.coefficients(p.r, p.phi).d_rr() * p.p_r * p.p_r / phi_dot
    };
    path.windows(2).map(|w| 0.5 * (w[1].phi - w[0].phi) * (density(&w[0]) + density(&w[1]))).sum()
}

/// Writes a path as CSV `(phi, r, p_r, p_phi, action)`.
pub fn write_path_csv(mut w: impl Write, path: &[PathPoint]) -> std::io::Result<()> {
    writeln!(w, "phi,r,p_r,p_phi,action")?;
    for p in path {
        writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", p.phi, p.r, p.p_r, p.p_phi, p.action)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BenchmarkParams;

    fn bench() -> PolarModel {
        PolarModel::benchmark(BenchmarkParams::default()).unwrap()
    }

    #[test]
    fn hamiltonian_identities() {
        let m = bench();
        let s = CharState { r: 0.3, phi: 0.2, p_r: 0.0, p_phi: 0.0 };
        assert_eq!(hamiltonian(&m, &s), 0.0);
        let s = CharState { r: 0.3, phi: 0.2, p_r: 0.4, p_phi: -0.1 };
        let s2 = CharState { p_r: 0.8, p_phi: -0.2, ..s };
        let [drr, drp, dpp] = m.coefficients(0.3, 0.2).diffusion();
        let quad = drr * 0.16 + 2.0 * drp * 0.4 * -0.1 + dpp * 0.01;
        assert!((hamiltonian(&m, &s2) - 2.0 * hamiltonian(&m, &s) - quad).abs() < 1e-15);
    }

    #[test]
    fn zero_momentum_plane_is_invariant() {
        let m = bench();
        let s = CharState { r: -0.4, phi: 0.7, p_r: 0.0, p_phi: 0.0 };
        let d = hamilton_rhs(&m, &s);
        assert_eq!(&d[2..], &[0.0, 0.0]);
        assert_eq!(d[0], m.f_r(-0.4, 0.7));
    }

    #[test]
    fn energy_is_conserved() {
        let m = bench();
        let p_r = 0.05;
        let p_phi = p_phi_on_shell(&m, -0.5, 0.0, p_r, 0.0).unwrap();
        let s = CharState { r: -0.5, phi: 0.0, p_r, p_phi };
        let tr = integrate_characteristics(&m, s, 3.0, 1e-12, 32).unwrap();
        assert!(tr.energy_drift < 3e-9, "{}", tr.energy_drift);
    }

    #[test]
    fn energy_gradient_is_orthogonal_to_flow() {
        let m = bench();
        let s = CharState { r: 0.2, phi: 0.3, p_r: 0.3, p_phi: 0.05 };
        let d = hamilton_rhs(&m, &s);
        let h = 1e-6;
        let fwd = CharState { r: s.r + h * d[0], phi: s.phi + h * d[1], p_r: s.p_r + h * d[2], p_phi: s.p_phi + h * d[3] };
        let bwd = CharState { r: s.r - h * d[0], phi: s.phi - h * d[1], p_r: s.p_r - h * d[2], p_phi: s.p_phi - h * d[3] };
        assert!(((hamiltonian(&m, &fwd) - hamiltonian(&m, &bwd)) / (2.0 * h)).abs() < 1e-8);
    }

    #[test]
    fn trapezoid_action_converges_quadratically() {
        let m = bench();
        let p_phi = p_phi_on_shell(&m, -0.5, 0.0, 0.1, 0.0).unwrap();
        let s = CharState { r: -0.5, phi: 0.0, p_r: 0.1, p_phi };
        let exact = integrate_characteristics(&m, s, 2.0, 1e-12, 8).unwrap();
        let exact_s = exact.points.last().unwrap().action;
        let e1 = (action(&m, &integrate_characteristics(&m, s, 2.0, 1e-12, 16).unwrap().points) - exact_s).abs();
        let e2 = (action(&m, &integrate_characteristics(&m, s, 2.0, 1e-12, 32).unwrap().points) - exact_s).abs();
        assert!(e2 < e1 / 3.0 && e2 < 2e-5, "{e1} {e2}");
        assert_eq!(action(&m, &[]), 0.0);
    }
}

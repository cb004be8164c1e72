use serde::Serialize;

use super::{flow_phase, p_phi_on_shell, point_of, PathPoint, PhaseState};
use crate::error::{Error, Result};
use crate::model::PolarModel;
use crate::numerics::ode::{Flow, OdeOptions};
use crate::numerics::roots::brent;
use crate::theory::{PhaseTable, TheoryContext};

const PHI_CAP: f64 = 60.0;
const TAIL_LEVEL: f64 = 1e-4;

enum Outcome {
    /// Reached `r = 1` at this elapsed phase with this state.
    Hit(f64, PhaseState),
    FellBack,
    /// Crossed `r = 1 - TAIL_LEVEL` (only when asked to stop there).
    Tail(PhaseState),
}

fn descend(
    model: &PolarModel,
    delta: f64,
    s0: f64,
    p_r: f64,
    stop_at_tail: bool,
    ode: &OdeOptions,
    mut samples: Option<&mut Vec<PathPoint>>,
) -> Result<Outcome> {
    let r0 = 1.0 - delta;
    let pp = p_phi_on_shell(model, r0, s0, p_r, 0.0)?;
    let y0 = [r0, p_r, pp, 0.0, 0.0];
    if let Some(v) = samples.as_deref_mut() {
        v.push(point_of(s0, &y0));
    }
    let target = if stop_at_tail { 1.0 - TAIL_LEVEL } else { 1.0 };
    let floor = 1.0 - 2.0 * delta;
    let mut fell = false;
    let sol = flow_phase(model, s0, y0, s0 + PHI_CAP, ode, |step| {
        if let Some(v) = samples.as_deref_mut() {
            v.push(point_of(step.t1, &step.y1));
        }
        if let Some((t, y)) = step.crossing(|_, y| y[0] - target, 1) {
            if let Some(v) = samples.as_deref_mut() {
                v.pop();
                v.push(point_of(t, &y));
            }
            return Flow::Stop { t, y };
        }
        if step.y1[0] < floor {
            fell = true;
            return Flow::Stop { t: step.t1, y: step.y1 };
        }
        Flow::Continue
    })?;
    Ok(if !sol.stopped || fell {
        Outcome::FellBack
    } else if stop_at_tail {
        Outcome::Tail(sol.y)
    } else {
        Outcome::Hit(sol.t - s0, sol.y)
    })
}

/// The minimiser from `r = 1 - δ` at phase `s0` that reaches the unstable
/// orbit in infinite time.
#[derive(Debug, Clone, Serialize)]
pub struct InfiniteDescent {
    pub start_phase: f64,
    pub delta: f64,
    pub p_r0: f64,
    pub action: f64,
    pub tail_action: f64,
    pub path: Vec<PathPoint>,
}

/// Bisects the initial momentum between paths that fall back and paths that
/// cross, then integrates the limiting path to `1 - 10⁻⁴` and adds the linear
/// tail `½p_r² h^per(φ)`.
pub fn infinite_action_from(model: &PolarModel, delta: f64, s0: f64, tol: f64) -> Result<InfiniteDescent> {
    let ode = OdeOptions::with_tol(tol);
    let ctx = TheoryContext::from_model(model, delta, 0.0)?.with_quadrature_tol(1e-13);
    let table = ctx.tabulate(4096)?;
    let crosses = |p: f64| -> Result<bool> { Ok(matches!(descend(model, delta, s0, p, false, &ode, None)?, Outcome::Hit(..))) };
    let mut hi = 2.0 * delta / table.h_per(s0);
    let mut grow = 0;
    while !crosses(hi)? {
        hi *= 2.0;
        grow += 1;
        if grow > 40 {
            return Err(Error::RootFindFailure("no crossing momentum found".into()));
        }
    }
    let mut lo = 0.0;
    if crosses(lo)? {
        return Err(Error::RootFindFailure("zero momentum already crosses the orbit".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if crosses(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut path = Vec::new();
    match descend(model, delta, s0, lo, true, &ode, Some(&mut path))? {
        Outcome::Tail(y) => {
            let phi = path.last().map(|p| p.phi).unwrap_or(s0);
            let tail_action = tail(&table, phi, &y);
            Ok(InfiniteDescent { start_phase: s0, delta, p_r0: lo, action: y[4] + tail_action, tail_action, path })
        }
        _ => Err(Error::RootFindFailure("limiting path did not reach the tail level".into())),
    }
}

fn tail(table: &PhaseTable, phi: f64, y: &PhaseState) -> f64 {
    0.5 * y[1] * y[1] * table.h_per(phi)
}

#[derive(Debug, Clone, Serialize)]
pub struct FiniteTimeAction {
    pub phi_target: f64,
    pub start_phase: f64,
    pub delta: f64,
    pub p_r0: f64,
    pub p_r0_infinity: f64,
    pub action: f64,
    pub action_infinity: f64,
    pub gap: f64,
}

/// Action of the characteristic from `(1 - δ, s0)` that reaches `r = 1`
/// exactly after `φ_target` phases, found by a root search on the initial
/// momentum above the infinite-time minimiser.
pub fn finite_time_action(model: &PolarModel, delta: f64, s0: f64, phi_target: f64, tol: f64) -> Result<FiniteTimeAction> {
    if !(phi_target >= 1.0) {
        return Err(Error::InvalidInput(format!("target phase must be at least 1, got {phi_target}")));
    }
    let inf = infinite_action_from(model, delta, s0, tol)?;
    let ode = OdeOptions::with_tol(tol);
    let p_inf = inf.p_r0;
    let hit = |x: f64| -> Result<(f64, f64)> {
        match descend(model, delta, s0, p_inf * (1.0 + x.exp()), false, &ode, None)? {
            Outcome::Hit(phi, y) => Ok((phi, y[4])),
            _ => Ok((PHI_CAP, f64::NAN)),
        }
    };
    let (mut a, mut b) = (-28.0, 2.0);
    let mut fb = hit(b)?.0 - phi_target;
    while fb > 0.0 {
        b += 2.0;
        fb = hit(b)?.0 - phi_target;
        if b > 40.0 {
            return Err(Error::RootFindFailure(format!("cannot reach the orbit within {phi_target} phases")));
        }
    }
    let mut fa = hit(a)?.0 - phi_target;
    while fa < 0.0 {
        a -= 4.0;
        fa = hit(a)?.0 - phi_target;
        if a < -34.0 {
            return Err(Error::RootFindFailure("target phase beyond resolvable range".into()));
        }
    }
    let mut err = None;
    let x = brent(
        |x| match hit(x) {
            Ok((phi, _)) => phi - phi_target,
            Err(e) => {
                err = Some(e);
                0.0
            }
        },
        a,
        b,
        fa,
        fb,
        1e-13,
        200,
    )?;
    if let Some(e) = err {
        return Err(e);
    }
    let (phi, action) = hit(x)?;
    if (phi - phi_target).abs() > 1e-6 || !action.is_finite() {
        return Err(Error::RootFindFailure(format!("terminal phase {phi} misses target {phi_target}")));
    }
    Ok(FiniteTimeAction {
        phi_target,
        start_phase: s0,
        delta,
        p_r0: p_inf * (1.0 + x.exp()),
        p_r0_infinity: p_inf,
        action,
        action_infinity: inf.action,
        gap: action - inf.action,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_model_gap_matches_closed_form() {
        let m = PolarModel::linear(1.0, 1.0, 0.5).unwrap();
        let delta = 0.05;
        let ctx = TheoryContext::from_model(&m, delta, 0.2).unwrap();
        let ft = finite_time_action(&m, delta, 0.2, 3.0, 1e-12).unwrap();
        let theory = ctx.rate_gap(3.0, 0.2).unwrap();
        assert!(((ft.gap - theory) / theory).abs() < 3.0 * (-6.0f64).exp(), "{} vs {theory}", ft.gap);
        let inf = infinite_action_from(&m, delta, 0.2, 1e-12).unwrap();
        let h0 = ctx.h_per(0.2).unwrap();
        assert!((inf.action - 0.5 * delta * delta / h0).abs() < 1e-9);
    }
}

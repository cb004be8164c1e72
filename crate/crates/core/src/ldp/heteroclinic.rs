use serde::Serialize;

use super::{flow_phase, p_phi_on_shell, point_of, PathPoint, PhaseState};
use crate::error::{Error, Result};
use crate::model::PolarModel;
use crate::numerics::frac;
use crate::numerics::ode::{Flow, OdeOptions};
use crate::numerics::quad;
use crate::theory::{PhaseTable, TheoryContext};

#[derive(Debug, Clone, Copy)]
pub struct HeteroclinicOptions {
    /// Level `1 - δ` whose crossing phase defines `s*`.
    pub delta: f64,
    /// Distance below the unstable orbit where the crossing functional is evaluated.
    pub delta_c: f64,
    /// Momentum offset of the seeds on the unstable manifold of the stable orbit.
    pub eps0: f64,
    pub n_seeds: usize,
    pub phi_max: f64,
    pub tol: f64,
    pub samples_per_phase: usize,
    pub angle_threshold: f64,
}

impl Default for HeteroclinicOptions {
    fn default() -> Self {
        Self {
            delta: 0.1,
            delta_c: 1e-3,
            eps0: 1e-6,
            n_seeds: 64,
            phi_max: 80.0,
            tol: 1e-12,
            samples_per_phase: 64,
            angle_threshold: 1e-6,
        }
    }
}

/// One root of the crossing functional.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Candidate {
    /// Seed parameter in `[0, 1)`: the seed momentum is `ε0 e^{λ₋T₋ s}`.
    pub seed: f64,
    pub action: f64,
    pub s_star: f64,
    /// `atan(|dF/ds| / δ_c)`.
    pub angle: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HeteroclinicResult {
    pub path: Vec<PathPoint>,
    pub action_infinity: f64,
    /// `(k, r, p_r)` where the path meets `φ = k`.
    pub section_points: Vec<(f64, f64, f64)>,
    pub s_star: f64,
    pub transversal: bool,
    pub angle: f64,
    pub seed: f64,
    pub head_action: f64,
    pub tail_action: f64,
    pub candidates: Vec<Candidate>,
}

struct Setup<'a> {
    model: &'a PolarModel,
    h_plus: PhaseTable,
    h_minus0: f64,
    lt_minus: f64,
    opts: HeteroclinicOptions,
    ode: OdeOptions,
}

struct Shot {
    functional: f64,
    phi_c: f64,
    y_c: PhaseState,
    phi_delta: Option<f64>,
    reached: bool,
}

/// Periodic variance profile of the unstable manifold of the stable orbit,
/// `h⁻(φ) = (1 - e^{-2λT})^{-1} ∫₀¹ e^{-2λTs} T D_rr(-1, φ - s) ds`.
fn h_minus(model: &PolarModel, phi: f64) -> Result<f64> {
    let k = 2.0 * model.lambda_minus * model.t_minus;
    let d = model.drr_profile_stable();
    let t = model.t_minus;
    let q = quad::integrate(|s| (-k * s).exp() * t * d(phi - s), 0.0, 1.0, 1e-15, 1e-13)?;
    Ok(q.value / -(-k).exp_m1())
}

impl Setup<'_> {
    fn seed_state(&self, s: f64) -> Result<PhaseState> {
        let p0 = self.opts.eps0 * (self.lt_minus * s).exp();
        let r0 = -1.0 + self.h_minus0 * p0;
        let pp = p_phi_on_shell(self.model, r0, 0.0, p0, 0.0)?;
        Ok([r0, p0, pp, 0.0, 0.5 * p0 * p0 * self.h_minus0])
    }

    fn shoot(&self, s: f64, mut samples: Option<&mut Vec<PathPoint>>) -> Result<Shot> {
        let y0 = self.seed_state(s)?;
        let level = 1.0 - self.opts.delta_c;
        let level_delta = 1.0 - self.opts.delta;
        let dphi = 1.0 / self.opts.samples_per_phase as f64;
        let mut next = 1usize;
        if let Some(v) = samples.as_deref_mut() {
            v.push(point_of(0.0, &y0));
        }
        let mut r_max = f64::NEG_INFINITY;
        let mut fell_back = false;
        let mut phi_delta = None;
        let sol = flow_phase(self.model, 0.0, y0, self.opts.phi_max, &self.ode, |step| {
            let hit = step.crossing(|_, y| y[0] - level, 1);
            let end = hit.map(|(t, _)| t).unwrap_or(step.t1);
            if phi_delta.is_none() {
                if let Some((t, _)) = step.crossing(|_, y| y[0] - level_delta, 1) {
                    phi_delta = Some(t);
                }
            }
            if let Some(v) = samples.as_deref_mut() {
                loop {
                    let phi = next as f64 * dphi;
                    if phi > end {
                        break;
                    }
                    v.push(point_of(phi, &step.eval(phi)));
                    next += 1;
                }
            }
            if let Some((t, y)) = hit {
                return Flow::Stop { t, y };
            }
            r_max = r_max.max(step.y1[0]);
            if r_max > 0.5 && step.y1[0] < r_max - 0.3 {
                fell_back = true;
                return Flow::Stop { t: step.t1, y: step.y1 };
            }
            Flow::Continue
        })?;
        let reached = sol.stopped && !fell_back;
        if !reached {
            return Ok(Shot { functional: -self.opts.delta_c, phi_c: sol.t, y_c: sol.y, phi_delta, reached });
        }
        let f = (sol.y[0] - 1.0) + self.h_plus.h_per(sol.t) * sol.y[1];
        if let Some(v) = samples {
            if v.last().map(|p| p.phi < sol.t).unwrap_or(true) {
                v.push(point_of(sol.t, &sol.y));
            }
        }
        Ok(Shot { functional: f, phi_c: sol.t, y_c: sol.y, phi_delta, reached })
    }

    fn tail(&self, shot: &Shot) -> f64 {
        0.5 * shot.y_c[1] * shot.y_c[1] * self.h_plus.h_per(shot.phi_c)
    }
}

/// Shoots from the unstable manifold of the stable orbit and locates the
/// seeds whose paths land on the stable manifold `r - 1 = -h^per(φ) p_r` of
/// the unstable orbit. Among all roots the one of least action is returned.
pub fn find_heteroclinic(model: &PolarModel, opts: &HeteroclinicOptions) -> Result<HeteroclinicResult> {
    if !model.has_stable_orbit {
        return Err(Error::InvalidInput(format!("model '{}' has no stable orbit", model.name)));
    }
    let ctx = TheoryContext::from_model(model, opts.delta, 0.0)?.with_quadrature_tol(1e-13);
    let setup = Setup {
        model,
        h_plus: ctx.tabulate(4096)?,
        h_minus0: h_minus(model, 0.0)?,
        lt_minus: model.lambda_minus * model.t_minus,
        opts: *opts,
        ode: OdeOptions::with_tol(opts.tol),
    };
    let n = opts.n_seeds.max(4);
    let values: Vec<f64> =
        (0..n).map(|k| setup.shoot(k as f64 / n as f64, None).map(|s| s.functional)).collect::<Result<_>>()?;
    let mut candidates = Vec::new();
    for k in 0..n {
        let (fa, fb) = (values[k], values[(k + 1) % n]);
        if (fa > 0.0) == (fb > 0.0) {
            continue;
        }
        let (mut lo, mut hi) = (k as f64 / n as f64, (k + 1) as f64 / n as f64);
        let pos_at_lo = fa > 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (setup.shoot(mid, None)?.functional > 0.0) == pos_at_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let seed = 0.5 * (lo + hi);
        let shot = setup.shoot(seed, None)?;
        if !shot.reached {
            continue;
        }
        let h = 1e-6;
        let fp = setup.shoot(seed + h, None)?;
        let fm = setup.shoot(seed - h, None)?;
        let rate = if fp.reached && fm.reached { (fp.functional - fm.functional).abs() / (2.0 * h) } else { f64::INFINITY };
        candidates.push(Candidate {
            seed,
            action: shot.y_c[4] + setup.tail(&shot),
            s_star: frac(shot.phi_delta.unwrap_or(shot.phi_c)),
            angle: (rate / opts.delta_c).atan(),
        });
    }
    let best = candidates
        .iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.action.total_cmp(&b.action).then(ia.cmp(ib)))
        .map(|(_, c)| *c)
        .ok_or(Error::NoIntersection { seeds: n })?;
    if best.angle < opts.angle_threshold {
        return Err(Error::TangentialIntersection { angle: best.angle });
    }
    let mut path = Vec::new();
    let shot = setup.shoot(best.seed, Some(&mut path))?;
    let tail_action = setup.tail(&shot);
    let section_points = path
        .iter()
        .filter(|p| (p.phi - p.phi.round()).abs() < 1e-12)
        .map(|p| (p.phi.round(), p.r, p.p_r))
        .collect();
    Ok(HeteroclinicResult {
        head_action: path.first().map(|p| p.action).unwrap_or(0.0),
        action_infinity: shot.y_c[4] + tail_action,
        path,
        section_points,
        s_star: best.s_star,
        transversal: true,
        angle: best.angle,
        seed: best.seed,
        tail_action,
        candidates,
    })
}

/// One period of the zero-energy characteristic flow from `(r, p_r)` at phase `phi`.
pub fn return_map(model: &PolarModel, phi: f64, r: f64, p_r: f64, tol: f64) -> Result<(f64, f64)> {
    let pp = p_phi_on_shell(model, r, phi, p_r, 0.0)?;
    let sol = flow_phase(model, phi, [r, p_r, pp, 0.0, 0.0], phi + 1.0, &OdeOptions::with_tol(tol), |_| Flow::Continue)?;
    Ok((sol.y[0], sol.y[1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldp::hamiltonian;
    use crate::model::BenchmarkParams;

    #[test]
    fn stable_profile_is_constant_for_constant_noise() {
        let m = PolarModel::benchmark_symmetric(1.0, 1.0).unwrap();
        assert!((h_minus(&m, 0.3).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn symmetric_model_has_no_intersection() {
        let m = PolarModel::benchmark_symmetric(1.0, 1.0).unwrap();
        let opts = HeteroclinicOptions { n_seeds: 16, ..Default::default() };
        assert!(matches!(find_heteroclinic(&m, &opts), Err(Error::NoIntersection { .. })));
    }

    #[test]
    fn benchmark_minimiser() {
        let m = PolarModel::benchmark(BenchmarkParams::default()).unwrap();
        let res = find_heteroclinic(&m, &HeteroclinicOptions::default()).unwrap();
        assert!(res.transversal && res.action_infinity > 0.0);
        assert!((0.0..1.0).contains(&res.s_star));
        for w in res.path.windows(2) {
            assert!(w[1].action >= w[0].action);
        }
        let drift = res.path.iter().map(|p| hamiltonian(&m, &p.state()).abs()).fold(0.0, f64::max);
        assert!(drift < 1e-8, "{drift}");
        let (k, r, pr) = res.section_points[3];
        let (r1, p1) = return_map(&m, k, r, pr, 1e-12).unwrap();
        let (_, r_next, p_next) = res.section_points[4];
        assert!((r1 - r_next).abs() < 1e-8 && (p1 - p_next).abs() < 1e-8);
    }
}

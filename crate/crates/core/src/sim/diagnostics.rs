use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::rng::{rng_from_seed, stream_seed};
use super::{SimConfig, State, Stepper};
use crate::error::{Error, Result};
use crate::model::{PolarModel, MAX_NOISE};
use crate::numerics::quad;

/// One level of the Bernstein sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BernsteinRow {
    pub level: f64,
    pub empirical: f64,
    pub standard_error: f64,
    /// `exp(-L² / 2V(t))` with `V(t) = ∫₀ᵗ G(s)² ds`.
    pub bound: f64,
    pub violated: bool,
}

/// Estimates `P(sup_{s≤t} M_s > L)` for `M_t = ∫ g(r, φ)·dW` along paths of the
/// model started at `(r0, 0)` and compares with the Bernstein bound built from
/// the certified envelope `G(s)² ≥ |g|²`.
#[allow(clippy::too_many_arguments)]
pub fn bernstein_diagnostic<F, B>(
    model: &PolarModel,
    cfg: &SimConfig,
    g: F,
    envelope: B,
    levels: &[f64],
    t: f64,
    r0: f64,
    n_paths: usize,
) -> Result<Vec<BernsteinRow>>
where
    F: Fn(f64, f64) -> [f64; MAX_NOISE] + Sync,
    B: Fn(f64) -> f64,
{
    if !(t > 0.0) || n_paths == 0 {
        return Err(Error::InvalidInput("Bernstein diagnostic needs t > 0 and at least one path".into()));
    }
    let v = quad::integrate(|s| envelope(s).powi(2), 0.0, t, 1e-14, 1e-12)?.value;
    let st = Stepper::new(model, cfg.sigma, cfg.dt);
    let n_steps = (t / cfg.dt).round() as usize;
    let sqrt_dt = cfg.dt.sqrt();
    let k = model.noise_dim;
    let sups: Vec<f64> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(stream_seed(cfg.master_seed, i));
            let mut s = State { r: r0, phi: 0.0, t: 0.0 };
            let (mut m, mut sup) = (0.0f64, 0.0f64);
            for _ in 0..n_steps {
                let mut dw = [0.0; MAX_NOISE];
                for w in dw.iter_mut().take(k) {
                    *w = sqrt_dt * rng.sample::<f64, _>(StandardNormal);
                }
                let gv = g(s.r, s.phi);
                m += (0..k).map(|j| gv[j] * dw[j]).sum::<f64>();
                sup = sup.max(m);
                st.step_with(&mut s, &dw, cfg.dt);
                st.check_domain(&s, i)?;
            }
            Ok(sup)
        })
        .collect::<Result<_>>()?;
    let n = n_paths as f64;
    let mut rows = Vec::with_capacity(levels.len());
    for &level in levels {
        let p = sups.iter().filter(|&&s| s > level).count() as f64 / n;
        let se = (p * (1.0 - p) / n).sqrt();
        let bound = (-level * level / (2.0 * v)).exp();
        let violated = p > bound + 3.0 * se;
        rows.push(BernsteinRow { level, empirical: p, standard_error: se, bound, violated });
    }
    if let Some(r) = rows.iter().find(|r| r.violated) {
        return Err(Error::BoundViolated { level: r.level, empirical: r.empirical, bound: r.bound });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct StrongErrorReport {
    pub dt: f64,
    /// Mean terminal distance to the reference at `dt` and at `dt/2`.
    pub error_coarse: f64,
    pub error_fine: f64,
    pub se_coarse: f64,
    pub se_fine: f64,
    pub ratio: f64,
    pub n_paths: usize,
}

/// Coupled strong-error self-check: paths at `dt` and `dt/2` are driven by the
/// same Brownian path as a reference at `dt/64`; the ratio of mean terminal
/// errors is about `√2` for strong order ½.
pub fn strong_error_ratio(model: &PolarModel, cfg: &SimConfig, r0: f64, t_end: f64, n_paths: usize) -> Result<StrongErrorReport> {
    const REFINE: usize = 64;
    let st = Stepper::new(model, cfg.sigma, cfg.dt);
    let n_coarse = (t_end / cfg.dt).round() as usize;
    let h = cfg.dt / REFINE as f64;
    let sqrt_h = h.sqrt();
    let k = model.noise_dim;
    let errs: Vec<(f64, f64)> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(stream_seed(cfg.master_seed, i));
            let start = State { r: r0, phi: 0.0, t: 0.0 };
            let (mut sr, mut sc, mut sf) = (start, start, start);
            let mut acc_c = [0.0; MAX_NOISE];
            let mut acc_f = [0.0; MAX_NOISE];
            for _ in 0..n_coarse {
                for j in 0..REFINE {
                    let mut dw = [0.0; MAX_NOISE];
                    for w in dw.iter_mut().take(k) {
                        *w = sqrt_h * rng.sample::<f64, _>(StandardNormal);
                    }
                    st.step_with(&mut sr, &dw, h);
                    for q in 0..k {
                        acc_c[q] += dw[q];
                        acc_f[q] += dw[q];
                    }
                    if (j + 1) % (REFINE / 2) == 0 {
                        st.step_with(&mut sf, &acc_f, cfg.dt / 2.0);
                        acc_f = [0.0; MAX_NOISE];
                    }
                }
                st.step_with(&mut sc, &acc_c, cfg.dt);
                acc_c = [0.0; MAX_NOISE];
                st.check_domain(&sr, i)?;
            }
            let d = |a: &State| (a.r - sr.r).hypot(a.phi - sr.phi);
            Ok((d(&sc), d(&sf)))
        })
        .collect::<Result<_>>()?;
    let n = n_paths as f64;
    let stats = |v: &mut dyn Iterator<Item = f64>| {
        let (mut s, mut s2) = (0.0, 0.0);
        for x in v {
            s += x;
            s2 += x * x;
        }
        let m = s / n;
        (m, ((s2 / n - m * m).max(0.0) / n).sqrt())
    };
    let (ec, sec) = stats(&mut errs.iter().map(|e| e.0));
    let (ef, sef) = stats(&mut errs.iter().map(|e| e.1));
    Ok(StrongErrorReport { dt: cfg.dt, error_coarse: ec, error_fine: ef, se_coarse: sec, se_fine: sef, ratio: ec / ef, n_paths })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BenchmarkParams;

    #[test]
    fn standard_brownian_motion_respects_bound() {
        let m = PolarModel::benchmark(BenchmarkParams::default()).unwrap();
        let cfg = SimConfig { sigma: 0.1, dt: 1e-3, ..Default::default() };
        let mut unit = [0.0; MAX_NOISE];
        unit[0] = 1.0;
        let rows = bernstein_diagnostic(&m, &cfg, |_, _| unit, |_| 1.0, &[0.0, 3.0], 1.0, -1.0, 20_000).unwrap();
        assert_eq!(rows[0].bound, 1.0);
        assert!((rows[1].bound - (-4.5f64).exp()).abs() < 1e-12);
        assert!((rows[1].empirical - 0.0027).abs() < 0.0015);
    }

    #[test]
    fn envelope_too_small_is_detected() {
        let m = PolarModel::benchmark(BenchmarkParams::default()).unwrap();
        let cfg = SimConfig { sigma: 0.1, dt: 1e-3, ..Default::default() };
        let mut unit = [0.0; MAX_NOISE];
        unit[0] = 1.0;
        let res = bernstein_diagnostic(&m, &cfg, |_, _| unit, |_| 0.3, &[1.0], 1.0, -1.0, 5_000);
        assert!(matches!(res, Err(Error::BoundViolated { .. })));
    }
}

//! Statistics of wrapped and unwrapped exit samples.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::roots::golden_min;
use crate::numerics::{circ_diff, frac};
use crate::theory::{cycling_profile, wrapped_cdf, DEFAULT_SERIES_TOL};

/// Equal-width histogram on the circle `[0, 1)`, normalised to unit mass.
pub fn wrapped_histogram(values: &[f64], bin_width: f64) -> Vec<f64> {
    let n = (1.0 / bin_width).round().max(1.0) as usize;
    let mut mass = vec![0.0; n];
    if values.is_empty() {
        return mass;
    }
    let w = 1.0 / values.len() as f64;
    for &v in values {
        mass[((frac(v) * n as f64) as usize).min(n - 1)] += w;
    }
    mass
}

/// Bin centre of the largest value after circular smoothing over `2k + 1` bins.
pub fn circular_mode(mass: &[f64], k: usize) -> f64 {
    let n = mass.len();
    let k = k.min(n.saturating_sub(1) / 2);
    let smooth = |i: usize| (0..=2 * k).map(|j| mass[(i + n + j - k) % n]).sum::<f64>();
    let best = (0..n).max_by(|&a, &b| smooth(a).total_cmp(&smooth(b)).then(b.cmp(&a))).unwrap_or(0);
    (best as f64 + 0.5) / n as f64
}

/// Mean resultant length `|E e^{2πiX}|`; 0 for a flat law, 1 for a point mass.
pub fn resultant_length(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let (mut c, mut s) = (0.0, 0.0);
    for &v in values {
        let a = 2.0 * std::f64::consts::PI * v;
        c += a.cos();
        s += a.sin();
    }
    c.hypot(s) / values.len() as f64
}

/// Tabulated `W(x) = Σ_n [B(n + x) - B(n)]`, `B(y) = exp(-½e^{-2λT y})`, with
/// `W(x + 1) = W(x) + 1`. The wrapped profile distribution function with
/// centre `c` is `G_c(t) = W(t - c) - W(-c)`.
#[derive(Debug, Clone)]
pub struct ProfileCdf {
    lambda_t: f64,
    table: Vec<f64>,
}

impl ProfileCdf {
    pub fn new(lambda_t: f64) -> Self {
        let n = 1 << 16;
        let table = (0..=n).map(|i| wrapped_cdf(lambda_t, 0.0, i as f64 / n as f64)).collect();
        Self { lambda_t, table }
    }

    pub fn lambda_t(&self) -> f64 {
        self.lambda_t
    }

    pub fn w(&self, x: f64) -> f64 {
        let k = x.floor();
        let n = self.table.len() - 1;
        let u = (x - k) * n as f64;
        let i = (u as usize).min(n - 1);
        let a = u - i as f64;
        k + self.table[i] + a * (self.table[i + 1] - self.table[i])
    }

    pub fn cdf(&self, centre: f64, t: f64) -> f64 {
        self.w(t - centre) - self.w(-centre)
    }
}

/// Kolmogorov–Smirnov distance between sorted samples in `[0, 1)` and `G_c`.
pub fn ks_distance(sorted: &[f64], cdf: &ProfileCdf, centre: f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let g = cdf.cdf(centre, t);
            (g - i as f64 / n).abs().max(((i + 1) as f64 / n - g).abs())
        })
        .fold(0.0, f64::max)
}

/// Offset `c ∈ [-½, ½)` minimising the KS distance against `G_{shift + c}`.
pub fn fit_offset(sorted: &[f64], cdf: &ProfileCdf, shift: f64) -> (f64, f64) {
    let grid = 400;
    let (best, _) = (0..grid)
        .map(|i| {
            let c = -0.5 + i as f64 / grid as f64;
            (c, ks_distance(sorted, cdf, shift + c))
        })
        .fold((0.0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    let h = 1.0 / grid as f64;
    let (c, d) = golden_min(|c| ks_distance(sorted, cdf, shift + c), best - h, best + h, 1e-7);
    if d < ks_distance(sorted, cdf, shift + best) {
        (c, d)
    } else {
        (best, ks_distance(sorted, cdf, shift + best))
    }
}

/// Location `x* ∈ [0, 1)` of the maximum of the periodicised Gumbel profile.
pub fn profile_mode(lambda_t: f64) -> f64 {
    let q = |x: f64| -cycling_profile(lambda_t, x, DEFAULT_SERIES_TOL);
    let grid = 1000;
    let best = (0..grid).map(|i| i as f64 / grid as f64).min_by(|a, b| q(*a).total_cmp(&q(*b))).unwrap_or(0.0);
    let h = 1.0 / grid as f64;
    frac(golden_min(q, best - h, best + h, 1e-10).0)
}

/// Peak of the overlay `λT Q(c - t)` on `[0, 1)`.
pub fn overlay_peak(lambda_t: f64, centre: f64) -> f64 {
    frac(centre - profile_mode(lambda_t))
}

/// Per-period survival ratio estimated on a winding window.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WindowFit {
    pub from: u64,
    pub to: u64,
    pub ratio: f64,
    pub standard_error: f64,
    pub at_risk: u64,
}

/// Censored-geometric estimate `Σ N_{n+1} / Σ N_n` over `n ∈ [from, to)`,
/// where `N_n` counts exits with winding `≥ n`; censored paths count as at
/// risk up to their last completed winding.
pub fn geometric_window(windings: &[(u64, bool)], from: u64, to: u64) -> Result<WindowFit> {
    if to <= from {
        return Err(Error::InvalidInput(format!("empty winding window [{from}, {to})")));
    }
    let (mut at_risk, mut exits) = (0u64, 0u64);
    for &(w, censored) in windings {
        if w < from {
            continue;
        }
        let last = if censored { w.min(to) } else { (w + 1).min(to) };
        at_risk += last.saturating_sub(from);
        if !censored && w < to {
            exits += 1;
        }
    }
    if at_risk == 0 {
        return Err(Error::InsufficientData(format!("no path at risk in windings [{from}, {to})")));
    }
    let q = 1.0 - exits as f64 / at_risk as f64;
    Ok(WindowFit { from, to, ratio: q, standard_error: (q * (1.0 - q) / at_risk as f64).sqrt(), at_risk })
}

/// Ordinary least squares `y = a + b x`, returning `(a, b, se_b, residuals)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64, Vec<f64>)> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(Error::InsufficientData(format!("linear fit needs at least two points, got {n}")));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("linear fit needs distinct abscissae".into()));
    }
    let b = x.iter().zip(y).map(|(u, v)| (u - mx) * (v - my)).sum::<f64>() / sxx;
    let a = my - b * mx;
    let res: Vec<f64> = x.iter().zip(y).map(|(u, v)| v - a - b * u).collect();
    let se = if n > 2 { (res.iter().map(|r| r * r).sum::<f64>() / (n - 2) as f64 / sxx).sqrt() } else { f64::NAN };
    Ok((a, b, se, res))
}

/// Log-linear fit of the survival counts `N_n` for `n ≥ n_min` while at least
/// `min_count` paths remain, weighted by `N_n` (the inverse variance of
/// `log N_n`); returns `(λ0, se)` with the standard error of the geometric
/// likelihood on the same windings, since cumulative counts are correlated.
pub fn fit_survival_decay(windings: &[u64], n_min: u64, min_count: usize) -> Result<(f64, f64)> {
    let mut sorted = windings.to_vec();
    sorted.sort_unstable();
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut points, mut at_risk) = (0usize, 0.0);
    let mut n = n_min;
    loop {
        let count = sorted.len() - sorted.partition_point(|&w| w < n);
        if count < min_count.max(1) {
            break;
        }
        let (x, y, w) = (n as f64, (count as f64).ln(), count as f64);
        sw += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
        at_risk += w;
        points += 1;
        n += 1;
    }
    if points < 2 {
        return Err(Error::InsufficientData(format!("survival fit needs two windings with {min_count} paths, got {points}")));
    }
    let b = (sw * sxy - sx * sy) / (sw * sxx - sx * sx);
    let q = b.exp().min(1.0);
    Ok((q, (q * (1.0 - q) / at_risk).sqrt()))
}

/// Circular distance of two phases.
pub fn phase_distance(a: f64, b: f64) -> f64 {
    circ_diff(a, b).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_cdf_matches_series() {
        let p = ProfileCdf::new(1.0);
        for &(c, t) in &[(0.3, 0.2), (2.7, 0.9), (-0.4, 0.5)] {
            assert!((p.cdf(c, t) - wrapped_cdf(1.0, c, t)).abs() < 1e-8);
        }
        assert!((p.cdf(0.3, 1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn offset_recovered_from_exact_quantiles() {
        let p = ProfileCdf::new(2.0);
        let centre = 1.37;
        let n = 2000;
        let mut xs: Vec<f64> = (0..n)
            .map(|i| {
                let u = (i as f64 + 0.5) / n as f64;
                crate::numerics::roots::bisect_predicate(|t| p.cdf(centre, t) >= u, 0.0, 1.0, 1e-12, 200).1
            })
            .collect();
        xs.sort_by(f64::total_cmp);
        let (c, d) = fit_offset(&xs, &p, 1.0);
        assert!((c - 0.37).abs() < 1e-3 && d < 1e-3, "{c} {d}");
    }

    #[test]
    fn geometric_window_on_exact_law() {
        let q: f64 = 0.8;
        let mut w = Vec::new();
        for n in 0..60u64 {
            let count = (1e5 * q.powi(n as i32) * (1.0 - q)).round() as usize;
            w.extend(std::iter::repeat((n, false)).take(count));
        }
        let fit = geometric_window(&w, 5, 20).unwrap();
        assert!((fit.ratio - q).abs() < 3.0 * fit.standard_error + 1e-4);
        let plain: Vec<u64> = w.iter().map(|x| x.0).collect();
        let (l0, se) = fit_survival_decay(&plain, 5, 50).unwrap();
        assert!((l0 - q).abs() < 3.0 * se + 1e-4, "{l0} {se}");
    }
}

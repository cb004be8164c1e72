//! Dormand–Prince 5(4) integrator with continuous output.
//!
//! States are fixed-size arrays so the hot loop never allocates. The caller
//! receives every accepted step as a [`DenseStep`] and may stop the
//! integration at any interior point, which is how events are handled.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-10, h_init: None, h_max: f64::INFINITY, max_steps: 2_000_000 }
    }
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { rtol: tol, atol: tol, ..Self::default() }
    }
}

/// One accepted step with its quartic interpolant.
#[derive(Debug, Clone)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    rcont: [[f64; N]; 4],
}

impl<const N: usize> DenseStep<N> {
    pub fn eval(&self, t: f64) -> [f64; N] {
        let h = self.t1 - self.t0;
        let th = if h == 0.0 { 0.0 } else { (t - self.t0) / h };
        let th1 = 1.0 - th;
        let mut y = [0.0; N];
        for i in 0..N {
            let [r2, r3, r4, r5] = [self.rcont[0][i], self.rcont[1][i], self.rcont[2][i], self.rcont[3][i]];
            y[i] = self.y0[i] + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
        }
        y
    }

    /// First point inside the step where `g` changes sign in the requested
    /// direction (`+1` upward, `-1` downward, `0` either).
    pub fn crossing(&self, g: impl Fn(f64, &[f64; N]) -> f64, direction: i32) -> Option<(f64, [f64; N])> {
        let g0 = g(self.t0, &self.y0);
        let g1 = g(self.t1, &self.y1);
        let hit = match direction {
            1 => g0 < 0.0 && g1 >= 0.0,
            -1 => g0 > 0.0 && g1 <= 0.0,
            _ => (g0 < 0.0) != (g1 < 0.0),
        };
        if !hit {
            return None;
        }
        let f = |t: f64| g(t, &self.eval(t));
        let t = super::roots::brent(f, self.t0, self.t1, g0, g1, 1e-15 * (1.0 + self.t1.abs()), 200).ok()?;
        Some((t, self.eval(t)))
    }
}

pub enum Flow<const N: usize> {
    Continue,
    Stop { t: f64, y: [f64; N] },
}

#[derive(Debug, Clone, Copy)]
pub struct Solution<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub steps: usize,
    pub stopped: bool,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut s = 0.0;
        for (c, k) in terms {
            s += c * k[i];
        }
        out[i] += h * s;
    }
    out
}

/// Integrates `y' = rhs(t, y)` forward from `t0` to `t_end`.
pub fn integrate<const N: usize, F, O>(
    mut rhs: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &OdeOptions,
    mut observe: O,
) -> Result<Solution<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    O: FnMut(&DenseStep<N>) -> Flow<N>,
{
    if t_end < t0 {
        return Err(Error::InvalidInput(format!("backward integration requested: {t0} -> {t_end}")));
    }
    let mut t = t0;
    let mut y = y0;
    if t_end == t0 {
        return Ok(Solution { t, y, steps: 0, stopped: false });
    }
    let mut k1 = rhs(t, &y)?;
    let span = t_end - t0;
    let mut h = opts.h_init.unwrap_or_else(|| initial_step(&y, &k1, opts, span)).min(opts.h_max).min(span);
    let mut steps = 0usize;
    let mut rejected_in_row = 0usize;
    let h_min = 1e-14 * (1.0 + t0.abs().max(t_end.abs()));

    while t < t_end {
        if steps >= opts.max_steps {
            return Err(Error::IntegrationFailure { t, reason: format!("exceeded {} steps", opts.max_steps) });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        let k2 = rhs(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]))?;
        let k3 = rhs(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]))?;
        let k4 = rhs(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
        let k5 = rhs(t + C5 * h, &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
        let k6 = rhs(t + h, &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]))?;
        let y1 = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = rhs(t + h, &y1)?;

        let mut err = 0.0;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y1[i].abs());
            err += (e / sc) * (e / sc);
        }
        let err = (err / N as f64).sqrt();
        if !err.is_finite() {
            h *= 0.25;
            rejected_in_row += 1;
            if h < h_min || rejected_in_row > 60 {
                return Err(Error::IntegrationFailure { t, reason: "non-finite state".into() });
            }
            continue;
        }

        if err <= 1.0 {
            let t1 = if last { t_end } else { t + h };
            let mut rcont = [[0.0; N]; 4];
            for i in 0..N {
                let ydiff = y1[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                rcont[0][i] = ydiff;
                rcont[1][i] = bspl;
                rcont[2][i] = ydiff - h * k7[i] - bspl;
                rcont[3][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            let step = DenseStep { t0: t, t1, y0: y, y1, rcont };
            steps += 1;
            rejected_in_row = 0;
            if let Flow::Stop { t: ts, y: ys } = observe(&step) {
                return Ok(Solution { t: ts, y: ys, steps, stopped: true });
            }
            t = t1;
            y = y1;
            k1 = k7;
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h * fac).min(opts.h_max);
        } else {
            rejected_in_row += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h < h_min {
                return Err(Error::IntegrationFailure { t, reason: format!("step size underflow (h = {h:.3e})") });
            }
        }
    }
    Ok(Solution { t, y, steps, stopped: false })
}

fn initial_step<const N: usize>(y: &[f64; N], f: &[f64; N], opts: &OdeOptions, span: f64) -> f64 {
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..N {
        let sc = opts.atol + opts.rtol * y[i].abs();
        d0 += (y[i] / sc).powi(2);
        d1 += (f[i] / sc).powi(2);
    }
    let (d0, d1) = ((d0 / N as f64).sqrt(), (d1 / N as f64).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(span).min(0.1 * span.max(1e-12)).max(1e-12)
}

/// Convenience wrapper returning only the final state.
pub fn solve<const N: usize, F>(rhs: F, t0: f64, y0: [f64; N], t_end: f64, opts: &OdeOptions) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    integrate(rhs, t0, y0, t_end, opts, |_| Flow::Continue).map(|s| s.y)
}

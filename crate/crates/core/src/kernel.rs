//! Discretised Poincaré kernels estimated by Monte Carlo, their principal
//! spectral data, and the eigenvalue sandwich, spectral-gap bound and
//! Laplace-transform identity evaluated on the discrete chain.

use std::io::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::PolarModel;
use crate::sim::rng::stream_seed_n;
use crate::sim::{one_period, Landing, SimConfig, Variant};

/// Cells of a uniform grid over `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    pub edges: Vec<f64>,
}

impl Grid {
    pub fn uniform(lo: f64, hi: f64, cells: usize) -> Result<Self> {
        if !(hi > lo) || cells == 0 {
            return Err(Error::InvalidInput(format!("grid [{lo}, {hi}] with {cells} cells")));
        }
        let h = (hi - lo) / cells as f64;
        Ok(Self { edges: (0..=cells).map(|i| if i == cells { hi } else { lo + h * i as f64 }).collect() })
    }

    /// Default grid of a chain variant: 128 cells over `[-1.6, 1-δ]` or `(0, 2δ)`.
    pub fn default_for(variant: Variant, delta: f64, cells: usize) -> Result<Self> {
        match variant {
            Variant::Ks => Self::uniform(-1.6, 1.0 - delta, cells),
            Variant::Ku => Self::uniform(0.0, 2.0 * delta, cells),
        }
    }

    pub fn len(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn midpoint(&self, i: usize) -> f64 {
        0.5 * (self.edges[i] + self.edges[i + 1])
    }

    /// Cell containing `x`; points below the grid map to cell 0 when `lump_below`.
    pub fn cell(&self, x: f64, lump_below: bool) -> Option<usize> {
        let n = self.len();
        let (lo, hi) = (self.edges[0], self.edges[n]);
        if x < lo {
            return lump_below.then_some(0);
        }
        if x > hi {
            return None;
        }
        let i = ((x - lo) / (hi - lo) * n as f64) as usize;
        Some(i.min(n - 1))
    }

    /// Indices of cells whose midpoints satisfy `pred`.
    pub fn cells_where(&self, pred: impl Fn(f64) -> bool) -> Vec<usize> {
        (0..self.len()).filter(|&i| pred(self.midpoint(i))).collect()
    }
}

/// Substochastic matrix on grid cells, row-major.
#[derive(Debug, Clone, Serialize)]
pub struct KernelEstimate {
    pub variant: Variant,
    pub grid: Grid,
    pub matrix: Vec<f64>,
    pub kill: Vec<f64>,
    pub n_samples: Vec<usize>,
    /// Multinomial standard error of every entry, row-major.
    pub std_errors: Vec<f64>,
    pub sigma: f64,
    pub delta: f64,
}

impl KernelEstimate {
    /// Wraps a given substochastic matrix (rows of length `n`).
    pub fn from_matrix(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("kernel matrix must be square and nonempty".into()));
        }
        let mut matrix = Vec::with_capacity(n * n);
        let mut kill = Vec::with_capacity(n);
        for (i, r) in rows.iter().enumerate() {
            if r.iter().any(|&v| !(v >= 0.0)) {
                return Err(Error::InvalidInput(format!("row {i} has a negative entry")));
            }
            let s: f64 = r.iter().sum();
            if s > 1.0 + 1e-12 {
                return Err(Error::InvalidInput(format!("row {i} sums to {s} > 1")));
            }
            if s == 0.0 {
                return Err(Error::AllKilled { row: i });
            }
            matrix.extend_from_slice(r);
            kill.push((1.0 - s).max(0.0));
        }
        Ok(Self {
            variant: Variant::Ks,
            grid: Grid::uniform(0.0, 1.0, n)?,
            matrix,
            kill,
            n_samples: vec![0; n],
            std_errors: vec![0.0; n * n],
            sigma: f64::NAN,
            delta: f64::NAN,
        })
    }

    pub fn n(&self) -> usize {
        self.kill.len()
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.n() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n();
        &self.matrix[i * n..(i + 1) * n]
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n(), self.n(), &self.matrix)
    }

    fn mat_vec(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }

    fn vec_mat(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &vi) in v.iter().enumerate() {
            if vi != 0.0 {
                for (o, a) in out.iter_mut().zip(self.row(i)) {
                    *o += vi * a;
                }
            }
        }
    }

    /// Row-major `K^n`.
    pub fn power(&self, n: usize) -> Vec<f64> {
        let m = self.to_dmatrix();
        let mut p = DMatrix::<f64>::identity(self.n(), self.n());
        for _ in 0..n {
            p = &p * &m;
        }
        let mut out = Vec::with_capacity(self.n() * self.n());
        for i in 0..self.n() {
            out.extend(p.row(i).iter());
        }
        out
    }

    pub fn write_json(&self, path: &Path, spectral: Option<&SpectralResult>) -> Result<()> {
        #[derive(Serialize)]
        struct Dump<'a> {
            kernel: &'a KernelEstimate,
            spectral: Option<&'a SpectralResult>,
        }
        let io = |e| Error::Io { path: path.display().to_string(), source: e };
        let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        serde_json::to_writer_pretty(&mut f, &Dump { kernel: self, spectral })
            .map_err(|e| Error::Io { path: path.display().to_string(), source: e.into() })?;
        f.flush().map_err(io)
    }
}

/// Estimates the one-period kernel by launching `samples_per_row` paths from
/// every cell midpoint. Ks landings below the grid are lumped into cell 0.
/// A Ks row with every sample killed is an error; Ku rows next to the
/// absorbing ends of `(0, 2δ)` may legitimately be empty.
pub fn estimate_kernel(
    model: &PolarModel,
    cfg: &SimConfig,
    grid: &Grid,
    variant: Variant,
    samples_per_row: usize,
) -> Result<KernelEstimate> {
    cfg.validate(model)?;
    if samples_per_row == 0 {
        return Err(Error::InvalidInput("samples_per_row must be positive".into()));
    }
    let n = grid.len();
    let lump = variant == Variant::Ks;
    let rows: Vec<Vec<u64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = grid.midpoint(i);
            let mut counts = vec![0u64; n + 1];
            for j in 0..samples_per_row {
                let seed = stream_seed_n(cfg.master_seed, &[i as u64, j as u64]);
                match one_period(model, cfg, variant, x, seed)? {
                    Landing::Survived(y) => match grid.cell(y, lump) {
                        Some(c) => counts[c] += 1,
                        None => counts[n] += 1,
                    },
                    Landing::Killed(_) => counts[n] += 1,
                }
            }
            Ok(counts)
        })
        .collect::<Result<_>>()?;
    let m = samples_per_row as f64;
    let mut matrix = Vec::with_capacity(n * n);
    let mut std_errors = Vec::with_capacity(n * n);
    let mut kill = Vec::with_capacity(n);
    for (i, c) in rows.iter().enumerate() {
        if c[n] == samples_per_row as u64 && variant == Variant::Ks {
            return Err(Error::AllKilled { row: i });
        }
        for &k in &c[..n] {
            let p = k as f64 / m;
            matrix.push(p);
            std_errors.push((p * (1.0 - p) / m).sqrt());
        }
        kill.push(c[n] as f64 / m);
    }
    Ok(KernelEstimate {
        variant,
        grid: grid.clone(),
        matrix,
        kill,
        n_samples: vec![samples_per_row; n],
        std_errors,
        sigma: cfg.sigma,
        delta: cfg.delta,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralResult {
    pub lambda0: f64,
    /// `π0 · kill`, accurate when `λ0` is within rounding of 1.
    pub one_minus_lambda0: f64,
    pub lambda1_mod: f64,
    pub h0: Vec<f64>,
    pub h0_star: Vec<f64>,
    pub pi0: Vec<f64>,
    /// Relative residuals of the right and left eigen-equations.
    pub residuals: (f64, f64),
    pub iterations: usize,
}

const POWER_TOL: f64 = 1e-13;
const POWER_MAX_ITER: usize = 200_000;

/// Power iteration with componentwise relative convergence on the support.
fn power_iteration(k: &KernelEstimate, left: bool) -> Option<(Vec<f64>, usize)> {
    let n = k.n();
    let mut v = vec![1.0; n];
    let mut w = vec![0.0; n];
    for it in 1..=POWER_MAX_ITER {
        if left {
            k.vec_mat(&v, &mut w);
        } else {
            k.mat_vec(&v, &mut w);
        }
        let norm = w.iter().copied().fold(0.0, f64::max);
        if norm == 0.0 {
            return None;
        }
        w.iter_mut().for_each(|x| *x /= norm);
        let change = v
            .iter()
            .zip(&w)
            .filter(|(_, b)| **b > 0.0)
            .map(|(a, b)| ((a - b) / b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut v, &mut w);
        if change < POWER_TOL && it > 2 {
            return Some((v, it));
        }
    }
    None
}

fn rel_residual(k: &KernelEstimate, v: &[f64], lambda: f64, left: bool) -> f64 {
    let mut w = vec![0.0; k.n()];
    if left {
        k.vec_mat(v, &mut w);
    } else {
        k.mat_vec(v, &mut w);
    }
    let scale = v.iter().copied().fold(0.0, f64::max) * lambda.max(f64::MIN_POSITIVE);
    w.iter().zip(v).map(|(a, b)| (a - lambda * b).abs()).fold(0.0, f64::max) / scale
}

/// Largest-modulus real eigenvalue and its eigenvector by inverse iteration.
fn dense_principal(k: &KernelEstimate, left: bool) -> Result<Vec<f64>> {
    let mut m = k.to_dmatrix();
    if left {
        m = m.transpose();
    }
    let eig = m.clone().complex_eigenvalues();
    let lambda = eig
        .iter()
        .filter(|z| z.im.abs() < 1e-10)
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if !(lambda > 0.0) {
        return Err(Error::NonConvergence("no positive real eigenvalue".into()));
    }
    let n = k.n();
    let shifted = &m - DMatrix::<f64>::identity(n, n) * (lambda * (1.0 + 1e-13));
    let lu = shifted.lu();
    let mut x = DVector::from_element(n, 1.0);
    for _ in 0..8 {
        x = lu.solve(&x).ok_or_else(|| Error::NonConvergence("singular shifted matrix".into()))?;
        let s = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
        x /= s;
    }
    let sign = if x.sum() < 0.0 { -1.0 } else { 1.0 };
    Ok(x.iter().map(|v| (sign * v).max(0.0)).collect())
}

/// Principal eigenvalue, eigenvectors and QSD, plus `|λ1|`.
pub fn principal_eigs(k: &KernelEstimate) -> Result<SpectralResult> {
    let (h0, it_r) = match power_iteration(k, false) {
        Some(v) => v,
        None => (dense_principal(k, false)?, POWER_MAX_ITER),
    };
    let (h0_star, it_l) = match power_iteration(k, true) {
        Some(v) => v,
        None => (dense_principal(k, true)?, POWER_MAX_ITER),
    };
    let total: f64 = h0_star.iter().sum();
    let pi0: Vec<f64> = h0_star.iter().map(|x| x / total).collect();
    let one_minus_lambda0: f64 = pi0.iter().zip(&k.kill).map(|(p, q)| p * q).sum();
    let mut w = vec![0.0; k.n()];
    k.vec_mat(&pi0, &mut w);
    let lambda0 = w.iter().sum::<f64>();
    let residuals = (rel_residual(k, &h0, lambda0, false), rel_residual(k, &pi0, lambda0, true));
    let lambda1_mod = second_modulus(k, lambda0, &h0, &pi0)?;
    Ok(SpectralResult { lambda0, one_minus_lambda0, lambda1_mod, h0, h0_star, pi0, residuals, iterations: it_r.max(it_l) })
}

const DENSE_LIMIT: usize = 512;

fn second_modulus(k: &KernelEstimate, lambda0: f64, h0: &[f64], pi0: &[f64]) -> Result<f64> {
    let n = k.n();
    if n == 1 {
        return Ok(0.0);
    }
    if n <= DENSE_LIMIT {
        let eig = k.to_dmatrix().complex_eigenvalues();
        let (idx, _) = eig
            .iter()
            .enumerate()
            .map(|(i, z)| (i, (z.re - lambda0).hypot(z.im)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty spectrum");
        return Ok(eig.iter().enumerate().filter(|(i, _)| *i != idx).map(|(_, z)| z.norm()).fold(0.0, f64::max));
    }
    // Deflated power iteration on K - λ0 h0 π0ᵀ / (π0·h0).
    let c: f64 = pi0.iter().zip(h0).map(|(a, b)| a * b).sum();
    let mut v: Vec<f64> = (0..n).map(|i| ((i * 7919 % 104729) as f64 / 104729.0) - 0.5).collect();
    let mut w = vec![0.0; n];
    let mut log_growth = 0.0;
    let (burn, count) = (200, 400);
    for it in 0..burn + count {
        k.mat_vec(&v, &mut w);
        let proj: f64 = pi0.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() * lambda0 / c;
        for (wi, hi) in w.iter_mut().zip(h0) {
            *wi -= proj * hi;
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok(0.0);
        }
        if it >= burn {
            log_growth += norm.ln();
        }
        v.iter_mut().zip(&w).for_each(|(a, b)| *a = b / norm);
    }
    Ok((log_growth / count as f64).exp())
}

/// QSD with its propagation residual `max |π0 K - λ0 π0| / max π0`.
pub fn qsd(k: &KernelEstimate, res: &SpectralResult) -> (Vec<f64>, f64) {
    (res.pi0.clone(), rel_residual(k, &res.pi0, res.lambda0, true))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Sandwich {
    pub n: usize,
    pub lower: f64,
    pub upper: f64,
    pub holds: bool,
}

/// `[inf_{x∈A} K^n(x,A)]^{1/n} ≤ λ0 ≤ [sup_x K^n(x,E)]^{1/n}`.
pub fn eig_sandwich(k: &KernelEstimate, lambda0: f64, a: &[usize], n: usize) -> Result<Sandwich> {
    if a.is_empty() || n == 0 {
        return Err(Error::InvalidInput("eig_sandwich needs a nonempty set and n ≥ 1".into()));
    }
    let dim = k.n();
    let p = k.power(n);
    let row = |i: usize| &p[i * dim..(i + 1) * dim];
    let lower = a.iter().map(|&x| a.iter().map(|&y| row(x)[y]).sum::<f64>()).fold(f64::INFINITY, f64::min);
    let upper = (0..dim).map(|x| row(x).iter().sum::<f64>()).fold(0.0, f64::max);
    let (lower, upper) = (lower.powf(1.0 / n as f64), upper.powf(1.0 / n as f64));
    let slack = 1e-12 * lambda0.max(1e-300);
    Ok(Sandwich { n, lower, upper, holds: lower <= lambda0 + slack && lambda0 <= upper + slack })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GapBound {
    pub bound: f64,
    pub hypothesis_ok: bool,
    pub l: f64,
    pub gamma_bar: f64,
    pub p_kill: f64,
}

/// Right-hand side of the spectral-gap bound
/// `max{2γ̄, λ0L - 1 + p_kill + γ̄ λ0L/(λ0L-1) [1 + 1/(λ0 - γ̄)]}`.
pub fn gap_bound(k: &KernelEstimate, lambda0: f64, a: &[usize]) -> Result<GapBound> {
    if a.is_empty() {
        return Err(Error::InvalidInput("gap_bound needs a nonempty set".into()));
    }
    let dim = k.n();
    let mut in_a = vec![false; dim];
    a.iter().for_each(|&i| in_a[i] = true);
    let mut l: f64 = 1.0;
    for &y in a {
        let m = a.iter().map(|&x| k.at(x, y)).fold(f64::INFINITY, f64::min);
        if m <= 0.0 {
            return Err(Error::ZeroDensity { column: y });
        }
        for &x in a {
            l = l.max(k.at(x, y) / m);
        }
    }
    let gamma_bar =
        (0..dim).map(|x| (0..dim).filter(|&y| !in_a[y]).map(|y| k.at(x, y)).sum::<f64>()).fold(0.0, f64::max);
    let p_kill = a.iter().map(|&x| k.kill[x]).fold(0.0, f64::max);
    let ll = lambda0 * l;
    let hypothesis_ok = ll > 1.0;
    let second = if gamma_bar == 0.0 {
        ll - 1.0 + p_kill
    } else if hypothesis_ok && lambda0 > gamma_bar {
        ll - 1.0 + p_kill + gamma_bar * ll / (ll - 1.0) * (1.0 + 1.0 / (lambda0 - gamma_bar))
    } else {
        f64::INFINITY
    };
    Ok(GapBound { bound: (2.0 * gamma_bar).max(second), hypothesis_ok, l, gamma_bar, p_kill })
}

#[derive(Debug, Clone, Serialize)]
pub struct LaplaceCheck {
    pub u: f64,
    pub gamma: f64,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
    pub residual: f64,
}

/// Evaluates `K H^u_A = e^{-u} G^u_A`: `H` from a linear solve on `E∖A`, `G`
/// from the geometric series of first-hitting probabilities.
pub fn laplace_identity(k: &KernelEstimate, a: &[usize], u: f64) -> Result<LaplaceCheck> {
    let dim = k.n();
    let mut in_a = vec![false; dim];
    a.iter().for_each(|&i| in_a[i] = true);
    let b: Vec<usize> = (0..dim).filter(|&i| !in_a[i]).collect();
    let gamma = b.iter().map(|&x| b.iter().map(|&y| k.at(x, y)).sum::<f64>()).fold(0.0, f64::max);
    let z = (-u).exp();
    if !(z > gamma) {
        return Err(Error::OutsideConvergenceRegion { exp_neg_u: z, gamma });
    }
    let eu = u.exp();
    let to_a: Vec<f64> = (0..dim).map(|x| a.iter().map(|&y| k.at(x, y)).sum()).collect();

    let mut h = vec![1.0; dim];
    if !b.is_empty() {
        let nb = b.len();
        let mut m = DMatrix::<f64>::identity(nb, nb);
        let mut rhs = DVector::<f64>::zeros(nb);
        for (p, &x) in b.iter().enumerate() {
            for (q, &y) in b.iter().enumerate() {
                m[(p, q)] -= eu * k.at(x, y);
            }
            rhs[p] = eu * to_a[x];
        }
        let sol = m.lu().solve(&rhs).ok_or_else(|| Error::NonConvergence("singular Laplace system".into()))?;
        for (p, &x) in b.iter().enumerate() {
            h[x] = sol[p];
        }
    }

    // G(x) = Σ_n e^{un} P_x(τ_A = n): iterate the mass that has not yet entered A.
    let mut g = vec![0.0; dim];
    let mut mass: Vec<Vec<f64>> = (0..dim).map(|x| (0..dim).map(|y| if in_a[y] { 0.0 } else { k.at(x, y) }).collect()).collect();
    let mut weight = eu;
    for x in 0..dim {
        g[x] = weight * to_a[x];
    }
    for _ in 0..100_000 {
        weight *= eu;
        let mut largest: f64 = 0.0;
        for x in 0..dim {
            let hit: f64 = b.iter().map(|&y| mass[x][y] * to_a[y]).sum();
            g[x] += weight * hit;
            largest = largest.max(weight * hit);
            let next: Vec<f64> = (0..dim)
                .map(|y| if in_a[y] { 0.0 } else { b.iter().map(|&w| mass[x][w] * k.at(w, y)).sum() })
                .collect();
            mass[x] = next;
        }
        if largest < 1e-18 * g.iter().copied().fold(0.0, f64::max).max(1e-300) {
            break;
        }
    }
    let residual = (0..dim)
        .map(|x| (k.row(x).iter().zip(&h).map(|(p, q)| p * q).sum::<f64>() - z * g[x]).abs())
        .fold(0.0, f64::max);
    Ok(LaplaceCheck { u, gamma, g, h, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_by_two() -> KernelEstimate {
        KernelEstimate::from_matrix(&[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap()
    }

    #[test]
    fn two_state_spectrum() {
        let s = principal_eigs(&two_by_two()).unwrap();
        assert_abs_diff_eq!(s.lambda0, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.lambda1_mod, 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(s.pi0[0], 2.0 / 3.0, epsilon = 1e-12);
        let g = gap_bound(&two_by_two(), s.lambda0, &[0, 1]).unwrap();
        assert_abs_diff_eq!(g.l, 8.0, epsilon = 1e-12);
        assert!(g.hypothesis_ok && g.bound >= 0.7);
    }

    #[test]
    fn rank_one_spectrum() {
        let v = [0.2, 0.5, 0.3];
        let w = [1.0, 0.6, 1.5];
        let c: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        let lam = 0.6;
        let rows: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| lam * v[i] * w[j] / c).collect()).collect();
        let k = KernelEstimate::from_matrix(&rows).unwrap();
        let s = principal_eigs(&k).unwrap();
        assert_abs_diff_eq!(s.lambda0, lam, epsilon = 1e-12);
        assert!(s.lambda1_mod < 1e-12);
        for i in 0..3 {
            assert_abs_diff_eq!(s.h0[i] / s.h0[1], v[i] / v[1], epsilon = 1e-12);
            assert_abs_diff_eq!(s.pi0[i], w[i] / 3.1, epsilon = 1e-12);
        }
        let sw = eig_sandwich(&k, s.lambda0, &[0, 1, 2], 4).unwrap();
        assert!(sw.holds);
    }

    #[test]
    fn constant_row_kernel_gap() {
        let row = vec![0.25, 0.5, 0.25];
        let k = KernelEstimate::from_matrix(&[row.clone(), row.clone(), row]).unwrap();
        let s = principal_eigs(&k).unwrap();
        let g = gap_bound(&k, s.lambda0, &[0, 1, 2]).unwrap();
        assert_abs_diff_eq!(g.l, 1.0);
        assert_eq!((g.gamma_bar, g.p_kill), (0.0, 0.0));
        assert!(g.bound.abs() < 1e-12 && !g.hypothesis_ok);
    }

    #[test]
    fn laplace_identity_cases() {
        let k = KernelEstimate::from_matrix(&[vec![0.5, 0.3, 0.1], vec![0.2, 0.4, 0.3], vec![0.1, 0.3, 0.5]]).unwrap();
        assert!(laplace_identity(&k, &[0], 0.0).unwrap().residual < 1e-12);
        assert!(laplace_identity(&k, &[0, 1, 2], 0.3).unwrap().residual < 1e-12);
        assert!(laplace_identity(&k, &[1], 0.05).unwrap().residual < 1e-12);
        assert!(matches!(laplace_identity(&k, &[0], 1.0), Err(Error::OutsideConvergenceRegion { .. })));
    }

    #[test]
    fn stochastic_sandwich_is_row_sums() {
        let k = two_by_two();
        let sw = eig_sandwich(&k, 1.0, &[0, 1], 1).unwrap();
        assert_abs_diff_eq!(sw.lower, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sw.upper, 1.0, epsilon = 1e-15);
        assert!(sw.holds);
    }
}

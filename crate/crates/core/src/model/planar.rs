use std::f64::consts::PI;
use std::sync::Arc;

use super::polar::{BenchmarkParams, MAX_NOISE};

pub type Point = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];

/// A deterministic planar drift with diffusion, `dz = f(z) dt + σ g(z) dW`.
#[derive(Clone)]
pub struct PlanarVectorField {
    pub name: String,
    drift: Arc<dyn Fn(Point) -> Point + Send + Sync>,
    jacobian: Option<Arc<dyn Fn(Point) -> Mat2 + Send + Sync>>,
    diffusion: Arc<dyn Fn(Point) -> [[f64; MAX_NOISE]; 2] + Send + Sync>,
    pub noise_dim: usize,
    /// Open rectangle `(lower corner, upper corner)`.
    pub domain: (Point, Point),
    /// Declared ellipticity constants `(c1, c2)`.
    pub ellipticity: (f64, f64),
}

impl std::fmt::Debug for PlanarVectorField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PlanarVectorField").field("name", &self.name).field("domain", &self.domain).finish()
    }
}

fn isotropic(z: Point) -> [[f64; MAX_NOISE]; 2] {
    let _ = z;
    let mut g = [[0.0; MAX_NOISE]; 2];
    g[0][0] = 1.0;
    g[1][1] = 1.0;
    g
}

impl PlanarVectorField {
    pub fn new(name: impl Into<String>, drift: Arc<dyn Fn(Point) -> Point + Send + Sync>, domain: (Point, Point)) -> Self {
        Self {
            name: name.into(),
            drift,
            jacobian: None,
            diffusion: Arc::new(isotropic),
            noise_dim: 2,
            domain,
            ellipticity: (1.0, 1.0),
        }
    }

    pub fn with_jacobian(mut self, j: Arc<dyn Fn(Point) -> Mat2 + Send + Sync>) -> Self {
        self.jacobian = Some(j);
        self
    }

    pub fn with_diffusion(
        mut self,
        g: Arc<dyn Fn(Point) -> [[f64; MAX_NOISE]; 2] + Send + Sync>,
        noise_dim: usize,
        ellipticity: (f64, f64),
    ) -> Self {
        self.diffusion = g;
        self.noise_dim = noise_dim;
        self.ellipticity = ellipticity;
        self
    }

    /// Radial field `ρ̇ = p(ρ) + ε cos ϑ`, `ϑ̇ = ω`, written in Cartesian
    /// coordinates, with analytic Jacobian.
    pub fn radial(
        name: impl Into<String>,
        p: impl Fn(f64) -> f64 + Send + Sync + Clone + 'static,
        dp: impl Fn(f64) -> f64 + Send + Sync + 'static,
        omega: f64,
        eps: f64,
        radius: f64,
    ) -> Self {
        let p2 = p.clone();
        let drift = Arc::new(move |z: Point| {
            let rho = z[0].hypot(z[1]);
            let s = p(rho) / rho + eps * z[0] / (rho * rho);
            [s * z[0] - omega * z[1], s * z[1] + omega * z[0]]
        });
        let jac = Arc::new(move |z: Point| {
            let (x, y) = (z[0], z[1]);
            let rho = x.hypot(y);
            let pr = p2(rho);
            let s = pr / rho + eps * x / (rho * rho);
            let radial = dp(rho) / rho - pr / (rho * rho);
            let r4 = rho.powi(4);
            let sx = radial * x / rho + eps * (1.0 / (rho * rho) - 2.0 * x * x / r4);
            let sy = radial * y / rho - eps * 2.0 * x * y / r4;
            [[s + x * sx, x * sy - omega], [y * sx + omega, s + y * sy]]
        });
        Self::new(name, drift, ([-radius, -radius], [radius, radius])).with_jacobian(jac)
    }

    /// `ρ̇ = ρ(ρ-1)(ρ-3)/2 + ε cos ϑ`, angular speed 1: stable circle `ρ = 1`
    /// with rate 1, unstable circle `ρ = 3` with rate 3, period 2π.
    pub fn cubic_circles(eps: f64) -> Self {
        Self::radial(
            "cubic-circles",
            |r| 0.5 * r * (r - 1.0) * (r - 3.0),
            |r| 0.5 * (3.0 * r * r - 8.0 * r + 3.0),
            1.0,
            eps,
            6.0,
        )
    }

    /// Deterministic part of the benchmark embedded in the plane with
    /// `ρ = 2 + r`, `ϑ = 2πφ`: `ρ̇ = λ(ρ-1)(ρ-3)/2 + ε cos ϑ`, `ϑ̇ = 2π/T`.
    pub fn benchmark_planar(p: BenchmarkParams, eps: f64) -> Self {
        let l = p.lambda;
        Self::radial(
            "benchmark-planar",
            move |r| 0.5 * l * (r - 1.0) * (r - 3.0),
            move |r| l * (r - 2.0),
            2.0 * PI / p.period,
            eps,
            6.0,
        )
    }

    #[inline]
    pub fn drift(&self, z: Point) -> Point {
        (self.drift)(z)
    }

    pub fn jacobian(&self, z: Point) -> Mat2 {
        if let Some(j) = &self.jacobian {
            return j(z);
        }
        let h = 1e-6 * (1.0 + z[0].abs().max(z[1].abs()));
        let fx = (self.drift([z[0] + h, z[1]]), self.drift([z[0] - h, z[1]]));
        let fy = (self.drift([z[0], z[1] + h]), self.drift([z[0], z[1] - h]));
        [
            [(fx.0[0] - fx.1[0]) / (2.0 * h), (fy.0[0] - fy.1[0]) / (2.0 * h)],
            [(fx.0[1] - fx.1[1]) / (2.0 * h), (fy.0[1] - fy.1[1]) / (2.0 * h)],
        ]
    }

    pub fn divergence(&self, z: Point) -> f64 {
        let j = self.jacobian(z);
        j[0][0] + j[1][1]
    }

    pub fn diffusion(&self, z: Point) -> [[f64; MAX_NOISE]; 2] {
        (self.diffusion)(z)
    }

    pub fn contains(&self, z: Point) -> bool {
        let (lo, hi) = self.domain;
        z[0] > lo[0] && z[0] < hi[0] && z[1] > lo[1] && z[1] < hi[1]
    }

    /// Checks `c1 ≤ ξᵀ g gᵀ ξ ≤ c2` on a grid of points and directions.
    pub fn check_ellipticity(&self, grid: usize) -> bool {
        let (lo, hi) = self.domain;
        let (c1, c2) = self.ellipticity;
        for i in 0..grid {
            for j in 0..grid {
                let z = [
                    lo[0] + (hi[0] - lo[0]) * (i as f64 + 0.5) / grid as f64,
                    lo[1] + (hi[1] - lo[1]) * (j as f64 + 0.5) / grid as f64,
                ];
                let g = self.diffusion(z);
                for k in 0..16 {
                    let a = PI * k as f64 / 16.0;
                    let xi = [a.cos(), a.sin()];
                    let mut q = 0.0;
                    for c in 0..self.noise_dim {
                        let v = xi[0] * g[0][c] + xi[1] * g[1][c];
                        q += v * v;
                    }
                    if q < c1 * (1.0 - 1e-12) || q > c2 * (1.0 + 1e-12) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_jacobian_matches_differences() {
        let f = PlanarVectorField::cubic_circles(0.05);
        let mut g = f.clone();
        g.jacobian = None;
        for z in [[1.1, 0.3], [-2.0, 2.5], [0.4, -0.9]] {
            let (a, b) = (f.jacobian(z), g.jacobian(z));
            for i in 0..2 {
                for j in 0..2 {
                    assert!((a[i][j] - b[i][j]).abs() < 1e-7, "{z:?} {a:?} {b:?}");
                }
            }
        }
    }

    #[test]
    fn isotropic_noise_is_elliptic() {
        assert!(PlanarVectorField::cubic_circles(0.0).check_ellipticity(8));
    }
}

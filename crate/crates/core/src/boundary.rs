//! Poisson transforms from the boundary sphere, Hardy-type norms, and the
//! Abel transform with the slice-projection check.
//!
//! The kernel `e_{lambda,b}(x) = P(x, b)^{rho + i lambda}` uses the ball
//! model Poisson kernel `P(x, b) = (1 - |x|^2) / |x - b|^2`.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, invalid, LabError, LabResult};
use crate::quadrature::{gauss_legendre, legendre, simpson_weights, unit_sphere_area};
use crate::space::{
    norm, sphere_average_with, BallField, BallLattice, BallSampler, BoundaryFunction, Point, RadialFunction,
    SpaceParams, SphereQuadrature,
};
use crate::spherical::{spherical_function_profile, spherical_transform, SpectralGrid};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonKernelParams {
    pub params: SpaceParams,
    pub lambda: Complex64,
}

impl PoissonKernelParams {
    pub fn new(params: SpaceParams, lambda: Complex64) -> Self {
        Self { params, lambda }
    }

    fn exponent(&self) -> Complex64 {
        Complex64::new(self.params.rho(), 0.0) + Complex64::i() * self.lambda
    }
}

#[inline]
fn kernel_power(log_p: f64, expo: Complex64) -> Complex64 {
    // P^{a + i c} with P > 0
    let z = expo * log_p;
    Complex64::from_polar(z.re.exp(), z.im)
}

/// `e_{lambda,b}(x) = ((1 - |x|^2) / |x - b|^2)^{rho + i lambda}`.
pub fn poisson_kernel(pk: &PoissonKernelParams, x: &[f64], b: &[f64]) -> LabResult<Complex64> {
    let n = pk.params.n();
    if x.len() != n || b.len() != n {
        return invalid(format!("points must have {n} coordinates"));
    }
    let nx: f64 = x.iter().map(|v| v * v).sum();
    if nx >= 1.0 {
        return domain("x must lie strictly inside the unit ball");
    }
    let nb: f64 = b.iter().map(|v| v * v).sum();
    if (nb - 1.0).abs() > 1e-12 {
        return domain("b must lie on the unit sphere");
    }
    let d2: f64 = x.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum();
    Ok(kernel_power(((1.0 - nx) / d2).ln(), pk.exponent()))
}

/// `P_lambda F(x) = sum_b w_b e_{lambda,b}(x) F(b)` at a single point.
pub fn poisson_transform_at(f: &BoundaryFunction, pk: &PoissonKernelParams, x: &Point) -> LabResult<Complex64> {
    let nx = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    if nx >= 1.0 {
        return domain("x must lie strictly inside the unit ball");
    }
    let expo = pk.exponent();
    let q = f.quadrature();
    let mut acc = ZERO;
    for ((b, w), fv) in q.nodes().iter().zip(q.weights()).zip(f.values()) {
        let d2 = (x[0] - b[0]).powi(2) + (x[1] - b[1]).powi(2) + (x[2] - b[2]).powi(2);
        acc += fv * kernel_power(((1.0 - nx) / d2).ln(), expo) * *w;
    }
    Ok(acc)
}

/// Poisson transform evaluated at every node of `lattice`.
pub fn poisson_transform(
    f: &BoundaryFunction,
    lambda: Complex64,
    lattice: BallLattice,
) -> LabResult<BallField> {
    f.validate()?;
    let dim = lattice.dim();
    if f.quadrature().dim() != dim {
        return Err(LabError::GridMismatch("boundary sphere and lattice dimensions differ".into()));
    }
    let pk = PoissonKernelParams::new(SpaceParams::new(dim)?, lambda);
    let mut values = vec![ZERO; lattice.len()];
    let mut mask = vec![false; lattice.len()];
    for idx in 0..lattice.len() {
        if lattice.is_inside(idx) {
            values[idx] = poisson_transform_at(f, &pk, &lattice.point(idx))?;
            mask[idx] = true;
        }
    }
    BallField::from_parts(lattice, values, mask)
}

/// Boundary data depending only on the angle to the pole `e_last`:
/// `F(b) = sum_l c_l P_l(cos theta)` on `S^2`, `sum_l c_l cos(l theta)` on `S^1`.
///
/// For such data the Poisson transform factorises (Funk–Hecke):
/// `P_lambda F(t w) = sum_l c_l A_l(t) Z_l(w)`, which is computed with a
/// one-dimensional integral and stays accurate close to the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct ZonalProfile {
    dim: usize,
    coeffs: Vec<f64>,
}

impl ZonalProfile {
    pub fn new(dim: usize, coeffs: Vec<f64>) -> LabResult<Self> {
        if dim != 2 && dim != 3 {
            return invalid("zonal profiles are implemented for n = 2, 3");
        }
        if coeffs.is_empty() {
            return invalid("zonal profile needs at least one coefficient");
        }
        Ok(Self { dim, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    fn pole_cos(&self, w: &Point) -> f64 {
        if self.dim == 3 {
            w[2]
        } else {
            w[0]
        }
    }

    fn zonal(&self, l: usize, c: f64) -> f64 {
        if self.dim == 3 {
            legendre(l, c)
        } else {
            (l as f64 * c.clamp(-1.0, 1.0).acos()).cos()
        }
    }

    /// `F(b)` for a unit vector `b`.
    pub fn eval(&self, b: &Point) -> f64 {
        let c = self.pole_cos(b);
        self.coeffs.iter().enumerate().map(|(l, a)| a * self.zonal(l, c)).sum()
    }

    pub fn boundary_function(&self, quad: SphereQuadrature) -> LabResult<BoundaryFunction> {
        if quad.dim() != self.dim {
            return Err(LabError::GridMismatch("quadrature dimension differs from profile".into()));
        }
        Ok(BoundaryFunction::from_fn(quad, |b| Complex64::new(self.eval(b), 0.0)))
    }

    /// `||F||_{L^p(K/M)}` by a fine product quadrature.
    pub fn norm(&self, p: f64) -> LabResult<f64> {
        let quad = if self.dim == 3 {
            SphereQuadrature::new(3, 400, 8)?
        } else {
            SphereQuadrature::new(2, 0, 4096)?
        };
        self.boundary_function(quad)?.norm(p)
    }

    /// Funk–Hecke factors `A_l(t)` for `l < coeffs.len()`.
    pub fn funk_hecke(&self, lambda: Complex64, t: f64) -> LabResult<Vec<Complex64>> {
        funk_hecke_factors(self.dim, lambda, t, self.coeffs.len())
    }

    /// Exact-quadrature sampler for `P_lambda F`.
    pub fn poisson_field(&self, lambda: Complex64) -> ZonalPoissonField {
        ZonalPoissonField {
            profile: self.clone(),
            lambda,
            cache: RefCell::new((f64::NAN, Vec::new())),
        }
    }
}

/// Graded Gauss–Legendre panels on `[0, pi]`, refined towards `theta = 0`
/// where the kernel concentrates at width about `1 - t`.
fn graded_angle_rule(t: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(24);
    let mut edges = vec![0.0];
    let mut width = (1.0 - t).max(1e-6) * 0.5;
    while edges[edges.len() - 1] + width < PI {
        let last = edges[edges.len() - 1];
        edges.push(last + width);
        width *= 1.6;
    }
    edges.push(PI);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for e in edges.windows(2) {
        let half = 0.5 * (e[1] - e[0]);
        let mid = 0.5 * (e[1] + e[0]);
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(mid + half * xi);
            weights.push(half * wi);
        }
    }
    (nodes, weights)
}

/// `A_l(t)`: the Poisson transform of the zonal harmonic of degree `l`
/// evaluated at `t * pole`.
pub fn funk_hecke_factors(dim: usize, lambda: Complex64, t: f64, count: usize) -> LabResult<Vec<Complex64>> {
    if !(0.0..1.0).contains(&t) {
        return domain("radius must lie in [0, 1)");
    }
    let params = SpaceParams::new(dim)?;
    let expo = Complex64::new(params.rho(), 0.0) + Complex64::i() * lambda;
    let (theta, w) = graded_angle_rule(t);
    let mut out = vec![ZERO; count];
    let mut total = 0.0;
    for (th, wi) in theta.iter().zip(&w) {
        let c = th.cos();
        let k = kernel_power(((1.0 - t * t) / (1.0 - 2.0 * t * c + t * t)).ln(), expo);
        let weight = if dim == 3 { wi * th.sin() } else { *wi };
        total += weight;
        for (l, o) in out.iter_mut().enumerate() {
            let z = if dim == 3 { legendre(l, c) } else { (l as f64 * th).cos() };
            *o += k * (z * weight);
        }
    }
    for o in out.iter_mut() {
        *o /= total;
    }
    Ok(out)
}

/// `P_lambda F` for zonal `F`; caches the Funk–Hecke factors of the last radius.
#[derive(Debug)]
pub struct ZonalPoissonField {
    profile: ZonalProfile,
    lambda: Complex64,
    cache: RefCell<(f64, Vec<Complex64>)>,
}

impl ZonalPoissonField {
    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn profile(&self) -> &ZonalProfile {
        &self.profile
    }
}

impl BallSampler for ZonalPoissonField {
    fn dim(&self) -> usize {
        self.profile.dim
    }

    fn sample(&self, x: &Point) -> LabResult<Complex64> {
        let t = norm(x);
        if t >= 1.0 {
            return domain("sample point outside the unit ball");
        }
        // radii are compared exactly: sphere_average reuses one t per sphere
        let t_key = (t * 1e12).round() / 1e12;
        {
            let cache = self.cache.borrow();
            if cache.0 == t_key {
                return Ok(self.combine(x, t, &cache.1));
            }
        }
        let factors = self.profile.funk_hecke(self.lambda, t_key)?;
        let v = self.combine(x, t, &factors);
        *self.cache.borrow_mut() = (t_key, factors);
        Ok(v)
    }
}

impl ZonalPoissonField {
    fn combine(&self, x: &Point, t: f64, factors: &[Complex64]) -> Complex64 {
        let c = if t == 0.0 {
            1.0
        } else if self.profile.dim == 3 {
            x[2] / t
        } else {
            x[0] / t
        };
        self.profile
            .coeffs
            .iter()
            .zip(factors)
            .enumerate()
            .map(|(l, (a, f))| {
                // the l >= 1 harmonics vanish at the origin
                if t == 0.0 && l > 0 {
                    ZERO
                } else {
                    f * (a * self.profile.zonal(l, c))
                }
            })
            .sum()
    }
}

/// Radius profile of `(1 + r)^M phi_0(r)^{-1} ||f(. a_r)||_{L^p(K)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HardyNormReport {
    pub p: f64,
    pub weight_exponent: f64,
    pub radii: Vec<f64>,
    pub ratios: Vec<f64>,
    pub supremum: f64,
}

impl HardyNormReport {
    /// True when each ratio is at least the previous one minus `slack`
    /// (relative to the supremum).
    pub fn is_nondecreasing(&self, slack: f64) -> bool {
        self.ratios
            .windows(2)
            .all(|w| w[1] >= w[0] - slack * self.supremum.max(f64::MIN_POSITIVE))
    }

    /// Ratio at the radius closest to `r`.
    pub fn ratio_at(&self, r: f64) -> Option<f64> {
        self.radii
            .iter()
            .zip(&self.ratios)
            .min_by(|a, b| (a.0 - r).abs().total_cmp(&(b.0 - r).abs()))
            .map(|(_, v)| *v)
    }

    /// Last-radius ratio over first-radius ratio.
    pub fn growth(&self) -> f64 {
        match (self.ratios.first(), self.ratios.last()) {
            (Some(a), Some(b)) if *a > 0.0 => b / a,
            _ => f64::NAN,
        }
    }

    /// The profile flags an unbounded trend when it grows more than tenfold.
    pub fn unbounded_trend(&self) -> bool {
        self.growth() > 10.0
    }
}

/// Hardy-type norm profile of `field` over `radii` (geodesic, increasing).
pub fn hardy_norm<S: BallSampler + ?Sized>(
    field: &S,
    p: f64,
    weight_exponent: f64,
    radii: &[f64],
    quad: &SphereQuadrature,
) -> LabResult<HardyNormReport> {
    if p.is_nan() || p < 1.0 {
        return domain(format!("exponent p must be >= 1 or infinite, got {p}"));
    }
    if !(weight_exponent >= 0.0) {
        return invalid("weight exponent must be nonnegative");
    }
    if radii.is_empty() {
        return invalid("Hardy profile needs at least one radius");
    }
    let params = SpaceParams::new(field.dim())?;
    let phi0 = spherical_function_profile(&params, ZERO, radii)?;
    let mut ratios = Vec::with_capacity(radii.len());
    for (r, ph) in radii.iter().zip(&phi0) {
        let avg = sphere_average_with(field, *r, p, quad)?;
        ratios.push((1.0 + r).powf(weight_exponent) * avg / ph.re);
    }
    let supremum = ratios.iter().cloned().fold(0.0, f64::max);
    Ok(HardyNormReport {
        p,
        weight_exponent,
        radii: radii.to_vec(),
        ratios,
        supremum,
    })
}

/// Threshold below which the Abel integrand is treated as zero.
pub const ABEL_TRUNCATION: f64 = 1e-14;
/// Largest relative integrand allowed at the end of the radial grid.
pub const ABEL_DECAY_TOLERANCE: f64 = 1e-10;
const ABEL_PANEL_SUBDIVISIONS: usize = 4;

/// `A f(s) = e^{rho s} int_N f(a_s n o) dn`, realised on the half-space as
/// `int_{R^{n-1}} f(arccosh(cosh s + |w|^2 / 2)) dw` (the horosphere through
/// `a_s o` after rescaling by the dilation `a_s`).
///
/// The radial integral is taken in `q = |w|` with weight
/// `Omega_{n-2} q^{n-2}`, on panels whose ends are the images of the radial
/// grid nodes. The output depends on `|s|` only.
pub fn abel_transform(params: &SpaceParams, f: &RadialFunction, s_grid: &[f64]) -> LabResult<Vec<Complex64>> {
    let grid = f.grid();
    let r_max = grid.r_max();
    let peak = f.max_abs();
    if peak == 0.0 {
        return Ok(vec![ZERO; s_grid.len()]);
    }
    // integrand in r behaves like f(r) sinh(r) q^{n-3}: check the end of the grid
    let m = params.n() as i32 - 3;
    let mag = |r: f64, s: f64| {
        let q = (2.0 * (r.cosh() - s.cosh())).max(0.0).sqrt();
        f.interpolate(r).norm() * r.sinh() * if m >= 0 { q.powi(m) } else { 1.0 / q.max(1e-300) }
    };
    let end_mag = mag(r_max, 0.0);
    let max_mag = grid.nodes().iter().skip(1).map(|r| mag(*r, 0.0)).fold(0.0, f64::max);
    if end_mag > ABEL_DECAY_TOLERANCE * max_mag {
        return Err(LabError::InsufficientDecay {
            tail: end_mag / max_mag,
            tolerance: ABEL_DECAY_TOLERANCE,
        });
    }
    // last node that still matters
    let cutoff_idx = (0..grid.num_points())
        .rev()
        .find(|&j| mag(grid.node(j), 0.0) >= ABEL_TRUNCATION * max_mag)
        .unwrap_or(grid.num_points() - 1);
    let r_cut = grid.node((cutoff_idx + 1).min(grid.num_points() - 1));

    let area = unit_sphere_area(params.n() - 1);
    let qpow = params.n() as i32 - 2;
    let sub_w = simpson_weights(ABEL_PANEL_SUBDIVISIONS + 1, 1.0);
    s_grid
        .iter()
        .map(|&s| {
            let s_abs = s.abs();
            if s_abs >= r_cut {
                return Ok(ZERO);
            }
            let cs = s_abs.cosh();
            let q_of = |r: f64| (2.0 * (r.cosh() - cs)).max(0.0).sqrt();
            let mut edges = vec![0.0];
            let first = ((s_abs / grid.h()).floor() as usize + 1).min(grid.num_points() - 1);
            for j in first..grid.num_points() {
                let r = grid.node(j);
                if r > r_cut + 1e-12 {
                    break;
                }
                if r > s_abs {
                    edges.push(q_of(r));
                }
            }
            let mut acc = ZERO;
            for e in edges.windows(2) {
                let hq = (e[1] - e[0]) / ABEL_PANEL_SUBDIVISIONS as f64;
                for (k, wk) in sub_w.iter().enumerate() {
                    let q = e[0] + k as f64 * hq;
                    let r = (cs + 0.5 * q * q).acosh();
                    acc += f.interpolate(r) * (wk * hq * q.powi(qpow));
                }
            }
            Ok(acc * area)
        })
        .collect()
}

/// Euclidean Fourier transform `int g(s) e^{-i lambda s} ds` of an even
/// function sampled on a uniform grid `s_k = k h`, `k >= 0`.
pub fn even_fourier_transform(values: &[Complex64], h: f64, lambdas: &[f64]) -> Vec<Complex64> {
    let w = simpson_weights(values.len(), h);
    lambdas
        .iter()
        .map(|l| {
            values
                .iter()
                .zip(&w)
                .enumerate()
                .map(|(k, (v, wk))| v * (2.0 * wk * (l * k as f64 * h).cos()))
                .sum()
        })
        .collect()
}

/// `max_lambda |FT(A f)(lambda) - f^(lambda)| / max |f^|` on `grid`, with the
/// Abel transform sampled on `[0, r_max]` at the radial grid spacing.
pub fn slice_projection_check(params: &SpaceParams, f: &RadialFunction, grid: &SpectralGrid) -> LabResult<f64> {
    let rg = f.grid();
    let s_grid = rg.nodes();
    let abel = abel_transform(params, f, &s_grid)?;
    let lambdas = grid.nodes();
    let ft = even_fourier_transform(&abel, rg.h(), &lambdas);
    let fhat = spherical_transform(params, f, grid)?;
    let scale = fhat.max_abs();
    if scale == 0.0 {
        return Ok(ft.iter().map(|v| v.norm()).fold(0.0, f64::max));
    }
    Ok(ft
        .iter()
        .zip(fhat.values())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
        / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{k_average_with, sphere_average, RadialGrid};
    use crate::spherical::{heat_kernel_h3, spherical_function, spherical_function_h3};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn kernel_at_origin_is_one() {
        let pk = PoissonKernelParams::new(SpaceParams::new(3).unwrap(), Complex64::new(1.3, 0.2));
        let v = poisson_kernel(&pk, &[0.0; 3], &[0.0, 0.6, 0.8]).unwrap();
        assert!((v - c(1.0)).norm() < 1e-15);
        assert!(poisson_kernel(&pk, &[0.0, 0.6, 0.8], &[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn funk_hecke_zero_is_spherical_function() {
        for dim in [2, 3] {
            let p = SpaceParams::new(dim).unwrap();
            for l in [c(0.0), c(1.0)] {
                for r in [0.5f64, 2.0, 5.0] {
                    let a0 = funk_hecke_factors(dim, l, (0.5 * r).tanh(), 1).unwrap()[0];
                    let phi = spherical_function(&p, l, r).unwrap();
                    assert!((a0 - phi).norm() < 1e-10, "dim {dim} l {l} r {r}: {a0} vs {phi}");
                }
            }
        }
    }

    #[test]
    fn quadrature_transform_matches_zonal_factorisation() {
        let prof = ZonalProfile::new(3, vec![1.0, 0.3, -0.2]).unwrap();
        let quad = SphereQuadrature::new(3, 48, 96).unwrap();
        let bf = prof.boundary_function(quad).unwrap();
        let pk = PoissonKernelParams::new(SpaceParams::new(3).unwrap(), c(1.0));
        let exact = prof.poisson_field(c(1.0));
        for x in [[0.1, 0.2, -0.3], [0.0, 0.5, 0.4]] {
            let a = poisson_transform_at(&bf, &pk, &x).unwrap();
            let b = exact.sample(&x).unwrap();
            assert!((a - b).norm() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn k_average_of_plane_wave_is_spherical_function() {
        let l = c(1.0);
        let pk = PoissonKernelParams::new(SpaceParams::new(3).unwrap(), l);
        let b = [0.0, 0.0, 1.0];
        let wave = crate::space::FnField::new(3, |x: &Point| poisson_kernel(&pk, x, &b).unwrap());
        let grid = RadialGrid::new(3.0, 7).unwrap();
        let quad = SphereQuadrature::new(3, 96, 8).unwrap();
        let avg = k_average_with(&wave, &grid, &quad).unwrap();
        for (j, v) in avg.values().iter().enumerate() {
            let r = grid.node(j);
            let phi = spherical_function_h3(l, r);
            assert!((v - phi).norm() < 1e-4 * phi.norm().max(1e-3), "r {r}: {v} vs {phi}");
        }
    }

    #[test]
    fn hardy_of_phi_zero_is_one() {
        let phi0 = crate::space::FnField::new(3, |x: &Point| spherical_function_h3(c(0.0), 2.0 * norm(x).atanh()));
        let radii: Vec<f64> = (0..=8).map(|i| i as f64 * 0.5).collect();
        let quad = SphereQuadrature::new(3, 8, 8).unwrap();
        let rep = hardy_norm(&phi0, f64::INFINITY, 0.0, &radii, &quad).unwrap();
        assert!((rep.supremum - 1.0).abs() < 1e-10);
        assert!(sphere_average(&phi0, 1.0, 0.5).is_err());
    }

    #[test]
    fn abel_of_heat_kernel_is_gaussian() {
        let p = SpaceParams::new(3).unwrap();
        let t = 0.5;
        let grid = RadialGrid::new(14.0, 1401).unwrap();
        let h = RadialFunction::from_real_fn(grid, |r| heat_kernel_h3(t, r));
        let s: Vec<f64> = (0..=40).map(|k| k as f64 * 0.1 - 2.0).collect();
        let a = abel_transform(&p, &h, &s).unwrap();
        for (si, ai) in s.iter().zip(&a) {
            let exact = (4.0 * PI * t).powf(-0.5) * (-t - si * si / (4.0 * t)).exp();
            assert!((ai.re - exact).abs() < 1e-7 * exact.max(1e-3), "s {si}: {ai} vs {exact}");
        }
    }

    #[test]
    fn abel_rejects_slow_decay() {
        let p = SpaceParams::new(2).unwrap();
        let grid = RadialGrid::new(4.0, 101).unwrap();
        let f = RadialFunction::from_real_fn(grid, |r| (-r).exp());
        assert!(matches!(abel_transform(&p, &f, &[0.0]), Err(LabError::InsufficientDecay { .. })));
    }
}

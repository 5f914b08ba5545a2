//! Geometry of real hyperbolic space `H^n` (curvature -1) and the grids the
//! rest of the crate samples functions on.
//!
//! The ball model is canonical. Points of the unit ball are `[f64; 3]`
//! with the third coordinate unused when `n = 2`; general-dimension
//! distance computations take slices.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, invalid, LabError, LabResult};
use crate::quadrature::{cubic_lagrange_weights, cubic_stencil, gauss_legendre, unit_sphere_area};

pub type Point = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    Ball,
    HalfSpace,
}

/// Dimension and the constants it fixes: `rho = (n - 1) / 2` and the single
/// root multiplicity `n - 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceParams {
    n: usize,
    rho: f64,
    model: Model,
}

impl SpaceParams {
    pub fn new(n: usize) -> LabResult<Self> {
        if n < 2 {
            return invalid(format!("dimension must be at least 2, got {n}"));
        }
        Ok(Self {
            n,
            rho: (n as f64 - 1.0) / 2.0,
            model: Model::Ball,
        })
    }

    pub fn with_model(mut self, model: Model) -> Self {
        self.model = model;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn rho_sq(&self) -> f64 {
        self.rho * self.rho
    }

    pub fn multiplicity(&self) -> usize {
        self.n - 1
    }

    pub fn model(&self) -> Model {
        self.model
    }

    /// Area of the unit Euclidean sphere `S^{n-1}`.
    pub fn sphere_area(&self) -> f64 {
        unit_sphere_area(self.n)
    }

    /// Lattice-backed fields only exist for `n = 2, 3`.
    pub fn require_lattice_dim(&self) -> LabResult<()> {
        if self.n == 2 || self.n == 3 {
            Ok(())
        } else {
            invalid(format!("lattice fields need n in {{2, 3}}, got {}", self.n))
        }
    }
}

/// Hyperbolic distance in the ball model.
///
/// Uses `sinh(d/2) = |x - y| / sqrt((1 - |x|^2)(1 - |y|^2))`, which is the
/// `cosh d = 1 + 2|x-y|^2 / ((1-|x|^2)(1-|y|^2))` identity without the
/// cancellation of `acosh` near zero.
pub fn geodesic_distance(params: &SpaceParams, x: &[f64], y: &[f64]) -> LabResult<f64> {
    if x.len() != params.n() || y.len() != params.n() {
        return invalid(format!(
            "points must have {} coordinates (got {} and {})",
            params.n(),
            x.len(),
            y.len()
        ));
    }
    let nx: f64 = x.iter().map(|v| v * v).sum();
    let ny: f64 = y.iter().map(|v| v * v).sum();
    if nx >= 1.0 || ny >= 1.0 {
        return domain("points must lie strictly inside the unit ball");
    }
    let diff: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    let s = (diff / ((1.0 - nx) * (1.0 - ny))).sqrt();
    Ok(2.0 * s.asinh())
}

/// `sigma(x) = d(x, o)` for the base point `o = 0`.
pub fn sigma(params: &SpaceParams, x: &[f64]) -> LabResult<f64> {
    geodesic_distance(params, x, &vec![0.0; params.n()])
}

/// Polar volume density `sinh(r)^{n-1}`; the normalising constant is 1.
pub fn volume_density(params: &SpaceParams, r: f64) -> LabResult<f64> {
    if r < 0.0 || r.is_nan() {
        return domain(format!("radius must be nonnegative, got {r}"));
    }
    Ok(r.sinh().powi(params.multiplicity() as i32))
}

/// Euclidean radius in the ball of the geodesic sphere of radius `r`.
#[inline]
pub fn ball_radius(r: f64) -> f64 {
    (0.5 * r).tanh()
}

/// Geodesic radius of the ball point at Euclidean norm `t`.
#[inline]
pub fn geodesic_radius(t: f64) -> f64 {
    2.0 * t.atanh()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    r_max: f64,
    num_points: usize,
}

impl RadialGrid {
    pub fn new(r_max: f64, num_points: usize) -> LabResult<Self> {
        if !(r_max > 0.0) || !r_max.is_finite() {
            return invalid(format!("r_max must be positive, got {r_max}"));
        }
        if num_points < 2 {
            return invalid("radial grid needs at least two points");
        }
        Ok(Self { r_max, num_points })
    }

    /// Grid with spacing `h` (rounded so that `r_max` is a node).
    pub fn with_spacing(r_max: f64, h: f64) -> LabResult<Self> {
        if !(h > 0.0) {
            return invalid("grid spacing must be positive");
        }
        Self::new(r_max, (r_max / h).round() as usize + 1)
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn num_points(&self) -> usize {
        self.num_points
    }

    pub fn h(&self) -> f64 {
        self.r_max / (self.num_points - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.num_points).map(|i| self.node(i)).collect()
    }

    /// The first `len` nodes as a grid of their own.
    pub fn truncated(&self, len: usize) -> LabResult<Self> {
        if len < 2 || len > self.num_points {
            return invalid(format!("cannot truncate {} nodes to {len}", self.num_points));
        }
        Self::new(self.node(len - 1), len)
    }
}

/// Samples of a K-invariant function on a geodesic-radius grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialFunction {
    grid: RadialGrid,
    values: Vec<Complex64>,
}

impl RadialFunction {
    pub fn new(grid: RadialGrid, values: Vec<Complex64>) -> LabResult<Self> {
        if values.len() != grid.num_points() {
            return Err(LabError::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.num_points()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: RadialGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = (0..grid.num_points()).map(|i| f(grid.node(i))).collect();
        Self { grid, values }
    }

    pub fn from_real_fn(grid: RadialGrid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |r| Complex64::new(f(r), 0.0))
    }

    pub fn zeros(grid: RadialGrid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.num_points()],
        }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Cubic interpolation using the even extension across `r = 0`.
    /// Outside `[0, r_max]` the function is treated as truncated to zero.
    pub fn interpolate(&self, r: f64) -> Complex64 {
        let r = r.abs();
        let h = self.grid.h();
        let n = self.values.len();
        if r > self.grid.r_max() * (1.0 + 1e-12) {
            return Complex64::new(0.0, 0.0);
        }
        let pos = r / h;
        let mut base = pos.floor() as i64;
        base = base.min(n as i64 - 3).max(0);
        let u = pos - base as f64;
        let w = cubic_lagrange_weights(u);
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, wk) in w.iter().enumerate() {
            let idx = (base - 1 + k as i64).unsigned_abs() as usize;
            acc += self.values[idx.min(n - 1)] * wk;
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| f(self.grid.node(i), *v))
            .collect();
        Self {
            grid: self.grid,
            values,
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        self.map(|_, v| v * c)
    }

    /// `self + c * other`
    pub fn axpy(&self, c: Complex64, other: &Self) -> LabResult<Self> {
        if self.grid != other.grid {
            return Err(LabError::GridMismatch("radial grids differ".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b * c)
            .collect();
        Ok(Self {
            grid: self.grid,
            values,
        })
    }
}

/// Uniform Cartesian lattice covering the closed ball of Euclidean radius
/// `1 - eps_b`, in dimension 2 or 3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallLattice {
    dim: usize,
    half_count: usize,
    eps_b: f64,
}

impl BallLattice {
    /// `half_count` nodes span each half-axis, so `h = (1 - eps_b) / half_count`.
    pub fn new(dim: usize, half_count: usize, eps_b: f64) -> LabResult<Self> {
        if dim != 2 && dim != 3 {
            return invalid(format!("ball lattices exist for dimension 2 or 3, got {dim}"));
        }
        if half_count < 4 {
            return invalid("lattice needs at least four nodes per half-axis");
        }
        if !(eps_b > 0.0 && eps_b < 1.0) {
            return invalid(format!("boundary margin must lie in (0, 1), got {eps_b}"));
        }
        Ok(Self {
            dim,
            half_count,
            eps_b,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eps_b(&self) -> f64 {
        self.eps_b
    }

    pub fn half_count(&self) -> usize {
        self.half_count
    }

    pub fn h(&self) -> f64 {
        self.radius() / self.half_count as f64
    }

    /// Euclidean radius of the covered ball.
    pub fn radius(&self) -> f64 {
        1.0 - self.eps_b
    }

    pub fn per_axis(&self) -> usize {
        2 * self.half_count + 1
    }

    pub fn len(&self) -> usize {
        self.per_axis().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        (i as f64 - self.half_count as f64) * self.h()
    }

    pub fn index(&self, ijk: [usize; 3]) -> usize {
        let n = self.per_axis();
        if self.dim == 2 {
            ijk[0] * n + ijk[1]
        } else {
            (ijk[0] * n + ijk[1]) * n + ijk[2]
        }
    }

    pub fn multi_index(&self, idx: usize) -> [usize; 3] {
        let n = self.per_axis();
        if self.dim == 2 {
            [idx / n, idx % n, self.half_count]
        } else {
            [idx / (n * n), (idx / n) % n, idx % n]
        }
    }

    pub fn point(&self, idx: usize) -> Point {
        let m = self.multi_index(idx);
        let mut p = [0.0; 3];
        for (a, pa) in p.iter_mut().enumerate().take(self.dim) {
            *pa = self.coordinate(m[a]);
        }
        p
    }

    pub fn is_inside(&self, idx: usize) -> bool {
        let p = self.point(idx);
        norm(&p) <= self.radius() * (1.0 + 1e-12)
    }
}

#[inline]
pub fn norm(p: &Point) -> f64 {
    (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
}

/// Anything that can be evaluated at ball points: lattice fields through
/// interpolation, closed forms directly.
pub trait BallSampler {
    fn dim(&self) -> usize;
    fn sample(&self, x: &Point) -> LabResult<Complex64>;
}

/// A closed-form function on the ball, used as an exact oracle.
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&Point) -> Complex64> FnField<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&Point) -> Complex64> BallSampler for FnField<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sample(&self, x: &Point) -> LabResult<Complex64> {
        if norm(x) >= 1.0 {
            return domain("sample point outside the unit ball");
        }
        Ok((self.f)(x))
    }
}

/// Samples of a general function on a [`BallLattice`]. Nodes outside the
/// covered ball, or where an operator's stencil did not fit, are masked.
#[derive(Debug, Clone, PartialEq)]
pub struct BallField {
    lattice: BallLattice,
    values: Vec<Complex64>,
    mask: Vec<bool>,
}

impl BallField {
    pub fn from_fn(lattice: BallLattice, f: impl Fn(&Point) -> Complex64) -> Self {
        let mut values = vec![Complex64::new(0.0, 0.0); lattice.len()];
        let mut mask = vec![false; lattice.len()];
        for idx in 0..lattice.len() {
            if lattice.is_inside(idx) {
                values[idx] = f(&lattice.point(idx));
                mask[idx] = true;
            }
        }
        Self {
            lattice,
            values,
            mask,
        }
    }

    pub fn from_parts(lattice: BallLattice, values: Vec<Complex64>, mask: Vec<bool>) -> LabResult<Self> {
        if values.len() != lattice.len() || mask.len() != lattice.len() {
            return Err(LabError::GridMismatch("ball field size does not match lattice".into()));
        }
        Ok(Self {
            lattice,
            values,
            mask,
        })
    }

    pub fn lattice(&self) -> &BallLattice {
        &self.lattice
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn value(&self, idx: usize) -> Option<Complex64> {
        self.mask[idx].then(|| self.values[idx])
    }

    /// Indices of unmasked nodes with Euclidean norm at most `radius`.
    pub fn active_within(&self, radius: f64) -> impl Iterator<Item = usize> + '_ {
        (0..self.values.len())
            .filter(move |&i| self.mask[i] && norm(&self.lattice.point(i)) <= radius)
    }

    pub fn max_abs_within(&self, radius: f64) -> f64 {
        self.active_within(radius)
            .map(|i| self.values[i].norm())
            .fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(&Point, Complex64) -> Complex64) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                if self.mask[i] {
                    f(&self.lattice.point(i), *v)
                } else {
                    *v
                }
            })
            .collect();
        Self {
            lattice: self.lattice,
            values,
            mask: self.mask.clone(),
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        self.map(|_, v| v * c)
    }

    /// `self + c * other` on the intersection of the masks.
    pub fn axpy(&self, c: Complex64, other: &Self) -> LabResult<Self> {
        if self.lattice != other.lattice {
            return Err(LabError::GridMismatch("ball lattices differ".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b * c)
            .collect();
        let mask = self.mask.iter().zip(&other.mask).map(|(a, b)| *a && *b).collect();
        Ok(Self {
            lattice: self.lattice,
            values,
            mask,
        })
    }

    /// Tensor-product cubic interpolation (bicubic for `n = 2`, tricubic
    /// for `n = 3`). Every stencil node must be unmasked.
    pub fn interpolate(&self, x: &Point) -> LabResult<Complex64> {
        let lat = &self.lattice;
        let n = lat.per_axis();
        let h = lat.h();
        let mut origin = [0usize; 3];
        let mut weights = [[0.0; 4]; 3];
        for a in 0..lat.dim() {
            let pos = x[a] / h + lat.half_count() as f64;
            match cubic_stencil(pos, n) {
                Some((o, w)) => {
                    origin[a] = o;
                    weights[a] = w;
                }
                None => return Err(LabError::OutsideLattice(x[..lat.dim()].to_vec())),
            }
        }
        let mut acc = Complex64::new(0.0, 0.0);
        if lat.dim() == 2 {
            for (i, wi) in weights[0].iter().enumerate() {
                for (j, wj) in weights[1].iter().enumerate() {
                    let idx = lat.index([origin[0] + i, origin[1] + j, 0]);
                    if !self.mask[idx] {
                        return Err(LabError::OutsideLattice(x[..2].to_vec()));
                    }
                    acc += self.values[idx] * (wi * wj);
                }
            }
        } else {
            for (i, wi) in weights[0].iter().enumerate() {
                for (j, wj) in weights[1].iter().enumerate() {
                    let wij = wi * wj;
                    for (k, wk) in weights[2].iter().enumerate() {
                        let idx = lat.index([origin[0] + i, origin[1] + j, origin[2] + k]);
                        if !self.mask[idx] {
                            return Err(LabError::OutsideLattice(x.to_vec()));
                        }
                        acc += self.values[idx] * (wij * wk);
                    }
                }
            }
        }
        Ok(acc)
    }
}

impl BallSampler for BallField {
    fn dim(&self) -> usize {
        self.lattice.dim()
    }

    fn sample(&self, x: &Point) -> LabResult<Complex64> {
        self.interpolate(x)
    }
}

/// Quadrature for the normalised measure on `S^{n-1} = K/M`.
///
/// `n = 2`: uniform angles. `n = 3`: Gauss–Legendre in `cos(theta)` times
/// uniform longitude.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereQuadrature {
    dim: usize,
    nodes: Vec<Point>,
    weights: Vec<f64>,
}

impl SphereQuadrature {
    pub fn new(dim: usize, n_theta: usize, n_phi: usize) -> LabResult<Self> {
        match dim {
            2 => {
                if n_phi < 3 {
                    return invalid("circle quadrature needs at least three angles");
                }
                let nodes = (0..n_phi)
                    .map(|k| {
                        let a = 2.0 * PI * k as f64 / n_phi as f64;
                        [a.cos(), a.sin(), 0.0]
                    })
                    .collect();
                Ok(Self {
                    dim,
                    nodes,
                    weights: vec![1.0 / n_phi as f64; n_phi],
                })
            }
            3 => {
                if n_theta < 2 || n_phi < 3 {
                    return invalid("sphere quadrature needs n_theta >= 2 and n_phi >= 3");
                }
                let (u, w) = gauss_legendre(n_theta);
                let mut nodes = Vec::with_capacity(n_theta * n_phi);
                let mut weights = Vec::with_capacity(n_theta * n_phi);
                for (ui, wi) in u.iter().zip(&w) {
                    let s = (1.0 - ui * ui).max(0.0).sqrt();
                    for k in 0..n_phi {
                        let a = 2.0 * PI * k as f64 / n_phi as f64;
                        nodes.push([s * a.cos(), s * a.sin(), *ui]);
                        weights.push(wi / (2.0 * n_phi as f64));
                    }
                }
                Ok(Self {
                    dim,
                    nodes,
                    weights,
                })
            }
            _ => invalid(format!("sphere quadrature implemented for n = 2, 3 (got {dim})")),
        }
    }

    /// 64 x 128 on `S^2`, 256 angles on `S^1`.
    pub fn default_for(dim: usize) -> LabResult<Self> {
        if dim == 2 {
            Self::new(2, 0, 256)
        } else {
            Self::new(dim, 64, 128)
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Samples of a function on the boundary sphere `K/M`, with quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFunction {
    quadrature: SphereQuadrature,
    values: Vec<Complex64>,
}

impl BoundaryFunction {
    pub fn new(quadrature: SphereQuadrature, values: Vec<Complex64>) -> LabResult<Self> {
        if values.len() != quadrature.len() {
            return Err(LabError::GridMismatch(
                "boundary values do not match quadrature nodes".into(),
            ));
        }
        Ok(Self { quadrature, values })
    }

    pub fn from_fn(quadrature: SphereQuadrature, f: impl Fn(&Point) -> Complex64) -> Self {
        let values = quadrature.nodes().iter().map(&f).collect();
        Self { quadrature, values }
    }

    pub fn quadrature(&self) -> &SphereQuadrature {
        &self.quadrature
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Weights must be positive and sum to the total mass 1 of `K/M`.
    pub fn validate(&self) -> LabResult<()> {
        let w = self.quadrature.weights();
        if w.iter().any(|w| !(*w > 0.0)) {
            return invalid("boundary quadrature weights must be positive");
        }
        let total: f64 = w.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return invalid(format!("boundary weights sum to {total}, expected 1"));
        }
        Ok(())
    }

    /// `L^p(K/M)` norm; `p = f64::INFINITY` gives the sample maximum.
    pub fn norm(&self, p: f64) -> LabResult<f64> {
        p_mean(self.values.iter().map(|v| v.norm()), self.quadrature.weights(), p)
    }

    pub fn mean(&self) -> Complex64 {
        self.values
            .iter()
            .zip(self.quadrature.weights())
            .map(|(v, w)| v * w)
            .sum()
    }
}

pub(crate) fn p_mean(abs_values: impl Iterator<Item = f64>, weights: &[f64], p: f64) -> LabResult<f64> {
    if p.is_nan() || p < 1.0 {
        return domain(format!("exponent p must be >= 1, got {p}"));
    }
    if p.is_infinite() {
        return Ok(abs_values.fold(0.0, f64::max));
    }
    let s: f64 = abs_values.zip(weights).map(|(a, w)| w * a.powf(p)).sum();
    Ok(s.powf(1.0 / p))
}

fn sphere_values<S: BallSampler + ?Sized>(
    field: &S,
    r: f64,
    quad: &SphereQuadrature,
) -> LabResult<Vec<Complex64>> {
    if r < 0.0 || r.is_nan() {
        return domain(format!("sphere radius must be nonnegative, got {r}"));
    }
    if quad.dim() != field.dim() {
        return invalid("quadrature dimension does not match the field");
    }
    let t = ball_radius(r);
    quad.nodes()
        .iter()
        .map(|w| {
            let x = [t * w[0], t * w[1], t * w[2]];
            field.sample(&x).map_err(|e| match e {
                LabError::OutsideLattice(_) => LabError::Domain(format!(
                    "geodesic sphere of radius {r} exceeds the lattice interpolation region"
                )),
                other => other,
            })
        })
        .collect()
}

/// p-mean of `|field|` over the geodesic sphere of radius `r` about the
/// base point; `p = INFINITY` returns the maximum.
pub fn sphere_average_with<S: BallSampler + ?Sized>(
    field: &S,
    r: f64,
    p: f64,
    quad: &SphereQuadrature,
) -> LabResult<f64> {
    if p.is_nan() || p < 1.0 {
        return domain(format!("exponent p must be >= 1, got {p}"));
    }
    let vals = sphere_values(field, r, quad)?;
    p_mean(vals.iter().map(|v| v.norm()), quad.weights(), p)
}

pub fn sphere_average<S: BallSampler + ?Sized>(field: &S, r: f64, p: f64) -> LabResult<f64> {
    let quad = SphereQuadrature::default_for(field.dim())?;
    sphere_average_with(field, r, p, &quad)
}

/// Signed sphere mean at radius `r`.
pub fn sphere_mean_with<S: BallSampler + ?Sized>(
    field: &S,
    r: f64,
    quad: &SphereQuadrature,
) -> LabResult<Complex64> {
    let vals = sphere_values(field, r, quad)?;
    Ok(vals.iter().zip(quad.weights()).map(|(v, w)| v * w).sum())
}

/// K-averaging: the radial function `r -> mean of field over the sphere of radius r`.
pub fn k_average_with<S: BallSampler + ?Sized>(
    field: &S,
    grid: &RadialGrid,
    quad: &SphereQuadrature,
) -> LabResult<RadialFunction> {
    let values = grid
        .nodes()
        .into_iter()
        .map(|r| sphere_mean_with(field, r, quad))
        .collect::<LabResult<Vec<_>>>()?;
    RadialFunction::new(*grid, values)
}

pub fn k_average<S: BallSampler + ?Sized>(field: &S, grid: &RadialGrid) -> LabResult<RadialFunction> {
    let quad = SphereQuadrature::default_for(field.dim())?;
    k_average_with(field, grid, &quad)
}

/// Lifts a radial function to a lattice field `x -> f(sigma(x))`.
pub fn radial_to_ball(f: &RadialFunction, lattice: BallLattice) -> BallField {
    BallField::from_fn(lattice, |x| f.interpolate(geodesic_radius(norm(x))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn distance_at_origin_and_unit_radius() {
        let p3 = SpaceParams::new(3).unwrap();
        assert_eq!(geodesic_distance(&p3, &[0.0; 3], &[0.0; 3]).unwrap(), 0.0);
        let t = 0.5f64.tanh();
        let d = geodesic_distance(&p3, &[0.0; 3], &[0.0, t, 0.0]).unwrap();
        assert!((d - 1.0).abs() < 1e-14);
    }

    #[test]
    fn distance_rejects_boundary_points() {
        let p2 = SpaceParams::new(2).unwrap();
        assert!(matches!(
            geodesic_distance(&p2, &[1.0, 0.0], &[0.0, 0.0]),
            Err(LabError::Domain(_))
        ));
        assert!(geodesic_distance(&p2, &[0.0, 0.0, 0.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn volume_density_values() {
        let p3 = SpaceParams::new(3).unwrap();
        let p2 = SpaceParams::new(2).unwrap();
        assert_eq!(volume_density(&p3, 0.0).unwrap(), 0.0);
        // series oracle for sinh(1)^2
        let s1: f64 = (0..20)
            .map(|k| 1.0 / (1..=(2 * k + 1)).map(|j| j as f64).product::<f64>())
            .sum();
        assert!((volume_density(&p3, 1.0).unwrap() - s1 * s1).abs() < 1e-14);
        assert!((volume_density(&p3, 1.0).unwrap() - 1.381_097_845_541_815_5).abs() < 1e-13);
        assert!((volume_density(&p2, 2.0).unwrap() - 3.626_860_407_847_019).abs() < 1e-13);
        assert!(volume_density(&p2, -0.1).is_err());
    }

    #[test]
    fn rho_tracks_dimension() {
        for n in 2..8 {
            let p = SpaceParams::new(n).unwrap();
            assert_eq!(p.rho(), (n as f64 - 1.0) / 2.0);
        }
        assert!(SpaceParams::new(1).is_err());
    }

    #[test]
    fn radial_interpolation_is_even_and_accurate() {
        let grid = RadialGrid::new(5.0, 501).unwrap();
        let f = RadialFunction::from_real_fn(grid, |r| (-r * r).exp());
        for r in [0.0, 0.003, 0.5123, 2.2222, 4.999] {
            assert!((f.interpolate(r).re - (-r * r).exp()).abs() < 1e-8);
            assert_eq!(f.interpolate(r), f.interpolate(-r));
        }
        assert_eq!(f.interpolate(6.0), c(0.0));
    }

    #[test]
    fn sphere_quadrature_weights_normalised() {
        for dim in [2, 3] {
            let q = SphereQuadrature::default_for(dim).unwrap();
            let total: f64 = q.weights().iter().sum();
            assert!((total - 1.0).abs() < 1e-13);
            let bf = BoundaryFunction::from_fn(q, |_| c(1.0));
            bf.validate().unwrap();
        }
    }

    #[test]
    fn sphere_average_of_constant() {
        let lat = BallLattice::new(3, 12, 0.02).unwrap();
        let field = BallField::from_fn(lat, |_| Complex64::new(-2.0, 1.5));
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            for r in [0.0, 0.7, 1.5] {
                let v = sphere_average(&field, r, p).unwrap();
                assert!((v - 2.5).abs() < 1e-12, "p {p} r {r}: {v}");
            }
        }
        assert!(sphere_average(&field, 1.0, 0.5).is_err());
        assert!(matches!(sphere_average(&field, 6.0, 2.0), Err(LabError::Domain(_))));
    }

    #[test]
    fn odd_field_has_zero_k_average() {
        let lat = BallLattice::new(3, 16, 0.02).unwrap();
        let field = BallField::from_fn(lat, |x| c(x[0] * (1.0 + x[1] * x[1]) + x[2].powi(3)));
        let grid = RadialGrid::new(2.0, 9).unwrap();
        let avg = k_average(&field, &grid).unwrap();
        assert!(avg.max_abs() < 1e-10);
    }
}

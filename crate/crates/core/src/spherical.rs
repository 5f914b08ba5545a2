//! Elementary spherical functions and the spherical Fourier transform on `H^n`.
//!
//! `phi_lambda` is obtained from the radial eigen-ODE
//! `u'' + (n-1) coth(r) u' + (lambda^2 + rho^2) u = 0`, `u(0) = 1`.
//! Transforms are composite Simpson sums against a precomputed table of
//! `phi_lambda(r)` values held by [`SphericalAnalysis`].

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, invalid, LabError, LabResult};
use crate::ode::{integrate_to, OdeOptions};
use crate::quadrature::{gauss_legendre_on, radial_weights, simpson_weights};
use crate::space::{RadialFunction, RadialGrid, SpaceParams};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Uniform `lambda` samples on `[0, lambda_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralGrid {
    lambda_max: f64,
    num_points: usize,
}

impl SpectralGrid {
    pub fn new(lambda_max: f64, num_points: usize) -> LabResult<Self> {
        if !(lambda_max > 0.0) || !lambda_max.is_finite() {
            return invalid(format!("lambda_max must be positive, got {lambda_max}"));
        }
        if num_points < 3 {
            return invalid("spectral grid needs at least three points");
        }
        Ok(Self {
            lambda_max,
            num_points,
        })
    }

    /// Default for heat-kernel work: `lambda_max = 12 / sqrt(t_min)`.
    pub fn for_heat(t_min: f64, num_points: usize) -> LabResult<Self> {
        if !(t_min > 0.0) {
            return domain("t_min must be positive");
        }
        Self::new(12.0 / t_min.sqrt(), num_points)
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn num_points(&self) -> usize {
        self.num_points
    }

    pub fn h(&self) -> f64 {
        self.lambda_max / (self.num_points - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.num_points).map(|i| self.node(i)).collect()
    }
}

/// An even function of `lambda`, stored for `lambda >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction {
    grid: SpectralGrid,
    values: Vec<Complex64>,
}

impl SpectralFunction {
    pub fn new(grid: SpectralGrid, values: Vec<Complex64>) -> LabResult<Self> {
        if values.len() != grid.num_points() {
            return Err(LabError::GridMismatch(format!(
                "{} values for a spectral grid of {} nodes",
                values.len(),
                grid.num_points()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: SpectralGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = (0..grid.num_points()).map(|i| f(grid.node(i))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Value at a grid node for `lambda` of either sign.
    pub fn at_node(&self, i: usize) -> Complex64 {
        self.values[i]
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

    pub fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> LabResult<Self> {
        if self.grid != other.grid {
            return Err(LabError::GridMismatch("spectral grids differ".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect();
        Ok(Self {
            grid: self.grid,
            values,
        })
    }
}

/// `phi_lambda` of `H^3` in closed form, `sin(lambda r) / (lambda sinh r)`.
pub fn spherical_function_h3(lambda: Complex64, r: f64) -> Complex64 {
    let r = r.abs();
    if r == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let x = lambda * r;
    // sin(x)/x, with its series for small |x|
    let sinc = if x.norm() < 1e-4 {
        Complex64::new(1.0, 0.0) - x * x / 6.0 + x * x * x * x / 120.0
    } else {
        x.sin() / x
    };
    sinc * (r / r.sinh())
}

/// Values of `phi_lambda` at the nondecreasing radii `radii`.
pub fn spherical_function_profile(
    params: &SpaceParams,
    lambda: Complex64,
    radii: &[f64],
) -> LabResult<Vec<Complex64>> {
    if radii.iter().any(|r| *r < 0.0 || r.is_nan()) {
        return domain("radii must be nonnegative");
    }
    if radii.windows(2).any(|w| w[1] < w[0]) {
        return invalid("radii must be nondecreasing");
    }
    let m = params.multiplicity() as f64;
    let n = params.n() as f64;
    let k = lambda * lambda + params.rho_sq();
    // u = 1 + a2 r^2 + a4 r^4 near the origin
    let a2 = -k / (2.0 * n);
    let a4 = -a2 * (k + 2.0 * m / 3.0) / (4.0 * (n + 2.0));
    let series = |r: f64| {
        let r2 = r * r;
        (
            Complex64::new(1.0, 0.0) + a2 * r2 + a4 * r2 * r2,
            a2 * (2.0 * r) + a4 * (4.0 * r2 * r),
        )
    };
    // keep |k| r0^2 small so the truncated series is exact to rounding
    let r0 = (1e-2f64).min((1e-3 / k.norm().max(1e-300)).sqrt());

    let mut out = vec![ZERO; radii.len()];
    let split = radii.partition_point(|r| *r <= r0);
    for (o, r) in out.iter_mut().zip(radii).take(split) {
        *o = series(*r).0;
    }
    if split < radii.len() {
        let (u0, du0) = series(r0);
        let rhs = |r: f64, y: &[Complex64; 2]| [y[1], -(y[1] * (m / r.tanh())) - k * y[0]];
        let states = integrate_to(rhs, r0, [u0, du0], &radii[split..], &OdeOptions::default())?;
        for (o, s) in out[split..].iter_mut().zip(states) {
            *o = s[0];
        }
    }
    Ok(out)
}

/// `phi_lambda(r)`; even in `lambda` and entire in it.
pub fn spherical_function(params: &SpaceParams, lambda: Complex64, r: f64) -> LabResult<Complex64> {
    Ok(spherical_function_profile(params, lambda, &[r])?[0])
}

pub fn spherical_function_on(
    params: &SpaceParams,
    lambda: Complex64,
    grid: &RadialGrid,
) -> LabResult<RadialFunction> {
    let values = spherical_function_profile(params, lambda, &grid.nodes())?;
    RadialFunction::new(*grid, values)
}

/// `phi_lambda(r)` as the K-integral of the ball-model Poisson kernel,
/// `int_{S^{n-1}} P(x, b)^{rho + i lambda} db` at `|x| = tanh(r/2)`.
/// Used as an independent check at moderate `lambda` and `r`.
pub fn spherical_function_k_integral(
    params: &SpaceParams,
    lambda: Complex64,
    r: f64,
    order: usize,
) -> LabResult<Complex64> {
    if r < 0.0 {
        return domain("radius must be nonnegative");
    }
    let t = (0.5 * r).tanh();
    let expo = Complex64::new(params.rho(), 0.0) + Complex64::i() * lambda;
    let w_exp = params.n() as i32 - 2;
    let (theta, w) = gauss_legendre_on(order, 0.0, PI);
    let mut num = ZERO;
    let mut den = 0.0;
    for (th, wi) in theta.iter().zip(&w) {
        let weight = wi * th.sin().powi(w_exp);
        let p = (1.0 - t * t) / (1.0 - 2.0 * t * th.cos() + t * t);
        num += Complex64::new(p, 0.0).powc(expo) * weight;
        den += weight;
    }
    Ok(num / den)
}

/// Rank-one Plancherel density, up to the inversion constant `c_inv`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlancherelDensity {
    params: SpaceParams,
    values: Vec<f64>,
    c_inv: f64,
}

impl PlancherelDensity {
    pub fn new(params: SpaceParams, grid: &SpectralGrid, c_inv: f64) -> LabResult<Self> {
        let values = grid
            .nodes()
            .into_iter()
            .map(|l| plancherel_weight(&params, l))
            .collect::<LabResult<Vec<_>>>()?;
        Ok(Self {
            params,
            values,
            c_inv,
        })
    }

    pub fn params(&self) -> &SpaceParams {
        &self.params
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn c_inv(&self) -> f64 {
        self.c_inv
    }
}

/// `nu(lambda)`: `lambda^2` on `H^3`, `lambda tanh(pi lambda)` on `H^2`.
pub fn plancherel_weight(params: &SpaceParams, lambda: f64) -> LabResult<f64> {
    let l = lambda.abs();
    match params.n() {
        2 => Ok(l * (PI * l).tanh()),
        3 => Ok(l * l),
        n => invalid(format!("Plancherel density is implemented for n = 2, 3 only (got {n})")),
    }
}

/// Closed-form inversion constant for the normalisations used here.
pub fn analytic_c_inv(params: &SpaceParams) -> LabResult<f64> {
    match params.n() {
        2 => Ok(1.0 / (2.0 * PI)),
        3 => Ok(1.0 / (2.0 * PI * PI)),
        n => invalid(format!("no inversion constant for n = {n}")),
    }
}

/// Closed-form heat kernel of `H^3`.
pub fn heat_kernel_h3(t: f64, r: f64) -> f64 {
    let ratio = if r == 0.0 { 1.0 } else { r / r.sinh() };
    (4.0 * PI * t).powf(-1.5) * (-t - r * r / (4.0 * t)).exp() * ratio
}

/// Heat multiplier `exp(-t (lambda^2 + rho^2))`.
pub fn heat_multiplier(params: &SpaceParams, t: f64, lambda: f64) -> f64 {
    (-t * (lambda * lambda + params.rho_sq())).exp()
}

pub const ROUND_TRIP_TOLERANCE: f64 = 1e-4;
pub const DECAY_TOLERANCE: f64 = 1e-10;
/// Width of the reference Gaussian profile used for calibration.
pub const CALIBRATION_T: f64 = 0.5;

/// Spherical analysis on fixed radial and spectral grids.
///
/// Holds the table `phi_lambda(r)` for every grid pair and the calibrated
/// inversion constant.
#[derive(Debug, Clone)]
pub struct SphericalAnalysis {
    params: SpaceParams,
    rgrid: RadialGrid,
    sgrid: SpectralGrid,
    table: Vec<f64>,
    r_weights: Vec<f64>,
    l_weights: Vec<f64>,
    density: PlancherelDensity,
    calibration_error: f64,
}

impl SphericalAnalysis {
    /// Builds the table and calibrates `c_inv` on the reference profile.
    pub fn new(params: SpaceParams, rgrid: RadialGrid, sgrid: SpectralGrid) -> LabResult<Self> {
        let mut sa = Self::uncalibrated(params, rgrid, sgrid)?;
        sa.calibrate()?;
        Ok(sa)
    }

    /// Uses a previously persisted `c_inv` instead of calibrating.
    pub fn with_c_inv(params: SpaceParams, rgrid: RadialGrid, sgrid: SpectralGrid, c_inv: f64) -> LabResult<Self> {
        if !(c_inv > 0.0) {
            return invalid("c_inv must be positive");
        }
        let mut sa = Self::uncalibrated(params, rgrid, sgrid)?;
        sa.density.c_inv = c_inv;
        sa.calibration_error = sa.round_trip_error(c_inv)?;
        Ok(sa)
    }

    fn uncalibrated(params: SpaceParams, rgrid: RadialGrid, sgrid: SpectralGrid) -> LabResult<Self> {
        let radii = rgrid.nodes();
        let mut table = Vec::with_capacity(sgrid.num_points() * rgrid.num_points());
        for l in sgrid.nodes() {
            let row = spherical_function_profile(&params, Complex64::new(l, 0.0), &radii)?;
            table.extend(row.iter().map(|v| v.re));
        }
        let density = PlancherelDensity::new(params, &sgrid, 1.0)?;
        Ok(Self {
            params,
            rgrid,
            sgrid,
            table,
            r_weights: radial_weights(params.multiplicity(), rgrid.num_points(), rgrid.h()),
            l_weights: simpson_weights(sgrid.num_points(), sgrid.h()),
            density,
            calibration_error: f64::NAN,
        })
    }

    pub fn params(&self) -> &SpaceParams {
        &self.params
    }

    pub fn radial_grid(&self) -> &RadialGrid {
        &self.rgrid
    }

    pub fn spectral_grid(&self) -> &SpectralGrid {
        &self.sgrid
    }

    pub fn c_inv(&self) -> f64 {
        self.density.c_inv
    }

    pub fn density(&self) -> &PlancherelDensity {
        &self.density
    }

    /// Relative round-trip error on the reference profile at the current `c_inv`.
    pub fn calibration_error(&self) -> f64 {
        self.calibration_error
    }

    /// `phi_{lambda_i}(r_j)` from the table.
    pub fn phi(&self, i: usize, j: usize) -> f64 {
        self.table[i * self.rgrid.num_points() + j]
    }

    fn reference_profile(&self) -> SpectralFunction {
        SpectralFunction::from_fn(self.sgrid, |l| {
            Complex64::new(heat_multiplier(&self.params, CALIBRATION_T, l), 0.0)
        })
    }

    fn unscaled_inverse(&self, f: &SpectralFunction) -> Vec<Complex64> {
        let nr = self.rgrid.num_points();
        let mut out = vec![ZERO; nr];
        for (i, (fv, (lw, nu))) in f
            .values()
            .iter()
            .zip(self.l_weights.iter().zip(self.density.values()))
            .enumerate()
        {
            let c = fv * (lw * nu);
            if c == ZERO {
                continue;
            }
            let row = &self.table[i * nr..(i + 1) * nr];
            for (o, p) in out.iter_mut().zip(row) {
                *o += c * p;
            }
        }
        out
    }

    fn forward_values(&self, values: &[Complex64]) -> Vec<Complex64> {
        let nr = self.rgrid.num_points();
        let area = self.params.sphere_area();
        let m = self.params.multiplicity() as i32;
        let weighted: Vec<Complex64> = values
            .iter()
            .zip(&self.r_weights)
            .enumerate()
            .map(|(j, (v, w))| v * (w * self.rgrid.node(j).sinh().powi(m) * area))
            .collect();
        (0..self.sgrid.num_points())
            .map(|i| {
                let row = &self.table[i * nr..(i + 1) * nr];
                row.iter().zip(&weighted).map(|(p, g)| g * p).sum()
            })
            .collect()
    }

    fn round_trip_error(&self, c_inv: f64) -> LabResult<f64> {
        let reference = self.reference_profile();
        let back = self.forward_values(&self.unscaled_inverse(&reference));
        let scale = reference.max_abs();
        Ok(back
            .iter()
            .zip(reference.values())
            .map(|(b, r)| (b * c_inv - r).norm())
            .fold(0.0, f64::max)
            / scale)
    }

    /// Least-squares fit of `c_inv` so that forward(inverse(F_ref)) = F_ref.
    pub fn calibrate(&mut self) -> LabResult<f64> {
        let reference = self.reference_profile();
        let back = self.forward_values(&self.unscaled_inverse(&reference));
        let num: f64 = back.iter().zip(reference.values()).map(|(b, r)| (b.conj() * r).re).sum();
        let den: f64 = back.iter().map(|b| b.norm_sqr()).sum();
        if den == 0.0 {
            return Err(LabError::Degenerate("reference profile inverted to zero".into()));
        }
        let c_inv = num / den;
        let error = self.round_trip_error(c_inv)?;
        if !(error <= ROUND_TRIP_TOLERANCE) {
            return Err(LabError::Calibration {
                error,
                tolerance: ROUND_TRIP_TOLERANCE,
                c_inv,
            });
        }
        self.density.c_inv = c_inv;
        self.calibration_error = error;
        Ok(c_inv)
    }

    fn check_grid(&self, f: &RadialFunction) -> LabResult<()> {
        if *f.grid() != self.rgrid {
            return Err(LabError::GridMismatch(
                "radial function is not on the analysis grid".into(),
            ));
        }
        Ok(())
    }

    /// `f^(lambda) = Omega_{n-1} int_0^{r_max} f(r) phi_lambda(r) sinh^{n-1}(r) dr`.
    pub fn forward(&self, f: &RadialFunction) -> LabResult<SpectralFunction> {
        self.check_grid(f)?;
        radial_tail_check(&self.params, f)?;
        SpectralFunction::new(self.sgrid, self.forward_values(f.values()))
    }

    /// `f(r) = c_inv int_0^{lambda_max} F(lambda) phi_lambda(r) nu(lambda) d lambda`.
    pub fn inverse(&self, f: &SpectralFunction) -> LabResult<RadialFunction> {
        if *f.grid() != self.sgrid {
            return Err(LabError::GridMismatch("spectral function is not on the analysis grid".into()));
        }
        let weighted: Vec<f64> = f
            .values()
            .iter()
            .zip(self.density.values())
            .map(|(v, nu)| v.norm() * nu)
            .collect();
        let peak = weighted.iter().cloned().fold(0.0, f64::max);
        if peak > 0.0 {
            let tail = weighted[weighted.len() - 1] / peak;
            if tail > DECAY_TOLERANCE {
                return Err(LabError::InsufficientDecay {
                    tail,
                    tolerance: DECAY_TOLERANCE,
                });
            }
        }
        let c = self.c_inv();
        let values = self.unscaled_inverse(f).into_iter().map(|v| v * c).collect();
        RadialFunction::new(self.rgrid, values)
    }

    pub fn heat_multiplier(&self, t: f64) -> LabResult<SpectralFunction> {
        if !(t > 0.0) {
            return domain(format!("heat time must be positive, got {t}"));
        }
        Ok(SpectralFunction::from_fn(self.sgrid, |l| {
            Complex64::new(heat_multiplier(&self.params, t, l), 0.0)
        }))
    }

    /// `h_t` as the inverse transform of its multiplier.
    pub fn heat_kernel(&self, t: f64) -> LabResult<RadialFunction> {
        let multiplier = self.heat_multiplier(t)?;
        self.inverse(&multiplier)
    }

    /// `f * g` through the product of transforms.
    pub fn convolve(&self, f: &RadialFunction, g: &RadialFunction) -> LabResult<RadialFunction> {
        let fh = self.forward(f)?;
        let gh = self.forward(g)?;
        self.inverse(&fh.zip_with(&gh, |a, b| a * b)?)
    }
}

/// Estimate of `int_{r_max}^inf |f| phi_0 sinh^{n-1} dr` relative to the
/// truncated integral. This bounds what the cut-off drops from any
/// forward transform at real `lambda`, since `|phi_lambda| <= phi_0`.
///
/// The decay rate seen over the last tenth of the grid is extrapolated.
/// A tail already at round-off level counts as a plateau lasting one more
/// tenth.
pub fn radial_tail_check(params: &SpaceParams, f: &RadialFunction) -> LabResult<f64> {
    let grid = f.grid();
    let m = params.multiplicity() as i32;
    let phi0 = spherical_function_profile(params, ZERO, &grid.nodes())?;
    let g: Vec<f64> = f
        .values()
        .iter()
        .zip(&phi0)
        .enumerate()
        .map(|(j, (v, p))| v.norm() * p.re * grid.node(j).sinh().powi(m))
        .collect();
    let total: f64 = g
        .iter()
        .zip(simpson_weights(g.len(), grid.h()))
        .map(|(a, w)| a * w)
        .sum();
    if total == 0.0 {
        return Ok(0.0);
    }
    let n = g.len();
    let back = (n / 10).max(1);
    let last = g[n - 1];
    let earlier = g[n - 1 - back];
    let span = back as f64 * grid.h();
    let f_max = f.max_abs();
    let f_tail = f.values()[n - back..].iter().map(|v| v.norm()).fold(0.0, f64::max);
    let tail = if last == 0.0 {
        0.0
    } else if f_tail <= ROUND_OFF_FLOOR * f_max {
        g[n - back..].iter().cloned().fold(0.0, f64::max) * span
    } else if earlier > last {
        // integral of last * exp(-rate s) over s > 0
        let rate = (earlier / last).ln() / span;
        last / rate
    } else {
        f64::INFINITY
    };
    let rel = tail / total;
    if rel > DECAY_TOLERANCE {
        return Err(LabError::InsufficientDecay {
            tail: rel,
            tolerance: DECAY_TOLERANCE,
        });
    }
    Ok(rel)
}

/// `|f|` below this fraction of its maximum is round-off.
pub const ROUND_OFF_FLOOR: f64 = 1e-13;

/// Forward transform on an arbitrary spectral grid; builds a one-off table.
pub fn spherical_transform(
    params: &SpaceParams,
    f: &RadialFunction,
    grid: &SpectralGrid,
) -> LabResult<SpectralFunction> {
    radial_tail_check(params, f)?;
    let rgrid = *f.grid();
    let radii = rgrid.nodes();
    let w = radial_weights(params.multiplicity(), rgrid.num_points(), rgrid.h());
    let m = params.multiplicity() as i32;
    let area = params.sphere_area();
    let values = grid
        .nodes()
        .into_iter()
        .map(|l| {
            let phi = spherical_function_profile(params, Complex64::new(l, 0.0), &radii)?;
            Ok(phi
                .iter()
                .zip(f.values())
                .zip(&w)
                .zip(&radii)
                .map(|(((p, v), wj), r)| p * v * (wj * r.sinh().powi(m) * area))
                .sum())
        })
        .collect::<LabResult<Vec<Complex64>>>()?;
    SpectralFunction::new(*grid, values)
}

/// Inverse transform with a freshly calibrated constant.
pub fn inverse_spherical_transform(
    params: &SpaceParams,
    f: &SpectralFunction,
    grid: &RadialGrid,
) -> LabResult<RadialFunction> {
    SphericalAnalysis::new(*params, *grid, *f.grid())?.inverse(f)
}

/// Heat kernel on `grid`, inverted from a spectral grid adapted to `t`.
pub fn heat_kernel(params: &SpaceParams, t: f64, grid: &RadialGrid) -> LabResult<RadialFunction> {
    if !(t > 0.0) {
        return domain(format!("heat time must be positive, got {t}"));
    }
    let sgrid = SpectralGrid::for_heat(t.min(CALIBRATION_T), 1201)?;
    SphericalAnalysis::new(*params, *grid, sgrid)?.heat_kernel(t)
}

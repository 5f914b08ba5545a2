//! Eigen-sequence experiments: build a two-sided sequence `(f_j)` with
//! `A f_j = c f_{j+1}`, check the size and recursion hypotheses, check
//! whether `f_0` is the predicted eigenfunction, and assign a verdict.
//!
//! Sequences are stored as finite sums of modes, `f_j = sum_m s_m^j F_m`,
//! so `A` is applied once per mode.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::boundary::{funk_hecke_factors, hardy_norm, poisson_transform_at, PoissonKernelParams, ZonalProfile};
use crate::error::{domain, invalid, LabError, LabResult};
use crate::laplacians::{distinguished_laplacian_via_stencil, laplace_ball, laplace_radial, SolvableField, SolvableLattice};
use crate::laplacians::solvable::{sigma as solvable_sigma, RHO as SOLVABLE_RHO};
use crate::quadrature::legendre;
use crate::space::{
    geodesic_radius, norm, ball_radius, BallField, BallLattice, BallSampler, Point, RadialFunction, RadialGrid,
    SpaceParams, SphereQuadrature,
};
use crate::spherical::spherical_function_on;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    TheoremConfirmed,
    HypothesisViolated,
    CounterexampleConfirmed,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::TheoremConfirmed => "theorem_confirmed",
            Verdict::HypothesisViolated => "hypothesis_violated",
            Verdict::CounterexampleConfirmed => "counterexample_confirmed",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Verdict {
    type Err = LabError;

    fn from_str(s: &str) -> LabResult<Self> {
        Ok(match s {
            "theorem_confirmed" => Verdict::TheoremConfirmed,
            "hypothesis_violated" => Verdict::HypothesisViolated,
            "counterexample_confirmed" => Verdict::CounterexampleConfirmed,
            "inconclusive" => Verdict::Inconclusive,
            _ => return invalid(format!("unknown verdict '{s}'")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Relative residual below which an identity counts as satisfied.
    pub pass: f64,
    /// Relative distance from every eigenfunction above which `f_0` is a counterexample.
    pub counterexample: f64,
    /// Growth factor that flags a size profile as unbounded.
    pub growth: f64,
    /// Relative error allowed when re-synthesising `f_0` from recovered boundary data.
    pub recovery: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            pass: 1e-3,
            counterexample: 0.1,
            growth: 10.0,
            recovery: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    /// `j = -J ..= J`.
    pub indices: Vec<i64>,
    /// Entry `k` compares `A f_j` with `c f_{j+1}` for `j = indices[k]`, relative to `c |f_{j+1}|`.
    pub recursion_residuals: Vec<f64>,
    /// Size of each `f_j`: Hardy supremum, sup norm, or `sup |f_j / delta|`.
    pub norms: Vec<f64>,
    /// Worst growth of a size profile, across radii (or rows) and across `j`.
    pub trend_growth: f64,
    pub uniform_bound: f64,
    pub recursion_ok: bool,
    pub size_ok: bool,
}

impl HypothesisReport {
    pub fn max_recursion_residual(&self) -> f64 {
        self.recursion_residuals.iter().cloned().fold(0.0, f64::max)
    }

    pub fn holds(&self) -> bool {
        self.recursion_ok && self.size_ok
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConclusionReport {
    /// Eigenvalue predicted for `f_0`.
    pub predicted: Complex64,
    /// `|A f_0 - predicted f_0| / max(|A f_0|, |predicted| |f_0|)`.
    pub residual: f64,
    /// Rayleigh quotient of `f_0`.
    pub kappa_star: Complex64,
    /// `||A f_0 - kappa* f_0||_2 / ||A f_0||_2`: distance from every eigenfunction.
    pub kappa_residual: f64,
    /// Relative error of the Poisson re-synthesis at `lambda = 0`.
    pub recovery_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceReport {
    pub label: String,
    /// `c` in `A f_j = c f_{j+1}`.
    pub eigenvalue: f64,
    pub hypotheses: HypothesisReport,
    pub conclusion: ConclusionReport,
    pub verdict: Verdict,
}

/// Hypotheses hold and the conclusion holds: confirmed. Recursion broken:
/// hypothesis violated. Recursion intact but size unbounded: a
/// counterexample when `f_0` is far from every eigenfunction, otherwise the
/// sequence is merely outside the theorem's scope.
pub fn assign_verdict(h: &HypothesisReport, c: &ConclusionReport, th: &Thresholds) -> Verdict {
    let recovered = c.recovery_error.is_none_or(|e| e <= th.recovery);
    let concluded = c.residual <= th.pass && recovered;
    if h.holds() {
        if concluded {
            Verdict::TheoremConfirmed
        } else {
            Verdict::Inconclusive
        }
    } else if !h.recursion_ok || concluded {
        Verdict::HypothesisViolated
    } else if c.kappa_residual > th.counterexample {
        Verdict::CounterexampleConfirmed
    } else {
        Verdict::Inconclusive
    }
}

/// `max(last tenth) / max(first tenth)` of a profile.
pub fn trend_growth(profile: &[f64]) -> f64 {
    if profile.is_empty() {
        return f64::NAN;
    }
    let w = (profile.len() / 10).max(1);
    let head = profile[..w].iter().cloned().fold(0.0, f64::max);
    let tail = profile[profile.len() - w..].iter().cloned().fold(0.0, f64::max);
    if head > 0.0 {
        tail / head
    } else if tail > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

/// Growth of the per-`j` sizes, `max / min`.
pub fn index_growth(norms: &[f64]) -> f64 {
    let max = norms.iter().cloned().fold(0.0, f64::max);
    let min = norms.iter().cloned().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else if max > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

pub(crate) fn rayleigh(f: &[Complex64], af: &[Complex64]) -> (Complex64, f64) {
    let ff: f64 = f.iter().map(|v| v.norm_sqr()).sum();
    if ff == 0.0 {
        return (ZERO, 0.0);
    }
    let k: Complex64 = f.iter().zip(af).map(|(a, b)| a.conj() * b).sum::<Complex64>() / ff;
    let an: f64 = af.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let rn: f64 = f.iter().zip(af).map(|(a, b)| (b - k * a).norm_sqr()).sum::<f64>().sqrt();
    (k, if an > 0.0 { rn / an } else { 0.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SequenceKind {
    /// `f_j = (-1)^j phi_lambda`.
    EigenSpherical,
    /// `f_j = (-1)^j P_lambda F`.
    Poisson,
    /// `f_j = (mu/c)^j phi_lambda + conj`, `mu = -(lambda^2 + rho^2)`, `c = |mu|`.
    ComplexSpectrumPair,
    /// `f_j = psi_1 + (-1)^j` for the distinguished Laplacian of `H^2`.
    DistinguishedCounterexample,
}

impl SequenceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SequenceKind::EigenSpherical => "eigen_spherical",
            SequenceKind::Poisson => "poisson",
            SequenceKind::ComplexSpectrumPair => "complex_spectrum_pair",
            SequenceKind::DistinguishedCounterexample => "distinguished_counterexample",
        }
    }

    pub fn all() -> [SequenceKind; 4] {
        [
            SequenceKind::EigenSpherical,
            SequenceKind::Poisson,
            SequenceKind::ComplexSpectrumPair,
            SequenceKind::DistinguishedCounterexample,
        ]
    }
}

impl fmt::Display for SequenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SequenceKind {
    type Err = LabError;

    fn from_str(s: &str) -> LabResult<Self> {
        SequenceKind::all()
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| LabError::InvalidParameter(format!("unknown sequence kind '{s}'")))
    }
}

/// Discretisation settings shared by all kinds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolution {
    pub radial_r_max: f64,
    pub radial_h: f64,
    pub hardy_r_max: f64,
    pub hardy_step: f64,
    pub ball_half_count: usize,
    pub ball_eps: f64,
    /// Geodesic radius of the region where lattice residuals are measured.
    pub check_radius: f64,
    pub solvable_b: (f64, f64),
    pub solvable_b_step: f64,
    pub solvable_eta: (f64, f64),
    pub solvable_eta_step: f64,
    /// `kappa` of the stencil form of the distinguished Laplacian.
    pub kappa: f64,
}

impl Default for Resolution {
    fn default() -> Self {
        Self {
            radial_r_max: 14.0,
            radial_h: 0.01,
            hardy_r_max: 12.0,
            hardy_step: 0.1,
            ball_half_count: 32,
            ball_eps: 0.02,
            check_radius: 1.5,
            solvable_b: (-3.0, 3.0),
            solvable_b_step: 0.01,
            solvable_eta: (-3.0, 3.0),
            solvable_eta_step: 0.02,
            kappa: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSpec {
    pub kind: SequenceKind,
    pub n: usize,
    pub lambda: Complex64,
    /// Sequence indices run over `-j_max ..= j_max`.
    pub j_max: usize,
    pub p: f64,
    pub weight_exponent: f64,
    /// Zonal boundary data for [`SequenceKind::Poisson`].
    pub boundary: Option<ZonalProfile>,
    pub resolution: Resolution,
}

impl SequenceSpec {
    pub fn new(kind: SequenceKind, n: usize, lambda: Complex64) -> Self {
        Self {
            kind,
            n,
            lambda,
            j_max: 10,
            p: 2.0,
            weight_exponent: 0.0,
            boundary: None,
            resolution: Resolution::default(),
        }
    }

    pub fn label(&self) -> String {
        format!(
            "{} n={} lambda={}{:+}i p={} M={} J={}",
            self.kind, self.n, self.lambda.re, self.lambda.im, self.p, self.weight_exponent, self.j_max
        )
    }
}

/// Default boundary data `1 + Z_1 / 2 + Z_2 / 4`.
pub fn default_boundary(n: usize) -> LabResult<ZonalProfile> {
    ZonalProfile::new(n, vec![1.0, 0.5, 0.25])
}

struct RadialSampler {
    dim: usize,
    f: RadialFunction,
}

impl BallSampler for RadialSampler {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sample(&self, x: &Point) -> LabResult<Complex64> {
        let t = norm(x);
        if t >= 1.0 {
            return domain("sample point outside the unit ball");
        }
        Ok(self.f.interpolate(geodesic_radius(t)))
    }
}

struct Combination<'a> {
    dim: usize,
    parts: Vec<(Complex64, &'a dyn BallSampler)>,
}

impl BallSampler for Combination<'_> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sample(&self, x: &Point) -> LabResult<Complex64> {
        let mut acc = ZERO;
        for (c, s) in &self.parts {
            acc += s.sample(x)? * *c;
        }
        Ok(acc)
    }
}

enum SizeSource {
    Sampler(Box<dyn BallSampler>),
    /// `f / delta` at every lattice node, grouped by row.
    Weighted(Vec<Complex64>),
}

struct Mode {
    step: Complex64,
    /// Samples on the check region.
    values: Vec<Complex64>,
    applied: Vec<Complex64>,
    size: SizeSource,
}

enum Recovery {
    None,
    /// Lattice samples of `f_0`, for the Poisson re-synthesis.
    Zonal { field: BallField, degree: usize },
}

/// A two-sided sequence ready to be checked.
pub struct Sequence {
    spec: SequenceSpec,
    c: f64,
    predicted: Complex64,
    modes: Vec<Mode>,
    rows: Vec<usize>,
    row_count: usize,
    recovery: Recovery,
}

impl fmt::Debug for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Sequence")
            .field("spec", &self.spec)
            .field("c", &self.c)
            .field("modes", &self.modes.len())
            .finish()
    }
}

impl Sequence {
    pub fn spec(&self) -> &SequenceSpec {
        &self.spec
    }

    pub fn eigenvalue(&self) -> f64 {
        self.c
    }

    pub fn indices(&self) -> Vec<i64> {
        let j = self.spec.j_max as i64;
        (-j..=j).collect()
    }

    /// Number of samples in the check region.
    pub fn region_len(&self) -> usize {
        self.modes.first().map_or(0, |m| m.values.len())
    }

    fn weights(&self, j: i64) -> Vec<Complex64> {
        self.modes.iter().map(|m| m.step.powi(j as i32)).collect()
    }

    /// `f_j` on the check region.
    pub fn values(&self, j: i64) -> Vec<Complex64> {
        self.combine(j, |m| &m.values)
    }

    /// `A f_j` on the check region.
    pub fn applied(&self, j: i64) -> Vec<Complex64> {
        self.combine(j, |m| &m.applied)
    }

    fn combine(&self, j: i64, pick: impl Fn(&Mode) -> &Vec<Complex64>) -> Vec<Complex64> {
        let w = self.weights(j);
        let mut out = vec![ZERO; self.region_len()];
        for (m, wm) in self.modes.iter().zip(w) {
            for (o, v) in out.iter_mut().zip(pick(m)) {
                *o += v * wm;
            }
        }
        out
    }

    /// Multiplies every mode by `s`: `f_j -> s f_j`.
    pub fn scaled(mut self, s: Complex64) -> Self {
        for m in &mut self.modes {
            m.values.iter_mut().for_each(|v| *v *= s);
            m.applied.iter_mut().for_each(|v| *v *= s);
            m.size = match std::mem::replace(&mut m.size, SizeSource::Weighted(Vec::new())) {
                SizeSource::Weighted(w) => SizeSource::Weighted(w.into_iter().map(|v| v * s).collect()),
                SizeSource::Sampler(b) => SizeSource::Sampler(Box::new(Scaled { s, inner: b })),
            };
        }
        if let Recovery::Zonal { field, degree } = &self.recovery {
            self.recovery = Recovery::Zonal {
                field: field.scaled(s),
                degree: *degree,
            };
        }
        self
    }

    /// `f_j -> f_{j+k}`.
    pub fn shifted(mut self, k: i64) -> Self {
        for m in &mut self.modes {
            let s = m.step.powi(k as i32);
            m.values.iter_mut().for_each(|v| *v *= s);
            m.applied.iter_mut().for_each(|v| *v *= s);
            m.size = match std::mem::replace(&mut m.size, SizeSource::Weighted(Vec::new())) {
                SizeSource::Weighted(w) => SizeSource::Weighted(w.into_iter().map(|v| v * s).collect()),
                SizeSource::Sampler(b) => SizeSource::Sampler(Box::new(Scaled { s, inner: b })),
            };
        }
        // the recovery field holds f_0 only, which a shift moves
        self.recovery = Recovery::None;
        self
    }

    /// Adds `eps * F` to every `f_j` with a fixed field `F` given by its
    /// samples and `A F`; used to break the recursion on purpose.
    pub fn perturbed(mut self, eps: Complex64, values: Vec<Complex64>, applied: Vec<Complex64>) -> LabResult<Self> {
        if values.len() != self.region_len() || applied.len() != self.region_len() {
            return Err(LabError::GridMismatch("perturbation does not match the check region".into()));
        }
        let size = match self.modes.first().map(|m| &m.size) {
            Some(SizeSource::Weighted(w)) => SizeSource::Weighted(vec![ZERO; w.len()]),
            _ => SizeSource::Weighted(Vec::new()),
        };
        self.modes.push(Mode {
            step: Complex64::new(1.0, 0.0),
            values: values.into_iter().map(|v| v * eps).collect(),
            applied: applied.into_iter().map(|v| v * eps).collect(),
            size,
        });
        Ok(self)
    }
}

struct Scaled {
    s: Complex64,
    inner: Box<dyn BallSampler>,
}

impl BallSampler for Scaled {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn sample(&self, x: &Point) -> LabResult<Complex64> {
        Ok(self.inner.sample(x)? * self.s)
    }
}

fn validate_spec(spec: &SequenceSpec) -> LabResult<SpaceParams> {
    let params = SpaceParams::new(spec.n)?;
    if spec.n != 2 && spec.n != 3 {
        return invalid(format!("sequence experiments run on H^2 and H^3 (got n = {})", spec.n));
    }
    if spec.j_max == 0 {
        return invalid("J must be at least 1");
    }
    if spec.p.is_nan() || spec.p < 1.0 {
        return domain(format!("exponent p must be >= 1 or infinite, got {}", spec.p));
    }
    if !(spec.weight_exponent >= 0.0) {
        return invalid("weight exponent M must be nonnegative");
    }
    let r = &spec.resolution;
    if !(r.hardy_r_max + 0.5 <= r.radial_r_max) || !(r.hardy_step > 0.0) {
        return invalid("Hardy radii must stay at least 0.5 inside the radial grid");
    }
    if !spec.lambda.re.is_finite() || !spec.lambda.im.is_finite() {
        return domain("lambda must be finite");
    }
    match spec.kind {
        SequenceKind::EigenSpherical | SequenceKind::Poisson => {
            if spec.lambda.im != 0.0 || spec.lambda.re < 0.0 {
                return domain(format!("{} needs real lambda >= 0", spec.kind));
            }
        }
        SequenceKind::ComplexSpectrumPair => {
            if spec.lambda.im.abs() >= params.rho() {
                return domain(format!(
                    "|Im lambda| = {} must stay below rho = {}",
                    spec.lambda.im.abs(),
                    params.rho()
                ));
            }
        }
        SequenceKind::DistinguishedCounterexample => {
            if spec.n != 2 {
                return invalid("the distinguished Laplacian is implemented on H^2 only");
            }
        }
    }
    Ok(params)
}

fn hardy_radii(res: &Resolution) -> Vec<f64> {
    let count = (res.hardy_r_max / res.hardy_step).round() as usize;
    (0..=count).map(|k| k as f64 * res.hardy_step).collect()
}

fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Checks that every mode satisfies `A F = c s F` before the sequence is used.
fn assert_modes(seq: &Sequence, tol: f64) -> LabResult<()> {
    for (k, m) in seq.modes.iter().enumerate() {
        let target = m.step * seq.c;
        let err = m
            .values
            .iter()
            .zip(&m.applied)
            .map(|(v, a)| (a - v * target).norm())
            .fold(0.0, f64::max);
        let scale = max_abs(&m.values) * seq.c;
        if err > tol * scale {
            return Err(LabError::Degenerate(format!(
                "mode {k} breaks the recursion: residual {:.3e} relative",
                err / scale
            )));
        }
    }
    Ok(())
}

fn radial_mode(params: &SpaceParams, phi: RadialFunction, step: Complex64) -> LabResult<Mode> {
    let lap = laplace_radial(params, &phi)?;
    let len = lap.len();
    Ok(Mode {
        step,
        values: phi.values()[..len].to_vec(),
        applied: lap.values().to_vec(),
        size: SizeSource::Sampler(Box::new(RadialSampler { dim: params.n(), f: phi })),
    })
}

/// Builds the sequence for `spec` and verifies the recursion mode by mode.
pub fn build_sequence(spec: &SequenceSpec, thresholds: &Thresholds) -> LabResult<Sequence> {
    let params = validate_spec(spec)?;
    let res = spec.resolution;
    let rho2 = params.rho_sq();
    let minus_one = Complex64::new(-1.0, 0.0);
    let seq = match spec.kind {
        SequenceKind::EigenSpherical => {
            let grid = RadialGrid::with_spacing(res.radial_r_max, res.radial_h)?;
            let phi = spherical_function_on(&params, spec.lambda, &grid)?;
            let c = spec.lambda.re * spec.lambda.re + rho2;
            Sequence {
                spec: spec.clone(),
                c,
                predicted: Complex64::new(-c, 0.0),
                modes: vec![radial_mode(&params, phi, minus_one)?],
                rows: Vec::new(),
                row_count: 0,
                recovery: Recovery::None,
            }
        }
        SequenceKind::ComplexSpectrumPair => {
            let grid = RadialGrid::with_spacing(res.radial_r_max, res.radial_h)?;
            let mu = -(spec.lambda * spec.lambda + rho2);
            let c = mu.norm();
            if c < rho2 {
                return domain(format!("c = |lambda^2 + rho^2| = {c} must be at least rho^2 = {rho2}"));
            }
            let phi = spherical_function_on(&params, spec.lambda, &grid)?;
            let phi_bar = phi.map(|_, v| v.conj());
            Sequence {
                spec: spec.clone(),
                c,
                predicted: Complex64::new(-c, 0.0),
                modes: vec![
                    radial_mode(&params, phi, mu / c)?,
                    radial_mode(&params, phi_bar, mu.conj() / c)?,
                ],
                rows: Vec::new(),
                row_count: 0,
                recovery: Recovery::None,
            }
        }
        SequenceKind::Poisson => build_poisson(spec, &params)?,
        SequenceKind::DistinguishedCounterexample => build_distinguished(spec)?,
    };
    assert_modes(&seq, thresholds.pass)?;
    Ok(seq)
}

fn build_poisson(spec: &SequenceSpec, params: &SpaceParams) -> LabResult<Sequence> {
    let res = spec.resolution;
    let profile = match &spec.boundary {
        Some(p) => {
            if p.dim() != spec.n {
                return Err(LabError::GridMismatch("boundary profile dimension differs from n".into()));
            }
            p.clone()
        }
        None => default_boundary(spec.n)?,
    };
    let lattice = BallLattice::new(spec.n, res.ball_half_count, res.ball_eps)?;
    let sampler = profile.poisson_field(spec.lambda);
    let t_max = ball_radius(res.check_radius);
    // only nodes the stencils around the check region can reach
    let t_fill = t_max + 3.0 * lattice.h() * (spec.n as f64).sqrt();
    let mut values = vec![ZERO; lattice.len()];
    let mut mask = vec![false; lattice.len()];
    for idx in 0..lattice.len() {
        let x = lattice.point(idx);
        if lattice.is_inside(idx) && norm(&x) <= t_fill {
            values[idx] = sampler.sample(&x)?;
            mask[idx] = true;
        }
    }
    let field = BallField::from_parts(lattice, values, mask)?;
    let lap = laplace_ball(&field)?;
    let region: Vec<usize> = lap.active_within(t_max).collect();
    if region.is_empty() {
        return invalid("check region contains no lattice nodes");
    }
    let c = spec.lambda.re * spec.lambda.re + params.rho_sq();
    let mode = Mode {
        step: Complex64::new(-1.0, 0.0),
        values: region.iter().map(|&i| field.values()[i]).collect(),
        applied: region.iter().map(|&i| lap.values()[i]).collect(),
        size: SizeSource::Sampler(Box::new(sampler)),
    };
    let recovery = if spec.lambda.re == 0.0 {
        Recovery::Zonal {
            field,
            degree: profile.coeffs().len() + 1,
        }
    } else {
        Recovery::None
    };
    Ok(Sequence {
        spec: spec.clone(),
        c,
        predicted: Complex64::new(-c, 0.0),
        modes: vec![mode],
        rows: Vec::new(),
        row_count: 0,
        recovery,
    })
}

/// `psi_1(s) = y^{-1/2} phi_1(sigma(s))`, with `L psi_1 = psi_1`.
pub fn distinguished_eigenfunction(lattice: SolvableLattice) -> LabResult<SolvableField> {
    let params = SpaceParams::new(2)?;
    let (nb, ne) = lattice.shape();
    let corners = [(0, 0), (nb - 1, 0), (0, ne - 1), (nb - 1, ne - 1)];
    let r_max = corners
        .iter()
        .map(|&(ib, ie)| solvable_sigma(&lattice.point(lattice.index(ib, ie))))
        .fold(0.0, f64::max)
        + 0.5;
    let grid = RadialGrid::with_spacing(r_max, 0.002)?;
    let phi = spherical_function_on(&params, Complex64::new(2.0 * SOLVABLE_RHO, 0.0), &grid)?;
    Ok(SolvableField::from_fn(lattice, |s| phi.interpolate(solvable_sigma(s)) * s.y.powf(-SOLVABLE_RHO)))
}

fn build_distinguished(spec: &SequenceSpec) -> LabResult<Sequence> {
    let res = spec.resolution;
    let lattice = SolvableLattice::new(res.solvable_b, res.solvable_b_step, res.solvable_eta, res.solvable_eta_step)?;
    let psi1 = distinguished_eigenfunction(lattice)?;
    let one = SolvableField::from_fn(lattice, |_| Complex64::new(1.0, 0.0));
    let l_psi1 = distinguished_laplacian_via_stencil(&psi1, res.kappa);
    let l_one = distinguished_laplacian_via_stencil(&one, res.kappa);
    let region: Vec<usize> = (0..lattice.len()).filter(|&i| l_psi1.mask()[i] && l_one.mask()[i]).collect();
    if region.is_empty() {
        return invalid("solvable lattice too small for the stencil");
    }
    let pick = |f: &SolvableField| region.iter().map(|&i| f.values()[i]).collect::<Vec<_>>();
    let weighted = |f: &SolvableField| {
        (0..lattice.len())
            .map(|i| f.values()[i] * lattice.point(i).y.powf(2.0 * SOLVABLE_RHO))
            .collect::<Vec<_>>()
    };
    let rows = (0..lattice.len()).map(|i| lattice.split(i).1).collect();
    let c = 4.0 * SOLVABLE_RHO * SOLVABLE_RHO;
    Ok(Sequence {
        spec: spec.clone(),
        c,
        // Delta_1 T_0 = |z| T_0 with |z| = alpha^2 + rho^2
        predicted: Complex64::new(c, 0.0),
        modes: vec![
            Mode {
                step: Complex64::new(1.0, 0.0),
                values: pick(&psi1),
                applied: pick(&l_psi1),
                size: SizeSource::Weighted(weighted(&psi1)),
            },
            Mode {
                step: Complex64::new(-1.0, 0.0),
                values: pick(&one),
                applied: pick(&l_one),
                size: SizeSource::Weighted(weighted(&one)),
            },
        ],
        rows,
        row_count: lattice.shape().1,
        recovery: Recovery::None,
    })
}

fn hardy_quadrature(seq: &Sequence) -> LabResult<SphereQuadrature> {
    let radial = seq.spec.kind != SequenceKind::Poisson;
    match (seq.spec.n, radial) {
        (2, true) => SphereQuadrature::new(2, 0, 8),
        (2, false) => SphereQuadrature::new(2, 0, 256),
        (_, true) => SphereQuadrature::new(3, 2, 4),
        _ => SphereQuadrature::new(3, 48, 4),
    }
}

/// Size profile of `f_j`: radius profile of the Hardy ratio, or the
/// row-wise maximum of `|f_j / delta|`.
pub fn size_profile(seq: &Sequence, j: i64) -> LabResult<Vec<f64>> {
    let w = seq.weights(j);
    match seq.modes.first().map(|m| &m.size) {
        Some(SizeSource::Weighted(_)) => {
            let mut rows = vec![0.0f64; seq.row_count];
            for (idx, row) in seq.rows.iter().enumerate() {
                let mut v = ZERO;
                for (m, wm) in seq.modes.iter().zip(&w) {
                    if let SizeSource::Weighted(vals) = &m.size {
                        if let Some(x) = vals.get(idx) {
                            v += x * wm;
                        }
                    }
                }
                rows[*row] = rows[*row].max(v.norm());
            }
            Ok(rows)
        }
        Some(SizeSource::Sampler(_)) => {
            let parts = seq
                .modes
                .iter()
                .zip(&w)
                .filter_map(|(m, wm)| match &m.size {
                    SizeSource::Sampler(s) => Some((*wm, s.as_ref())),
                    SizeSource::Weighted(_) => None,
                })
                .collect();
            let combo = Combination { dim: seq.spec.n, parts };
            let quad = hardy_quadrature(seq)?;
            let radii = hardy_radii(&seq.spec.resolution);
            Ok(hardy_norm(&combo, seq.spec.p, seq.spec.weight_exponent, &radii, &quad)?.ratios)
        }
        None => invalid("sequence has no modes"),
    }
}

pub fn check_hypotheses(seq: &Sequence, th: &Thresholds) -> LabResult<HypothesisReport> {
    let indices = seq.indices();
    let mut recursion = Vec::with_capacity(indices.len() - 1);
    for &j in &indices[..indices.len() - 1] {
        let a = seq.applied(j);
        let next = seq.values(j + 1);
        let err = a.iter().zip(&next).map(|(x, y)| (x - y * seq.c).norm()).fold(0.0, f64::max);
        let scale = seq.c * max_abs(&next);
        recursion.push(if scale > 0.0 { err / scale } else { err });
    }
    let mut norms = Vec::with_capacity(indices.len());
    let mut trend = 0.0f64;
    for &j in &indices {
        let profile = size_profile(seq, j)?;
        trend = trend.max(trend_growth(&profile));
        norms.push(profile.iter().cloned().fold(0.0, f64::max));
    }
    let trend = trend.max(index_growth(&norms));
    let recursion_ok = recursion.iter().all(|r| *r <= th.pass);
    Ok(HypothesisReport {
        indices,
        recursion_residuals: recursion,
        uniform_bound: norms.iter().cloned().fold(0.0, f64::max),
        norms,
        trend_growth: trend,
        recursion_ok,
        size_ok: trend <= th.growth,
    })
}

/// Sup norm of `f_0` below which no conclusion is drawn.
pub const F0_FLOOR: f64 = 1e-14;

pub fn check_conclusion(seq: &Sequence, th: &Thresholds) -> LabResult<ConclusionReport> {
    let f0 = seq.values(0);
    let af0 = seq.applied(0);
    if max_abs(&f0) < F0_FLOOR {
        return Err(LabError::Degenerate(format!("|f_0| is below the floor {F0_FLOOR:e}")));
    }
    let err = f0
        .iter()
        .zip(&af0)
        .map(|(f, a)| (a - f * seq.predicted).norm())
        .fold(0.0, f64::max);
    let denom = max_abs(&af0).max(seq.predicted.norm() * max_abs(&f0));
    let (kappa_star, kappa_residual) = rayleigh(&f0, &af0);
    let recovery_error = match &seq.recovery {
        Recovery::None => None,
        Recovery::Zonal { field, degree } => Some(poisson_recovery_error(seq, field, *degree, th)?),
    };
    Ok(ConclusionReport {
        predicted: seq.predicted,
        residual: if denom > 0.0 { err / denom } else { 0.0 },
        kappa_star,
        kappa_residual,
        recovery_error,
    })
}

fn zonal_harmonic(dim: usize, l: usize, c: f64) -> f64 {
    if dim == 3 {
        legendre(l, c)
    } else {
        (l as f64 * c.clamp(-1.0, 1.0).acos()).cos()
    }
}

/// Recovers zonal boundary data from the lattice samples of `P_0 F` on one
/// sphere, re-synthesises `P_0` of it by quadrature, and returns the
/// relative sup-distance to the samples on the check region.
fn poisson_recovery_error(seq: &Sequence, field: &BallField, degree: usize, _th: &Thresholds) -> LabResult<f64> {
    let dim = seq.spec.n;
    let t = ball_radius(0.5 * seq.spec.resolution.check_radius);
    let quad = if dim == 3 {
        SphereQuadrature::new(3, 32, 16)?
    } else {
        SphereQuadrature::new(2, 0, 128)?
    };
    let pole = |w: &Point| if dim == 3 { w[2] } else { w[0] };
    let factors = funk_hecke_factors(dim, ZERO, t, degree + 1)?;
    let mut coeffs = Vec::with_capacity(degree + 1);
    for (l, a) in factors.iter().enumerate() {
        let mut proj = ZERO;
        let mut nrm = 0.0;
        for (w, wt) in quad.nodes().iter().zip(quad.weights()) {
            let z = zonal_harmonic(dim, l, pole(w));
            let x = [t * w[0], t * w[1], t * w[2]];
            proj += field.interpolate(&x)? * (z * wt);
            nrm += z * z * wt;
        }
        coeffs.push((proj / (a * nrm)).re);
    }
    let recovered = ZonalProfile::new(dim, coeffs)?;
    let boundary = recovered.boundary_function(SphereQuadrature::default_for(dim)?)?;
    let pk = PoissonKernelParams::new(SpaceParams::new(dim)?, ZERO);
    let t_max = ball_radius(seq.spec.resolution.check_radius);
    let nodes: Vec<usize> = field.active_within(t_max).collect();
    let stride = (nodes.len() / 300).max(1);
    let mut err = 0.0f64;
    let mut scale = 0.0f64;
    for &i in nodes.iter().step_by(stride) {
        let x = field.lattice().point(i);
        let fresh = poisson_transform_at(&boundary, &pk, &x)?;
        let v = field.values()[i];
        err = err.max((fresh - v).norm());
        scale = scale.max(v.norm());
    }
    Ok(if scale > 0.0 { err / scale } else { err })
}

pub fn run_sequence(seq: &Sequence, th: &Thresholds) -> LabResult<SequenceReport> {
    let hypotheses = check_hypotheses(seq, th)?;
    let conclusion = check_conclusion(seq, th)?;
    let verdict = assign_verdict(&hypotheses, &conclusion, th);
    Ok(SequenceReport {
        label: seq.spec.label(),
        eigenvalue: seq.c,
        hypotheses,
        conclusion,
        verdict,
    })
}

/// Builds and checks in one go.
pub fn run_spec(spec: &SequenceSpec, th: &Thresholds) -> LabResult<SequenceReport> {
    run_sequence(&build_sequence(spec, th)?, th)
}

//! One function per subcommand. Each appends records and reports whether a
//! verdict came out inconclusive.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use roe_lab::boundary::{hardy_norm, slice_projection_check, ZonalProfile};
use roe_lab::engine::{
    build_sequence, default_boundary, distinguished_eigenfunction, run_sequence, size_profile, trend_growth,
    SequenceKind, SequenceSpec, Verdict,
};
use roe_lab::euclidean::{annulus_localization, euclid_laplacian, euclid_sequence_check, EuclideanField};
use roe_lab::laplacians::{
    calibrate_kappa, distinguished_laplacian_via_relation, laplace_ball, laplace_radial, SolvableField,
    SolvableLattice,
};
use roe_lab::quadrature::least_squares_slope;
use roe_lab::space::{
    ball_radius, geodesic_radius, k_average_with, norm, BallField, BallLattice, FnField, RadialFunction, RadialGrid,
    SpaceParams, SphereQuadrature,
};
use roe_lab::spherical::{
    analytic_c_inv, heat_kernel, heat_kernel_h3, spherical_function_h3, spherical_function_on, SpectralGrid,
    SphericalAnalysis,
};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::report::{params, Recorder};


fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct Outcome {
    pub inconclusive: bool,
}

/// Parses `1`, `0.5i`, `1+0.5i`, `1-0.5i`, `-2.5e-1+1e0i`.
pub fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    let bad = || CliError::Usage(format!("cannot parse complex number '{s}'"));
    let t: String = s.chars().filter(|ch| !ch.is_whitespace()).collect();
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(c).map_err(|_| bad());
    };
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
            split = Some(k);
            break;
        }
    }
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        other => other,
    };
    Ok(Complex64::new(re.parse().map_err(|_| bad())?, im.parse().map_err(|_| bad())?))
}

fn fmt_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

fn sup(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn space(n: usize) -> Result<SpaceParams, CliError> {
    if n != 2 && n != 3 {
        return Err(CliError::Usage(format!("n must be 2 or 3, got {n}")));
    }
    Ok(SpaceParams::new(n)?)
}

// ---------------------------------------------------------------- euclidean

fn near_integer(x: f64) -> bool {
    (x - x.round()).abs() < 1e-9
}

/// Smallest `q` with `alpha q` and `eps q` integral: the box `2 pi q` then
/// carries both frequencies exactly.
fn grid_quantum(alpha: f64, eps: f64) -> Result<usize, CliError> {
    (1..=1024)
        .find(|&q| near_integer(alpha * q as f64) && near_integer(eps * q as f64))
        .ok_or_else(|| CliError::Usage("alpha and epsilon must be multiples of 1/q for some q <= 1024".into()))
}

pub struct EuclidArgs {
    pub alpha: f64,
    pub rho_sq: f64,
    pub j_max: usize,
    pub epsilon: f64,
}

pub fn verify_euclidean(cfg: &RunConfig, a: &EuclidArgs, rec: &mut Recorder) -> Result<Outcome, CliError> {
    if !(a.alpha >= 0.0) || !(a.epsilon > 0.0) || !(a.rho_sq >= 0.0) || a.j_max < 4 {
        return Err(CliError::Usage("need alpha >= 0, epsilon > 0, rho-sq >= 0, J >= 4".into()));
    }
    let th = cfg.thresholds();
    let q = grid_quantum(a.alpha, a.epsilon)?;
    let box_len = 2.0 * PI * q as f64;
    let beta = a.alpha + a.epsilon;
    let top = (beta * q as f64).round() as usize + 2;
    let n = (4 * top).next_power_of_two().max(64);
    let jj = a.j_max as i64;
    let p = params(&[
        ("alpha", a.alpha.to_string()),
        ("rho_sq", a.rho_sq.to_string()),
        ("J", a.j_max.to_string()),
        ("epsilon", a.epsilon.to_string()),
    ]);
    let alt = |j: i64| if j % 2 == 0 { 1.0 } else { -1.0 };
    let alpha = a.alpha;

    let eigen1: Vec<EuclideanField> = (-jj..=jj)
        .map(|j| EuclideanField::from_fn(1, box_len, n, |x| c(alt(j) * (alpha * x[0]).cos())))
        .collect::<Result<_, _>>()?;
    let r = euclid_sequence_check(&eigen1, alpha, a.rho_sq, &th)?;
    rec.upper("euclid_eigen_d1", &p, "recursion_residual", r.hypotheses.max_recursion_residual(), 1e-12);
    rec.upper("euclid_eigen_d1", &p, "conclusion_residual", r.conclusion.residual, 1e-12);
    rec.flag("euclid_eigen_d1", &p, "verdict_is_theorem_confirmed", r.verdict == Verdict::TheoremConfirmed);

    let n2 = n.min(128);
    let eigen2: Vec<EuclideanField> = (-jj..=jj)
        .map(|j| {
            EuclideanField::from_fn(2, box_len, n2, |x| c(alt(j) * ((alpha * x[0]).cos() + (alpha * x[1]).sin())))
        })
        .collect::<Result<_, _>>()?;
    let r2 = euclid_sequence_check(&eigen2, alpha, a.rho_sq, &th)?;
    rec.upper("euclid_eigen_d2", &p, "recursion_residual", r2.hypotheses.max_recursion_residual(), 1e-12);
    rec.upper("euclid_eigen_d2", &p, "conclusion_residual", r2.conclusion.residual, 1e-12);
    rec.flag("euclid_eigen_d2", &p, "verdict_is_theorem_confirmed", r2.verdict == Verdict::TheoremConfirmed);

    // (alpha^2 / beta^2)^j cos(beta x)
    let ratio = (alpha * alpha) / (beta * beta);
    let growing: Vec<EuclideanField> = (-jj..=jj)
        .map(|j| EuclideanField::from_fn(1, box_len, n, |x| c(ratio.powi(j as i32) * (beta * x[0]).cos())))
        .collect::<Result<_, _>>()?;
    let rg = euclid_sequence_check(&growing, alpha, a.rho_sq, &th)?;
    rec.lower("euclid_growing", &p, "bound_growth", rg.hypotheses.trend_growth, th.growth);
    rec.lower("euclid_growing", &p, "recursion_residual", rg.hypotheses.max_recursion_residual(), th.pass);
    rec.flag("euclid_growing", &p, "verdict_is_hypothesis_violated", rg.verdict == Verdict::HypothesisViolated);

    let ann = annulus_localization(&eigen1, alpha, a.epsilon, a.rho_sq)?;
    let worst = ann.outer_mass.iter().chain(&ann.inner_mass).cloned().fold(0.0, f64::max);
    rec.upper("annulus_eigen", &p, "outside_mass", worst, 1e-12);

    // unit-modulus weights e^{+-i theta j}, theta = arg z
    let theta = 0.5;
    let two: Vec<EuclideanField> = (-jj..=jj)
        .map(|j| {
            let w = Complex64::from_polar(1.0, theta * j as f64);
            EuclideanField::from_fn(1, box_len, n, |x| w * (alpha * x[0]).cos() + w.conj() * (beta * x[0]).cos())
        })
        .collect::<Result<_, _>>()?;
    let ann2 = annulus_localization(&two, alpha, a.epsilon, a.rho_sq)?;
    let pt = format!("{p};theta={theta}");
    rec.upper("annulus_two_frequency", &pt, "rate_relative_error", ann2.rate_error(), 0.1);
    let bound = ann2.outer_mass[0].max(f64::MIN_POSITIVE);
    let excess = ann2
        .outer_mass
        .iter()
        .enumerate()
        .map(|(j, m)| m / (bound * ann2.predicted_rate.powi(j as i32)))
        .fold(0.0, f64::max);
    rec.upper("annulus_two_frequency", &pt, "mass_over_geometric_bound", excess, 1.0 + 1e-9);
    let limit = (alpha * alpha + a.rho_sq) / ((alpha + 1e-9).powi(2) + a.rho_sq);
    rec.upper("annulus_epsilon_limit", &p, "one_minus_rate", 1.0 - limit, 1e-7);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let rand_field = |rng: &mut ChaCha8Rng| {
        let vals = (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        EuclideanField::new(1, box_len, n, vals)
    };
    let f = rand_field(&mut rng)?;
    let g = rand_field(&mut rng)?;
    let lf = euclid_laplacian(&f);
    let lg = euclid_laplacian(&g);
    let lhs = lf.inner(&g);
    let rhs = f.inner(&lg);
    let scale = lf.inner(&lf).re.sqrt() * g.inner(&g).re.sqrt();
    let ps = params(&[("seed", cfg.seed.to_string()), ("N", n.to_string())]);
    rec.upper("euclid_self_adjoint", &ps, "relative_asymmetry", (lhs - rhs).norm() / scale, 1e-12);

    let phase = Complex64::from_polar(1.0, 0.7);
    let rotated: Vec<EuclideanField> = eigen1.iter().map(|f| f.scaled(phase)).collect();
    let rp = euclid_sequence_check(&rotated, alpha, a.rho_sq, &th)?;
    rec.upper(
        "euclid_phase_invariance",
        &p,
        "conclusion_difference",
        (rp.conclusion.residual - r.conclusion.residual).abs(),
        1e-12,
    );
    Ok(Outcome::default())
}

// ---------------------------------------------------------------- spherical

/// `exp(-2 |x|^2) (1 + x_1)` on the ball; deliberately not radial.
fn test_field(x: &[f64; 3]) -> Complex64 {
    let t2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    c((-2.0 * t2).exp() * (1.0 + x[0]))
}

pub fn verify_spherical(cfg: &RunConfig, n: usize, lambdas: &[f64], rec: &mut Recorder) -> Result<Outcome, CliError> {
    let sp = space(n)?;
    let grid = RadialGrid::with_spacing(10.5, 0.01)?;
    for &l in lambdas {
        if !(l >= 0.0) {
            return Err(CliError::Usage(format!("lambda must be real and >= 0, got {l}")));
        }
        let p = params(&[("n", n.to_string()), ("lambda", l.to_string())]);
        let phi = spherical_function_on(&sp, c(l), &grid)?;
        let lap = laplace_radial(&sp, &phi)?;
        let k = l * l + sp.rho_sq();
        let res = (1..lap.len())
            .filter(|&j| grid.node(j) <= 10.0 + 1e-12)
            .map(|j| (lap.values()[j] + phi.values()[j] * k).norm())
            .fold(0.0, f64::max);
        rec.upper("spherical_eigen", &p, "max_residual", res, 1e-6);
        if n == 3 {
            let diff = (0..grid.num_points())
                .filter(|&j| grid.node(j) <= 10.0 + 1e-12)
                .map(|j| (phi.values()[j] - spherical_function_h3(c(l), grid.node(j))).norm())
                .fold(0.0, f64::max);
            rec.upper("spherical_ode_closed_form", &p, "max_difference", diff, 1e-8);
        }
    }

    // Delta commutes with K-averaging
    let lattice = BallLattice::new(n, cfg.ball_half_count, cfg.ball_eps)?;
    let field = BallField::from_fn(lattice, test_field);
    let lap = laplace_ball(&field)?;
    let exact = FnField::new(n, test_field);
    let quad = if n == 3 {
        SphereQuadrature::new(3, 16, 16)?
    } else {
        SphereQuadrature::new(2, 0, 64)?
    };
    let rgrid = RadialGrid::with_spacing(cfg.check_radius + 0.1, 0.01)?;
    let k_f = k_average_with(&exact, &rgrid, &quad)?;
    let lap_k = laplace_radial(&sp, &k_f)?;
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for j in 0..lap_k.len() {
        let r = rgrid.node(j);
        if r > cfg.check_radius {
            break;
        }
        let k_lap = roe_lab::space::sphere_mean_with(&lap, r, &quad)?;
        worst = worst.max((k_lap - lap_k.values()[j]).norm());
        scale = scale.max(lap_k.values()[j].norm());
    }
    let p = params(&[
        ("n", n.to_string()),
        ("half_count", cfg.ball_half_count.to_string()),
        ("check_radius", cfg.check_radius.to_string()),
    ]);
    rec.upper("laplacian_commutes_with_k", &p, "relative_residual", worst / scale, 1e-4);

    // order of the ball stencil on phi_1
    let l = c(1.0);
    let k = 1.0 + sp.rho_sq();
    let table = spherical_function_on(&sp, l, &RadialGrid::with_spacing(8.0, 0.001)?)?;
    let phi = |x: &[f64; 3]| {
        let r = geodesic_radius(norm(x));
        if n == 3 {
            spherical_function_h3(l, r)
        } else {
            table.interpolate(r)
        }
    };
    let t_c = ball_radius(cfg.check_radius);
    let mut errors = Vec::new();
    for m in [16usize, 32, 64] {
        let lat = BallLattice::new(n, m, cfg.ball_eps)?;
        let f = BallField::from_fn(lat, phi);
        let res = laplace_ball(&f)?.axpy(c(k), &f)?;
        errors.push(res.max_abs_within(t_c));
    }
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    for (i, o) in orders.iter().enumerate() {
        let p = params(&[("n", n.to_string()), ("refinement", format!("{}->{}", 16 << i, 32 << i))]);
        rec.upper("ball_stencil_order", &p, "order_minus_4", (o - 4.0).abs(), 0.5);
    }
    Ok(Outcome::default())
}

// ---------------------------------------------------------------- transforms

fn analysis(cfg: &RunConfig, sp: SpaceParams) -> Result<SphericalAnalysis, CliError> {
    let rg = RadialGrid::new(cfg.r_max, cfg.num_points)?;
    let sg = SpectralGrid::new(cfg.lambda_max, cfg.spectral_points)?;
    Ok(match cfg.c_inv {
        Some(ci) => SphericalAnalysis::with_c_inv(sp, rg, sg, ci)?,
        None => SphericalAnalysis::new(sp, rg, sg)?,
    })
}

fn rel_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let err = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let scale = sup(b);
    if scale > 0.0 {
        err / scale
    } else {
        err
    }
}

pub fn verify_transforms(cfg: &RunConfig, n: usize, ts: &[f64], rec: &mut Recorder) -> Result<Outcome, CliError> {
    let sp = space(n)?;
    let sa = analysis(cfg, sp)?;
    let pn = params(&[("n", n.to_string())]);
    rec.upper(
        "c_inv_calibration",
        &pn,
        "relative_error_vs_analytic",
        (sa.c_inv() / analytic_c_inv(&sp)? - 1.0).abs(),
        1e-5,
    );
    rec.upper("c_inv_calibration", &pn, "round_trip_error", sa.calibration_error(), 1e-4);
    for &t in ts {
        if !(t > 0.0) {
            return Err(CliError::Usage(format!("heat times must be positive, got {t}")));
        }
        let p = params(&[("n", n.to_string()), ("t", t.to_string())]);
        let h = sa.heat_kernel(t)?;
        let fwd = sa.forward(&h)?;
        let mult = sa.heat_multiplier(t)?;
        rec.upper("heat_multiplier", &p, "relative_error", rel_diff(fwd.values(), mult.values()), 1e-6);
        let h2 = sa.heat_kernel(2.0 * t)?;
        let conv = sa.convolve(&h, &h)?;
        rec.upper("heat_semigroup", &p, "relative_error", rel_diff(conv.values(), h2.values()), 1e-5);
        let back = sa.inverse(&fwd)?;
        rec.upper("transform_round_trip", &p, "relative_error", rel_diff(back.values(), h.values()), 1e-5);
        if n == 3 {
            let exact: Vec<Complex64> = (0..h.len()).map(|j| c(heat_kernel_h3(t, h.grid().node(j)))).collect();
            rec.upper("heat_kernel_closed_form", &p, "relative_error", rel_diff(h.values(), &exact), 1e-6);
        }
        let h1 = sa.heat_kernel(1.0)?;
        let ab = sa.convolve(&h, &h1)?;
        let ba = sa.convolve(&h1, &h)?;
        rec.upper("convolution_commutes", &p, "relative_difference", rel_diff(ab.values(), ba.values()), 1e-10);
    }

    // approximate identity: |f * h_s - f| ~ s
    let f = sa.heat_kernel(1.0)?;
    let fh = sa.forward(&f)?;
    let ss = [0.1, 0.05, 0.025];
    let mut logs = Vec::new();
    for s in ss {
        let m = sa.heat_multiplier(s)?;
        let g = sa.inverse(&fh.zip_with(&m, |a, b| a * b)?)?;
        logs.push(rel_diff(g.values(), f.values()).ln());
    }
    let xs: Vec<f64> = ss.iter().map(|s| s.ln()).collect();
    let slope = least_squares_slope(&xs, &logs).map_or(f64::NAN, |(s, _)| s);
    rec.upper("approximate_identity", &pn, "slope_minus_1", (slope - 1.0).abs(), 0.1);

    // round trip on seeded Gaussian mixtures
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let terms: Vec<(f64, f64)> = (0..3).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.6..1.2))).collect();
        let g = RadialFunction::from_real_fn(*sa.radial_grid(), |r| {
            terms.iter().map(|(a, s)| a * (-r * r / (2.0 * s * s)).exp()).sum()
        });
        let back = sa.inverse(&sa.forward(&g)?)?;
        worst = worst.max(rel_diff(back.values(), g.values()));
    }
    let p = params(&[("n", n.to_string()), ("seed", cfg.seed.to_string())]);
    rec.upper("transform_round_trip_random", &p, "relative_error", worst, 1e-5);
    Ok(Outcome::default())
}

pub fn verify_slice_projection(cfg: &RunConfig, n: usize, t: f64, rec: &mut Recorder) -> Result<Outcome, CliError> {
    let sp = space(n)?;
    if !(t > 0.0) {
        return Err(CliError::Usage(format!("t must be positive, got {t}")));
    }
    let rg = RadialGrid::new(cfg.r_max, cfg.num_points)?;
    let h = heat_kernel(&sp, t, &rg)?;
    let sg = SpectralGrid::new(5.0, 101)?;
    let dev = slice_projection_check(&sp, &h, &sg)?;
    let p = params(&[("n", n.to_string()), ("t", t.to_string()), ("lambda_max", "5".into())]);
    rec.upper("slice_projection", &p, "relative_deviation", dev, 1e-4);
    Ok(Outcome::default())
}

// ---------------------------------------------------------------- poisson

/// One profile per line, comma-separated zonal coefficients; `#` comments.
pub fn read_profiles(path: &Path, n: usize) -> Result<Vec<ZonalProfile>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read boundary file {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let coeffs = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| CliError::Usage(format!("bad boundary coefficients '{line}'")))?;
        out.push(ZonalProfile::new(n, coeffs)?);
    }
    if out.is_empty() {
        return Err(CliError::Usage("boundary file holds no profiles".into()));
    }
    Ok(out)
}

/// Three positive-mean zonal profiles.
pub fn default_profiles(n: usize) -> Result<Vec<ZonalProfile>, CliError> {
    Ok(vec![
        default_boundary(n)?,
        ZonalProfile::new(n, vec![1.0, -0.4])?,
        ZonalProfile::new(n, vec![0.6, 0.0, 0.3, 0.1])?,
    ])
}

fn hardy_radii(cfg: &RunConfig) -> Vec<f64> {
    let count = (cfg.hardy_r_max / cfg.hardy_step).round() as usize;
    (0..=count).map(|k| k as f64 * cfg.hardy_step).collect()
}

fn zonal_quadrature(n: usize) -> Result<SphereQuadrature, CliError> {
    Ok(if n == 3 {
        SphereQuadrature::new(3, 48, 4)?
    } else {
        SphereQuadrature::new(2, 0, 256)?
    })
}

pub fn verify_poisson(
    cfg: &RunConfig,
    n: usize,
    lambda: f64,
    ps: &[f64],
    profiles: &[ZonalProfile],
    rec: &mut Recorder,
) -> Result<Outcome, CliError> {
    space(n)?;
    if !(lambda >= 0.0) {
        return Err(CliError::Usage(format!("lambda must be real and >= 0, got {lambda}")));
    }
    let radii = hardy_radii(cfg);
    let quad = zonal_quadrature(n)?;
    for (k, prof) in profiles.iter().enumerate() {
        let field = prof.poisson_field(c(lambda));
        for &p in ps {
            let norm_f = prof.norm(p)?;
            let rep = hardy_norm(&field, p, 0.0, &radii, &quad)?;
            let tol = if p.is_infinite() { 0.02 } else { 0.01 };
            let pr = params(&[
                ("n", n.to_string()),
                ("lambda", lambda.to_string()),
                ("profile", k.to_string()),
                ("p", p.to_string()),
                ("r_max", cfg.hardy_r_max.to_string()),
            ]);
            rec.upper("hardy_identity", &pr, "sup_over_norm_minus_1", (rep.supremum / norm_f - 1.0).abs(), tol);
            rec.flag("hardy_identity", &pr, "profile_nondecreasing", rep.is_nondecreasing(1e-6));
        }
    }
    Ok(Outcome::default())
}

// ---------------------------------------------------------------- sequences

pub struct SequenceArgs {
    pub kind: SequenceKind,
    pub n: usize,
    pub lambda: Complex64,
    pub p: f64,
    pub weight_exponent: f64,
    pub j_max: usize,
    pub boundary: Option<ZonalProfile>,
    pub expect: Option<Verdict>,
}

pub fn expected_verdict(kind: SequenceKind) -> Verdict {
    match kind {
        SequenceKind::EigenSpherical | SequenceKind::Poisson => Verdict::TheoremConfirmed,
        SequenceKind::ComplexSpectrumPair | SequenceKind::DistinguishedCounterexample => {
            Verdict::CounterexampleConfirmed
        }
    }
}

fn sequence_spec(cfg: &RunConfig, a: &SequenceArgs) -> SequenceSpec {
    let mut spec = SequenceSpec::new(a.kind, a.n, a.lambda);
    spec.p = a.p;
    spec.weight_exponent = a.weight_exponent;
    spec.j_max = a.j_max;
    spec.boundary = a.boundary.clone();
    spec.resolution = cfg.resolution();
    spec
}

pub fn run_sequence_cmd(cfg: &RunConfig, a: &SequenceArgs, rec: &mut Recorder) -> Result<Outcome, CliError> {
    let th = cfg.thresholds();
    let spec = sequence_spec(cfg, a);
    let seq = build_sequence(&spec, &th)?;
    let r = run_sequence(&seq, &th)?;
    let expect = a.expect.unwrap_or_else(|| expected_verdict(a.kind));
    let p = params(&[
        ("kind", a.kind.to_string()),
        ("n", a.n.to_string()),
        ("lambda", fmt_complex(a.lambda)),
        ("p", a.p.to_string()),
        ("M", a.weight_exponent.to_string()),
        ("J", a.j_max.to_string()),
    ]);
    let test = "sequence";
    rec.upper(test, &p, "recursion_residual", r.hypotheses.max_recursion_residual(), th.pass);
    match expect {
        Verdict::TheoremConfirmed => {
            rec.upper(test, &p, "size_growth", r.hypotheses.trend_growth, th.growth);
            rec.upper(test, &p, "conclusion_residual", r.conclusion.residual, th.pass);
        }
        Verdict::CounterexampleConfirmed => {
            rec.lower(test, &p, "size_growth", r.hypotheses.trend_growth, th.growth);
            rec.lower(test, &p, "kappa_residual", r.conclusion.kappa_residual, th.counterexample);
        }
        _ => {}
    }
    if let Some(e) = r.conclusion.recovery_error {
        rec.upper(test, &p, "poisson_recovery_error", e, th.recovery);
    }
    rec.flag(test, &format!("{p};verdict={};expected={expect}", r.verdict), "verdict_matches", r.verdict == expect);
    Ok(Outcome {
        inconclusive: r.verdict == Verdict::Inconclusive,
    })
}

// ---------------------------------------------------------------- counterexamples

/// `c = |lambda^2 + rho^2|` of the pair `lambda = 1 + i/2` on `H^3`, from
/// `mu = -1.75 - i`.
pub const COMPLEX_PAIR_C: f64 = 2.015_564_437_074_637_3;

pub fn run_complex_pair(cfg: &RunConfig, rec: &mut Recorder) -> Result<Outcome, CliError> {
    let th = cfg.thresholds();
    let lambda = Complex64::new(1.0, 0.5);
    let mut args = SequenceArgs {
        kind: SequenceKind::ComplexSpectrumPair,
        n: 3,
        lambda,
        p: f64::INFINITY,
        weight_exponent: 0.0,
        j_max: 10,
        boundary: None,
        expect: None,
    };
    let spec = sequence_spec(cfg, &args);
    let seq = build_sequence(&spec, &th)?;
    let r = run_sequence(&seq, &th)?;
    let p = params(&[("n", "3".into()), ("lambda", fmt_complex(lambda)), ("J", "10".into())]);
    let test = "complex_pair";
    rec.upper(test, &p, "c_minus_oracle", (seq.eigenvalue() - COMPLEX_PAIR_C).abs(), 1e-12);
    let sp = SpaceParams::new(3)?;
    let phi = spherical_function_on(&sp, lambda, &RadialGrid::with_spacing(cfg.seq_r_max, cfg.seq_h)?)?;
    let bound = 2.0 * phi.max_abs();
    let worst = seq.indices().iter().map(|&j| sup(&seq.values(j))).fold(0.0, f64::max);
    rec.upper(test, &p, "sup_norm_over_2_sup_phi", worst / bound, 1.0 + 1e-9);
    rec.upper(test, &p, "recursion_residual", r.hypotheses.max_recursion_residual(), th.pass);
    let step = cfg.hardy_step;
    let mut r1_to_r4 = 0.0f64;
    let mut trend = 0.0f64;
    for j in seq.indices() {
        let profile = size_profile(&seq, j)?;
        let at = |radius: f64| profile[(radius / step).round() as usize];
        r1_to_r4 = r1_to_r4.max(at(4.0) / at(1.0));
        trend = trend.max(trend_growth(&profile));
    }
    rec.lower(test, &format!("{p};p=inf"), "hardy_growth_r1_to_r4", r1_to_r4, 10.0);
    rec.lower(test, &format!("{p};p=inf"), "hardy_trend_growth", trend, th.growth);
    for pp in [1.0, 2.0] {
        args.p = pp;
        let s = build_sequence(&sequence_spec(cfg, &args), &th)?;
        let h = run_sequence(&s, &th)?.hypotheses;
        rec.lower(test, &format!("{p};p={pp}"), "hardy_trend_growth", h.trend_growth, th.growth);
    }
    rec.lower(test, &p, "kappa_residual", r.conclusion.kappa_residual, th.counterexample);
    rec.flag(
        test,
        &format!("{p};verdict={}", r.verdict),
        "verdict_is_counterexample_confirmed",
        r.verdict == Verdict::CounterexampleConfirmed,
    );
    Ok(Outcome {
        inconclusive: r.verdict == Verdict::Inconclusive,
    })
}

pub fn kappa_lattice(cfg: &RunConfig) -> Result<SolvableLattice, CliError> {
    Ok(SolvableLattice::new(
        (-cfg.kappa_b_max, cfg.kappa_b_max),
        cfg.kappa_b_step,
        (-cfg.kappa_eta_max, cfg.kappa_eta_max),
        cfg.kappa_eta_step,
    )?)
}

/// `max |L f - k f| / max |f|` over the nodes where `L f` is defined.
fn eigen_residual(lf: &SolvableField, f: &SolvableField, k: f64) -> f64 {
    let mut err = 0.0f64;
    let mut scale = 0.0f64;
    for i in lf.active() {
        err = err.max((lf.values()[i] - f.values()[i] * k).norm());
        scale = scale.max(f.values()[i].norm());
    }
    err / scale
}

fn kappa_fields(lat: SolvableLattice) -> Result<Vec<SolvableField>, CliError> {
    let psi1 = distinguished_eigenfunction(lat)?;
    let one = SolvableField::from_fn(lat, |_| c(1.0));
    let bump = SolvableField::from_fn(lat, |s| c((-(s.b * s.b) - 2.0 * s.eta() * s.eta()).exp()));
    Ok(vec![psi1, one, bump])
}

pub fn run_distinguished(cfg: &RunConfig, rec: &mut Recorder) -> Result<Outcome, CliError> {
    let th = cfg.thresholds();
    let lat = kappa_lattice(cfg)?;
    let fields = kappa_fields(lat)?;
    let four_rho2 = 1.0;
    let pl = params(&[
        ("b_step", cfg.kappa_b_step.to_string()),
        ("eta_max", cfg.kappa_eta_max.to_string()),
        ("eta_step", cfg.kappa_eta_step.to_string()),
    ]);
    let test = "distinguished";
    let l_psi = distinguished_laplacian_via_relation(&fields[0]);
    rec.upper(test, &pl, "relation_psi1_residual", eigen_residual(&l_psi, &fields[0], four_rho2), th.pass);
    let l_one = distinguished_laplacian_via_relation(&fields[1]);
    rec.upper(test, &pl, "relation_one_residual", eigen_residual(&l_one, &fields[1], -four_rho2), th.pass);
    let fit = calibrate_kappa(&fields)?;
    rec.upper(test, &format!("{pl};kappa={}", fit.kappa), "stencil_vs_relation", fit.max_relative_residual, th.pass);

    let args = SequenceArgs {
        kind: SequenceKind::DistinguishedCounterexample,
        n: 2,
        lambda: c(1.0),
        p: f64::INFINITY,
        weight_exponent: 0.0,
        j_max: 10,
        boundary: None,
        expect: None,
    };
    let seq = build_sequence(&sequence_spec(cfg, &args), &th)?;
    let r = run_sequence(&seq, &th)?;
    let p = params(&[("n", "2".into()), ("J", "10".into()), ("kappa", cfg.kappa.to_string())]);
    rec.upper(test, &p, "recursion_residual", r.hypotheses.max_recursion_residual(), th.pass);
    let worst = seq.indices().iter().map(|&j| sup(&seq.values(j))).fold(0.0, f64::max);
    rec.upper(test, &p, "sup_norm_bound", worst, 3.0);
    rec.lower(test, &p, "sup_over_delta_growth", r.hypotheses.trend_growth, th.growth);
    rec.lower(test, &p, "kappa_residual", r.conclusion.kappa_residual, th.counterexample);
    rec.flag(
        test,
        &format!("{p};verdict={}", r.verdict),
        "verdict_is_counterexample_confirmed",
        r.verdict == Verdict::CounterexampleConfirmed,
    );
    Ok(Outcome {
        inconclusive: r.verdict == Verdict::Inconclusive,
    })
}

// ---------------------------------------------------------------- calibrate

pub fn calibrate(cfg: &RunConfig, out: &Path, rec: &mut Recorder) -> Result<Outcome, CliError> {
    let sp = space(cfg.n)?;
    let rg = RadialGrid::new(cfg.r_max, cfg.num_points)?;
    let sg = SpectralGrid::new(cfg.lambda_max, cfg.spectral_points)?;
    let sa = SphericalAnalysis::new(sp, rg, sg)?;
    let pn = params(&[("n", cfg.n.to_string())]);
    rec.upper(
        "calibrate",
        &pn,
        "c_inv_relative_error_vs_analytic",
        (sa.c_inv() / analytic_c_inv(&sp)? - 1.0).abs(),
        1e-5,
    );
    rec.upper("calibrate", &pn, "c_inv_round_trip_error", sa.calibration_error(), 1e-4);
    let fit = calibrate_kappa(&kappa_fields(kappa_lattice(cfg)?)?)?;
    rec.upper(
        "calibrate",
        &format!("kappa={}", fit.kappa),
        "kappa_fit_residual",
        fit.max_relative_residual,
        cfg.pass_tol,
    );
    let mut persisted = cfg.clone();
    persisted.c_inv = Some(sa.c_inv());
    persisted.kappa = fit.kappa;
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("calibration.conf"), persisted.to_text())?;
    Ok(Outcome::default())
}

// ---------------------------------------------------------------- profiles

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ProfileKind {
    SphericalFunction,
    HeatKernel,
    HeatMultiplier,
    Hardy,
    ComplexPairHardy,
}

impl ProfileKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProfileKind::SphericalFunction => "spherical-function",
            ProfileKind::HeatKernel => "heat-kernel",
            ProfileKind::HeatMultiplier => "heat-multiplier",
            ProfileKind::Hardy => "hardy",
            ProfileKind::ComplexPairHardy => "complex-pair-hardy",
        }
    }
}

pub struct ProfileArgs {
    pub what: ProfileKind,
    pub n: usize,
    pub lambda: f64,
    pub t: f64,
    pub p: f64,
}

pub fn emit_profile(cfg: &RunConfig, a: &ProfileArgs, out: &Path, rec: &mut Recorder) -> Result<Outcome, CliError> {
    let sp = space(a.n)?;
    let points: Vec<(f64, f64)> = match a.what {
        ProfileKind::SphericalFunction => {
            let grid = RadialGrid::with_spacing(cfg.seq_r_max, 0.05)?;
            let phi = spherical_function_on(&sp, c(a.lambda), &grid)?;
            grid.nodes().into_iter().zip(phi.values().iter().map(|v| v.re)).collect()
        }
        ProfileKind::HeatKernel => {
            let h = heat_kernel(&sp, a.t, &RadialGrid::new(cfg.r_max, cfg.num_points)?)?;
            h.grid().nodes().into_iter().zip(h.values().iter().map(|v| v.re)).collect()
        }
        ProfileKind::HeatMultiplier => {
            let sa = analysis(cfg, sp)?;
            let fh = sa.forward(&sa.heat_kernel(a.t)?)?;
            fh.grid().nodes().into_iter().zip(fh.values().iter().map(|v| v.re)).collect()
        }
        ProfileKind::Hardy => {
            let radii = hardy_radii(cfg);
            let field = default_boundary(a.n)?.poisson_field(c(a.lambda));
            let rep = hardy_norm(&field, a.p, 0.0, &radii, &zonal_quadrature(a.n)?)?;
            radii.into_iter().zip(rep.ratios).collect()
        }
        ProfileKind::ComplexPairHardy => {
            let mut spec = SequenceSpec::new(SequenceKind::ComplexSpectrumPair, 3, Complex64::new(1.0, 0.5));
            spec.p = a.p;
            spec.resolution = cfg.resolution();
            let seq = build_sequence(&spec, &cfg.thresholds())?;
            hardy_radii(cfg).into_iter().zip(size_profile(&seq, 0)?).collect()
        }
    };
    std::fs::create_dir_all(out)?;
    let path = out.join(format!("profile-{}.csv", a.what.name()));
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["x", "y"])?;
    for (x, y) in &points {
        w.serialize((x, y))?;
    }
    w.flush()?;
    let p = params(&[
        ("what", a.what.name().into()),
        ("n", a.n.to_string()),
        ("lambda", a.lambda.to_string()),
        ("t", a.t.to_string()),
        ("p", a.p.to_string()),
    ]);
    let bad = points.iter().filter(|(x, y)| !x.is_finite() || !y.is_finite()).count();
    rec.upper("emit_profile", &p, "nonfinite_points", bad as f64, 0.0);
    Ok(Outcome::default())
}

use num_complex::Complex64;
use proptest::prelude::*;

use roe_lab::boundary::{
    abel_transform, hardy_norm, poisson_transform, poisson_transform_at, slice_projection_check, PoissonKernelParams,
    ZonalProfile,
};
use roe_lab::space::{
    geodesic_radius, norm, BallLattice, BoundaryFunction, FnField, RadialFunction, RadialGrid,
    SpaceParams, SphereQuadrature,
};
use roe_lab::spherical::{heat_kernel_h3, spherical_function_h3, SpectralGrid, SphericalAnalysis};

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn h3() -> SpaceParams {
    SpaceParams::new(3).unwrap()
}

#[test]
fn transform_of_one_is_spherical_function() {
    let one = BoundaryFunction::from_fn(SphereQuadrature::new(3, 48, 96).unwrap(), |_| c(1.0));
    for l in [c(0.0), c(1.0), Complex64::new(1.0, 0.5)] {
        let pk = PoissonKernelParams::new(h3(), l);
        for x in [[0.0, 0.0, 0.0], [0.2, -0.1, 0.3], [0.0, 0.55, 0.0]] {
            let got = poisson_transform_at(&one, &pk, &x).unwrap();
            let want = spherical_function_h3(l, geodesic_radius(norm(&x)));
            assert!((got - want).norm() < 1e-4 * want.norm(), "{l} {x:?}: {got} vs {want}");
        }
    }
}

#[test]
fn first_harmonic_vanishes_at_origin() {
    let y1 = BoundaryFunction::from_fn(SphereQuadrature::default_for(3).unwrap(), |b| c(b[2]));
    let pk = PoissonKernelParams::new(h3(), c(0.0));
    assert!(poisson_transform_at(&y1, &pk, &[0.0; 3]).unwrap().norm() < 1e-10);
}

#[test]
fn poisson_transform_is_linear() {
    let quad = SphereQuadrature::new(3, 8, 16).unwrap();
    let f = BoundaryFunction::from_fn(quad.clone(), |b| c(1.0 + b[0]));
    let g = BoundaryFunction::from_fn(quad.clone(), |b| Complex64::new(b[2] * b[2], b[1]));
    let (a, bb) = (Complex64::new(0.3, -1.2), c(2.5));
    let mix = BoundaryFunction::new(
        quad,
        f.values().iter().zip(g.values()).map(|(x, y)| a * x + bb * y).collect(),
    )
    .unwrap();
    let lat = BallLattice::new(3, 6, 0.1).unwrap();
    let l = c(1.0);
    let pf = poisson_transform(&f, l, lat).unwrap();
    let pg = poisson_transform(&g, l, lat).unwrap();
    let pm = poisson_transform(&mix, l, lat).unwrap();
    for i in 0..lat.len() {
        if pm.mask()[i] {
            let want = a * pf.values()[i] + bb * pg.values()[i];
            assert!((pm.values()[i] - want).norm() <= 1e-12 * want.norm().max(1.0));
        }
    }
}

#[test]
fn complex_parameter_ratio_grows() {
    let l = Complex64::new(1.0, 0.5);
    let field = FnField::new(3, move |x: &[f64; 3]| spherical_function_h3(l, geodesic_radius(norm(x))));
    let radii: Vec<f64> = (0..=24).map(|k| 0.5 * k as f64).collect();
    let rep = hardy_norm(&field, f64::INFINITY, 0.0, &radii, &SphereQuadrature::new(3, 4, 4).unwrap()).unwrap();
    assert!(rep.unbounded_trend(), "growth {}", rep.growth());
}

#[test]
fn abel_transform_is_even_and_linear() {
    let grid = RadialGrid::new(12.0, 1201).unwrap();
    let f = RadialFunction::from_real_fn(grid, |r| heat_kernel_h3(0.5, r));
    let g = RadialFunction::from_real_fn(grid, |r| heat_kernel_h3(0.3, r));
    let s: Vec<f64> = (-20..=20).map(|k| 0.2 * k as f64).collect();
    let af = abel_transform(&h3(), &f, &s).unwrap();
    for k in 0..s.len() {
        let m = s.len() - 1 - k;
        assert!((af[k] - af[m]).norm() <= 1e-6 * af[k].norm());
    }
    let ag = abel_transform(&h3(), &g, &s).unwrap();
    let mix = f.axpy(c(-2.0), &g).unwrap();
    let am = abel_transform(&h3(), &mix, &s).unwrap();
    for k in 0..s.len() {
        let e = (am[k] - (af[k] - ag[k] * 2.0)).norm() / af[k].norm().max(ag[k].norm());
        // the cut-off radius adapts to each input
        assert!(e <= 1e-10, "{e:e}");
    }
    let zero = RadialFunction::zeros(grid);
    assert!(abel_transform(&h3(), &zero, &s).unwrap().iter().all(|v| v.norm() == 0.0));
}

#[test]
fn slice_projection_on_convolution_and_difference() {
    let sa = SphericalAnalysis::new(
        h3(),
        RadialGrid::new(16.0, 1601).unwrap(),
        SpectralGrid::new(22.0, 1201).unwrap(),
    )
    .unwrap();
    let sg = SpectralGrid::new(5.0, 101).unwrap();
    let conv = sa.convolve(&sa.heat_kernel(0.3).unwrap(), &sa.heat_kernel(0.2).unwrap()).unwrap();
    assert!(slice_projection_check(&h3(), &conv, &sg).unwrap() < 1e-4);
    let grid = *sa.radial_grid();
    let diff = RadialFunction::from_real_fn(grid, |r| heat_kernel_h3(0.3, r) - heat_kernel_h3(0.6, r));
    assert!(slice_projection_check(&h3(), &diff, &sg).unwrap() < 1e-4);
}

fn zonal() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn hardy_supremum_is_monotone_in_p(coeffs in zonal(), lambda in 0.0f64..2.0) {
        let prof = ZonalProfile::new(3, coeffs).unwrap();
        let field = prof.poisson_field(c(lambda));
        let radii: Vec<f64> = (0..=8).map(|k| 0.5 * k as f64).collect();
        let quad = SphereQuadrature::new(3, 48, 4).unwrap();
        let mut last = 0.0;
        for p in [1.0, 1.5, 2.0, 4.0, f64::INFINITY] {
            let s = hardy_norm(&field, p, 0.0, &radii, &quad).unwrap().supremum;
            prop_assert!(s >= last * (1.0 - 1e-9), "p={} {} < {}", p, s, last);
            last = s;
        }
    }

    #[test]
    fn zonal_sampler_matches_quadrature_transform(coeffs in zonal(), lambda in 0.0f64..2.0, t in 0.0f64..0.6) {
        use roe_lab::space::BallSampler;
        let prof = ZonalProfile::new(3, coeffs).unwrap();
        let bf = prof.boundary_function(SphereQuadrature::new(3, 48, 96).unwrap()).unwrap();
        let pk = PoissonKernelParams::new(h3(), c(lambda));
        let x = [0.6 * t, 0.0, 0.8 * t];
        let direct = poisson_transform_at(&bf, &pk, &x).unwrap();
        let fast = prof.poisson_field(c(lambda)).sample(&x).unwrap();
        prop_assert!((direct - fast).norm() <= 1e-6 * (1.0 + direct.norm()));
    }
}

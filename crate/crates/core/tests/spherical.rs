use std::sync::OnceLock;

use num_complex::Complex64;
use proptest::prelude::*;

use roe_lab::quadrature::{odd_origin_weights, simpson_weights};
use roe_lab::space::{RadialFunction, RadialGrid, SpaceParams};
use roe_lab::spherical::{
    heat_kernel_h3, spherical_function, SpectralFunction, SpectralGrid, SphericalAnalysis,
};

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn analysis(n: usize) -> &'static SphericalAnalysis {
    static CACHE: [OnceLock<SphericalAnalysis>; 2] = [OnceLock::new(), OnceLock::new()];
    CACHE[n - 2].get_or_init(|| {
        SphericalAnalysis::new(
            SpaceParams::new(n).unwrap(),
            RadialGrid::new(16.0, 1601).unwrap(),
            SpectralGrid::new(22.0, 1201).unwrap(),
        )
        .unwrap()
    })
}

fn max_rel(a: &[Complex64], b: &[Complex64]) -> f64 {
    let e = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    e / b.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

#[test]
fn frozen_values() {
    let p = SpaceParams::new(3).unwrap();
    let a = spherical_function(&p, c(1.0), 1.0).unwrap();
    assert!((a.re - 0.716_022_915_360_433_9).abs() < 1e-10);
    let b = spherical_function(&p, c(0.0), 2.0).unwrap();
    assert!((b.re - 0.551_441_129_543_566_4).abs() < 1e-10);
    for n in [2, 3] {
        let p = SpaceParams::new(n).unwrap();
        assert_eq!(spherical_function(&p, Complex64::new(0.7, 0.3), 0.0).unwrap(), c(1.0));
    }
}

#[test]
fn odd_origin_rule_beats_simpson_on_odd_integrands() {
    // int_0^inf sinh(r) exp(-r^2/1.2) cos(22 r) dr, reference from a fine grid
    let g = |r: f64| r.sinh() * (-r * r / 1.2).exp() * (22.0 * r).cos();
    let sum = |w: &[f64], h: f64| w.iter().enumerate().map(|(j, wj)| wj * g(j as f64 * h)).sum::<f64>();
    let fine = sum(&odd_origin_weights(32_001, 0.0005), 0.0005);
    let coarse = sum(&odd_origin_weights(1601, 0.01), 0.01);
    let simpson = sum(&simpson_weights(1601, 0.01), 0.01);
    assert!((coarse - fine).abs() < 1e-11, "{}", coarse - fine);
    assert!((simpson - fine).abs() > 1e-9);
}

#[test]
fn heat_kernel_positive_with_unit_mass() {
    for n in [2, 3] {
        let sa = analysis(n);
        let p = *sa.params();
        let area = p.sphere_area();
        let m = p.multiplicity() as i32;
        for t in [0.3, 0.5, 1.0] {
            let h = sa.heat_kernel(t).unwrap();
            // positive down to the round-off floor of the inversion
            let floor = 1e-13 * h.max_abs();
            assert!(h.values().iter().all(|v| v.re > -floor), "n={n} t={t}");
            assert!(h.values().iter().take(401).all(|v| v.re > 0.0), "n={n} t={t}");
            // the transform at lambda = i rho is the mass
            let w = simpson_weights(h.len(), h.grid().h());
            let mass: f64 = h
                .values()
                .iter()
                .zip(&w)
                .enumerate()
                .map(|(j, (v, wj))| v.re * wj * h.grid().node(j).sinh().powi(m) * area)
                .sum();
            assert!((mass - 1.0).abs() < 1e-4, "n={n} t={t} mass={mass}");
        }
    }
}

#[test]
fn inverse_of_heat_multiplier_is_closed_form_on_h3() {
    let sa = analysis(3);
    for t in [0.5, 1.0] {
        let h = sa.heat_kernel(t).unwrap();
        let exact: Vec<Complex64> = (0..h.len()).map(|j| c(heat_kernel_h3(t, h.grid().node(j)))).collect();
        assert!(max_rel(h.values(), &exact) < 1e-5);
    }
}

#[test]
fn semigroup_with_unequal_times() {
    for n in [2, 3] {
        let sa = analysis(n);
        let a = sa.heat_kernel(0.3).unwrap();
        let b = sa.heat_kernel(0.5).unwrap();
        let ab = sa.convolve(&a, &b).unwrap();
        let want = sa.heat_kernel(0.8).unwrap();
        assert!(max_rel(ab.values(), want.values()) < 1e-5, "n={n}");
    }
}

#[test]
fn zero_round_trips_to_zero() {
    let sa = analysis(3);
    let zero = SpectralFunction::from_fn(*sa.spectral_grid(), |_| c(0.0));
    assert!(sa.inverse(&zero).unwrap().values().iter().all(|v| *v == c(0.0)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn transform_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, s1 in 0.5f64..1.2, s2 in 0.5f64..1.2) {
        let sa = analysis(3);
        let grid = *sa.radial_grid();
        let f = RadialFunction::from_real_fn(grid, |r| (-r * r / (2.0 * s1 * s1)).exp());
        let g = RadialFunction::from_real_fn(grid, |r| (-r * r / (2.0 * s2 * s2)).exp() * (1.0 + r));
        let mix = f.scaled(c(a)).axpy(c(b), &g).unwrap();
        let lhs = sa.forward(&mix).unwrap();
        let fh = sa.forward(&f).unwrap();
        let gh = sa.forward(&g).unwrap();
        let scale = fh.max_abs() * a.abs() + gh.max_abs() * b.abs() + 1e-300;
        for i in 0..lhs.values().len() {
            let want = fh.values()[i] * a + gh.values()[i] * b;
            prop_assert!((lhs.values()[i] - want).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn spherical_function_is_even_in_lambda(re in 0.0f64..3.0, im in -0.9f64..0.9, r in 0.0f64..6.0) {
        let p = SpaceParams::new(2).unwrap();
        let l = Complex64::new(re, im);
        let a = spherical_function(&p, l, r).unwrap();
        let b = spherical_function(&p, -l, r).unwrap();
        prop_assert!((a - b).norm() <= 1e-10 * a.norm().max(1.0));
    }
}

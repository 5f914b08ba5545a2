use num_complex::Complex64;
use proptest::prelude::*;

use roe_lab::engine::distinguished_eigenfunction;
use roe_lab::laplacians::{
    calibrate_kappa, delta_bar, delta_one_radial, distinguished_laplacian_via_relation,
    distinguished_laplacian_via_stencil, half_plane_distance, SolvableField, SolvableLattice, SolvablePoint,
};
use roe_lab::space::{RadialGrid, SpaceParams};
use roe_lab::spherical::spherical_function_on;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn point() -> impl Strategy<Value = SolvablePoint> {
    (-3.0f64..3.0, -2.0f64..2.0).prop_map(|(b, eta)| SolvablePoint::new(b, eta.exp()).unwrap())
}

fn close(p: &SolvablePoint, q: &SolvablePoint, tol: f64) -> bool {
    (p.b - q.b).abs() <= tol * (1.0 + p.b.abs()) && (p.y - q.y).abs() <= tol * p.y
}

proptest! {
    #[test]
    fn modular_function_is_a_homomorphism(s in point(), t in point()) {
        let lhs = delta_bar(&s.mul(&t)).unwrap();
        let rhs = delta_bar(&s).unwrap() * delta_bar(&t).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
    }

    #[test]
    fn group_axioms(s in point(), t in point(), u in point()) {
        prop_assert!(close(&s.mul(&s.inverse()), &SolvablePoint::identity(), 1e-14));
        prop_assert!(close(&s.mul(&t).mul(&u), &s.mul(&t.mul(&u)), 1e-12));
    }

    #[test]
    fn metric_is_left_invariant(s in point(), p in point(), q in point()) {
        let d = half_plane_distance(&p, &q);
        let ds = half_plane_distance(&s.mul(&p), &s.mul(&q));
        prop_assert!((d - ds).abs() <= 1e-10 * d.max(1.0));
    }
}

#[test]
fn modular_function_spot_values() {
    assert_eq!(delta_bar(&SolvablePoint::identity()).unwrap(), 1.0);
    let s = SolvablePoint::new(3.0, std::f64::consts::E).unwrap();
    assert!((delta_bar(&s).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
}

#[test]
fn shifted_operator_on_spherical_functions() {
    let grid = RadialGrid::with_spacing(10.0, 0.01).unwrap();
    for (n, l, tol) in [(3, 1.0, 1e-6), (2, 1.0, 1e-5), (2, 0.5, 1e-6)] {
        let p = SpaceParams::new(n).unwrap();
        let phi = spherical_function_on(&p, c(l), &grid).unwrap();
        let d1 = delta_one_radial(&p, &phi).unwrap();
        let err = (1..d1.len())
            .map(|j| (d1.values()[j] - phi.values()[j] * (l * l)).norm())
            .fold(0.0, f64::max);
        assert!(err < tol, "n={n} lambda={l}: {err:e}");
    }
}

fn lattice() -> SolvableLattice {
    SolvableLattice::new((-3.0, 3.0), 0.005, (-1.5, 1.5), 0.01).unwrap()
}

fn bump(lat: SolvableLattice, b0: f64, e0: f64) -> SolvableField {
    SolvableField::from_fn(lat, move |s| c((-(s.b - b0).powi(2) - 2.0 * (s.eta() - e0).powi(2)).exp()))
}

fn residual(lf: &SolvableField, f: &SolvableField, k: f64) -> f64 {
    let mut err = 0.0f64;
    let mut scale = 0.0f64;
    for i in lf.active() {
        err = err.max((lf.values()[i] - f.values()[i] * k).norm());
        scale = scale.max(f.values()[i].norm());
    }
    err / scale
}

#[test]
fn relation_path_eigenfunctions() {
    let lat = lattice();
    let psi1 = distinguished_eigenfunction(lat).unwrap();
    assert!(residual(&distinguished_laplacian_via_relation(&psi1), &psi1, 1.0) < 1e-3);
    let one = SolvableField::from_fn(lat, |_| c(1.0));
    assert!(residual(&distinguished_laplacian_via_relation(&one), &one, -1.0) < 1e-4);
}

#[test]
fn stencil_path_agrees_after_calibration() {
    let lat = lattice();
    let fields = vec![
        distinguished_eigenfunction(lat).unwrap(),
        SolvableField::from_fn(lat, |_| c(1.0)),
        bump(lat, 0.3, -0.2),
    ];
    let fit = calibrate_kappa(&fields).unwrap();
    assert!(fit.max_relative_residual < 1e-3, "{fit:?}");
    let one = &fields[1];
    let r = residual(&distinguished_laplacian_via_stencil(one, fit.kappa), one, -1.0);
    assert!(r < 1e-8, "{r:e}");
}

#[test]
fn both_paths_are_linear() {
    let lat = SolvableLattice::new((-2.0, 2.0), 0.02, (-1.0, 1.0), 0.02).unwrap();
    let f = bump(lat, 0.0, 0.0);
    let g = bump(lat, 0.5, 0.3);
    let a = Complex64::new(0.7, -0.2);
    let mix = f.axpy(a, &g).unwrap();
    for op in [
        &|x: &SolvableField| distinguished_laplacian_via_relation(x) as SolvableField,
        &|x: &SolvableField| distinguished_laplacian_via_stencil(x, 1.0),
    ] as [&dyn Fn(&SolvableField) -> SolvableField; 2]
    {
        let (lf, lg, lm) = (op(&f), op(&g), op(&mix));
        let mut worst = 0.0f64;
        for i in lm.active() {
            let want = lf.values()[i] + lg.values()[i] * a;
            worst = worst.max((lm.values()[i] - want).norm());
        }
        assert!(worst <= 1e-11 * lm.max_abs(), "{:e}", worst / lm.max_abs());
    }
}

#[test]
fn stencil_path_commutes_with_right_dilation() {
    let lat = SolvableLattice::new((-2.0, 2.0), 0.02, (-1.0, 1.0), 0.02).unwrap();
    let (_, step) = lat.steps();
    let k = 7usize;
    let shift = k as f64 * step;
    let f = bump(lat, 0.2, 0.1);
    // f o R_s with s = (0, e^shift): (b, y) -> (b, y e^shift)
    let fs = bump(lat, 0.2, 0.1 - shift);
    let lf = distinguished_laplacian_via_stencil(&f, 1.0);
    let lfs = distinguished_laplacian_via_stencil(&fs, 1.0);
    let (nb, ne) = lat.shape();
    let mut worst = 0.0f64;
    for ib in 0..nb {
        for ie in 0..ne - k {
            let (i, j) = (lat.index(ib, ie), lat.index(ib, ie + k));
            if lfs.mask()[i] && lf.mask()[j] {
                worst = worst.max((lfs.values()[i] - lf.values()[j]).norm());
            }
        }
    }
    assert!(worst < 1e-3 * lf.max_abs(), "{worst:e}");
}

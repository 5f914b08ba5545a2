use num_complex::Complex64;

use roe_lab::engine::{
    build_sequence, check_conclusion, check_hypotheses, default_boundary, run_sequence, SequenceKind, SequenceSpec,
    Thresholds, Verdict,
};
use roe_lab::LabError;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn spec(kind: SequenceKind, n: usize, lambda: Complex64, p: f64) -> SequenceSpec {
    let mut s = SequenceSpec::new(kind, n, lambda);
    s.p = p;
    s
}

#[test]
fn eigen_sequences_confirm_for_every_exponent() {
    let th = Thresholds::default();
    for l in [0.5, 1.0, 2.0] {
        for p in [1.0, 2.0, f64::INFINITY] {
            let r = run_sequence(&build_sequence(&spec(SequenceKind::EigenSpherical, 3, c(l), p), &th).unwrap(), &th)
                .unwrap();
            assert_eq!(r.verdict, Verdict::TheoremConfirmed, "lambda={l} p={p}");
            assert!(r.hypotheses.max_recursion_residual() < 1e-6);
            assert!(r.conclusion.residual < 1e-6);
            // |phi_lambda| <= phi_0
            assert!(r.hypotheses.uniform_bound <= 1.0 + 1e-6, "{}", r.hypotheses.uniform_bound);
        }
    }
}

#[test]
fn eigen_sequence_on_the_plane() {
    let th = Thresholds::default();
    let r = run_sequence(&build_sequence(&spec(SequenceKind::EigenSpherical, 2, c(1.0), 2.0), &th).unwrap(), &th)
        .unwrap();
    assert_eq!(r.verdict, Verdict::TheoremConfirmed);
}

#[test]
fn complex_pair_violates_size_for_every_exponent() {
    let th = Thresholds::default();
    let l = Complex64::new(1.0, 0.5);
    for p in [1.0, 2.0, f64::INFINITY] {
        let seq = build_sequence(&spec(SequenceKind::ComplexSpectrumPair, 3, l, p), &th).unwrap();
        assert!((seq.eigenvalue() - (l * l + 1.0).norm()).abs() < 1e-15);
        let r = run_sequence(&seq, &th).unwrap();
        assert!(r.hypotheses.recursion_ok);
        assert!(!r.hypotheses.size_ok, "p={p}");
        assert!(r.conclusion.kappa_residual > th.counterexample);
        assert_eq!(r.verdict, Verdict::CounterexampleConfirmed);
        let sup = seq.indices().into_iter().map(|j| max_abs(&seq.values(j))).fold(0.0, f64::max);
        assert!(sup <= 2.0 + 1e-9);
    }
}

#[test]
fn complex_pair_rejects_parameters_outside_the_strip() {
    let th = Thresholds::default();
    let err = build_sequence(&spec(SequenceKind::ComplexSpectrumPair, 3, Complex64::new(1.0, 1.2), 2.0), &th);
    assert!(matches!(err, Err(LabError::Domain(_))));
}

fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn poisson_sequences_confirm_with_bounded_norms() {
    let th = Thresholds::default();
    let norm2 = default_boundary(3).unwrap().norm(2.0).unwrap();
    for l in [0.0, 1.0] {
        let r = run_sequence(&build_sequence(&spec(SequenceKind::Poisson, 3, c(l), 2.0), &th).unwrap(), &th).unwrap();
        assert_eq!(r.verdict, Verdict::TheoremConfirmed, "lambda={l}");
        assert!(r.hypotheses.uniform_bound <= norm2 * (1.0 + 1e-2));
        let (lo, hi) = r
            .hypotheses
            .norms
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
        assert!(hi / lo < 1.0 + 1e-9, "norms vary with j");
        if l == 0.0 {
            let e = r.conclusion.recovery_error.expect("recovery runs at lambda = 0");
            assert!(e < th.recovery, "{e}");
            assert!((r.hypotheses.uniform_bound / norm2 - 1.0).abs() < 1e-2);
        }
    }
}

#[test]
fn verdicts_survive_scaling_and_shifting() {
    let th = Thresholds::default();
    for (kind, l) in [
        (SequenceKind::EigenSpherical, c(1.0)),
        (SequenceKind::ComplexSpectrumPair, Complex64::new(1.0, 0.5)),
    ] {
        let base = build_sequence(&spec(kind, 3, l, f64::INFINITY), &th).unwrap();
        let want = run_sequence(&base, &th).unwrap();
        for s in [c(1e-3), c(-7.0), Complex64::new(0.0, 2.0)] {
            let r = run_sequence(&build_sequence(&base.spec().clone(), &th).unwrap().scaled(s), &th).unwrap();
            assert_eq!(r.verdict, want.verdict, "{kind} scaled by {s}");
            assert!((r.conclusion.kappa_residual - want.conclusion.kappa_residual).abs() < 1e-9);
        }
        let r = run_sequence(&build_sequence(&base.spec().clone(), &th).unwrap().shifted(3), &th).unwrap();
        assert_eq!(r.verdict, want.verdict, "{kind} shifted");
    }
}

#[test]
fn zero_sequence_has_zero_residuals_and_no_conclusion() {
    let th = Thresholds::default();
    let seq = build_sequence(&spec(SequenceKind::EigenSpherical, 3, c(1.0), 2.0), &th)
        .unwrap()
        .scaled(c(0.0));
    let h = check_hypotheses(&seq, &th).unwrap();
    assert!(h.recursion_residuals.iter().all(|r| *r == 0.0));
    assert!(h.norms.iter().all(|v| *v == 0.0));
    assert_eq!(h.uniform_bound, 0.0);
    assert!(matches!(check_conclusion(&seq, &th), Err(LabError::Degenerate(_))));
}

#[test]
fn perturbation_breaks_the_recursion() {
    let th = Thresholds::default();
    let seq = build_sequence(&spec(SequenceKind::EigenSpherical, 3, c(1.0), 2.0), &th).unwrap();
    let len = seq.region_len();
    // a fixed bump, with its exact radial Laplacian left out on purpose
    let values: Vec<Complex64> = (0..len).map(|i| c((-(i as f64) * 0.01).exp())).collect();
    let applied = vec![c(0.0); len];
    let r = run_sequence(&seq.perturbed(c(0.2), values, applied).unwrap(), &th).unwrap();
    assert!(!r.hypotheses.recursion_ok);
    assert_eq!(r.verdict, Verdict::HypothesisViolated);
}

#[test]
fn distinguished_family_is_a_counterexample() {
    let th = Thresholds::default();
    let mut s = spec(SequenceKind::DistinguishedCounterexample, 2, c(1.0), f64::INFINITY);
    s.j_max = 6;
    let seq = build_sequence(&s, &th).unwrap();
    assert!((seq.eigenvalue() - 1.0).abs() < 1e-15);
    let r = run_sequence(&seq, &th).unwrap();
    assert!(r.hypotheses.recursion_ok);
    assert!(!r.hypotheses.size_ok);
    assert!(r.conclusion.kappa_residual > 0.1);
    assert_eq!(r.verdict, Verdict::CounterexampleConfirmed);
}

#[test]
fn distinguished_family_needs_the_plane() {
    let th = Thresholds::default();
    let err = build_sequence(&spec(SequenceKind::DistinguishedCounterexample, 3, c(1.0), 2.0), &th);
    assert!(err.is_err());
}

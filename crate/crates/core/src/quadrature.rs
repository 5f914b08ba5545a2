//! Quadrature rules and small polynomial helpers shared by every module.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending nodes.
///
/// Newton iteration on the three-term recurrence; accurate to a few ulps
/// for the orders used here (up to a few thousand).
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "Gauss-Legendre order must be positive");
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let m = order.div_ceil(2);
    let nf = order as f64;
    for i in 0..m {
        // Tricomi's initial guess.
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(order, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(order, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

/// Gauss–Legendre rule mapped onto `[a, b]`.
pub fn gauss_legendre_on(order: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|v| v * half).collect(),
    )
}

/// `P_l(x)` and `P_l'(x)`.
pub fn legendre_with_derivative(l: usize, x: f64) -> (f64, f64) {
    if l == 0 {
        return (1.0, 0.0);
    }
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=l {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let lf = l as f64;
    let d = if (1.0 - x * x).abs() < 1e-300 {
        // endpoint limit
        let s = if x > 0.0 { 1.0 } else { (-1.0f64).powi(l as i32 + 1) };
        s * lf * (lf + 1.0) / 2.0
    } else {
        lf * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, d)
}

pub fn legendre(l: usize, x: f64) -> f64 {
    legendre_with_derivative(l, x).0
}

/// Composite Simpson weights for `num_points` equispaced samples with step `h`.
///
/// An odd number of intervals closes with the 3/8 rule on the last three,
/// so every grid length from 2 upward is accepted (2 points falls back to
/// the trapezoid rule).
pub fn simpson_weights(num_points: usize, h: f64) -> Vec<f64> {
    assert!(num_points >= 2, "need at least two samples");
    let mut w = vec![0.0; num_points];
    let intervals = num_points - 1;
    if intervals == 1 {
        w[0] = 0.5 * h;
        w[1] = 0.5 * h;
        return w;
    }
    let simpson_intervals = if intervals.is_multiple_of(2) {
        intervals
    } else {
        intervals - 3
    };
    for k in (0..simpson_intervals).step_by(2) {
        w[k] += h / 3.0;
        w[k + 1] += 4.0 * h / 3.0;
        w[k + 2] += h / 3.0;
    }
    if simpson_intervals < intervals {
        let s = simpson_intervals;
        w[s] += 3.0 * h / 8.0;
        w[s + 1] += 9.0 * h / 8.0;
        w[s + 2] += 9.0 * h / 8.0;
        w[s + 3] += 3.0 * h / 8.0;
    }
    w
}

/// Weights for `int_0^{(N-1)h} g` when `g` extends to a smooth odd function
/// about 0 and is negligible at the far end: the trapezoid rule plus
/// Euler-Maclaurin terms at the origin, with the odd derivatives of `g`
/// at 0 fitted from the first four samples.
pub fn odd_origin_weights(num_points: usize, h: f64) -> Vec<f64> {
    assert!(num_points >= 5, "need at least five samples");
    const ORIGIN: [f64; 4] = [
        252_769.0 / 1_814_400.0,
        -68_119.0 / 1_814_400.0,
        1_469.0 / 201_600.0,
        -2_497.0 / 3_628_800.0,
    ];
    let mut w = vec![h; num_points];
    w[0] = 0.5 * h;
    w[num_points - 1] = 0.5 * h;
    for (k, d) in ORIGIN.iter().enumerate() {
        w[k + 1] += h * d;
    }
    w
}

/// Weights for the radial integral `int f(r) phi(r) sinh^m(r) dr` of an even
/// `f phi`: the integrand is odd for odd `m`, where Simpson would leave an
/// `O(h^4)` origin error.
pub fn radial_weights(multiplicity: usize, num_points: usize, h: f64) -> Vec<f64> {
    if multiplicity % 2 == 1 && num_points >= 5 {
        odd_origin_weights(num_points, h)
    } else {
        simpson_weights(num_points, h)
    }
}

/// Four-point Lagrange weights for a sample at fractional offset `u`
/// measured from node 1 of the stencil `{-1, 0, 1, 2}`.
#[inline]
pub fn cubic_lagrange_weights(u: f64) -> [f64; 4] {
    let um1 = u + 1.0;
    let u1 = u - 1.0;
    let u2 = u - 2.0;
    [
        -u * u1 * u2 / 6.0,
        um1 * u1 * u2 / 2.0,
        -um1 * u * u2 / 2.0,
        um1 * u * u1 / 6.0,
    ]
}

/// Stencil origin and weights for cubic interpolation on a uniform axis.
///
/// Returns the index of the first stencil node together with the weights,
/// or `None` when the stencil would leave `[0, len)`.
#[inline]
pub fn cubic_stencil(pos: f64, len: usize) -> Option<(usize, [f64; 4])> {
    if !pos.is_finite() || len < 4 {
        return None;
    }
    let mut base = pos.floor() as i64;
    // keep the sample inside the central interval whenever possible
    if base < 1 {
        base = 1;
    }
    if base > len as i64 - 3 {
        base = len as i64 - 3;
    }
    let u = pos - base as f64;
    if !(-1.0 - 1e-9..=2.0 + 1e-9).contains(&u) {
        return None;
    }
    Some(((base - 1) as usize, cubic_lagrange_weights(u)))
}

/// Area of the unit sphere `S^{d-1}` in `R^d`.
pub fn unit_sphere_area(d: usize) -> f64 {
    // Omega_{d-1} = 2 pi^{d/2} / Gamma(d/2) via the recursion Omega_{d+1} = 2 pi Omega_{d-1} / d
    match d {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI * unit_sphere_area(d - 2) / (d as f64 - 2.0),
    }
}

/// Sequences shorter than the stencil or with zero norm return `None`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for order in [1usize, 2, 5, 16, 64] {
            let (x, w) = gauss_legendre(order);
            for deg in 0..(2 * order) {
                let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((approx - exact).abs() < 1e-13, "order {order} deg {deg}");
            }
        }
    }

    #[test]
    fn simpson_handles_odd_and_even_lengths() {
        for n in [2usize, 3, 4, 5, 8, 101, 102] {
            let h = 1.0 / (n - 1) as f64;
            let w = simpson_weights(n, h);
            let integral: f64 = (0..n).map(|i| w[i] * (i as f64 * h).powi(2)).sum();
            let tol = if n == 2 { 0.2 } else { 1e-12 };
            assert!((integral - 1.0 / 3.0).abs() < tol, "n = {n}: {integral}");
        }
    }

    #[test]
    fn cubic_weights_reproduce_cubics() {
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x * x;
        for u in [-0.3, 0.0, 0.25, 0.9, 1.7] {
            let w = cubic_lagrange_weights(u);
            let v: f64 = (0..4).map(|k| w[k] * f(k as f64 - 1.0)).sum();
            assert!((v - f(u)).abs() < 1e-13);
        }
    }

    #[test]
    fn sphere_areas() {
        assert!((unit_sphere_area(2) - 2.0 * PI).abs() < 1e-15);
        assert!((unit_sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
    }
}

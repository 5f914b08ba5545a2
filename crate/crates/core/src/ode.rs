//! Adaptive Dormand–Prince 5(4) integrator for small complex systems.
//!
//! Only what the spherical-function solver needs: a fixed-size complex
//! state, step-size control on a mixed absolute/relative error norm, and
//! output at caller-supplied abscissae.

use num_complex::Complex64;

use crate::error::{LabError, LabResult};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-14,
            initial_step: 1e-3,
            max_steps: 5_000_000,
        }
    }
}

// Dormand–Prince tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type State<const N: usize> = [Complex64; N];

#[inline]
fn axpy<const N: usize>(y: &State<N>, terms: &[(f64, &State<N>)], h: f64) -> State<N> {
    let mut out = *y;
    for (c, k) in terms {
        let s = c * h;
        for i in 0..N {
            out[i] += k[i] * s;
        }
    }
    out
}

/// Integrates `y' = f(t, y)` from `t0` and records the state at every
/// abscissa in `targets` (which must be nondecreasing and `>= t0`).
pub fn integrate_to<const N: usize, F>(
    f: F,
    t0: f64,
    y0: State<N>,
    targets: &[f64],
    opts: &OdeOptions,
) -> LabResult<Vec<State<N>>>
where
    F: Fn(f64, &State<N>) -> State<N>,
{
    let mut out = Vec::with_capacity(targets.len());
    let mut t = t0;
    let mut y = y0;
    let mut h = opts.initial_step;
    let mut k1 = f(t, &y);
    let mut steps = 0usize;
    for &target in targets {
        if target < t - 1e-15 {
            return Err(LabError::Integration(format!(
                "target {target} precedes current abscissa {t}"
            )));
        }
        while t < target {
            if steps >= opts.max_steps {
                return Err(LabError::Integration("step budget exhausted".into()));
            }
            steps += 1;
            let remaining = target - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };

            let k2 = f(t + C2 * step, &axpy(&y, &[(A21, &k1)], step));
            let k3 = f(t + C3 * step, &axpy(&y, &[(A31, &k1), (A32, &k2)], step));
            let k4 = f(
                t + C4 * step,
                &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], step),
            );
            let k5 = f(
                t + C5 * step,
                &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], step),
            );
            let k6 = f(
                t + step,
                &axpy(
                    &y,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                    step,
                ),
            );
            let y_new = axpy(
                &y,
                &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
                step,
            );
            let k7 = f(t + step, &y_new);

            let mut err = 0.0f64;
            for i in 0..N {
                let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7)
                    * step;
                let scale = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
                err = err.max(e.norm() / scale);
            }

            if err <= 1.0 {
                t = if last { target } else { t + step };
                y = y_new;
                k1 = k7;
            }
            if !err.is_finite() {
                return Err(LabError::Integration(format!("non-finite error estimate at t = {t}")));
            }
            // classic controller; the accepted final short step does not shrink h
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if !(last && err <= 1.0) {
                h = step * factor;
            }
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(LabError::Integration(format!("step size underflow at t = {t}")));
            }
        }
        out.push(y);
    }
    Ok(out)
}

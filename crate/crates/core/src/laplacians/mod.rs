//! Laplace–Beltrami operators: radial, ball-model lattice, and on the
//! solvable group `S = NA` of `H^2` (see [`solvable`]).

pub mod solvable;

use num_complex::Complex64;

use crate::error::{invalid, LabError, LabResult};
use crate::space::{BallField, RadialFunction, SpaceParams};

pub use solvable::{
    delta_bar, delta_half, delta_one_half_plane, distinguished_laplacian_via_relation,
    distinguished_laplacian_via_stencil, calibrate_kappa, half_plane_distance, laplace_half_plane,
    right_invariant_sum_of_squares, KappaFit, SolvableField, SolvableLattice, SolvablePoint,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

// Sixth-order central differences.
const D1_6: [f64; 7] = [-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0];
const D1_6_DEN: f64 = 60.0;
const D2_6: [f64; 7] = [2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0];
const D2_6_DEN: f64 = 180.0;

// Fourth-order central differences.
pub(crate) const D1_4: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
pub(crate) const D1_4_DEN: f64 = 12.0;
pub(crate) const D2_4: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];
pub(crate) const D2_4_DEN: f64 = 12.0;

/// `f'' + (n-1) coth(r) f'` with sixth-order stencils and the even
/// extension across `r = 0` (where the operator is `n f''(0)`).
///
/// The last three nodes have no centred stencil, so the result lives on
/// the grid truncated by three nodes.
pub fn laplace_radial(params: &SpaceParams, f: &RadialFunction) -> LabResult<RadialFunction> {
    let grid = f.grid();
    let len = grid.num_points();
    if len < 8 {
        return invalid("radial Laplacian needs at least eight nodes");
    }
    let h = grid.h();
    let m = params.multiplicity() as f64;
    let v = f.values();
    let at = |k: i64| v[k.unsigned_abs() as usize];
    let out_len = len - 3;
    let mut out = Vec::with_capacity(out_len);
    for j in 0..out_len {
        let mut d1 = ZERO;
        let mut d2 = ZERO;
        for (s, (c1, c2)) in D1_6.iter().zip(&D2_6).enumerate() {
            let val = at(j as i64 + s as i64 - 3);
            d1 += val * *c1;
            d2 += val * *c2;
        }
        d1 /= D1_6_DEN * h;
        d2 /= D2_6_DEN * h * h;
        if j == 0 {
            out.push(d2 * params.n() as f64);
        } else {
            let r = grid.node(j);
            out.push(d2 + d1 * (m / r.tanh()));
        }
    }
    RadialFunction::new(grid.truncated(out_len)?, out)
}

/// `Delta_1 = -(Delta + rho^2)` on radial functions.
pub fn delta_one_radial(params: &SpaceParams, f: &RadialFunction) -> LabResult<RadialFunction> {
    let lap = laplace_radial(params, f)?;
    let rho2 = params.rho_sq();
    let values = lap
        .values()
        .iter()
        .zip(f.values())
        .map(|(l, v)| -(l + v * rho2))
        .collect();
    RadialFunction::new(*lap.grid(), values)
}

/// Ball-model Laplacian
/// `((1-|x|^2)^2 / 4) Delta_E + (n-2) ((1-|x|^2) / 2) x . grad`
/// with fourth-order stencils. Nodes whose stencil touches a masked node
/// are masked in the output.
pub fn laplace_ball(field: &BallField) -> LabResult<BallField> {
    let lat = *field.lattice();
    let dim = lat.dim();
    let per = lat.per_axis();
    let strides: [usize; 3] = if dim == 2 { [per, 1, 0] } else { [per * per, per, 1] };
    let h = lat.h();
    let vals = field.values();
    let mask = field.mask();
    let mut out = vec![ZERO; lat.len()];
    let mut out_mask = vec![false; lat.len()];
    'nodes: for idx in 0..lat.len() {
        if !mask[idx] {
            continue;
        }
        let mi = lat.multi_index(idx);
        let x = lat.point(idx);
        let mut lap_e = ZERO;
        let mut radial = ZERO;
        for a in 0..dim {
            if mi[a] < 2 || mi[a] + 2 >= per {
                continue 'nodes;
            }
            let mut d1 = ZERO;
            let mut d2 = ZERO;
            for s in 0..5 {
                let k = idx + s * strides[a] - 2 * strides[a];
                if !mask[k] {
                    continue 'nodes;
                }
                d1 += vals[k] * D1_4[s];
                d2 += vals[k] * D2_4[s];
            }
            lap_e += d2 / (D2_4_DEN * h * h);
            radial += d1 * (x[a] / (D1_4_DEN * h));
        }
        let q = 1.0 - (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
        out[idx] = lap_e * (0.25 * q * q) + radial * ((dim as f64 - 2.0) * 0.5 * q);
        out_mask[idx] = true;
    }
    BallField::from_parts(lat, out, out_mask)
}

/// `Delta_1 = -(Delta + rho^2)` on a ball field.
pub fn delta_one_ball(params: &SpaceParams, field: &BallField) -> LabResult<BallField> {
    if params.n() != field.lattice().dim() {
        return Err(LabError::GridMismatch("space dimension differs from lattice dimension".into()));
    }
    let lap = laplace_ball(field)?;
    let rho2 = params.rho_sq();
    let values = lap
        .values()
        .iter()
        .zip(field.values())
        .map(|(l, f)| -(l + f * rho2))
        .collect();
    BallField::from_parts(*field.lattice(), values, lap.mask().to_vec())
}

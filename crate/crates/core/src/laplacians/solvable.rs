//! The solvable group `S = N A` of `H^2`, realised on the upper half-plane.
//!
//! `s = (b, y)` is the point `b + i y`; the base point is `(0, 1)`.
//! Lattices are uniform in `(b, eta)` with `eta = log y`, which is the
//! group-adapted coordinate along `A`. In these coordinates
//!
//! * `Delta = y^2 d_b^2 + d_eta^2 - d_eta`,
//! * right-invariant fields: `H^R = b d_b + d_eta`, `X^R = d_b`.

use num_complex::Complex64;

use super::{D1_4, D1_4_DEN, D2_4, D2_4_DEN};
use crate::error::{domain, invalid, LabError, LabResult};
use crate::quadrature::cubic_stencil;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `rho` of `H^2`.
pub const RHO: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolvablePoint {
    pub b: f64,
    pub y: f64,
}

impl SolvablePoint {
    pub fn new(b: f64, y: f64) -> LabResult<Self> {
        if !(y > 0.0) || !b.is_finite() || !y.is_finite() {
            return domain(format!("solvable point needs finite b and y > 0, got ({b}, {y})"));
        }
        Ok(Self { b, y })
    }

    pub fn identity() -> Self {
        Self { b: 0.0, y: 1.0 }
    }

    /// `(b1, y1)(b2, y2) = (b1 + y1 b2, y1 y2)`
    pub fn mul(&self, other: &Self) -> Self {
        Self {
            b: self.b + self.y * other.b,
            y: self.y * other.y,
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            b: -self.b / self.y,
            y: 1.0 / self.y,
        }
    }

    pub fn eta(&self) -> f64 {
        self.y.ln()
    }
}

/// Modular function `delta(s) = y^{-2 rho}`.
pub fn delta_bar(s: &SolvablePoint) -> LabResult<f64> {
    if !(s.y > 0.0) {
        return domain("modular function needs y > 0");
    }
    Ok(s.y.powf(-2.0 * RHO))
}

/// `delta^{1/2}(s) = y^{-rho}`.
pub fn delta_half(s: &SolvablePoint) -> LabResult<f64> {
    Ok(delta_bar(s)?.sqrt())
}

/// Hyperbolic distance on the half-plane via
/// `sinh(d/2) = |z - w| / (2 sqrt(Im z Im w))`.
pub fn half_plane_distance(p: &SolvablePoint, q: &SolvablePoint) -> f64 {
    let dz = ((p.b - q.b).powi(2) + (p.y - q.y).powi(2)).sqrt();
    2.0 * (dz / (2.0 * (p.y * q.y).sqrt())).asinh()
}

/// `sigma(s) = d(s, o)`.
pub fn sigma(s: &SolvablePoint) -> f64 {
    half_plane_distance(s, &SolvablePoint::identity())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolvableLattice {
    b_min: f64,
    b_step: f64,
    nb: usize,
    eta_min: f64,
    eta_step: f64,
    neta: usize,
}

impl SolvableLattice {
    /// Lattice covering `[b_lo, b_hi] x [eta_lo, eta_hi]`; the steps are
    /// adjusted so both ranges are spanned exactly.
    pub fn new(b_range: (f64, f64), b_step: f64, eta_range: (f64, f64), eta_step: f64) -> LabResult<Self> {
        let (b_lo, b_hi) = b_range;
        let (e_lo, e_hi) = eta_range;
        if !(b_hi > b_lo) || !(e_hi > e_lo) || !(b_step > 0.0) || !(eta_step > 0.0) {
            return invalid("solvable lattice needs increasing ranges and positive steps");
        }
        let nb = ((b_hi - b_lo) / b_step).round() as usize + 1;
        let neta = ((e_hi - e_lo) / eta_step).round() as usize + 1;
        if nb < 5 || neta < 5 {
            return invalid("solvable lattice needs at least five nodes per axis");
        }
        Ok(Self {
            b_min: b_lo,
            b_step: (b_hi - b_lo) / (nb - 1) as f64,
            nb,
            eta_min: e_lo,
            eta_step: (e_hi - e_lo) / (neta - 1) as f64,
            neta,
        })
    }

    pub fn len(&self) -> usize {
        self.nb * self.neta
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nb, self.neta)
    }

    pub fn steps(&self) -> (f64, f64) {
        (self.b_step, self.eta_step)
    }

    pub fn index(&self, ib: usize, ie: usize) -> usize {
        ie * self.nb + ib
    }

    pub fn split(&self, idx: usize) -> (usize, usize) {
        (idx % self.nb, idx / self.nb)
    }

    pub fn b(&self, ib: usize) -> f64 {
        self.b_min + ib as f64 * self.b_step
    }

    pub fn eta(&self, ie: usize) -> f64 {
        self.eta_min + ie as f64 * self.eta_step
    }

    pub fn point(&self, idx: usize) -> SolvablePoint {
        let (ib, ie) = self.split(idx);
        SolvablePoint {
            b: self.b(ib),
            y: self.eta(ie).exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolvableField {
    lattice: SolvableLattice,
    values: Vec<Complex64>,
    mask: Vec<bool>,
}

impl SolvableField {
    pub fn from_fn(lattice: SolvableLattice, f: impl Fn(&SolvablePoint) -> Complex64) -> Self {
        let values = (0..lattice.len()).map(|i| f(&lattice.point(i))).collect();
        Self {
            lattice,
            values,
            mask: vec![true; lattice.len()],
        }
    }

    pub fn from_parts(lattice: SolvableLattice, values: Vec<Complex64>, mask: Vec<bool>) -> LabResult<Self> {
        if values.len() != lattice.len() || mask.len() != lattice.len() {
            return Err(LabError::GridMismatch("solvable field size does not match lattice".into()));
        }
        Ok(Self {
            lattice,
            values,
            mask,
        })
    }

    pub fn lattice(&self) -> &SolvableLattice {
        &self.lattice
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.values.len()).filter(move |&i| self.mask[i])
    }

    pub fn max_abs(&self) -> f64 {
        self.active().map(|i| self.values[i].norm()).fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(&SolvablePoint, Complex64) -> Complex64) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| if self.mask[i] { f(&self.lattice.point(i), *v) } else { *v })
            .collect();
        Self {
            lattice: self.lattice,
            values,
            mask: self.mask.clone(),
        }
    }

    /// `self + c * other` on the intersection of masks.
    pub fn axpy(&self, c: Complex64, other: &Self) -> LabResult<Self> {
        if self.lattice != other.lattice {
            return Err(LabError::GridMismatch("solvable lattices differ".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b * c).collect();
        let mask = self.mask.iter().zip(&other.mask).map(|(a, b)| *a && *b).collect();
        Ok(Self {
            lattice: self.lattice,
            values,
            mask,
        })
    }

    /// Restricts the mask to `keep`.
    pub fn masked_by(&self, keep: &[bool]) -> Self {
        let mask = self.mask.iter().zip(keep).map(|(a, b)| *a && *b).collect();
        Self {
            lattice: self.lattice,
            values: self.values.clone(),
            mask,
        }
    }

    /// Bicubic interpolation in `(b, eta)`.
    pub fn interpolate(&self, s: &SolvablePoint) -> LabResult<Complex64> {
        let lat = &self.lattice;
        let pos_b = (s.b - lat.b_min) / lat.b_step;
        let pos_e = (s.eta() - lat.eta_min) / lat.eta_step;
        let outside = || LabError::OutsideLattice(vec![s.b, s.y]);
        let (ob, wb) = cubic_stencil(pos_b, lat.nb).ok_or_else(outside)?;
        let (oe, we) = cubic_stencil(pos_e, lat.neta).ok_or_else(outside)?;
        let mut acc = ZERO;
        for (j, wj) in we.iter().enumerate() {
            for (i, wi) in wb.iter().enumerate() {
                let idx = lat.index(ob + i, oe + j);
                if !self.mask[idx] {
                    return Err(outside());
                }
                acc += self.values[idx] * (wi * wj);
            }
        }
        Ok(acc)
    }
}

/// Fourth-order derivatives at one node. `None` when a stencil node is
/// off-lattice or masked.
struct Derivs {
    db: Complex64,
    dbb: Complex64,
    de: Complex64,
    dee: Complex64,
    dbe: Complex64,
}

fn derivs(f: &SolvableField, idx: usize, mixed: bool) -> Option<Derivs> {
    let lat = &f.lattice;
    let (ib, ie) = lat.split(idx);
    if ib < 2 || ie < 2 || ib + 2 >= lat.nb || ie + 2 >= lat.neta {
        return None;
    }
    let v = |i: usize, j: usize| {
        let k = lat.index(i, j);
        f.mask[k].then(|| f.values[k])
    };
    let (hb, he) = (lat.b_step, lat.eta_step);
    let mut d = Derivs {
        db: ZERO,
        dbb: ZERO,
        de: ZERO,
        dee: ZERO,
        dbe: ZERO,
    };
    for s in 0..5 {
        let fb = v(ib + s - 2, ie)?;
        let fe = v(ib, ie + s - 2)?;
        d.db += fb * D1_4[s];
        d.dbb += fb * D2_4[s];
        d.de += fe * D1_4[s];
        d.dee += fe * D2_4[s];
    }
    d.db /= D1_4_DEN * hb;
    d.dbb /= D2_4_DEN * hb * hb;
    d.de /= D1_4_DEN * he;
    d.dee /= D2_4_DEN * he * he;
    if mixed {
        for (s, cs) in D1_4.iter().enumerate() {
            if *cs == 0.0 {
                continue;
            }
            for (t, ct) in D1_4.iter().enumerate() {
                if *ct == 0.0 {
                    continue;
                }
                d.dbe += v(ib + s - 2, ie + t - 2)? * (cs * ct);
            }
        }
        d.dbe /= D1_4_DEN * hb * D1_4_DEN * he;
    }
    Some(d)
}

fn apply(
    f: &SolvableField,
    mixed: bool,
    op: impl Fn(&SolvablePoint, Complex64, &Derivs) -> Complex64,
) -> SolvableField {
    let lat = f.lattice;
    let mut values = vec![ZERO; lat.len()];
    let mut mask = vec![false; lat.len()];
    for idx in 0..lat.len() {
        if !f.mask[idx] {
            continue;
        }
        if let Some(d) = derivs(f, idx, mixed) {
            values[idx] = op(&lat.point(idx), f.values[idx], &d);
            mask[idx] = true;
        }
    }
    SolvableField {
        lattice: lat,
        values,
        mask,
    }
}

/// Half-plane Laplacian `y^2 (d_b^2 + d_y^2)`.
pub fn laplace_half_plane(f: &SolvableField) -> SolvableField {
    apply(f, false, |s, _, d| d.dbb * (s.y * s.y) + d.dee - d.de)
}

/// `Delta_1 = -(Delta + rho^2)` on the half-plane.
pub fn delta_one_half_plane(f: &SolvableField) -> SolvableField {
    apply(f, false, |s, v, d| -(d.dbb * (s.y * s.y) + d.dee - d.de + v * (RHO * RHO)))
}

/// `L f(x) = delta^{1/2}(x) (Delta_1 g)(x^{-1})` with
/// `g = delta^{1/2} f~` and `f~(s) = f(s^{-1})`.
///
/// Both inversions are evaluated by bicubic interpolation; nodes whose
/// inverted points leave the usable part of the lattice are masked.
pub fn distinguished_laplacian_via_relation(f: &SolvableField) -> SolvableField {
    let lat = f.lattice;
    let mut g = vec![ZERO; lat.len()];
    let mut g_mask = vec![false; lat.len()];
    for idx in 0..lat.len() {
        let s = lat.point(idx);
        if let Ok(v) = f.interpolate(&s.inverse()) {
            g[idx] = v * s.y.powf(-RHO);
            g_mask[idx] = true;
        }
    }
    let g = SolvableField {
        lattice: lat,
        values: g,
        mask: g_mask,
    };
    let d1g = delta_one_half_plane(&g);
    let mut out = vec![ZERO; lat.len()];
    let mut mask = vec![false; lat.len()];
    for idx in 0..lat.len() {
        let s = lat.point(idx);
        if let Ok(v) = d1g.interpolate(&s.inverse()) {
            out[idx] = v * s.y.powf(-RHO);
            mask[idx] = true;
        }
    }
    SolvableField {
        lattice: lat,
        values: out,
        mask,
    }
}

/// `-[(H^R)^2 + kappa (X^R)^2] f`, the plain right-invariant sum of squares.
/// It annihilates constants, so on its own it cannot reproduce `L 1 = -4 rho^2`.
pub fn right_invariant_sum_of_squares(f: &SolvableField, kappa: f64) -> SolvableField {
    apply(f, true, |s, _, d| {
        let hh = d.db * s.b + d.dbb * (s.b * s.b) + d.dbe * (2.0 * s.b) + d.dee;
        -(hh + d.dbb * kappa)
    })
}

fn conjugated_parts(f: &SolvableField) -> (SolvableField, SolvableField) {
    // u = f / delta
    let u = f.map(|s, v| v * s.y.powf(2.0 * RHO));
    let h_part = right_invariant_sum_of_squares(&u, 0.0).map(|s, v| v * s.y.powf(-2.0 * RHO));
    let x_part = apply(&u, false, |s, _, d| -d.dbb * s.y.powf(-2.0 * RHO));
    (h_part, x_part)
}

/// `L f = delta (-[(H^R)^2 + kappa (X^R)^2]) (f / delta)`.
///
/// Conjugation by the modular function is a character, so the operator is
/// still right-invariant.
pub fn distinguished_laplacian_via_stencil(f: &SolvableField, kappa: f64) -> SolvableField {
    let (h_part, x_part) = conjugated_parts(f);
    h_part
        .axpy(Complex64::new(kappa, 0.0), &x_part)
        .expect("parts share a lattice")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaFit {
    pub kappa: f64,
    /// `max |L_rel f - L_stencil f| / max |L_rel f|`, worst over the fields.
    pub max_relative_residual: f64,
}

/// Least-squares `kappa` matching the stencil path to the relation path.
pub fn calibrate_kappa(fields: &[SolvableField]) -> LabResult<KappaFit> {
    if fields.is_empty() {
        return invalid("kappa calibration needs at least one field");
    }
    let mut num = 0.0;
    let mut den = 0.0;
    let mut parts = Vec::with_capacity(fields.len());
    for f in fields {
        let rel = distinguished_laplacian_via_relation(f);
        let (h_part, x_part) = conjugated_parts(f);
        for i in 0..rel.values.len() {
            if rel.mask[i] && h_part.mask[i] && x_part.mask[i] {
                let target = rel.values[i] - h_part.values[i];
                num += (x_part.values[i].conj() * target).re;
                den += x_part.values[i].norm_sqr();
            }
        }
        parts.push((rel, h_part, x_part));
    }
    if den == 0.0 {
        return Err(LabError::Degenerate("no overlap between operator masks".into()));
    }
    let kappa = num / den;
    let mut worst = 0.0f64;
    for (rel, h_part, x_part) in parts {
        let mut diff = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..rel.values.len() {
            if rel.mask[i] && h_part.mask[i] && x_part.mask[i] {
                let st = h_part.values[i] + x_part.values[i] * kappa;
                diff = diff.max((rel.values[i] - st).norm());
                scale = scale.max(rel.values[i].norm());
            }
        }
        if scale > 0.0 {
            worst = worst.max(diff / scale);
        }
    }
    Ok(KappaFit {
        kappa,
        max_relative_residual: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice() -> SolvableLattice {
        SolvableLattice::new((-1.5, 1.5), 0.02, (-1.0, 1.0), 0.02).unwrap()
    }

    #[test]
    fn group_law() {
        let s = SolvablePoint::new(0.7, 2.5).unwrap();
        let e = s.mul(&s.inverse());
        assert!((e.b).abs() < 1e-14 && (e.y - 1.0).abs() < 1e-14);
        assert_eq!(delta_bar(&SolvablePoint::identity()).unwrap(), 1.0);
        let d = delta_bar(&SolvablePoint::new(3.0, 1f64.exp()).unwrap()).unwrap();
        assert!((d - (-1f64).exp()).abs() < 1e-15);
        assert!(SolvablePoint::new(0.0, 0.0).is_err());
    }

    #[test]
    fn half_plane_laplacian_of_power() {
        let s = 0.7;
        let f = SolvableField::from_fn(lattice(), |p| Complex64::new(p.y.powf(s), 0.0));
        let lap = laplace_half_plane(&f);
        let res = lap.axpy(Complex64::new(-s * (s - 1.0), 0.0), &f).unwrap();
        assert!(res.max_abs() < 1e-8, "{}", res.max_abs());
    }

    #[test]
    fn sum_of_squares_kills_constants() {
        let one = SolvableField::from_fn(lattice(), |_| Complex64::new(1.0, 0.0));
        assert!(right_invariant_sum_of_squares(&one, 0.5).max_abs() < 1e-10);
        let l1 = distinguished_laplacian_via_stencil(&one, 0.5);
        let res = l1.map(|_, v| v + 1.0);
        assert!(res.max_abs() < 1e-7, "{}", res.max_abs());
    }

    #[test]
    fn relation_path_on_constants() {
        let one = SolvableField::from_fn(lattice(), |_| Complex64::new(1.0, 0.0));
        let l1 = distinguished_laplacian_via_relation(&one);
        assert!(l1.active().count() > 100);
        assert!(l1.map(|_, v| v + 1.0).max_abs() < 1e-8);
    }
}

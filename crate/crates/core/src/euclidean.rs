//! Periodic spectral discretisation of `R^d` (`d = 1, 2`): the Laplacian,
//! eigen-sequence checks, and spectral-annulus localisation.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::engine::{assign_verdict, index_growth, rayleigh, ConclusionReport, HypothesisReport, SequenceReport, Thresholds};
use crate::error::{invalid, LabError, LabResult};
use crate::quadrature::least_squares_slope;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct EuclideanField {
    d: usize,
    box_len: f64,
    n: usize,
    values: Vec<Complex64>,
}

impl EuclideanField {
    pub fn new(d: usize, box_len: f64, n: usize, values: Vec<Complex64>) -> LabResult<Self> {
        if d != 1 && d != 2 {
            return invalid(format!("Euclidean fields exist for d = 1, 2 (got {d})"));
        }
        if !n.is_power_of_two() || n < 4 {
            return invalid(format!("samples per axis must be a power of two >= 4, got {n}"));
        }
        if !(box_len > 0.0) {
            return invalid("box length must be positive");
        }
        if values.len() != n.pow(d as u32) {
            return Err(LabError::GridMismatch(format!(
                "{} values for {}^{} samples",
                values.len(),
                n,
                d
            )));
        }
        Ok(Self { d, box_len, n, values })
    }

    /// Samples `f` at `x_k = -L/2 + k L / N` on each axis; `x[1] = 0` when `d = 1`.
    pub fn from_fn(d: usize, box_len: f64, n: usize, f: impl Fn(&[f64; 2]) -> Complex64) -> LabResult<Self> {
        let h = box_len / n as f64;
        let coord = |k: usize| -0.5 * box_len + k as f64 * h;
        let values = if d == 1 {
            (0..n).map(|i| f(&[coord(i), 0.0])).collect()
        } else {
            (0..n * n).map(|idx| f(&[coord(idx / n), coord(idx % n)])).collect()
        };
        Self::new(d, box_len, n, values)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn box_len(&self) -> f64 {
        self.box_len
    }

    pub fn samples_per_axis(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.d == other.d && self.n == other.n && self.box_len == other.box_len
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Angular frequency `2 pi k / L` of FFT bin `k`.
    pub fn frequency(&self, k: usize) -> f64 {
        let n = self.n as i64;
        let k = k as i64;
        let signed = if k <= n / 2 { k } else { k - n };
        2.0 * PI * signed as f64 / self.box_len
    }

    /// `|xi|^2` of every bin, in the storage order of [`Self::spectrum`].
    pub fn frequency_norms_sq(&self) -> Vec<f64> {
        if self.d == 1 {
            (0..self.n).map(|k| self.frequency(k).powi(2)).collect()
        } else {
            (0..self.n * self.n)
                .map(|idx| self.frequency(idx / self.n).powi(2) + self.frequency(idx % self.n).powi(2))
                .collect()
        }
    }

    fn transform(&self, data: &mut [Complex64], direction: FftDirection) {
        let mut planner = FftPlanner::<f64>::new();
        let fft: std::sync::Arc<dyn Fft<f64>> = planner.plan_fft(self.n, direction);
        if self.d == 1 {
            fft.process(data);
        } else {
            // rows, then columns
            for row in data.chunks_mut(self.n) {
                fft.process(row);
            }
            let mut col = vec![ZERO; self.n];
            for c in 0..self.n {
                for (r, v) in col.iter_mut().enumerate() {
                    *v = data[r * self.n + c];
                }
                fft.process(&mut col);
                for (r, v) in col.iter().enumerate() {
                    data[r * self.n + c] = *v;
                }
            }
        }
    }

    /// Discrete Fourier coefficients, normalised so a unit-amplitude
    /// exponential has coefficient 1.
    pub fn spectrum(&self) -> Vec<Complex64> {
        let mut data = self.values.clone();
        self.transform(&mut data, FftDirection::Forward);
        let scale = 1.0 / self.values.len() as f64;
        data.iter_mut().for_each(|v| *v *= scale);
        data
    }

    /// Applies a Fourier multiplier `m(|xi|^2)`.
    pub fn apply_multiplier(&self, m: impl Fn(f64) -> Complex64) -> Self {
        let mut data = self.spectrum();
        for (v, k2) in data.iter_mut().zip(self.frequency_norms_sq()) {
            *v *= m(k2);
        }
        self.transform(&mut data, FftDirection::Inverse);
        Self {
            values: data,
            ..self.clone()
        }
    }

    pub fn axpy(&self, c: Complex64, other: &Self) -> LabResult<Self> {
        if !self.same_grid(other) {
            return Err(LabError::GridMismatch("Euclidean grids differ".into()));
        }
        Ok(Self {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b * c).collect(),
            ..self.clone()
        })
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * c).collect(),
            ..self.clone()
        }
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Spectral Laplacian, multiplier `-|xi|^2`.
pub fn euclid_laplacian(f: &EuclideanField) -> EuclideanField {
    f.apply_multiplier(|k2| Complex64::new(-k2, 0.0))
}

/// `L_1 = L - rho^2`.
pub fn euclid_shifted_laplacian(f: &EuclideanField, rho_sq: f64) -> EuclideanField {
    f.apply_multiplier(|k2| Complex64::new(-k2 - rho_sq, 0.0))
}

fn check_sequence_grid(seq: &[EuclideanField]) -> LabResult<usize> {
    if seq.len() < 3 || seq.len().is_multiple_of(2) {
        return invalid("sequence must be indexed by j in [-J, J] with J >= 1");
    }
    if seq.iter().any(|f| !f.same_grid(&seq[0])) {
        return Err(LabError::GridMismatch("sequence fields do not share one grid".into()));
    }
    Ok(seq.len() / 2)
}

/// Checks `L_1 f_j = (alpha^2 + rho^2) f_{j+1}` and the uniform bound for a
/// sequence stored as `seq[j + J]`, and whether `f_0` is the predicted
/// eigenfunction `L_1 f_0 = -(alpha^2 + rho^2) f_0`.
pub fn euclid_sequence_check(
    seq: &[EuclideanField],
    alpha: f64,
    rho_sq: f64,
    thresholds: &Thresholds,
) -> LabResult<SequenceReport> {
    let big_j = check_sequence_grid(seq)? as i64;
    let c = alpha * alpha + rho_sq;
    if !(c > 0.0) {
        return invalid("alpha^2 + rho^2 must be positive");
    }
    let applied: Vec<EuclideanField> = seq.iter().map(|f| euclid_shifted_laplacian(f, rho_sq)).collect();
    let mut recursion = Vec::with_capacity(seq.len() - 1);
    for k in 0..seq.len() - 1 {
        let diff = applied[k].axpy(Complex64::new(-c, 0.0), &seq[k + 1])?;
        let abs = diff.sup_norm();
        let scale = c * seq[k + 1].sup_norm();
        recursion.push(if scale > 0.0 { abs / scale } else { abs });
    }
    let norms: Vec<f64> = seq.iter().map(|f| f.sup_norm()).collect();

    let f0 = &seq[big_j as usize];
    let af0 = &applied[big_j as usize];
    let predicted = Complex64::new(-c, 0.0);
    let err = af0.axpy(-predicted, f0)?.sup_norm();
    let denom = af0.sup_norm().max(c * f0.sup_norm());
    let (kappa_star, kappa_residual) = rayleigh(f0.values(), af0.values());
    let trend = index_growth(&norms);
    let hypotheses = HypothesisReport {
        indices: (-big_j..=big_j).collect(),
        recursion_ok: recursion.iter().all(|r| *r <= thresholds.pass),
        recursion_residuals: recursion,
        uniform_bound: norms.iter().cloned().fold(0.0, f64::max),
        norms,
        trend_growth: trend,
        size_ok: trend <= thresholds.growth,
    };
    let conclusion = ConclusionReport {
        predicted,
        residual: if denom > 0.0 { err / denom } else { 0.0 },
        kappa_star,
        kappa_residual,
        recovery_error: None,
    };
    let verdict = assign_verdict(&hypotheses, &conclusion, thresholds);
    Ok(SequenceReport {
        label: format!("euclidean d={} alpha={alpha} rho^2={rho_sq} J={big_j}", seq[0].d),
        eigenvalue: c,
        hypotheses,
        conclusion,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnulusReport {
    pub alpha: f64,
    pub epsilon: f64,
    /// `outer_mass[j]`, `j = 0..=J`: reconstructed spectral mass with `|xi| >= alpha + eps`.
    pub outer_mass: Vec<f64>,
    /// `inner_mass[j]`, `j = 0..=J`, from `f_{-j}`: mass with `|xi| <= alpha - eps`.
    pub inner_mass: Vec<f64>,
    pub fitted_rate: f64,
    pub predicted_rate: f64,
}

impl AnnulusReport {
    pub fn rate_error(&self) -> f64 {
        (self.fitted_rate / self.predicted_rate - 1.0).abs()
    }
}

/// First index used when fitting the decay rate.
pub const ANNULUS_FIT_START: usize = 4;

/// Reconstructs `f_0^` from `f_j^` through the multiplier
/// `((alpha^2 + rho^2) / (|xi|^2 + rho^2))^j` and measures how much of it
/// lies outside the annulus `alpha - eps <= |xi| <= alpha + eps`.
pub fn annulus_localization(
    seq: &[EuclideanField],
    alpha: f64,
    epsilon: f64,
    rho_sq: f64,
) -> LabResult<AnnulusReport> {
    let big_j = check_sequence_grid(seq)?;
    if !(epsilon > 0.0) {
        return invalid("epsilon must be positive");
    }
    let c = alpha * alpha + rho_sq;
    let k2 = seq[0].frequency_norms_sq();
    let outer_edge = (alpha + epsilon).powi(2);
    let inner_edge = if alpha > epsilon { (alpha - epsilon).powi(2) } else { -1.0 };
    let tol = 1e-12 * outer_edge.max(1.0);
    let mass = |field: &EuclideanField, j: i64, keep: &dyn Fn(f64) -> bool| -> f64 {
        field
            .spectrum()
            .iter()
            .zip(&k2)
            .filter(|(_, k)| keep(**k))
            .map(|(v, k)| (v.norm() * (c / (k + rho_sq)).powi(j as i32)).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let outer: Vec<f64> = (0..=big_j)
        .map(|j| mass(&seq[big_j + j], j as i64, &|k| k >= outer_edge - tol))
        .collect();
    let inner: Vec<f64> = (0..=big_j)
        .map(|j| mass(&seq[big_j - j], -(j as i64), &|k| k <= inner_edge + tol && k + rho_sq > 0.0))
        .collect();
    let xs: Vec<f64> = (ANNULUS_FIT_START..=big_j).map(|j| j as f64).collect();
    let ys: Vec<f64> = (ANNULUS_FIT_START..=big_j).map(|j| outer[j].max(1e-300).ln()).collect();
    let fitted_rate = least_squares_slope(&xs, &ys).map(|(s, _)| s.exp()).unwrap_or(f64::NAN);
    Ok(AnnulusReport {
        alpha,
        epsilon,
        outer_mass: outer,
        inner_mass: inner,
        fitted_rate,
        predicted_rate: c / ((alpha + epsilon).powi(2) + rho_sq),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cosine_field(freq: f64, box_len: f64) -> EuclideanField {
        EuclideanField::from_fn(1, box_len, 64, |x| Complex64::new((freq * x[0]).cos(), 0.0)).unwrap()
    }

    #[test]
    fn laplacian_of_cosine_and_constant() {
        let l = 2.0 * PI;
        let f = cosine_field(3.0, l);
        let lf = euclid_laplacian(&f);
        assert!(lf.axpy(Complex64::new(9.0, 0.0), &f).unwrap().sup_norm() < 1e-12);
        let one = EuclideanField::from_fn(2, l, 16, |_| Complex64::new(2.0, 0.0)).unwrap();
        assert!(euclid_laplacian(&one).sup_norm() < 1e-12);
    }

    #[test]
    fn laplacian_of_gaussian() {
        let f = EuclideanField::from_fn(1, 40.0, 512, |x| Complex64::new((-x[0] * x[0]).exp(), 0.0)).unwrap();
        let lf = euclid_laplacian(&f);
        let exact =
            EuclideanField::from_fn(1, 40.0, 512, |x| Complex64::new((4.0 * x[0] * x[0] - 2.0) * (-x[0] * x[0]).exp(), 0.0))
                .unwrap();
        assert!(lf.axpy(Complex64::new(-1.0, 0.0), &exact).unwrap().sup_norm() < 1e-8);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(EuclideanField::new(1, 1.0, 6, vec![ZERO; 6]).is_err());
        assert!(EuclideanField::new(3, 1.0, 4, vec![ZERO; 64]).is_err());
        let a = cosine_field(1.0, 2.0 * PI);
        let b = EuclideanField::from_fn(1, 4.0 * PI, 64, |_| ZERO).unwrap();
        assert!(euclid_sequence_check(&[a.clone(), b, a], 1.0, 0.0, &Thresholds::default()).is_err());
    }
}

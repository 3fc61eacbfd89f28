//! Shared problem types: the source covariance family, error covariances,
//! diagonal-loading test channels, and rate pairs.
//!
//! All covariance work is done in closed form, either on symmetric 2x2
//! matrices or on the exchangeable family `(diag - off) I + off 11^T`.
//! Generic dense routines live in [`crate::oracle`] and are used only to
//! cross-check these closed forms in tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for positive-definiteness checks on leading principal minors.
pub const PD_TOL: f64 = 1e-12;

/// A symmetric 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub m11: f64,
    pub m12: f64,
    pub m22: f64,
}

impl Mat2 {
    pub fn new(m11: f64, m12: f64, m22: f64) -> Self {
        Self { m11, m12, m22 }
    }

    pub fn det(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m12
    }

    pub fn inverse(&self) -> Self {
        let det = self.det();
        Self::new(self.m22 / det, -self.m12 / det, self.m11 / det)
    }

    /// `v^T M v`.
    pub fn quad_form(&self, v: [f64; 2]) -> f64 {
        self.m11 * v[0] * v[0] + 2.0 * self.m12 * v[0] * v[1] + self.m22 * v[1] * v[1]
    }

    pub fn mul_vec(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.m11 * v[0] + self.m12 * v[1],
            self.m12 * v[0] + self.m22 * v[1],
        ]
    }

    /// Leading-principal-minor test with tolerance [`PD_TOL`].
    pub fn is_positive_definite(&self) -> bool {
        self.m11 > PD_TOL && self.det() > PD_TOL * PD_TOL
    }

    /// Whether `self <= other` in the positive-semidefinite order, up to `tol`.
    pub fn dominated_by(&self, other: &Mat2, tol: f64) -> bool {
        let diff = Mat2::new(
            other.m11 - self.m11,
            other.m12 - self.m12,
            other.m22 - self.m22,
        );
        diff.m11 >= -tol && diff.m22 >= -tol && diff.det() >= -tol * (1.0 + diff.m11 + diff.m22)
    }

    /// Symmetric square root, valid for positive-definite input.
    pub fn sqrt(&self) -> Self {
        // For A = [[a, b], [b, c]]: sqrt(A) = (A + sqrt(det) I) / s with
        // s = sqrt(a + c + 2 sqrt(det)).
        let sd = self.det().sqrt();
        let s = (self.m11 + self.m22 + 2.0 * sd).sqrt();
        Self::new((self.m11 + sd) / s, self.m12 / s, (self.m22 + sd) / s)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        vec![vec![self.m11, self.m12], vec![self.m12, self.m22]]
    }
}

/// A matrix of the exchangeable family `(diag - off) I + off 11^T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exchangeable {
    pub n: usize,
    pub diag: f64,
    pub off: f64,
}

impl Exchangeable {
    pub fn new(n: usize, diag: f64, off: f64) -> Self {
        Self { n, diag, off }
    }

    /// `(diag - off)^(n-1) * (diag + (n-1) off)`.
    pub fn det(&self) -> f64 {
        let a = self.diag - self.off;
        a.powi(self.n as i32 - 1) * (self.diag + (self.n as f64 - 1.0) * self.off)
    }

    /// Closed-form inverse; the family is closed under inversion.
    pub fn inverse(&self) -> Self {
        let a = self.diag - self.off;
        let b = self.off;
        let denom = a * (a + self.n as f64 * b);
        let off_inv = -b / denom;
        Self::new(self.n, 1.0 / a + off_inv, off_inv)
    }

    /// Adds `lambda` to every diagonal entry.
    pub fn add_scalar_diag(&self, lambda: f64) -> Self {
        Self::new(self.n, self.diag + lambda, self.off)
    }

    pub fn is_positive_definite(&self) -> bool {
        let a = self.diag - self.off;
        a > PD_TOL && self.diag + (self.n as f64 - 1.0) * self.off > PD_TOL
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| if i == j { self.diag } else { self.off })
                    .collect()
            })
            .collect()
    }

    pub fn to_mat2(&self) -> Result<Mat2> {
        if self.n != 2 {
            return Err(Error::NotTwoSources { l: self.n });
        }
        Ok(Mat2::new(self.diag, self.off, self.diag))
    }
}

/// The source covariance: unit variances, common correlation `rho`, and
/// `num_sources >= 2` exchangeable components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceModel {
    rho: f64,
    num_sources: usize,
}

impl SourceModel {
    /// The extremes `rho = 0` and `rho = 1` are rejected; both are handled
    /// by classical single-source results and fall outside this library.
    pub fn new(rho: f64, num_sources: usize) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) || !rho.is_finite() {
            return Err(Error::InvalidCorrelation { rho });
        }
        if num_sources < 2 {
            return Err(Error::InvalidSourceCount { l: num_sources });
        }
        Ok(Self { rho, num_sources })
    }

    /// Two-source model, the common case.
    pub fn pair(rho: f64) -> Result<Self> {
        Self::new(rho, 2)
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn num_sources(&self) -> usize {
        self.num_sources
    }

    /// The covariance matrix in exchangeable form.
    pub fn covariance(&self) -> Exchangeable {
        Exchangeable::new(self.num_sources, 1.0, self.rho)
    }

    /// The 2x2 covariance; errors when the model has more than two sources.
    pub fn covariance2(&self) -> Result<Mat2> {
        self.covariance().to_mat2()
    }

    /// `det K_y = (1 - rho)^(L-1) (1 + (L-1) rho)`.
    pub fn covariance_det(&self) -> f64 {
        self.covariance().det()
    }
}

/// Error covariance in `(d_1, ..., d_L, theta)` form: per-coordinate
/// distortions plus a single error-correlation coefficient.
///
/// For two sources the off-diagonal entry is `theta * sqrt(d1 d2)`; for
/// `L > 2` the distortions must be equal (the exchangeable case) and
/// `theta` must exceed `-1/(L-1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorCov {
    d: Vec<f64>,
    theta: f64,
}

impl ErrorCov {
    pub fn new2(d1: f64, d2: f64, theta: f64) -> Result<Self> {
        for &d in &[d1, d2] {
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::InvalidDistortion { value: d });
            }
        }
        if !(theta > -1.0 && theta < 1.0) {
            return Err(Error::InvalidTheta { theta });
        }
        Ok(Self {
            d: vec![d1, d2],
            theta,
        })
    }

    pub fn new_symmetric(l: usize, d: f64, theta: f64) -> Result<Self> {
        if l < 2 {
            return Err(Error::InvalidSourceCount { l });
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::InvalidDistortion { value: d });
        }
        if !(theta > -1.0 / (l as f64 - 1.0) && theta < 1.0) {
            return Err(Error::InvalidTheta { theta });
        }
        Ok(Self {
            d: vec![d; l],
            theta,
        })
    }

    pub fn distortions(&self) -> &[f64] {
        &self.d
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn matrix2(&self) -> Result<Mat2> {
        if self.d.len() != 2 {
            return Err(Error::NotTwoSources { l: self.d.len() });
        }
        let off = self.theta * (self.d[0] * self.d[1]).sqrt();
        Ok(Mat2::new(self.d[0], off, self.d[1]))
    }
}

/// A distributed Gaussian test channel, parameterized by the nonnegative
/// diagonal loadings `lambda_j` with `D^{-1} = K_y^{-1} + Lambda`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestChannel {
    lambda: Vec<f64>,
}

impl TestChannel {
    pub fn new(lambda: Vec<f64>) -> Result<Self> {
        for &l in &lambda {
            if !(l >= 0.0) || !l.is_finite() {
                return Err(Error::NegativeLoading { value: l });
            }
        }
        Ok(Self { lambda })
    }

    pub fn pair(lambda1: f64, lambda2: f64) -> Result<Self> {
        Self::new(vec![lambda1, lambda2])
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    /// Channel gain `c_j = sqrt(lambda_j / (1 + lambda_j))`, in `[0, 1)`.
    pub fn gain(&self, j: usize) -> f64 {
        (self.lambda[j] / (1.0 + self.lambda[j])).sqrt()
    }

    /// Noise variance `1 - c_j^2 = 1 / (1 + lambda_j)` of the unit-variance
    /// channel output.
    pub fn noise_var(&self, j: usize) -> f64 {
        1.0 / (1.0 + self.lambda[j])
    }
}

/// A pair of encoder rates in bits per sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub r1: f64,
    pub r2: f64,
}

impl RatePoint {
    pub fn new(r1: f64, r2: f64) -> Result<Self> {
        for &r in &[r1, r2] {
            if !(r >= 0.0) || !r.is_finite() {
                return Err(Error::InvalidRate { value: r });
            }
        }
        Ok(Self { r1, r2 })
    }

    pub fn sum(&self) -> f64 {
        self.r1 + self.r2
    }
}

/// `I(y; u) = 0.5 log2(|K_y| / |D|)` for a test channel with error
/// covariance `D`. Requires both matrices positive definite and `D`
/// dominated by `K_y`.
pub fn mutual_info_bits(ky: &Mat2, d: &Mat2) -> Result<f64> {
    if !ky.is_positive_definite() {
        return Err(Error::NotPositiveDefinite {
            what: "source covariance",
        });
    }
    if !d.is_positive_definite() {
        return Err(Error::NotPositiveDefinite {
            what: "error covariance",
        });
    }
    if !d.dominated_by(ky, 1e-9) {
        return Err(Error::NotDominated);
    }
    Ok(0.5 * (ky.det() / d.det()).log2().max(0.0))
}

//! The rate region of the two-encoder problem: the two marginal bounds,
//! the sum-rate bound, membership, dominant-boundary tracing, and the
//! special-case inclusion that applies when the distortion pair is not a
//! test-channel diagonal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::RatePoint;
use crate::numeric::{half_log2_plus, linspace};

/// Tolerance on the realizable-diagonal boundary test.
const DIAG_TOL: f64 = 1e-12;

/// A two-encoder problem instance: correlation and target distortions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    rho: f64,
    d1: f64,
    d2: f64,
}

/// Dominant boundary of the rate region: for each swept `R1`, the smallest
/// `R2` keeping the pair inside the region. Sweep points with no finite
/// `R2` (below the marginal asymptote) are omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionTrace {
    pub points: Vec<RatePoint>,
    pub r1_max: f64,
}

/// `beta(d1, d2) = 1 + sqrt(1 + 4 rho^2 d1 d2 / (1 - rho^2)^2)`.
pub fn beta(d1: f64, d2: f64, rho: f64) -> f64 {
    let c = 1.0 - rho * rho;
    1.0 + (1.0 + 4.0 * rho * rho * d1 * d2 / (c * c)).sqrt()
}

/// The marginal bound: the least `R_j` compatible with the other encoder
/// spending `other_rate` bits, `0.5 log2+[(1 - rho^2 + rho^2 4^-other) / d]`.
pub fn marginal_min_rate(other_rate: f64, d: f64, rho: f64) -> f64 {
    let r2 = rho * rho;
    half_log2_plus((1.0 - r2 + r2 * (-2.0 * other_rate).exp2()) / d)
}

/// Whether `(d1, d2)` appears as the diagonal of some test-channel error
/// covariance: `max(d) <= min(1, rho^2 min(d) + 1 - rho^2)`.
pub fn in_diag_dg(d1: f64, d2: f64, rho: f64) -> bool {
    let hi = d1.max(d2);
    let lo = d1.min(d2);
    hi <= (rho * rho * lo + 1.0 - rho * rho).min(1.0) + DIAG_TOL
}

impl RegionSpec {
    pub fn new(rho: f64, d1: f64, d2: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) || !rho.is_finite() {
            return Err(Error::InvalidCorrelation { rho });
        }
        for &d in &[d1, d2] {
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::InvalidDistortion { value: d });
            }
        }
        Ok(Self { rho, d1, d2 })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn d1(&self) -> f64 {
        self.d1
    }

    pub fn d2(&self) -> f64 {
        self.d2
    }

    pub fn beta(&self) -> f64 {
        beta(self.d1, self.d2, self.rho)
    }

    /// Least achievable `R1 + R2`:
    /// `0.5 log2+[(1 - rho^2) beta / (2 d1 d2)]`.
    pub fn sum_rate_star(&self) -> f64 {
        let c = 1.0 - self.rho * self.rho;
        half_log2_plus(c * self.beta() / (2.0 * self.d1 * self.d2))
    }

    /// Marginal bound on `R1` given `R2`.
    pub fn r1_star_min_rate(&self, r2: f64) -> f64 {
        marginal_min_rate(r2, self.d1, self.rho)
    }

    /// Marginal bound on `R2` given `R1`.
    pub fn r2_star_min_rate(&self, r1: f64) -> f64 {
        marginal_min_rate(r1, self.d2, self.rho)
    }

    pub fn in_diag_dg(&self) -> bool {
        in_diag_dg(self.d1, self.d2, self.rho)
    }

    /// Membership in the rate region: all three constituent inequalities,
    /// each relaxed additively by `tol` bits. Pass `0.0` for strictness.
    pub fn contains(&self, p: RatePoint, tol: f64) -> bool {
        p.r1 + tol >= self.r1_star_min_rate(p.r2)
            && p.r2 + tol >= self.r2_star_min_rate(p.r1)
            && p.sum() + tol >= self.sum_rate_star()
    }

    /// Smallest `R2` admissible from the first marginal bound at `r1`:
    /// the constraint `r1 >= marginal(R2)` inverted for `R2`. `None` when
    /// `r1` sits below the large-`R2` asymptote of that bound.
    fn r2_floor_from_r1_bound(&self, r1: f64) -> Option<f64> {
        let c = 1.0 - self.rho * self.rho;
        let reach = self.d1 * (2.0 * r1).exp2();
        if reach >= 1.0 {
            return Some(0.0);
        }
        let q = (reach - c) / (self.rho * self.rho);
        if q <= 0.0 {
            None
        } else {
            Some((-0.5 * q.log2()).max(0.0))
        }
    }

    /// Smallest `R2` with `(r1, R2)` in the region, or `None` when no
    /// finite rate suffices. Each constituent bound inverts in closed form,
    /// so the minimum is the largest of the three floors.
    pub fn min_boundary_r2(&self, r1: f64) -> Option<f64> {
        let from_marginal2 = self.r2_star_min_rate(r1);
        let from_sum = (self.sum_rate_star() - r1).max(0.0);
        let from_marginal1 = self.r2_floor_from_r1_bound(r1)?;
        Some(from_marginal2.max(from_sum).max(from_marginal1))
    }

    /// Boundary floor of the marginal-only intersection (both marginal
    /// bounds, no sum bound), used by the special-case inclusion check.
    fn min_marginal_r2(&self, r1: f64) -> Option<f64> {
        let from_marginal2 = self.r2_star_min_rate(r1);
        let from_marginal1 = self.r2_floor_from_r1_bound(r1)?;
        Some(from_marginal2.max(from_marginal1))
    }

    /// Sweeps `R1` uniformly over `[0, sum_rate_star + 2]` and records the
    /// dominant boundary.
    pub fn trace_boundary(&self, n_points: usize) -> Result<RegionTrace> {
        if n_points < 2 {
            return Err(Error::InvalidGrid {
                min: 2,
                got: n_points,
            });
        }
        let r1_max = self.sum_rate_star() + 2.0;
        let points = linspace(0.0, r1_max, n_points)
            .into_iter()
            .filter_map(|r1| {
                self.min_boundary_r2(r1)
                    .map(|r2| RatePoint { r1, r2 })
            })
            .collect();
        Ok(RegionTrace { points, r1_max })
    }

    /// For a distortion pair that is *not* a realizable test-channel
    /// diagonal, every point satisfying both marginal bounds already
    /// satisfies the sum-rate bound. This samples the marginal-intersection
    /// boundary and verifies the inclusion pointwise.
    pub fn donecase_inclusion_check(&self, samples: usize) -> Result<bool> {
        if self.in_diag_dg() {
            return Err(Error::InsideDiagDg {
                d1: self.d1,
                d2: self.d2,
            });
        }
        let sum_star = self.sum_rate_star();
        let r1_max = half_log2_plus(1.0 / (self.d1 * self.d2)) + 2.0;
        let ok = linspace(0.0, r1_max, samples.max(2))
            .into_iter()
            .filter_map(|r1| self.min_marginal_r2(r1).map(|r2| r1 + r2))
            .all(|sum| sum + 1e-9 >= sum_star);
        Ok(ok)
    }
}

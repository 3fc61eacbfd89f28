//! The weighted-sum estimation problem for two encoders: a decoder that
//! only needs `mu^T y` under a single squared-error cap.
//!
//! Positive weight vectors couple to a CEO problem: scale `mu` so that the
//! hidden variable `x` with `y_j = a_j x + n_j` satisfies `E[x | y] = mu^T y`,
//! and the weighted-sum distortion differs from the CEO distortion by the
//! fixed residual `gamma`. The sum rate then has a water-filling style
//! closed form, and the whole rate region is described by two auxiliary
//! quantization rates `r_1, r_2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{RatePoint, SourceModel};
use crate::numeric::{golden_section_min, half_log2_plus};
use crate::test_channel::lambda_from_diag;

/// A weighted-sum target: positive weights and an allowable distortion.
/// Weights with a zero coordinate belong to the single-marginal bounds in
/// [`crate::two_encoder`] and are rejected here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuSpec {
    mu: [f64; 2],
    d: f64,
}

impl MuSpec {
    pub fn new(mu1: f64, mu2: f64, d: f64) -> Result<Self> {
        if !(mu1 > 0.0 && mu2 > 0.0) || !mu1.is_finite() || !mu2.is_finite() {
            return Err(Error::NonPositiveWeight { mu1, mu2 });
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::InvalidDistortion { value: d });
        }
        Ok(Self { mu: [mu1, mu2], d })
    }

    pub fn mu(&self) -> [f64; 2] {
        self.mu
    }

    pub fn d(&self) -> f64 {
        self.d
    }
}

/// The CEO coupling induced by a weight direction: per-encoder SNRs, the
/// residual variance `gamma` of `x` given `y`, the observation gains, and
/// the factor that rescales the input weights onto the coupled form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CeoCoupling {
    pub snr1: f64,
    pub snr2: f64,
    pub gamma: f64,
    pub a1: f64,
    pub a2: f64,
    /// Multiplying the input `mu` by this factor yields the normalized
    /// weights; distortions rescale by its square.
    pub scale: f64,
}

impl CeoCoupling {
    /// The normalized weight vector `gamma * SNR_j / a_j`.
    pub fn normalized_mu(&self) -> [f64; 2] {
        [
            self.gamma * self.snr1 / self.a1,
            self.gamma * self.snr2 / self.a2,
        ]
    }

    /// Distortion in the normalized problem: quadratic forms scale with
    /// the square of the weight scale.
    pub fn normalized_distortion(&self, d: f64) -> f64 {
        self.scale * self.scale * d
    }
}

/// Solution of the sum-rate program in closed form: optimal loadings, the
/// auxiliary quantization rates, the stationarity multiplier, and the
/// loading shorthands `s_j = 1 + (1 - rho^2) lambda_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktSolution {
    pub lambda1: f64,
    pub lambda2: f64,
    pub r1: f64,
    pub r2: f64,
    pub nu: f64,
    pub s1: f64,
    pub s2: f64,
    pub sum_rate: f64,
}

/// Couples a positive weight direction to its CEO problem. Only the ratio
/// of the weights matters for the SNRs; the returned `scale` maps the given
/// vector onto the normalized one.
pub fn normalize_mu(mu: [f64; 2], rho: f64) -> Result<CeoCoupling> {
    if !(rho > 0.0 && rho < 1.0) || !rho.is_finite() {
        return Err(Error::InvalidCorrelation { rho });
    }
    if !(mu[0] > 0.0 && mu[1] > 0.0) {
        return Err(Error::NonPositiveWeight {
            mu1: mu[0],
            mu2: mu[1],
        });
    }
    let c = rho / (1.0 - rho * rho);
    let snr1 = c * (mu[0] / mu[1] + rho);
    let snr2 = c * (mu[1] / mu[0] + rho);
    let gamma = 1.0 / (1.0 + snr1 + snr2);
    let a1 = (snr1 / (1.0 + snr1)).sqrt();
    let a2 = (snr2 / (1.0 + snr2)).sqrt();
    let scale = gamma * (snr1 * snr2 / (rho * mu[0] * mu[1])).sqrt();
    Ok(CeoCoupling {
        snr1,
        snr2,
        gamma,
        a1,
        a2,
        scale,
    })
}

/// Closed-form solution of the sum-rate program.
///
/// In the normalized problem the coverage constraint is met with equality
/// whenever it is active, which pins the multiplier; each quantization
/// rate follows from stationarity, with the weaker-SNR side clamped to
/// zero when stationarity would push it negative. When the distortion cap
/// is loose the zero solution is returned outright with a zero multiplier.
pub fn kkt_solve(spec: &MuSpec, rho: f64) -> Result<KktSolution> {
    let coupling = normalize_mu(spec.mu(), rho)?;
    let d_n = coupling.normalized_distortion(spec.d());
    let gamma = coupling.gamma;
    let k = 1.0 / (d_n + gamma);
    let c2 = 1.0 - rho * rho;

    let build = |r1: f64, r2: f64, nu: f64| -> KktSolution {
        let lambda = |r: f64, snr: f64| ((2.0 * r).exp2() - 1.0) * (1.0 + snr);
        let l1 = lambda(r1, coupling.snr1);
        let l2 = lambda(r2, coupling.snr2);
        KktSolution {
            lambda1: l1,
            lambda2: l2,
            r1,
            r2,
            nu,
            s1: 1.0 + c2 * l1,
            s2: 1.0 + c2 * l2,
            sum_rate: half_log2_plus(k) + r1 + r2,
        }
    };

    if k <= 1.0 {
        return Ok(build(0.0, 0.0, 0.0));
    }

    let (snr1, snr2) = (coupling.snr1, coupling.snr2);
    let nu = 2.0 * gamma * (d_n + gamma) / d_n;
    if nu * snr1 >= 1.0 && nu * snr2 >= 1.0 {
        let r = |snr: f64| 0.5 * (nu * snr).log2();
        return Ok(build(r(snr1), r(snr2), nu));
    }

    // One rate clamps to zero; coverage is met by the stronger side alone.
    // The clamp is always feasible here: the stationarity failure itself
    // bounds the coverage gap by the stronger SNR.
    let (strong_snr, weak_first) = if snr1 >= snr2 {
        (snr1, false)
    } else {
        (snr2, true)
    };
    let t = 1.0 - (k - 1.0) / strong_snr;
    debug_assert!(t > 0.0 && t <= 1.0);
    let r_strong = -0.5 * t.log2();
    let nu = (2.0 * r_strong).exp2() / strong_snr;
    if weak_first {
        Ok(build(0.0, r_strong, nu))
    } else {
        Ok(build(r_strong, 0.0, nu))
    }
}

/// Least achievable `R1 + R2` for the weighted-sum problem; zero once the
/// cap reaches `mu^T K_y mu`.
pub fn musum_sum_rate(spec: &MuSpec, rho: f64) -> Result<f64> {
    Ok(kkt_solve(spec, rho)?.sum_rate)
}

/// The weight direction for which the family member with diagonal
/// `(d1, d2)` is sum-rate optimal: `(sqrt(d2), sqrt(d1))`, with the cap set
/// to the distortion that member itself induces.
pub fn existsmu(model: &SourceModel, d1: f64, d2: f64) -> Result<MuSpec> {
    let member = lambda_from_diag(model, d1, d2)?;
    let mu = [d2.sqrt(), d1.sqrt()];
    let d = member.matrix().quad_form(mu);
    MuSpec::new(mu[0], mu[1], d)
}

/// Feasibility interval for `r2` at a fixed `r1`, in the four-inequality
/// description of the rate region; `None` when no `r2` works.
fn r2_interval(
    p: RatePoint,
    r1: f64,
    k: f64,
    snr1: f64,
    snr2: f64,
) -> Option<(f64, f64)> {
    if r1 > p.r1 {
        return None;
    }
    let t1 = (-2.0 * r1).exp2();
    // First rate bound, inverted for r2.
    let q1 = (1.0 + snr2 - k * (-2.0 * (p.r1 - r1)).exp2()) / snr2;
    let lo1 = if q1 >= 1.0 {
        0.0
    } else if q1 <= 0.0 {
        return None;
    } else {
        -0.5 * q1.log2()
    };
    // Coverage, inverted for r2.
    let need = k - 1.0 - snr1 * (1.0 - t1);
    let lo2 = if need <= 0.0 {
        0.0
    } else {
        let q2 = 1.0 - need / snr2;
        if q2 <= 0.0 {
            return None;
        }
        -0.5 * q2.log2()
    };
    // Second rate bound and the sum bound, as ceilings on r2.
    let b = half_log2_plus(k / (1.0 + snr1 * (1.0 - t1)));
    let hi1 = p.r2 - b;
    let hi2 = p.sum() - half_log2_plus(k) - r1;
    let lo = lo1.max(lo2).max(0.0);
    let hi = hi1.min(hi2);
    if lo.is_finite() && hi.is_finite() {
        Some((lo, hi))
    } else {
        None
    }
}

/// Membership of a rate pair in the weighted-sum rate region: search for
/// auxiliary rates `(r1, r2) >= 0` satisfying all four inequalities.
///
/// The region is jointly convex in `(r1, r2)`, so for each `r1` the
/// feasible `r2` form an interval computed in closed form, and the slack
/// of that interval is convex in `r1`: a hybrid coarse sweep plus one
/// golden-section refinement certifies membership to `1e-7` bits.
pub fn musum_region_member(p: RatePoint, spec: &MuSpec, rho: f64) -> Result<bool> {
    let coupling = normalize_mu(spec.mu(), rho)?;
    let d_n = coupling.normalized_distortion(spec.d());
    let k = 1.0 / (d_n + coupling.gamma);
    if k <= 1.0 {
        return Ok(true);
    }
    let (snr1, snr2) = (coupling.snr1, coupling.snr2);
    let slack = |r1: f64| -> f64 {
        match r2_interval(p, r1, k, snr1, snr2) {
            Some((lo, hi)) => lo - hi,
            None => f64::INFINITY,
        }
    };

    const TOL: f64 = 1e-7;
    let cap = p.r1;
    if cap == 0.0 {
        return Ok(slack(0.0) <= TOL);
    }
    // Coarse sweep: linear spacing plus a geometric tail near zero.
    let n_lin = 5_000usize;
    let mut best_r1 = 0.0;
    let mut best = slack(0.0);
    let mut consider = |r1: f64| {
        let s = slack(r1);
        if s < best {
            best = s;
            best_r1 = r1;
        }
    };
    for i in 1..=n_lin {
        consider(cap * i as f64 / n_lin as f64);
    }
    for i in 0..n_lin {
        consider(cap * (10f64).powf(-9.0 * (i as f64 + 1.0) / n_lin as f64));
    }
    if best <= TOL {
        return Ok(true);
    }
    // One refinement pass around the incumbent.
    let step = cap / n_lin as f64;
    let lo = (best_r1 - step).max(0.0);
    let hi = (best_r1 + step).min(cap);
    let refined = golden_section_min(lo, hi, 1e-12, slack);
    Ok(slack(refined).min(best) <= TOL)
}

/// The three-way equivalent forms of the sum-rate objective, used by the
/// test suites: the closed form, the rate-space program solved numerically,
/// and the loading-space scan live in [`crate::oracle`].
pub fn rewritten_objective(coupling: &CeoCoupling, r1: f64, r2: f64) -> f64 {
    let t1 = (-2.0 * r1).exp2();
    let t2 = (-2.0 * r2).exp2();
    0.5 * (1.0 + coupling.snr1 * (1.0 - t1) + coupling.snr2 * (1.0 - t2)).log2() + r1 + r2
}

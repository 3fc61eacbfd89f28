//! Several weighted-sum targets at once: minimize the sum rate over
//! two-source test channels subject to one quadratic distortion cap per
//! direction, verify stationarity through Fritz John multipliers, decide
//! region membership, and reduce the remote-source problem to this one.

use serde::{Deserialize, Serialize};

use crate::ceo::{musum_region_member, MuSpec};
use crate::error::{Error, Result};
use crate::model::{Mat2, RatePoint, SourceModel};
use crate::test_channel::{dg_from_lambda, DgMember};
use crate::two_encoder::marginal_min_rate;

const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// One distortion constraint: a direction and its cap. Directions are
/// normalized to unit length on construction of [`MSumsSpec`], with the
/// cap rescaled accordingly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuConstraint {
    pub mu: [f64; 2],
    pub d: f64,
}

/// A multi-constraint problem instance. Directions must be sign-consistent
/// (both coordinates nonnegative after flipping an all-nonpositive vector);
/// coinciding directions collapse to the tighter cap, so the stored list
/// is pairwise distinct.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MSumsSpec {
    rho: f64,
    constraints: Vec<MuConstraint>,
}

impl MSumsSpec {
    pub fn new(rho: f64, raw: Vec<MuConstraint>) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) || !rho.is_finite() {
            return Err(Error::InvalidCorrelation { rho });
        }
        if raw.is_empty() {
            return Err(Error::NoConstraints);
        }
        let mut constraints = Vec::with_capacity(raw.len());
        for c in raw {
            let [m1, m2] = c.mu;
            if m1 == 0.0 && m2 == 0.0 {
                return Err(Error::ZeroDirection);
            }
            let (m1, m2) = if m1 <= 0.0 && m2 <= 0.0 {
                (-m1, -m2)
            } else {
                (m1, m2)
            };
            if m1 < 0.0 || m2 < 0.0 {
                return Err(Error::MixedSignDirection { mu1: m1, mu2: m2 });
            }
            let norm = (m1 * m1 + m2 * m2).sqrt();
            let d = c.d / (norm * norm);
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::InvalidDistortion { value: c.d });
            }
            let c = MuConstraint {
                mu: [m1 / norm, m2 / norm],
                d,
            };
            // Coinciding directions are redundant; keep the binding cap.
            match constraints.iter_mut().find(|e: &&mut MuConstraint| {
                (e.mu[0] - c.mu[0]).abs() < 1e-12 && (e.mu[1] - c.mu[1]).abs() < 1e-12
            }) {
                Some(existing) => existing.d = existing.d.min(c.d),
                None => constraints.push(c),
            }
        }
        Ok(Self { rho, constraints })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn constraints(&self) -> &[MuConstraint] {
        &self.constraints
    }
}

/// Result of the constrained sum-rate minimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MSumsSolution {
    /// Optimizing test channel, in both parameterizations.
    pub member: DgMember,
    pub sum_rate: f64,
    /// Indices of constraints met with equality (relative slack < 1e-7).
    pub active_set: Vec<usize>,
    /// Distortion attained per constraint.
    pub achieved: Vec<f64>,
    /// Fritz John multipliers normalized to a unit objective multiplier,
    /// recovered when the optimum has strictly positive loadings.
    pub multipliers: Option<Vec<f64>>,
}

/// Outcome of the stationarity verification at a computed optimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FritzJohnReport {
    /// Strictly positive loadings: multipliers over the active set
    /// reproduce the diagonal of the optimizer; `residual` is the worst
    /// absolute defect of the two stationarity equations.
    Interior {
        residual: f64,
        /// Per-constraint multipliers (zero off the support).
        multipliers: Vec<f64>,
        /// Support chosen by the solver, at most two constraints.
        support: Vec<usize>,
        /// For a two-element support ordered so the direction pair has
        /// positive determinant: the coordinates of the derived optimal
        /// weight vector in that basis, which must be nonnegative.
        basis_coords: Option<[f64; 2]>,
    },
    /// A loading sits at zero; stationarity reduces to the single active
    /// marginal problem and no multiplier recovery is attempted.
    Boundary,
}

/// `d log2|D(lambda)| / d lambda_k = -log2(e) * D_kk`.
pub fn grad_log2_det(d: &Mat2) -> [f64; 2] {
    [-LOG2_E * d.m11, -LOG2_E * d.m22]
}

/// `d (mu^T D(lambda) mu) / d lambda_k = -(mu^T D e_k)^2`.
pub fn grad_quad_form(d: &Mat2, mu: [f64; 2]) -> [f64; 2] {
    let g1 = mu[0] * d.m11 + mu[1] * d.m12;
    let g2 = mu[0] * d.m12 + mu[1] * d.m22;
    [-g1 * g1, -g2 * g2]
}

fn error_cov(rho: f64, l1: f64, l2: f64) -> Mat2 {
    let c = 1.0 - rho * rho;
    Mat2::new(1.0 / c + l1, -rho / c, 1.0 / c + l2).inverse()
}

fn objective(rho: f64, d: &Mat2) -> f64 {
    0.5 * ((1.0 - rho * rho) / d.det()).log2()
}

fn is_feasible(d: &Mat2, constraints: &[MuConstraint]) -> bool {
    constraints
        .iter()
        .all(|c| d.quad_form(c.mu) <= c.d * (1.0 + 1e-12) + 1e-15)
}

/// Smallest second loading making every constraint hold at the given first
/// loading; `None` when even an unbounded second loading cannot. Every
/// quadratic form decreases monotonically in the loading, so the bracket
/// bisection is exact.
fn min_lambda2(rho: f64, constraints: &[MuConstraint], l1: f64) -> Option<f64> {
    let c = 1.0 - rho * rho;
    // Limit of the quadratic forms as the second loading grows without
    // bound: only the first coordinate survives.
    for cons in constraints {
        let limit = cons.mu[0] * cons.mu[0] * c / (1.0 + c * l1);
        if limit > cons.d * (1.0 + 1e-12) {
            return None;
        }
    }
    let feasible = |l2: f64| is_feasible(&error_cov(rho, l1, l2), constraints);
    if feasible(0.0) {
        return Some(0.0);
    }
    let mut hi = 1.0;
    while !feasible(hi) {
        hi *= 2.0;
        if hi > 1e14 {
            return None;
        }
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Derivative of the reduced objective `lambda1 -> f(lambda1,
/// min_lambda2(lambda1))` along the active-constraint surface, assembled
/// from the two analytic gradients.
fn reduced_derivative(rho: f64, constraints: &[MuConstraint], l1: f64, l2: f64) -> f64 {
    let d = error_cov(rho, l1, l2);
    let gf = grad_log2_det(&d);
    // Objective is -0.5 log2|D| + const.
    let df = [-0.5 * gf[0], -0.5 * gf[1]];
    if l2 == 0.0 {
        return df[0];
    }
    // The constraint pinning the second loading.
    let active = constraints
        .iter()
        .map(|c| d.quad_form(c.mu) / c.d)
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
        .unwrap();
    let gq = grad_quad_form(&d, constraints[active].mu);
    let slope = -gq[0] / gq[1];
    df[0] + df[1] * slope
}

/// Minimizes the sum rate over test channels subject to the caps.
///
/// Strategy: an exhaustive log-space grid over the loadings, two shrink
/// rounds around the incumbent, then a polish step that walks the lower
/// feasible boundary using the analytic derivatives. Ties on the grid
/// resolve to the lexicographically smallest loading pair so the result
/// does not depend on scan order.
pub fn msums_sum_rate(spec: &MSumsSpec) -> Result<MSumsSolution> {
    let rho = spec.rho;
    let cons = &spec.constraints;
    let model = SourceModel::pair(rho)?;

    let finish = |l1: f64, l2: f64| -> Result<MSumsSolution> {
        let member = dg_from_lambda(&model, [l1, l2])?;
        let d = member.matrix();
        let achieved: Vec<f64> = cons.iter().map(|c| d.quad_form(c.mu)).collect();
        let active_set: Vec<usize> = achieved
            .iter()
            .zip(cons)
            .enumerate()
            .filter(|(_, (q, c))| **q >= c.d * (1.0 - 1e-7))
            .map(|(i, _)| i)
            .collect();
        let multipliers = if l1 > 1e-9 && l2 > 1e-9 {
            recover_multipliers(&d, cons, &active_set).map(|(m, _, _)| m)
        } else {
            None
        };
        Ok(MSumsSolution {
            member,
            sum_rate: objective(rho, &d),
            active_set,
            achieved,
            multipliers,
        })
    };

    if is_feasible(&model.covariance2()?, cons) {
        return finish(0.0, 0.0);
    }

    let value = |l1: f64, l2: f64| -> f64 {
        let d = error_cov(rho, l1, l2);
        if is_feasible(&d, cons) {
            objective(rho, &d)
        } else {
            f64::INFINITY
        }
    };

    // Stage 1: exhaustive grid, then two 10x shrink rounds.
    const N: usize = 200;
    let mut half_span = 0.5 * (1e6f64.ln() - 1e-6f64.ln());
    let mut c1 = 0.5 * (1e6f64.ln() + 1e-6f64.ln()); // centers, in log space
    let mut c2 = c1;
    let mut best = (f64::INFINITY, f64::INFINITY, f64::INFINITY); // (obj, l1, l2)
    for round in 0..3 {
        let (lo1, hi1) = (c1 - half_span, c1 + half_span);
        let (lo2, hi2) = (c2 - half_span, c2 + half_span);
        for i in 0..N {
            let l1 = (lo1 + (hi1 - lo1) * i as f64 / (N - 1) as f64).exp();
            for j in 0..N {
                let l2 = (lo2 + (hi2 - lo2) * j as f64 / (N - 1) as f64).exp();
                let v = value(l1, l2);
                if v < best.0 || (v == best.0 && (l1, l2) < (best.1, best.2)) {
                    best = (v, l1, l2);
                }
            }
        }
        if round < 2 {
            c1 = best.1.ln();
            c2 = best.2.ln();
            half_span /= 10.0;
        }
    }

    // Stage 2: slide along the lower feasible boundary. At an optimum each
    // loading sits at its smallest feasible value given the other, so the
    // problem reduces to one dimension in the first loading; the plain 2-d
    // grid quantizes the second loading and systematically over-pays for
    // it, which this pass corrects.
    let reduced = |l1: f64| -> Option<(f64, f64)> {
        min_lambda2(rho, cons, l1).map(|l2| {
            let d = error_cov(rho, l1, l2);
            (objective(rho, &d), l2)
        })
    };
    let mut final_pick = (best.0, best.1, best.2);
    let mut consider = |l1: f64, cand: Option<(f64, f64)>| {
        if let Some((v, l2)) = cand {
            if v < final_pick.0 {
                final_pick = (v, l1, l2);
            }
        }
    };
    consider(0.0, reduced(0.0));
    const SCAN: usize = 400;
    let (scan_lo, scan_hi) = (1e-8f64.ln(), 1e7f64.ln());
    let scan_step = (scan_hi - scan_lo) / SCAN as f64;
    let mut scan_best = (f64::INFINITY, 0usize);
    for i in 0..=SCAN {
        let l1 = (scan_lo + scan_step * i as f64).exp();
        if let Some((v, _)) = reduced(l1) {
            if v < scan_best.0 {
                scan_best = (v, i);
            }
        }
    }
    if scan_best.0.is_finite() {
        // Derivative-sign bisection inside the bracketing cells; the
        // reduced objective is smooth there except for active-set kinks,
        // which the bisection pins as well.
        let i = scan_best.1;
        let mut lo = (scan_lo + scan_step * (i.saturating_sub(1)) as f64).exp();
        let mut hi = (scan_lo + scan_step * (i + 1).min(SCAN) as f64).exp();
        let deriv = |x: f64| -> f64 {
            match min_lambda2(rho, cons, x) {
                Some(l2) => reduced_derivative(rho, cons, x, l2),
                None => -1.0, // infeasible side: push right
            }
        };
        let l1 = if deriv(lo) >= 0.0 {
            lo
        } else if deriv(hi) <= 0.0 {
            hi
        } else {
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if deriv(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        consider(l1, reduced(l1));
        let grid_pt = (scan_lo + scan_step * i as f64).exp();
        consider(grid_pt, reduced(grid_pt));
    }
    finish(final_pick.1, final_pick.2)
}

/// Nonnegative multiplier recovery over the active set: the diagonal of
/// the optimizer must be a conic combination of the squared constraint
/// sensitivities. A support of at most two constraints always suffices,
/// so singletons and pairs are enumerated exactly and the best-fitting
/// nonnegative solution wins (ties to the lexicographically first support).
fn recover_multipliers(
    d: &Mat2,
    cons: &[MuConstraint],
    active: &[usize],
) -> Option<(Vec<f64>, f64, Vec<usize>)> {
    if active.is_empty() {
        return None;
    }
    let sens: Vec<[f64; 2]> = active
        .iter()
        .map(|&j| {
            let g = grad_quad_form(d, cons[j].mu);
            [-g[0], -g[1]]
        })
        .collect();
    let target = [d.m11, d.m22];
    let residual_of = |nu: &[(usize, f64)]| -> f64 {
        let mut r1 = target[0];
        let mut r2 = target[1];
        for &(idx, v) in nu {
            r1 -= v * sens[idx][0];
            r2 -= v * sens[idx][1];
        }
        r1.abs().max(r2.abs())
    };

    let mut best: Option<(f64, Vec<(usize, f64)>)> = None;
    let mut consider = |nu: Vec<(usize, f64)>| {
        if nu.iter().any(|&(_, v)| v < -1e-12) {
            return;
        }
        let nu: Vec<(usize, f64)> = nu.into_iter().map(|(i, v)| (i, v.max(0.0))).collect();
        let r = residual_of(&nu);
        if best.as_ref().is_none_or(|(br, _)| r < *br) {
            best = Some((r, nu));
        }
    };

    for i in 0..active.len() {
        let [a, b] = sens[i];
        let denom = a * a + b * b;
        if denom > 0.0 {
            consider(vec![(i, (a * target[0] + b * target[1]) / denom)]);
        }
    }
    for i in 0..active.len() {
        for j in i + 1..active.len() {
            let (ai, bi) = (sens[i][0], sens[i][1]);
            let (aj, bj) = (sens[j][0], sens[j][1]);
            let det = ai * bj - aj * bi;
            if det.abs() < 1e-14 {
                continue;
            }
            let ni = (target[0] * bj - target[1] * aj) / det;
            let nj = (target[1] * ai - target[0] * bi) / det;
            consider(vec![(i, ni), (j, nj)]);
        }
    }

    best.map(|(res, nu)| {
        let mut full = vec![0.0; cons.len()];
        let mut support = Vec::new();
        for (local, v) in nu {
            if v > 0.0 {
                full[active[local]] = v;
                support.push(active[local]);
            }
        }
        support.sort_unstable();
        (full, res, support)
    })
}

/// Verifies the stationarity equations at a solved optimum.
pub fn fritz_john_check(sol: &MSumsSolution, spec: &MSumsSpec) -> Result<FritzJohnReport> {
    let (l1, l2) = (sol.member.lambda1, sol.member.lambda2);
    if l1 <= 1e-9 || l2 <= 1e-9 {
        return Ok(FritzJohnReport::Boundary);
    }
    let d = sol.member.matrix();
    let cons = spec.constraints();
    match recover_multipliers(&d, cons, &sol.active_set) {
        Some((multipliers, residual, support)) => {
            let basis_coords = if support.len() == 2 {
                let (mut i, mut j) = (support[0], support[1]);
                let det =
                    |a: [f64; 2], b: [f64; 2]| a[0] * b[1] - a[1] * b[0];
                if det(cons[i].mu, cons[j].mu) < 0.0 {
                    std::mem::swap(&mut i, &mut j);
                }
                let m2det = det(cons[i].mu, cons[j].mu);
                let mu_star = [d.m22.sqrt(), d.m11.sqrt()];
                Some([
                    (cons[j].mu[1] * mu_star[0] - cons[j].mu[0] * mu_star[1]) / m2det,
                    (cons[i].mu[0] * mu_star[1] - cons[i].mu[1] * mu_star[0]) / m2det,
                ])
            } else {
                None
            };
            Ok(FritzJohnReport::Interior {
                residual,
                multipliers,
                support,
                basis_coords,
            })
        }
        None => Ok(FritzJohnReport::Interior {
            residual: d.m11.max(d.m22),
            multipliers: vec![0.0; cons.len()],
            support: Vec::new(),
            basis_coords: None,
        }),
    }
}

/// Membership in the multi-constraint rate region: the sum-rate bound plus
/// every per-direction region. Directions with a zero coordinate reduce to
/// the corresponding single-marginal bound.
pub fn msums_region_member(p: RatePoint, spec: &MSumsSpec) -> Result<bool> {
    let sol = msums_sum_rate(spec)?;
    if p.sum() + 1e-9 < sol.sum_rate {
        return Ok(false);
    }
    for c in spec.constraints() {
        let member = if c.mu[1] == 0.0 {
            p.r1 + 1e-9 >= marginal_min_rate(p.r2, c.d, spec.rho)
        } else if c.mu[0] == 0.0 {
            p.r2 + 1e-9 >= marginal_min_rate(p.r1, c.d, spec.rho)
        } else {
            let mu_spec = MuSpec::new(c.mu[0], c.mu[1], c.d)?;
            musum_region_member(p, &mu_spec, spec.rho)?
        };
        if !member {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Estimation geometry of the remote-source problem: the conditional-mean
/// directions of the hidden sources given the observations, and the
/// unremovable estimation floors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemoteMap {
    pub mu1: [f64; 2],
    pub mu2: [f64; 2],
    pub gamma1: f64,
    pub gamma2: f64,
}

/// Maps a remote-source instance onto constraint directions and floors.
/// `E[hidden_j | y] = mu_j^T y`, and any squared-error target `d_j` for the
/// hidden source corresponds to `d_j - gamma_j` for `mu_j^T y`.
pub fn remote_source_map(s1sq: f64, s2sq: f64, rho: f64) -> Result<RemoteMap> {
    if !(rho > 0.0 && rho < 1.0) || !rho.is_finite() {
        return Err(Error::InvalidCorrelation { rho });
    }
    for &s in &[s1sq, s2sq] {
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::InvalidSigmaSquared { value: s });
        }
    }
    if rho * rho > s1sq * s2sq * (1.0 + 1e-12) {
        return Err(Error::InvalidRemoteCovariance { rho });
    }
    let c = 1.0 - rho * rho;
    Ok(RemoteMap {
        mu1: [(s1sq - rho * rho) / c, rho * (1.0 - s1sq) / c],
        mu2: [rho * (1.0 - s2sq) / c, (s2sq - rho * rho) / c],
        gamma1: (s1sq - rho * rho) * (1.0 - s1sq) / c,
        gamma2: (s2sq - rho * rho) * (1.0 - s2sq) / c,
    })
}

/// Builds the equivalent multi-constraint spec for remote targets
/// `(d1, d2)`, rejecting targets at or below the estimation floor.
pub fn remote_msums_spec(s1sq: f64, s2sq: f64, rho: f64, d1: f64, d2: f64) -> Result<MSumsSpec> {
    let map = remote_source_map(s1sq, s2sq, rho)?;
    let mut raw = Vec::new();
    for (mu, gamma, d) in [(map.mu1, map.gamma1, d1), (map.mu2, map.gamma2, d2)] {
        if d <= gamma {
            return Err(Error::InfeasibleRemoteDistortion { d, gamma });
        }
        raw.push(MuConstraint { mu, d: d - gamma });
    }
    MSumsSpec::new(rho, raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ceo::musum_sum_rate;
    use crate::numeric::half_log2_plus;
    use crate::two_encoder::RegionSpec;
    use approx::assert_relative_eq;

    fn identity_spec(rho: f64, d1: f64, d2: f64) -> MSumsSpec {
        MSumsSpec::new(
            rho,
            vec![
                MuConstraint {
                    mu: [1.0, 0.0],
                    d: d1,
                },
                MuConstraint {
                    mu: [0.0, 1.0],
                    d: d2,
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn identity_reduction_matches_closed_form() {
        let spec = identity_spec(0.9, 0.05, 0.05);
        let sol = msums_sum_rate(&spec).unwrap();
        let star = RegionSpec::new(0.9, 0.05, 0.05).unwrap().sum_rate_star();
        assert!((sol.sum_rate - star).abs() < 1e-7, "{} vs {star}", sol.sum_rate);
        assert_eq!(sol.active_set, vec![0, 1]);
    }

    #[test]
    fn identity_reduction_outside_realizable_diagonal() {
        // The slack cap cannot bind; the value collapses to the tight
        // marginal bound.
        let spec = identity_spec(0.9, 0.05, 0.5);
        let sol = msums_sum_rate(&spec).unwrap();
        assert!((sol.sum_rate - half_log2_plus(1.0 / 0.05)).abs() < 1e-7);
        assert_eq!(sol.active_set, vec![0]);
    }

    #[test]
    fn single_constraint_reduces_to_weighted_sum() {
        let mu = [0.2f64.sqrt(), 0.2f64.sqrt()];
        let d = 0.0904835;
        let spec = MSumsSpec::new(
            0.5,
            vec![MuConstraint { mu, d }],
        )
        .unwrap();
        let sol = msums_sum_rate(&spec).unwrap();
        // The spec normalizes the direction; rescale the cap identically.
        let norm2 = mu[0] * mu[0] + mu[1] * mu[1];
        let closed = musum_sum_rate(&MuSpec::new(mu[0], mu[1], d).unwrap(), 0.5).unwrap();
        assert!((sol.sum_rate - closed).abs() < 1e-7);
        assert_relative_eq!(spec.constraints()[0].d, d / norm2, epsilon = 1e-15);
    }

    #[test]
    fn slack_constraint_changes_nothing() {
        let tight = MSumsSpec::new(
            0.7,
            vec![MuConstraint {
                mu: [1.0, 1.0],
                d: 0.2,
            }],
        )
        .unwrap();
        let with_slack = MSumsSpec::new(
            0.7,
            vec![
                MuConstraint {
                    mu: [1.0, 1.0],
                    d: 0.2,
                },
                MuConstraint {
                    mu: [1.0, 0.0],
                    d: 50.0,
                },
            ],
        )
        .unwrap();
        let a = msums_sum_rate(&tight).unwrap();
        let b = msums_sum_rate(&with_slack).unwrap();
        assert!((a.sum_rate - b.sum_rate).abs() < 1e-9);
        assert_eq!(b.active_set, vec![0]);
    }

    #[test]
    fn loose_caps_need_no_rate() {
        let spec = MSumsSpec::new(
            0.5,
            vec![MuConstraint {
                mu: [1.0, 1.0],
                d: 4.0,
            }],
        )
        .unwrap();
        let sol = msums_sum_rate(&spec).unwrap();
        assert_eq!(sol.sum_rate, 0.0);
        assert_eq!(sol.member.lambda1, 0.0);
        assert!(sol.multipliers.is_none());
    }

    #[test]
    fn gradients_match_finite_differences() {
        let rho = 0.7;
        let mu = [0.6, 0.8];
        let h = 1e-5;
        for &(l1, l2) in &[(0.5, 2.0), (3.0, 3.0), (10.0, 0.3)] {
            let d = error_cov(rho, l1, l2);
            let gd = grad_log2_det(&d);
            let gq = grad_quad_form(&d, mu);
            let logdet = |a: f64, b: f64| error_cov(rho, a, b).det().log2();
            let quad = |a: f64, b: f64| error_cov(rho, a, b).quad_form(mu);
            let fd_d1 = (logdet(l1 + h, l2) - logdet(l1 - h, l2)) / (2.0 * h);
            let fd_d2 = (logdet(l1, l2 + h) - logdet(l1, l2 - h)) / (2.0 * h);
            let fd_q1 = (quad(l1 + h, l2) - quad(l1 - h, l2)) / (2.0 * h);
            let fd_q2 = (quad(l1, l2 + h) - quad(l1, l2 - h)) / (2.0 * h);
            assert_relative_eq!(gd[0], fd_d1, max_relative = 1e-6);
            assert_relative_eq!(gd[1], fd_d2, max_relative = 1e-6);
            assert_relative_eq!(gq[0], fd_q1, max_relative = 1e-6);
            assert_relative_eq!(gq[1], fd_q2, max_relative = 1e-6);
        }
    }

    #[test]
    fn fritz_john_symmetric_identity() {
        let spec = identity_spec(0.9, 0.05, 0.05);
        let sol = msums_sum_rate(&spec).unwrap();
        match fritz_john_check(&sol, &spec).unwrap() {
            FritzJohnReport::Interior {
                residual,
                multipliers,
                support,
                basis_coords,
            } => {
                assert!(residual < 1e-6, "residual {residual}");
                assert_eq!(support, vec![0, 1]);
                assert_relative_eq!(multipliers[0], multipliers[1], max_relative = 1e-4);
                let coords = basis_coords.unwrap();
                assert!(coords[0] >= -1e-9 && coords[1] >= -1e-9);
            }
            FritzJohnReport::Boundary => panic!("expected interior report"),
        }
    }

    #[test]
    fn fritz_john_single_active() {
        let spec = MSumsSpec::new(
            0.5,
            vec![MuConstraint {
                mu: [1.0, 1.0],
                d: 0.18,
            }],
        )
        .unwrap();
        let sol = msums_sum_rate(&spec).unwrap();
        match fritz_john_check(&sol, &spec).unwrap() {
            FritzJohnReport::Interior { residual, .. } => {
                assert!(residual < 1e-6, "residual {residual}");
            }
            FritzJohnReport::Boundary => panic!("expected interior report"),
        }
    }

    #[test]
    fn fritz_john_boundary_case() {
        // Outside the realizable diagonal the optimum parks one loading at
        // zero.
        let spec = identity_spec(0.9, 0.05, 0.5);
        let sol = msums_sum_rate(&spec).unwrap();
        assert!(sol.member.lambda2 <= 1e-9);
        assert_eq!(
            fritz_john_check(&sol, &spec).unwrap(),
            FritzJohnReport::Boundary
        );
    }

    #[test]
    fn region_member_identity_case() {
        let spec = identity_spec(0.9, 0.05, 0.05);
        let region = RegionSpec::new(0.9, 0.05, 0.05).unwrap();
        let star = region.sum_rate_star();
        let inside = RatePoint {
            r1: 0.5 * star + 0.5,
            r2: 0.5 * star + 0.5,
        };
        assert_eq!(
            msums_region_member(inside, &spec).unwrap(),
            region.contains(inside, 1e-9)
        );
        let below = RatePoint { r1: 0.1, r2: 0.1 };
        assert!(!msums_region_member(below, &spec).unwrap());
        let generous = RatePoint {
            r1: star + 1.0,
            r2: star + 1.0,
        };
        assert!(msums_region_member(generous, &spec).unwrap());
    }

    #[test]
    fn remote_map_reference_values() {
        let map = remote_source_map(0.75, 0.75, 0.5).unwrap();
        assert_relative_eq!(map.mu1[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(map.mu1[1], 1.0 / 6.0, epsilon = 1e-15);
        assert_relative_eq!(map.mu2[0], 1.0 / 6.0, epsilon = 1e-15);
        assert_relative_eq!(map.mu2[1], 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(map.gamma1, 1.0 / 6.0, epsilon = 1e-15);
        assert_relative_eq!(map.gamma2, 1.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn remote_noiseless_is_identity() {
        let map = remote_source_map(1.0, 1.0, 0.6).unwrap();
        assert_relative_eq!(map.mu1[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(map.mu1[1], 0.0, epsilon = 1e-14);
        assert_relative_eq!(map.mu2[1], 1.0, epsilon = 1e-14);
        assert_eq!(map.gamma1, 0.0);
        assert_eq!(map.gamma2, 0.0);
    }

    #[test]
    fn remote_boundary_zero_coordinate() {
        // sigma1 = rho forces sigma2 = 1 by the covariance constraint.
        let map = remote_source_map(0.25, 1.0, 0.5).unwrap();
        assert_relative_eq!(map.mu1[0], 0.0, epsilon = 1e-14);
        assert!(map.mu1[1] > 0.0);
        assert_eq!(map.gamma1, 0.0);
        let spec = remote_msums_spec(0.25, 1.0, 0.5, 0.2, 0.3).unwrap();
        assert!(msums_sum_rate(&spec).is_ok());
    }

    #[test]
    fn remote_infeasible_distortion_rejected() {
        let err = remote_msums_spec(0.75, 0.75, 0.5, 1.0 / 6.0, 0.3);
        assert!(matches!(
            err,
            Err(Error::InfeasibleRemoteDistortion { .. })
        ));
    }

    #[test]
    fn remote_covariance_validation() {
        assert!(matches!(
            remote_source_map(0.3, 0.3, 0.9),
            Err(Error::InvalidRemoteCovariance { .. })
        ));
        assert!(matches!(
            remote_source_map(1.2, 0.5, 0.3),
            Err(Error::InvalidSigmaSquared { .. })
        ));
    }

    #[test]
    fn spec_validation() {
        assert!(matches!(
            MSumsSpec::new(0.5, vec![]),
            Err(Error::NoConstraints)
        ));
        assert!(matches!(
            MSumsSpec::new(
                0.5,
                vec![MuConstraint {
                    mu: [1.0, -0.5],
                    d: 0.2
                }]
            ),
            Err(Error::MixedSignDirection { .. })
        ));
        // All-nonpositive directions flip.
        let spec = MSumsSpec::new(
            0.5,
            vec![MuConstraint {
                mu: [-3.0, -4.0],
                d: 0.5,
            }],
        )
        .unwrap();
        assert_relative_eq!(spec.constraints()[0].mu[0], 0.6, epsilon = 1e-15);
        assert_relative_eq!(spec.constraints()[0].d, 0.02, epsilon = 1e-15);
        // Coinciding directions collapse to the binding cap.
        let spec = MSumsSpec::new(
            0.5,
            vec![
                MuConstraint {
                    mu: [1.0, 1.0],
                    d: 0.2,
                },
                MuConstraint {
                    mu: [2.0, 2.0],
                    d: 0.9,
                },
            ],
        )
        .unwrap();
        assert_eq!(spec.constraints().len(), 1);
        assert_relative_eq!(spec.constraints()[0].d, 0.1, epsilon = 1e-15);
    }

    #[test]
    fn implied_constraint_changes_nothing() {
        let base = MSumsSpec::new(
            0.7,
            vec![MuConstraint {
                mu: [3.0, 4.0],
                d: 0.4,
            }],
        )
        .unwrap();
        let with_implied = MSumsSpec::new(
            0.7,
            vec![
                MuConstraint {
                    mu: [3.0, 4.0],
                    d: 0.4,
                },
                MuConstraint {
                    mu: [0.6, 0.8],
                    d: 0.05,
                },
            ],
        )
        .unwrap();
        let a = msums_sum_rate(&base).unwrap().sum_rate;
        let b = msums_sum_rate(&with_implied).unwrap().sum_rate;
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn relaxing_a_cap_never_raises_the_rate() {
        let base = MSumsSpec::new(
            0.8,
            vec![
                MuConstraint {
                    mu: [1.0, 0.2],
                    d: 0.1,
                },
                MuConstraint {
                    mu: [0.2, 1.0],
                    d: 0.15,
                },
            ],
        )
        .unwrap();
        let relaxed = MSumsSpec::new(
            0.8,
            vec![
                MuConstraint {
                    mu: [1.0, 0.2],
                    d: 0.1,
                },
                MuConstraint {
                    mu: [0.2, 1.0],
                    d: 0.25,
                },
            ],
        )
        .unwrap();
        let a = msums_sum_rate(&base).unwrap().sum_rate;
        let b = msums_sum_rate(&relaxed).unwrap().sum_rate;
        assert!(b <= a + 1e-9);
    }
}

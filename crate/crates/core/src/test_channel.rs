//! The test-channel algebra for two sources: loading <-> error-covariance
//! conversions, the unique positive error-correlation root, and the
//! Slepian-Wolf corner rates of a channel's contrapolymatroid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Mat2, SourceModel};
use crate::two_encoder::{beta, in_diag_dg};

/// A member of the test-channel error-covariance family, carried in both
/// parameterizations at once: diagonal `(d1, d2)` with error correlation
/// `theta`, and the loadings `(lambda1, lambda2)` that induce it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DgMember {
    pub d1: f64,
    pub d2: f64,
    pub theta: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl DgMember {
    pub fn matrix(&self) -> Mat2 {
        let off = self.theta * (self.d1 * self.d2).sqrt();
        Mat2::new(self.d1, off, self.d2)
    }

    pub fn det(&self) -> f64 {
        self.d1 * self.d2 * (1.0 - self.theta * self.theta)
    }
}

/// Rates of the contrapolymatroid attached to one test channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contrapolymatroid {
    /// `I(y1; u1 | u2)`
    pub i1: f64,
    /// `I(y2; u2 | u1)`
    pub i2: f64,
    /// `I(y; u)`
    pub isum: f64,
}

/// The unique positive error-correlation coefficient of the family member
/// with diagonal `(d1, d2)`, written in the subtraction-free form
/// `2 rho sqrt(d1 d2) / ((1 - rho^2) beta)`.
pub fn theta_star(d1: f64, d2: f64, rho: f64) -> Result<f64> {
    if !in_diag_dg(d1, d2, rho) {
        return Err(Error::OutsideDiagDg { d1, d2 });
    }
    Ok(2.0 * rho * (d1 * d2).sqrt() / ((1.0 - rho * rho) * beta(d1, d2, rho)))
}

/// Error covariance of the channel with loadings `(lambda1, lambda2)`:
/// the inverse of `K_y^{-1} + Lambda`, evaluated in closed 2x2 form.
pub fn dg_from_lambda(model: &SourceModel, lambda: [f64; 2]) -> Result<DgMember> {
    if model.num_sources() != 2 {
        return Err(Error::NotTwoSources {
            l: model.num_sources(),
        });
    }
    for &l in &lambda {
        if !(l >= 0.0) || !l.is_finite() {
            return Err(Error::NegativeLoading { value: l });
        }
    }
    let rho = model.rho();
    let c = 1.0 - rho * rho;
    let precision = Mat2::new(1.0 / c + lambda[0], -rho / c, 1.0 / c + lambda[1]);
    let d = precision.inverse();
    let theta = d.m12 / (d.m11 * d.m22).sqrt();
    Ok(DgMember {
        d1: d.m11,
        d2: d.m22,
        theta,
        lambda1: lambda[0],
        lambda2: lambda[1],
    })
}

/// The family member with prescribed diagonal `(d1, d2)`: its correlation
/// is the unique positive root, and the loadings are recovered from
/// `Lambda = D^{-1} - K_y^{-1}`. Rounding can leave a loading marginally
/// negative on the boundary of the realizable set; values above `-1e-10`
/// clamp to zero.
pub fn lambda_from_diag(model: &SourceModel, d1: f64, d2: f64) -> Result<DgMember> {
    if model.num_sources() != 2 {
        return Err(Error::NotTwoSources {
            l: model.num_sources(),
        });
    }
    let rho = model.rho();
    let theta = theta_star(d1, d2, rho)?;
    let off = theta * (d1 * d2).sqrt();
    let d = Mat2::new(d1, off, d2);
    let d_inv = d.inverse();
    let c = 1.0 - rho * rho;
    let mut lambda = [d_inv.m11 - 1.0 / c, d_inv.m22 - 1.0 / c];
    for l in &mut lambda {
        if *l < 0.0 {
            if *l < -1e-10 {
                return Err(Error::NegativeLoading { value: *l });
            }
            *l = 0.0;
        }
    }
    Ok(DgMember {
        d1,
        d2,
        theta,
        lambda1: lambda[0],
        lambda2: lambda[1],
    })
}

/// Corner rates of the channel's contrapolymatroid.
///
/// The conditional rates come from splitting `I(y; u)` along the Markov
/// chain u1 - y1 - y2 - u2: the side link alone carries
/// `I(y; u_j) = I(y_j; u_j) = 0.5 log2(1 + lambda_j)` for a unit-variance
/// channel output, and what remains is the conditional term.
pub fn corner_rates(model: &SourceModel, member: &DgMember) -> Contrapolymatroid {
    let isum = 0.5 * (model.covariance_det() / member.det()).log2();
    let half_log = |l: f64| 0.5 * (1.0 + l).log2();
    Contrapolymatroid {
        i1: (isum - half_log(member.lambda2)).max(0.0),
        i2: (isum - half_log(member.lambda1)).max(0.0),
        isum: isum.max(0.0),
    }
}

//! Monte Carlo validation of the test-channel statistics: empirical error
//! covariances of the estimator that uses the *analytic* coefficients (no
//! fitting, so a run checks the formulas and nothing else), the coupling
//! identity behind the weighted-sum/CEO reduction, and the second-order
//! property that covariance-matched non-Gaussian sources see the same
//! linear-estimation distortions.
//!
//! Reproducibility: every sample draws from its own counter-derived RNG
//! stream `(seed, sample index)`, so results are bit-identical however the
//! sample range is partitioned.
//!
//! Statistical gates use 5 standard errors estimated from the same run.
//! Under that gate a fresh seed fails with probability about 6e-7 per
//! tracked moment; the shipped tests pin their seeds, so a gate that
//! passed once passes forever, and a new seed that trips the gate is
//! expected roughly once per two million moment checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ceo::normalize_mu;
use crate::error::{Error, Result};
use crate::model::{Mat2, SourceModel, TestChannel};
use crate::test_channel::dg_from_lambda;

const MIN_SAMPLES: usize = 10_000;

/// Marginal law of the i.i.d. innovations behind the source vector; all
/// kinds are zero mean, unit variance, and reach covariance `K_y` exactly
/// through the symmetric square root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Gaussian,
    Uniform,
    /// Even mixture of two Gaussians at `+-0.8` with variance `0.36`.
    RademacherMixture,
}

/// A simulation instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub model: SourceModel,
    pub channel: TestChannel,
    pub samples: usize,
    pub seed: u64,
    pub source_kind: SourceKind,
}

impl SimConfig {
    pub fn new(
        model: SourceModel,
        channel: TestChannel,
        samples: usize,
        seed: u64,
        source_kind: SourceKind,
    ) -> Result<Self> {
        if model.num_sources() != 2 {
            return Err(Error::NotTwoSources {
                l: model.num_sources(),
            });
        }
        if channel.len() != 2 {
            return Err(Error::NotTwoSources { l: channel.len() });
        }
        if samples < MIN_SAMPLES {
            return Err(Error::TooFewSamples {
                min: MIN_SAMPLES,
                got: samples,
            });
        }
        Ok(Self {
            model,
            channel,
            samples,
            seed,
            source_kind,
        })
    }
}

/// Empirical second moments of the estimation errors next to their
/// predicted values, with per-entry standard errors from the same run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub samples: usize,
    pub seed: u64,
    pub source_kind: SourceKind,
    pub empirical: Mat2,
    pub predicted: Mat2,
    pub stderr: Mat2,
    pub empirical_theta: f64,
    pub predicted_theta: f64,
    pub mu: Option<[f64; 2]>,
    pub mu_sum_empirical: Option<f64>,
    pub mu_sum_predicted: Option<f64>,
    pub mu_sum_stderr: Option<f64>,
}

impl SimReport {
    /// Whether every tracked moment is within `k` standard errors of its
    /// prediction.
    pub fn within(&self, k: f64) -> bool {
        let entry_ok = |e: f64, p: f64, se: f64| (e - p).abs() <= k * se;
        let mut ok = entry_ok(self.empirical.m11, self.predicted.m11, self.stderr.m11)
            && entry_ok(self.empirical.m12, self.predicted.m12, self.stderr.m12)
            && entry_ok(self.empirical.m22, self.predicted.m22, self.stderr.m22);
        if let (Some(e), Some(p), Some(se)) =
            (self.mu_sum_empirical, self.mu_sum_predicted, self.mu_sum_stderr)
        {
            ok = ok && entry_ok(e, p, se);
        }
        ok
    }
}

struct Moment {
    sum: f64,
    sum_sq: f64,
}

impl Moment {
    fn new() -> Self {
        Self {
            sum: 0.0,
            sum_sq: 0.0,
        }
    }

    fn push(&mut self, x: f64) {
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn mean(&self, n: usize) -> f64 {
        self.sum / n as f64
    }

    fn stderr(&self, n: usize) -> f64 {
        let nf = n as f64;
        let var = (self.sum_sq - self.sum * self.sum / nf) / (nf - 1.0);
        (var.max(0.0) / nf).sqrt()
    }
}

fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn draw_innovation(rng: &mut ChaCha8Rng, kind: SourceKind) -> f64 {
    match kind {
        SourceKind::Gaussian => rng.sample(StandardNormal),
        SourceKind::Uniform => (2.0 * rng.random::<f64>() - 1.0) * 3f64.sqrt(),
        SourceKind::RademacherMixture => {
            let sign = if rng.random::<bool>() { 0.8 } else { -0.8 };
            let z: f64 = rng.sample(StandardNormal);
            sign + 0.6 * z
        }
    }
}

/// Linear-estimator weights `W = K_{yu} K_u^{-1}` for unit-variance channel
/// outputs; rows estimate `y_1, y_2` from `u`.
fn lmmse_weights(ky: &Mat2, c: [f64; 2]) -> [[f64; 2]; 2] {
    let ku = Mat2::new(1.0, c[0] * c[1] * ky.m12, 1.0);
    let ku_inv = ku.inverse();
    // K_yu = K_y * diag(c): column j scaled by c_j.
    let kyu = [
        [ky.m11 * c[0], ky.m12 * c[1]],
        [ky.m12 * c[0], ky.m22 * c[1]],
    ];
    let mut w = [[0.0; 2]; 2];
    for i in 0..2 {
        w[i][0] = kyu[i][0] * ku_inv.m11 + kyu[i][1] * ku_inv.m12;
        w[i][1] = kyu[i][0] * ku_inv.m12 + kyu[i][1] * ku_inv.m22;
    }
    w
}

/// Runs the channel over `n` i.i.d. source vectors and estimates each
/// source coordinate with the analytic weights. Optionally tracks the
/// second moment of a weighted error `mu^T (y - yhat)`.
pub fn simulate(config: &SimConfig, mu: Option<[f64; 2]>) -> Result<SimReport> {
    let ky = config.model.covariance2()?;
    let sqrt_ky = ky.sqrt();
    let c = [config.channel.gain(0), config.channel.gain(1)];
    let noise_sd = [
        config.channel.noise_var(0).sqrt(),
        config.channel.noise_var(1).sqrt(),
    ];
    let w = lmmse_weights(&ky, c);
    let lambda = config.channel.lambda();
    let predicted = dg_from_lambda(&config.model, [lambda[0], lambda[1]])?;
    let predicted_m = predicted.matrix();

    let mut m11 = Moment::new();
    let mut m12 = Moment::new();
    let mut m22 = Moment::new();
    let mut m_mu = Moment::new();

    for i in 0..config.samples {
        let mut rng = sample_rng(config.seed, i as u64);
        let w1 = draw_innovation(&mut rng, config.source_kind);
        let w2 = draw_innovation(&mut rng, config.source_kind);
        let y = sqrt_ky.mul_vec([w1, w2]);
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let u = [c[0] * y[0] + noise_sd[0] * z1, c[1] * y[1] + noise_sd[1] * z2];
        let e = [
            y[0] - (w[0][0] * u[0] + w[0][1] * u[1]),
            y[1] - (w[1][0] * u[0] + w[1][1] * u[1]),
        ];
        m11.push(e[0] * e[0]);
        m12.push(e[0] * e[1]);
        m22.push(e[1] * e[1]);
        if let Some(mu) = mu {
            let me = mu[0] * e[0] + mu[1] * e[1];
            m_mu.push(me * me);
        }
    }

    let n = config.samples;
    let empirical = Mat2::new(m11.mean(n), m12.mean(n), m22.mean(n));
    let stderr = Mat2::new(m11.stderr(n), m12.stderr(n), m22.stderr(n));
    let empirical_theta = empirical.m12 / (empirical.m11 * empirical.m22).sqrt();
    Ok(SimReport {
        samples: n,
        seed: config.seed,
        source_kind: config.source_kind,
        empirical,
        predicted: predicted_m,
        stderr,
        empirical_theta,
        predicted_theta: predicted.theta,
        mu,
        mu_sum_empirical: mu.map(|_| m_mu.mean(n)),
        mu_sum_predicted: mu.map(|mu| predicted_m.quad_form(mu)),
        mu_sum_stderr: mu.map(|_| m_mu.stderr(n)),
    })
}

/// Empirical check of the coupling identity behind the weighted-sum/CEO
/// reduction: with `y_j = a_j x + n_j` and any channel output `u`,
/// `E[(x - E[x|u])^2] = gamma + E[(mu^T y - E[mu^T y|u])^2]`
/// for the normalized weight vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub samples: usize,
    pub seed: u64,
    pub gamma: f64,
    pub a: [f64; 2],
    /// Mean squared estimation error of the hidden variable.
    pub ceo_mse: f64,
    /// `gamma` plus the mean squared weighted-sum error.
    pub coupled_mse: f64,
    /// Mean of the per-sample difference of the two sides.
    pub diff: f64,
    pub diff_stderr: f64,
}

impl CouplingReport {
    pub fn holds(&self, k: f64) -> bool {
        self.diff.abs() <= k * self.diff_stderr
    }
}

/// Samples the coupled system and compares both sides of the identity.
/// The per-sample difference is paired, which cancels most of the common
/// randomness and tightens the gate.
pub fn musum_coupling_check(
    rho: f64,
    mu: [f64; 2],
    channel: &TestChannel,
    samples: usize,
    seed: u64,
) -> Result<CouplingReport> {
    if channel.len() != 2 {
        return Err(Error::NotTwoSources { l: channel.len() });
    }
    if samples < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            min: MIN_SAMPLES,
            got: samples,
        });
    }
    let coupling = normalize_mu(mu, rho)?;
    let mu_n = coupling.normalized_mu();
    let a = [coupling.a1, coupling.a2];
    let obs_noise_sd = [(1.0 - a[0] * a[0]).sqrt(), (1.0 - a[1] * a[1]).sqrt()];
    let ky = SourceModel::pair(rho)?.covariance2()?;
    let c = [channel.gain(0), channel.gain(1)];
    let ch_noise_sd = [channel.noise_var(0).sqrt(), channel.noise_var(1).sqrt()];

    let ku = Mat2::new(1.0, c[0] * c[1] * rho, 1.0);
    let ku_inv = ku.inverse();
    // Weights for estimating x and mu^T y from u.
    let cov_xu = [c[0] * a[0], c[1] * a[1]];
    let w_x = ku_inv.mul_vec(cov_xu);
    let kymu = ky.mul_vec(mu_n);
    let cov_mu_u = [c[0] * kymu[0], c[1] * kymu[1]];
    let w_m = ku_inv.mul_vec(cov_mu_u);

    let mut lhs = Moment::new();
    let mut rhs = Moment::new();
    let mut diff = Moment::new();
    for i in 0..samples {
        let mut rng = sample_rng(seed, i as u64);
        let x: f64 = rng.sample(StandardNormal);
        let n1: f64 = rng.sample(StandardNormal);
        let n2: f64 = rng.sample(StandardNormal);
        let y = [
            a[0] * x + obs_noise_sd[0] * n1,
            a[1] * x + obs_noise_sd[1] * n2,
        ];
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let u = [
            c[0] * y[0] + ch_noise_sd[0] * z1,
            c[1] * y[1] + ch_noise_sd[1] * z2,
        ];
        let x_err = x - (w_x[0] * u[0] + w_x[1] * u[1]);
        let m = mu_n[0] * y[0] + mu_n[1] * y[1];
        let m_err = m - (w_m[0] * u[0] + w_m[1] * u[1]);
        let l = x_err * x_err;
        let r = m_err * m_err;
        lhs.push(l);
        rhs.push(r);
        diff.push(l - r - coupling.gamma);
    }
    Ok(CouplingReport {
        samples,
        seed,
        gamma: coupling.gamma,
        a,
        ceo_mse: lhs.mean(samples),
        coupled_mse: coupling.gamma + rhs.mean(samples),
        diff: diff.mean(samples),
        diff_stderr: diff.stderr(samples),
    })
}

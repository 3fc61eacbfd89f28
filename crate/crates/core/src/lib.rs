//! Rate regions and sum rates for distributed lossy compression of
//! correlated Gaussian sources.
//!
//! Two encoders separately observe the coordinates of a unit-variance
//! Gaussian pair with correlation `rho` and must let a decoder reproduce
//! them under per-coordinate mean-squared-error caps. This crate computes
//! everything about that problem that admits explicit evaluation:
//!
//! - the rate region (two marginal bounds plus a sum-rate bound), its
//!   membership test, and boundary traces ([`two_encoder`]);
//! - the algebra of distributed Gaussian test channels, where error
//!   covariances are inverses of diagonally loaded source precisions
//!   ([`test_channel`]);
//! - weighted-sum targets `mu^T y` via a coupling to a CEO problem, with
//!   a closed-form water-filling solution and the full auxiliary-rate
//!   region ([`ceo`]);
//! - the converse's cooperative/weighted-sum min-max over the error
//!   correlation ([`minimax`]);
//! - several weighted constraints at once, with Fritz John stationarity
//!   verification and the remote-source reduction ([`msums`]);
//! - equal-distortion instances over `L` exchangeable sources ([`many`]);
//! - seeded Monte Carlo validation of the estimator statistics ([`sim`]).
//!
//! All rates are in bits per sample. Everything is a pure function over
//! immutable values and safe to use across threads. The [`oracle`] module
//! holds slow, generic reference implementations used by the test suites
//! to cross-check the closed forms; production paths never call it.

// Validation is written as `!(x > lo && x < hi)` so that NaN fails closed.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ceo;
pub mod error;
pub mod many;
pub mod minimax;
pub mod model;
pub mod msums;
pub mod numeric;
pub mod oracle;
pub mod sim;
pub mod test_channel;
pub mod two_encoder;

pub use ceo::{CeoCoupling, KktSolution, MuSpec};
pub use error::{Error, Result};
pub use many::SymmetricInstance;
pub use minimax::MinimaxProfile;
pub use model::{ErrorCov, Exchangeable, Mat2, RatePoint, SourceModel, TestChannel};
pub use msums::{FritzJohnReport, MSumsSolution, MSumsSpec, MuConstraint, RemoteMap};
pub use sim::{CouplingReport, SimConfig, SimReport, SourceKind};
pub use test_channel::{Contrapolymatroid, DgMember};
pub use two_encoder::{RegionSpec, RegionTrace};

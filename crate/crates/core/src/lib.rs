//! Achievable rate regions of three-user Gaussian cognitive interference
//! channels.
//!
//! The pipeline is: channel + splitting parameters -> joint covariance of the
//! auxiliary and output signals -> mutual-information terms -> a rate
//! polytope in the split rates -> projection onto per-user totals -> Monte
//! Carlo union over parameter draws.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod catalog;
pub mod channel;
pub mod gaussian;
pub mod info;
pub mod linalg;
pub mod lp;
pub mod polytope;
pub mod region;
pub mod stream;

pub use channel::{GaussianChannelSpec, ModelVariant, Sharing, Decoding, SplittingParams, SpecError};
pub use gaussian::{build_covariance, CovarianceModel, ModelError};
pub use info::{Covariance, InfoError, MiTerm, VarSet};

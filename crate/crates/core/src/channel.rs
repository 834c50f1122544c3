//! Channel parameters, model variants and the coding-parameter sampler.

use core::fmt;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::stream::draw_stream;

/// Message-sharing scheme between the transmitters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sharing {
    /// Cumulative: CR1 knows the primary's message, CR2 knows both.
    Cms,
    /// Primary-only: both cognitive radios know only the primary's message.
    Pms,
}

/// Which receivers can decode the public sub-messages.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Decoding {
    /// Public parts decodable at every receiver.
    Variant1,
    /// Public parts decodable at the intended and the primary receiver only.
    Variant2,
}

/// One of the four channel models.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModelVariant {
    pub sharing: Sharing,
    pub decoding: Decoding,
}

impl ModelVariant {
    pub const CMS1: Self = Self::new(Sharing::Cms, Decoding::Variant1);
    pub const CMS2: Self = Self::new(Sharing::Cms, Decoding::Variant2);
    pub const PMS1: Self = Self::new(Sharing::Pms, Decoding::Variant1);
    pub const PMS2: Self = Self::new(Sharing::Pms, Decoding::Variant2);

    pub const ALL: [Self; 4] = [Self::CMS1, Self::CMS2, Self::PMS1, Self::PMS2];

    pub const fn new(sharing: Sharing, decoding: Decoding) -> Self {
        Self { sharing, decoding }
    }

    /// Short name used on the command line: `cms1`, `cms2`, `pms1`, `pms2`.
    pub fn name(&self) -> &'static str {
        match (self.sharing, self.decoding) {
            (Sharing::Cms, Decoding::Variant1) => "cms1",
            (Sharing::Cms, Decoding::Variant2) => "cms2",
            (Sharing::Pms, Decoding::Variant1) => "pms1",
            (Sharing::Pms, Decoding::Variant2) => "pms2",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == name)
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error("transmit power {0} must be strictly positive")]
    NonPositivePower(&'static str),
    #[error("noise variance {0} must be strictly positive")]
    NonPositiveNoise(&'static str),
    #[error("interference coefficient {0} must be finite")]
    NonFiniteCoefficient(&'static str),
}

/// Gaussian three-user channel: `Y1 = X1 + a12 X2 + a13 X3 + Z1` and so on.
///
/// Powers and noise variances are linear (not dB).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianChannelSpec {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    pub a12: f64,
    pub a13: f64,
    pub a21: f64,
    pub a23: f64,
    pub a31: f64,
    pub a32: f64,
    pub variant: ModelVariant,
}

impl GaussianChannelSpec {
    /// Symmetric setup: equal powers, unit-free noise and one common
    /// interference coefficient on all six cross links.
    pub fn symmetric(power: f64, noise: f64, coefficient: f64, variant: ModelVariant) -> Self {
        Self {
            p1: power,
            p2: power,
            p3: power,
            q1: noise,
            q2: noise,
            q3: noise,
            a12: coefficient,
            a13: coefficient,
            a21: coefficient,
            a23: coefficient,
            a31: coefficient,
            a32: coefficient,
            variant,
        }
    }

    /// The simulation setup used for the published comparison table:
    /// 10 dB powers, unit noise, all cross gains 0.55.
    pub fn reference(variant: ModelVariant) -> Self {
        Self::symmetric(db_to_linear(10.0), 1.0, 0.55, variant)
    }

    pub fn with_variant(mut self, variant: ModelVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        validate_spec(self)
    }
}

/// Checks the positivity and finiteness invariants of a channel spec.
pub fn validate_spec(spec: &GaussianChannelSpec) -> Result<(), SpecError> {
    for (name, value) in [("p1", spec.p1), ("p2", spec.p2), ("p3", spec.p3)] {
        // `!(v > 0)` also rejects NaN
        if !(value > 0.0) || !value.is_finite() {
            return Err(SpecError::NonPositivePower(name));
        }
    }
    for (name, value) in [("q1", spec.q1), ("q2", spec.q2), ("q3", spec.q3)] {
        if !(value > 0.0) || !value.is_finite() {
            return Err(SpecError::NonPositiveNoise(name));
        }
    }
    for (name, value) in [
        ("a12", spec.a12),
        ("a13", spec.a13),
        ("a21", spec.a21),
        ("a23", spec.a23),
        ("a31", spec.a31),
        ("a32", spec.a32),
    ] {
        if !value.is_finite() {
            return Err(SpecError::NonFiniteCoefficient(name));
        }
    }
    Ok(())
}

pub fn db_to_linear(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}

/// Margin keeping the split fractions away from 0 and 1, where component
/// variances vanish and covariance submatrices turn singular.
pub const SPLIT_MARGIN: f64 = 1e-6;

/// The coding-parameter vector swept by the region union.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplittingParams {
    /// Fraction of the primary's power carried by `W`.
    pub lambda: f64,
    /// Power split of CR1 between `U1` and `U2`.
    pub tau: f64,
    /// Power split of CR2 between `V1` and `V3`.
    pub kappa: f64,
    pub alpha: [f64; 4],
    pub beta: [f64; 2],
}

impl SplittingParams {
    /// Full primary power, even splits, no precoding correlation.
    pub fn trivial() -> Self {
        Self { lambda: 1.0, tau: 0.5, kappa: 0.5, alpha: [0.0; 4], beta: [0.0; 2] }
    }

    pub fn tau_bar(&self) -> f64 {
        1.0 - self.tau
    }

    pub fn kappa_bar(&self) -> f64 {
        1.0 - self.kappa
    }

    /// Same parameters with the CR2-on-CR1 precoding coefficients removed,
    /// i.e. the primary-only sharing restriction.
    pub fn without_beta(mut self) -> Self {
        self.beta = [0.0; 2];
        self
    }

    /// Checks the range invariants and, for primary-only sharing, that the
    /// beta coefficients are exactly zero.
    pub fn is_consistent_with(&self, sharing: Sharing) -> bool {
        let ranges = self.lambda > 0.0
            && self.lambda <= 1.0
            && self.tau > 0.0
            && self.tau < 1.0
            && self.kappa > 0.0
            && self.kappa < 1.0;
        let finite = self.alpha.iter().chain(self.beta.iter()).all(|v| v.is_finite());
        let betas = sharing == Sharing::Cms || self.beta == [0.0; 2];
        ranges && finite && betas
    }
}

/// Draws the coding parameters for draw `index` of the stream `seed`.
///
/// All nine coordinates are always drawn in the same order, so the
/// primary-only law is the cumulative law with the betas zeroed afterwards.
pub fn sample_params(spec: &GaussianChannelSpec, seed: u64, index: u64) -> SplittingParams {
    let mut rng = draw_stream(seed, index);
    let mut unit = |lo: f64, hi: f64| lo + (hi - lo) * rng.random::<f64>();
    let lambda = unit(SPLIT_MARGIN, 1.0);
    let tau = unit(SPLIT_MARGIN, 1.0 - SPLIT_MARGIN);
    let kappa = unit(SPLIT_MARGIN, 1.0 - SPLIT_MARGIN);
    let mut alpha = [0.0; 4];
    for a in alpha.iter_mut() {
        *a = rng.sample(StandardNormal);
    }
    let mut beta = [0.0; 2];
    for b in beta.iter_mut() {
        *b = rng.sample(StandardNormal);
    }
    let params = SplittingParams { lambda, tau, kappa, alpha, beta };
    match spec.variant.sharing {
        Sharing::Cms => params,
        Sharing::Pms => params.without_beta(),
    }
}

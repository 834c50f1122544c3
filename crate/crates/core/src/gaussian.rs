//! Joint Gaussian model of `Theta = (Y1, Y2, Y3, W, U1, U2, V1, V3)`.
//!
//! The eight observables are linear images of eight independent sources
//! `G = (W~, U1~, U2~, V1~, V3~, Z1, Z2, Z3)`:
//!
//! ```text
//! X1 = W~            X2 = U1~ + U2~            X3 = V1~ + V3~
//! W  = W~            U1 = U1~ + a1 X1          U2 = U2~ + a2 X1
//! V1 = V1~ + a3 X1 + b1 X2                     V3 = V3~ + a4 X1 + b2 X2
//! Yk = sum_j a_kj X_j + Zk                     (a_kk = 1)
//! ```
//!
//! and the covariance is `Sigma = M diag(var G) M^T`, so it is positive
//! semidefinite by construction. The closed-form entry tables that were
//! derived by hand are kept separately in [`closed_form_theta_table`] and act only
//! as a cross-check.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::{Decoding, GaussianChannelSpec, Sharing, SplittingParams};
use crate::info::Covariance;

/// Position of each observable in `Theta`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ThetaVar {
    Y1 = 0,
    Y2 = 1,
    Y3 = 2,
    W = 3,
    U1 = 4,
    U2 = 5,
    V1 = 6,
    V3 = 7,
}

pub const THETA_NAMES: [&str; 8] = ["Y1", "Y2", "Y3", "W", "U1", "U2", "V1", "V3"];
pub const SOURCE_NAMES: [&str; 8] = ["W~", "U1~", "U2~", "V1~", "V3~", "Z1", "Z2", "Z3"];

/// Number of mixing-matrix columns: eight sources plus one spare column
/// that is always zero.
pub const MIXING_COLS: usize = 9;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("no Gaussian construction exists for model {0}; supply a covariance instead")]
    VariantUnsupported(String),
    #[error(transparent)]
    Spec(#[from] crate::channel::SpecError),
    #[error("splitting parameters out of range for this model")]
    InvalidParams,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceModel {
    pub sharing: Sharing,
    pub mixing: [[f64; MIXING_COLS]; 8],
    pub source_variances: [f64; 8],
    pub sigma: Covariance,
}

impl CovarianceModel {
    pub fn variable_names(&self) -> &[String] {
        self.sigma.names()
    }

    pub fn entry(&self, a: ThetaVar, b: ThetaVar) -> f64 {
        self.sigma.get(a as usize, b as usize)
    }

    /// Mixing rows of the transmit signals `X1, X2, X3` (derived, not part
    /// of `Theta`).
    pub fn input_rows(&self) -> [[f64; MIXING_COLS]; 3] {
        let mut x = [[0.0; MIXING_COLS]; 3];
        x[0][0] = 1.0;
        x[1][1] = 1.0;
        x[1][2] = 1.0;
        x[2][3] = 1.0;
        x[2][4] = 1.0;
        x
    }

    /// `Var(X1), Var(X2), Var(X3)` computed through the mixing rows.
    pub fn input_variances(&self) -> [f64; 3] {
        let rows = self.input_rows();
        let mut out = [0.0; 3];
        for (k, row) in rows.iter().enumerate() {
            out[k] = row.iter().zip(self.source_variances.iter()).map(|(m, v)| m * m * v).sum();
        }
        out
    }

    /// Smallest eigenvalue bound check: returns `min_eig >= -tol * trace` by
    /// attempting a Cholesky factorization of `Sigma + tol * trace * I`.
    pub fn is_psd(&self, tol: f64) -> bool {
        let n = self.sigma.dim();
        let shift = tol * self.sigma.trace();
        let mut l = [0.0f64; 64];
        for i in 0..n {
            for j in 0..=i {
                let mut s = self.sigma.get(i, j) + if i == j { shift } else { 0.0 };
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if s < 0.0 {
                        return false;
                    }
                    l[i * n + i] = libm::sqrt(s);
                } else if l[j * n + j] > 0.0 {
                    l[i * n + j] = s / l[j * n + j];
                } else if libm::fabs(s) > 0.0 {
                    return false;
                }
            }
        }
        true
    }
}

/// Builds the mixing matrix and `Sigma` for a variant-2 channel.
pub fn build_covariance(spec: &GaussianChannelSpec, params: &SplittingParams) -> Result<CovarianceModel, ModelError> {
    spec.validate()?;
    if spec.variant.decoding == Decoding::Variant1 {
        return Err(ModelError::VariantUnsupported(spec.variant.name().to_string()));
    }
    if !params.is_consistent_with(spec.variant.sharing) {
        return Err(ModelError::InvalidParams);
    }
    let [a1, a2, a3, a4] = params.alpha;
    let [b1, b2] = params.beta;

    // source columns: 0 W~, 1 U1~, 2 U2~, 3 V1~, 4 V3~, 5 Z1, 6 Z2, 7 Z3, 8 spare
    let x1 = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    let x2 = [0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    let x3 = [0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0];
    let comb = |terms: &[(f64, &[f64; MIXING_COLS])], unit: Option<usize>| {
        let mut row = [0.0; MIXING_COLS];
        for (c, x) in terms {
            for k in 0..MIXING_COLS {
                row[k] += c * x[k];
            }
        }
        if let Some(u) = unit {
            row[u] += 1.0;
        }
        row
    };

    let mixing = [
        comb(&[(1.0, &x1), (spec.a12, &x2), (spec.a13, &x3)], Some(5)),
        comb(&[(spec.a21, &x1), (1.0, &x2), (spec.a23, &x3)], Some(6)),
        comb(&[(spec.a31, &x1), (spec.a32, &x2), (1.0, &x3)], Some(7)),
        comb(&[], Some(0)),
        comb(&[(a1, &x1)], Some(1)),
        comb(&[(a2, &x1)], Some(2)),
        comb(&[(a3, &x1), (b1, &x2)], Some(3)),
        comb(&[(a4, &x1), (b2, &x2)], Some(4)),
    ];
    let source_variances = [
        params.lambda * spec.p1,
        params.tau * spec.p2,
        params.tau_bar() * spec.p2,
        params.kappa * spec.p3,
        params.kappa_bar() * spec.p3,
        spec.q1,
        spec.q2,
        spec.q3,
    ];

    let mut data = alloc::vec![0.0; 64];
    for i in 0..8 {
        for j in 0..=i {
            let s: f64 = (0..8).map(|k| mixing[i][k] * source_variances[k] * mixing[j][k]).sum();
            data[i * 8 + j] = s;
            data[j * 8 + i] = s;
        }
    }
    let names = THETA_NAMES.iter().map(|s| s.to_string()).collect();
    let sigma = Covariance::new(names, data).map_err(|_| ModelError::InvalidParams)?;
    Ok(CovarianceModel { sharing: spec.variant.sharing, mixing, source_variances, sigma })
}

/// Draws `n` realizations of `Theta` through the mixing matrix and returns
/// their sample covariance (denominator `n - 1`).
pub fn sample_theta<R: Rng + ?Sized>(model: &CovarianceModel, n: usize, rng: &mut R) -> Covariance {
    assert!(n >= 2, "sample_theta needs at least two samples");
    let sd: [f64; 8] = core::array::from_fn(|k| libm::sqrt(model.source_variances[k]));
    let mut sum = [0.0f64; 8];
    let mut prod = [0.0f64; 36];
    for _ in 0..n {
        let mut g = [0.0f64; 8];
        for k in 0..8 {
            let z: f64 = rng.sample(StandardNormal);
            g[k] = sd[k] * z;
        }
        let mut theta = [0.0f64; 8];
        for i in 0..8 {
            let row = &model.mixing[i];
            let mut s = 0.0;
            for k in 0..8 {
                s += row[k] * g[k];
            }
            theta[i] = s;
            sum[i] += s;
        }
        let mut p = 0;
        for i in 0..8 {
            for j in 0..=i {
                prod[p] += theta[i] * theta[j];
                p += 1;
            }
        }
    }
    let nf = n as f64;
    let mut data = alloc::vec![0.0; 64];
    let mut p = 0;
    for i in 0..8 {
        for j in 0..=i {
            let c = (prod[p] - sum[i] * sum[j] / nf) / (nf - 1.0);
            data[i * 8 + j] = c;
            data[j * 8 + i] = c;
            p += 1;
        }
    }
    Covariance::new(model.sigma.names().to_vec(), data).expect("sample covariance is symmetric")
}

/// A hand-derived entry whose printed formula disagrees with the generative
/// model, together with the correction applied in [`closed_form_theta_table`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ThetaRepair {
    pub sharing: Sharing,
    /// 1-based `(row, column)` of `theta_column^row`.
    pub row: usize,
    pub col: usize,
    pub printed: &'static str,
    pub corrected: &'static str,
}

/// Entries of the published entry tables that are misprinted. Each one is
/// evaluated with the corrected formula by [`closed_form_theta_table`]; the
/// printed form is available through [`printed_theta_table`].
///
/// The primary-only `theta_1^1` keeps `Var(X1) = lambda P1`, consistent with
/// `theta_4^4 = lambda P1` in the same table.
pub const THETA_REPAIRS: [ThetaRepair; 5] = [
    ThetaRepair { sharing: Sharing::Cms, row: 8, col: 8, printed: "a4^2 P1 + b2^2 P2 + k' P3", corrected: "a4^2 l P1 + b2^2 P2 + k' P3" },
    ThetaRepair { sharing: Sharing::Pms, row: 1, col: 1, printed: "P1 + a12^2 P2 + a13^2 P3 + Q1", corrected: "l P1 + a12^2 P2 + a13^2 P3 + Q1" },
    ThetaRepair { sharing: Sharing::Pms, row: 6, col: 6, printed: "a2^2 l P1 + t P2", corrected: "a2^2 l P1 + t' P2" },
    ThetaRepair { sharing: Sharing::Pms, row: 6, col: 7, printed: "a1 a3 l P1", corrected: "a2 a3 l P1" },
    ThetaRepair { sharing: Sharing::Pms, row: 7, col: 6, printed: "a1 a3 l P1", corrected: "a2 a3 l P1" },
];

/// 8x8 table of closed-form entries; `None` marks a "don't care" entry.
pub type ThetaTable = [[Option<f64>; 8]; 8];

/// The closed-form entry tables with the misprints in [`THETA_REPAIRS`]
/// corrected.
pub fn closed_form_theta_table(spec: &GaussianChannelSpec, params: &SplittingParams, sharing: Sharing) -> ThetaTable {
    theta_table(spec, params, sharing, true)
}

/// The closed-form entry tables exactly as printed.
pub fn printed_theta_table(spec: &GaussianChannelSpec, params: &SplittingParams, sharing: Sharing) -> ThetaTable {
    theta_table(spec, params, sharing, false)
}

fn theta_table(spec: &GaussianChannelSpec, params: &SplittingParams, sharing: Sharing, repaired: bool) -> ThetaTable {
    let (p1, p2, p3) = (spec.p1, spec.p2, spec.p3);
    let (q1, q2, q3) = (spec.q1, spec.q2, spec.q3);
    let (a12, a13, a21, a23, a31, a32) = (spec.a12, spec.a13, spec.a21, spec.a23, spec.a31, spec.a32);
    let l = params.lambda;
    let (t, tb) = (params.tau, params.tau_bar());
    let (k, kb) = (params.kappa, params.kappa_bar());
    let [al1, al2, al3, al4] = params.alpha;
    let lp1 = l * p1;
    let x: Option<f64> = None;
    let s = Some;

    match sharing {
        Sharing::Cms => {
            let [b1, b2] = params.beta;
            let v3v3 = if repaired { al4 * al4 * lp1 } else { al4 * al4 * p1 } + b2 * b2 * p2 + kb * p3;
            [
                [
                    s(lp1 + a12 * a12 * p2 + a13 * a13 * p3 + q1),
                    x,
                    x,
                    s(lp1),
                    s(al1 * lp1 + a12 * t * p2),
                    s(al2 * lp1 + a12 * tb * p2),
                    s(al3 * lp1 + a12 * b1 * p2 + a13 * k * p3),
                    s(al4 * lp1 + a12 * b2 * p2 + a13 * kb * p3),
                ],
                [
                    x,
                    s(a21 * a21 * lp1 + p2 + a23 * a23 * p3 + q2),
                    x,
                    x,
                    s(a21 * al1 * lp1 + t * p2),
                    s(a21 * al2 * lp1 + tb * p2),
                    s(a21 * al3 * lp1 + b1 * p2 + a23 * k * p3),
                    x,
                ],
                [
                    x,
                    x,
                    s(a31 * a31 * lp1 + a32 * a32 * p2 + p3 + q3),
                    s(a31 * lp1),
                    s(a31 * al1 * lp1 + a32 * t * p2),
                    s(a31 * al2 * lp1 + a32 * tb * p2),
                    s(a31 * al3 * lp1 + a32 * b1 * p2 + k * p3),
                    s(a31 * al4 * lp1 + a32 * b2 * p2 + kb * p3),
                ],
                [
                    s(lp1),
                    x,
                    s(a31 * lp1),
                    s(lp1),
                    s(al1 * lp1),
                    s(al2 * lp1),
                    s(al3 * lp1),
                    s(al4 * lp1),
                ],
                [
                    s(al1 * lp1 + a12 * t * p2),
                    s(a21 * al1 * lp1 + t * p2),
                    s(a31 * al1 * lp1 + a32 * t * p2),
                    s(al1 * lp1),
                    s(al1 * al1 * lp1 + t * p2),
                    s(al1 * al2 * lp1),
                    s(al1 * al3 * lp1 + b1 * t * p2),
                    s(al1 * al4 * lp1 + b2 * t * p2),
                ],
                [
                    s(al2 * lp1 + a12 * tb * p2),
                    s(a21 * al2 * lp1 + tb * p2),
                    s(a31 * al2 * lp1 + a32 * tb * p2),
                    s(al2 * lp1),
                    s(al1 * al2 * lp1),
                    s(al2 * al2 * lp1 + tb * p2),
                    s(al2 * al3 * lp1 + b1 * tb * p2),
                    s(al2 * al4 * lp1 + b2 * tb * p2),
                ],
                [
                    s(al3 * lp1 + a12 * b1 * p2 + a13 * k * p3),
                    s(a21 * al3 * lp1 + b1 * p2 + a23 * k * p3),
                    s(a31 * al3 * lp1 + a32 * b1 * p2 + k * p3),
                    s(al3 * lp1),
                    s(al1 * al3 * lp1 + b1 * t * p2),
                    s(al2 * al3 * lp1 + b1 * tb * p2),
                    s(al3 * al3 * lp1 + b1 * b1 * p2 + k * p3),
                    s(al3 * al4 * lp1 + b1 * b2 * p2),
                ],
                [
                    s(al4 * lp1 + a12 * b2 * p2 + a13 * kb * p3),
                    x,
                    s(a31 * al4 * lp1 + a32 * b2 * p2 + kb * p3),
                    s(al4 * lp1),
                    s(al1 * al4 * lp1 + b2 * t * p2),
                    s(al2 * al4 * lp1 + b2 * tb * p2),
                    s(al3 * al4 * lp1 + b1 * b2 * p2),
                    s(v3v3),
                ],
            ]
        }
        Sharing::Pms => {
            let y1y1 = if repaired { lp1 } else { p1 } + a12 * a12 * p2 + a13 * a13 * p3 + q1;
            let u2u2 = al2 * al2 * lp1 + if repaired { tb * p2 } else { t * p2 };
            let u2v1 = if repaired { al2 * al3 * lp1 } else { al1 * al3 * lp1 };
            [
                [
                    s(y1y1),
                    x,
                    x,
                    s(lp1),
                    s(al1 * lp1 + a12 * t * p2),
                    s(al2 * lp1 + a12 * tb * p2),
                    s(al3 * lp1 + a13 * k * p3),
                    s(al4 * lp1 + a13 * kb * p3),
                ],
                [
                    x,
                    s(a21 * a21 * lp1 + p2 + a23 * a23 * p3 + q2),
                    x,
                    s(a21 * lp1),
                    s(a21 * al1 * lp1 + t * p2),
                    s(a21 * al2 * lp1 + tb * p2),
                    s(a21 * al3 * lp1 + a23 * k * p3),
                    x,
                ],
                [
                    x,
                    x,
                    s(a31 * a31 * lp1 + a32 * a32 * p2 + p3 + q3),
                    s(a31 * lp1),
                    s(a31 * al1 * lp1 + a32 * t * p2),
                    s(a31 * al2 * lp1 + a32 * tb * p2),
                    s(a31 * al3 * lp1 + k * p3),
                    s(a31 * al4 * lp1 + kb * p3),
                ],
                [
                    s(lp1),
                    s(a21 * lp1),
                    s(a31 * lp1),
                    s(lp1),
                    s(al1 * lp1),
                    s(al2 * lp1),
                    s(al3 * lp1),
                    s(al4 * lp1),
                ],
                [
                    s(al1 * lp1 + a12 * t * p2),
                    s(a21 * al1 * lp1 + t * p2),
                    s(a31 * al1 * lp1 + a32 * t * p2),
                    s(al1 * lp1),
                    s(al1 * al1 * lp1 + t * p2),
                    s(al1 * al2 * lp1),
                    s(al1 * al3 * lp1),
                    s(al1 * al4 * lp1),
                ],
                [
                    s(al2 * lp1 + a12 * tb * p2),
                    s(a21 * al2 * lp1 + tb * p2),
                    s(a31 * al2 * lp1 + a32 * tb * p2),
                    s(al2 * lp1),
                    s(al1 * al2 * lp1),
                    s(u2u2),
                    s(u2v1),
                    s(al2 * al4 * lp1),
                ],
                [
                    s(al3 * lp1 + a13 * k * p3),
                    s(a21 * al3 * lp1 + a23 * k * p3),
                    s(a31 * al3 * lp1 + k * p3),
                    s(al3 * lp1),
                    s(al1 * al3 * lp1),
                    s(u2v1),
                    s(al3 * al3 * lp1 + k * p3),
                    s(al3 * al4 * lp1),
                ],
                [
                    s(al4 * lp1 + a13 * kb * p3),
                    x,
                    s(a31 * al4 * lp1 + kb * p3),
                    s(al4 * lp1),
                    s(al1 * al4 * lp1),
                    s(al2 * al4 * lp1),
                    s(al3 * al4 * lp1),
                    s(al4 * al4 * lp1 + kb * p3),
                ],
            ]
        }
    }
}

/// One disagreeing entry, 1-based like the published tables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaMismatch {
    pub row: usize,
    pub col: usize,
    pub table: f64,
    pub model: f64,
    pub rel_err: f64,
}

/// Relative tolerance for table-vs-model agreement.
pub const THETA_REL_TOL: f64 = 1e-10;

/// Compares every specified entry of `table` with `Sigma`.
///
/// The error is measured relative to `max(|table|, |model|)`; an absolute
/// floor of `1e-14 sqrt(Sigma_ii Sigma_jj)` keeps round-off in entries that
/// cancel to (nearly) zero from registering.
pub fn compare_theta_table(model: &CovarianceModel, table: &ThetaTable) -> Vec<ThetaMismatch> {
    let mut out = Vec::new();
    for i in 0..8 {
        for j in 0..8 {
            let Some(t) = table[i][j] else { continue };
            let m = model.sigma.get(i, j);
            let diff = libm::fabs(t - m);
            let natural = libm::sqrt(libm::fabs(model.sigma.get(i, i) * model.sigma.get(j, j)));
            let scale = libm::fabs(t).max(libm::fabs(m));
            let ok = diff <= THETA_REL_TOL * scale || diff <= 1e-14 * natural;
            if !ok || !t.is_finite() {
                let rel_err = if scale > 0.0 { diff / scale } else { f64::INFINITY };
                out.push(ThetaMismatch { row: i + 1, col: j + 1, table: t, model: m, rel_err });
            }
        }
    }
    out
}

/// Cross-checks `Sigma` against the (corrected) closed-form entry table of
/// the model's sharing scheme.
pub fn check_against_paper_table(
    spec: &GaussianChannelSpec,
    params: &SplittingParams,
    model: &CovarianceModel,
) -> Vec<ThetaMismatch> {
    compare_theta_table(model, &closed_form_theta_table(spec, params, model.sharing))
}

//! The covariance model against a direct simulation of the channel
//! equations (no mixing matrix involved).

use cogrates::channel::{db_to_linear, sample_params};
use cogrates::{build_covariance, GaussianChannelSpec, ModelVariant, Sharing, SplittingParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// One realization of `(Y1, Y2, Y3, W, U1, U2, V1, V3)` built straight
/// from the transmit-signal and auxiliary definitions.
fn realize<R: Rng>(spec: &GaussianChannelSpec, p: &SplittingParams, rng: &mut R) -> [f64; 8] {
    let mut n = |var: f64| var.sqrt() * rng.sample::<f64, _>(StandardNormal);
    let w_t = n(p.lambda * spec.p1);
    let u1_t = n(p.tau * spec.p2);
    let u2_t = n(p.tau_bar() * spec.p2);
    let v1_t = n(p.kappa * spec.p3);
    let v3_t = n(p.kappa_bar() * spec.p3);
    let (z1, z2, z3) = (n(spec.q1), n(spec.q2), n(spec.q3));
    let x1 = w_t;
    let x2 = u1_t + u2_t;
    let x3 = v1_t + v3_t;
    let (b1, b2) = match spec.variant.sharing {
        Sharing::Cms => (p.beta[0], p.beta[1]),
        Sharing::Pms => (0.0, 0.0),
    };
    [
        x1 + spec.a12 * x2 + spec.a13 * x3 + z1,
        spec.a21 * x1 + x2 + spec.a23 * x3 + z2,
        spec.a31 * x1 + spec.a32 * x2 + x3 + z3,
        w_t,
        u1_t + p.alpha[0] * x1,
        u2_t + p.alpha[1] * x1,
        v1_t + p.alpha[2] * x1 + b1 * x2,
        v3_t + p.alpha[3] * x1 + b2 * x2,
    ]
}

/// Fraction of the 36 unique entries within 3 standard errors, and the
/// largest deviation in standard errors.
fn score(spec: &GaussianChannelSpec, p: &SplittingParams, n: usize, seed: u64) -> (usize, f64) {
    let sigma = build_covariance(spec, p).unwrap().sigma;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = [0.0; 8];
    let mut prod = [[0.0; 8]; 8];
    for _ in 0..n {
        let t = realize(spec, p, &mut rng);
        for i in 0..8 {
            sum[i] += t[i];
            for j in 0..=i {
                prod[i][j] += t[i] * t[j];
            }
        }
    }
    let nf = n as f64;
    let (mut within, mut worst) = (0, 0.0f64);
    for i in 0..8 {
        for j in 0..=i {
            let emp = (prod[i][j] - sum[i] * sum[j] / nf) / (nf - 1.0);
            let s = sigma.get(i, j);
            let se = ((sigma.get(i, i) * sigma.get(j, j) + s * s) / nf).sqrt();
            let z = (emp - s).abs() / se;
            worst = worst.max(z);
            if z <= 3.0 {
                within += 1;
            }
        }
    }
    (within, worst)
}

#[test]
fn worked_example_matches_simulated_channel() {
    let spec = GaussianChannelSpec::symmetric(10.0, 1.0, 0.55, ModelVariant::CMS2);
    let p = SplittingParams { lambda: 1.0, tau: 0.4, kappa: 0.3, alpha: [0.1, -0.2, 0.3, 0.5], beta: [1.1, -0.7] };
    let (within, worst) = score(&spec, &p, 1_000_000, 11);
    // 36 simultaneous 3-SE tests exceed somewhere ~9% of the time even for
    // an exact model; 4 SE keeps the family-wise false alarm rate near 0.2%
    assert!(worst <= 4.0, "worst deviation {worst:.2} SE ({within}/36 within 3 SE)");
    assert!(within >= 35, "{within}/36 within 3 SE");
}

#[test]
fn random_draws_match_simulated_channel() {
    let mut within = 0;
    let mut total = 0;
    for variant in [ModelVariant::CMS2, ModelVariant::PMS2] {
        let mut spec = GaussianChannelSpec::reference(variant);
        spec.a13 = -0.3;
        spec.p2 = db_to_linear(6.0);
        for k in 0..4 {
            let p = sample_params(&spec, 21, k);
            let (w, _) = score(&spec, &p, 200_000, 100 + k);
            within += w;
            total += 36;
        }
    }
    assert!(within as f64 >= 0.99 * total as f64, "{within}/{total}");
}

#[test]
fn transmit_powers_are_exact() {
    let spec = GaussianChannelSpec::symmetric(db_to_linear(8.0), 1.0, 0.55, ModelVariant::CMS2);
    for k in 0..50 {
        let p = sample_params(&spec, 3, k);
        let m = build_covariance(&spec, &p).unwrap();
        let v = m.input_variances();
        assert!((v[0] - p.lambda * spec.p1).abs() <= 1e-12 * spec.p1);
        assert!((v[1] - spec.p2).abs() <= 1e-12 * spec.p2);
        assert!((v[2] - spec.p3).abs() <= 1e-12 * spec.p3);
    }
}


//! Oracle suites behind `cogrates verify`.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use cogrates::catalog::{project_to_totals, RatePolytope};
use cogrates::channel::sample_params;
use cogrates::gaussian::{compare_theta_table, closed_form_theta_table, sample_theta};
use cogrates::info::{entropy, mutual_information, VarSet};
use cogrates::polytope::{self, cube_directions, Halfspace, HalfspaceSystem};
use cogrates::region::{undominated, DrawEvaluator, ExploreOptions};
use cogrates::stream::aux_stream;
use cogrates::{build_covariance, GaussianChannelSpec, ModelVariant, SplittingParams};

use crate::exec::explore_parallel;
use crate::{CliError, RunConfig};

const SALT_SAMPLING: u64 = 1;
const SALT_INFO: u64 = 2;
const SALT_FM: u64 = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: bool,
    pub max_dev: f64,
    pub detail: String,
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "suite {}: {verdict} max_dev={:.3e} ({})", self.name, self.max_dev, self.detail)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    pub theta_draws: u64,
    pub sampling_draws: u64,
    pub samples: usize,
    pub info_draws: u64,
    pub fm_trials: u64,
    pub coupling_draws: u64,
    /// 1-based `(row, col)` of a closed-form table entry to corrupt.
    pub perturb_theta: Option<(usize, usize)>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            theta_draws: 1000,
            sampling_draws: 20,
            samples: 100_000,
            info_draws: 500,
            fm_trials: 200,
            coupling_draws: 2000,
            perturb_theta: None,
        }
    }
}

fn c2(spec: &GaussianChannelSpec, sharing_of: ModelVariant) -> GaussianChannelSpec {
    spec.with_variant(ModelVariant::new(sharing_of.sharing, cogrates::Decoding::Variant2))
}

/// Closed-form covariance tables against the generative construction.
pub fn theta_suite(spec: &GaussianChannelSpec, seed: u64, draws: u64, perturb: Option<(usize, usize)>) -> SuiteReport {
    let mut max_dev = 0.0f64;
    let mut bad: Vec<String> = Vec::new();
    let mut compared = 0usize;
    for variant in [ModelVariant::CMS2, ModelVariant::PMS2] {
        let spec = spec.with_variant(variant);
        for i in 0..draws {
            let params = sample_params(&spec, seed, i);
            let Ok(model) = build_covariance(&spec, &params) else {
                bad.push(format!("{variant} draw {i}: construction failed"));
                continue;
            };
            let mut table = closed_form_theta_table(&spec, &params, variant.sharing);
            if let Some((r, c)) = perturb {
                if let Some(t) = table[r - 1][c - 1].as_mut() {
                    *t += 1e-6 * t.abs().max(1.0);
                }
            }
            for r in 0..8 {
                for c in 0..8 {
                    if let Some(t) = table[r][c] {
                        let m = model.sigma.get(r, c);
                        let scale = t.abs().max(m.abs());
                        if scale > 0.0 {
                            max_dev = max_dev.max((t - m).abs() / scale);
                        }
                        compared += 1;
                    }
                }
            }
            for m in compare_theta_table(&model, &table) {
                let name = format!("{variant} theta({},{})", m.row, m.col);
                if !bad.contains(&name) {
                    bad.push(name);
                }
            }
        }
    }
    let detail = if bad.is_empty() {
        format!("{compared} entries over {draws} draws per model")
    } else {
        format!("mismatched entries: {}", bad.join(", "))
    };
    SuiteReport { name: "theta-table", passed: bad.is_empty(), max_dev, detail }
}

/// Empirical covariance of simulated `Theta` against the analytic one.
/// Each unique entry is scored in standard errors,
/// `se^2 = (S_ii S_jj + S_ij^2) / n` for Gaussian data.
pub fn sampling_suite(spec: &GaussianChannelSpec, seed: u64, draws: u64, samples: usize) -> SuiteReport {
    let per_draw: Vec<Result<(usize, usize, f64), String>> = (0..draws)
        .into_par_iter()
        .map(|k| {
            let params = sample_params(spec, seed, k);
            let model = build_covariance(spec, &params).map_err(|e| e.to_string())?;
            let emp = sample_theta(&model, samples, &mut aux_stream(seed, k, SALT_SAMPLING));
            let s = &model.sigma;
            let (mut within, mut total, mut worst) = (0, 0, 0.0f64);
            for i in 0..8 {
                for j in 0..=i {
                    let se = ((s.get(i, i) * s.get(j, j) + s.get(i, j).powi(2)) / samples as f64).sqrt();
                    let z = (emp.get(i, j) - s.get(i, j)).abs() / se;
                    worst = worst.max(z);
                    total += 1;
                    if z <= 3.0 {
                        within += 1;
                    }
                }
            }
            Ok((within, total, worst))
        })
        .collect();
    let (mut within, mut total, mut worst) = (0, 0, 0.0f64);
    for r in per_draw {
        match r {
            Ok((w, t, z)) => {
                within += w;
                total += t;
                worst = worst.max(z);
            }
            Err(e) => {
                return SuiteReport { name: "sampling", passed: false, max_dev: f64::INFINITY, detail: e };
            }
        }
    }
    let frac = within as f64 / total as f64;
    SuiteReport {
        name: "sampling",
        passed: frac >= 0.99,
        max_dev: worst,
        detail: format!("{within}/{total} entries within 3 SE ({:.2}%), {samples} samples per draw, max in SE units", 100.0 * frac),
    }
}

fn random_subset<R: Rng>(rng: &mut R, pool: &mut Vec<usize>) -> VarSet {
    let k = rng.random_range(1..=pool.len().min(3));
    let mut v: Vec<usize> = pool.drain(..k).collect();
    v.sort_unstable();
    VarSet::new(v).expect("nonempty")
}

/// Symmetry, nonnegativity, chain rule and monotonicity of Gaussian mutual
/// information on random disjoint variable sets.
pub fn info_suite(spec: &GaussianChannelSpec, seed: u64, draws: u64) -> SuiteReport {
    let (mut sym, mut neg, mut chain, mut mono) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut failures = Vec::new();
    for k in 0..draws {
        let params = sample_params(spec, seed, k);
        let Ok(model) = build_covariance(spec, &params) else {
            failures.push(format!("draw {k}: construction failed"));
            continue;
        };
        let sigma = &model.sigma;
        let mut rng = aux_stream(seed, k, SALT_INFO);
        let mut pool: Vec<usize> = (0..8).collect();
        pool.shuffle(&mut rng);
        let s = random_subset(&mut rng, &mut pool);
        let t = random_subset(&mut rng, &mut pool);
        let u = random_subset(&mut rng, &mut pool);
        let h = |v: &VarSet| entropy(sigma, v).expect("valid set");
        let mi = |a: &VarSet, b: &VarSet| mutual_information(sigma, a, b).expect("disjoint sets");
        let tu = t.union(&u);
        let i_st = mi(&s, &t);
        let i_s_tu = mi(&s, &tu);
        sym = sym.max((i_st - mi(&t, &s)).abs());
        neg = neg.max(-i_st).max(-i_s_tu).max(-mi(&s, &u));
        let cond = h(&s.union(&t)) + h(&u.union(&t)) - h(&t) - h(&s.union(&tu));
        chain = chain.max((i_s_tu - i_st - cond).abs());
        mono = mono.max(i_st - i_s_tu);
    }
    if sym > 1e-12 {
        failures.push(format!("symmetry {sym:.3e}"));
    }
    if neg > 1e-9 {
        failures.push(format!("negative MI {:.3e}", -neg));
    }
    if chain > 1e-9 {
        failures.push(format!("chain rule {chain:.3e}"));
    }
    if mono > 1e-9 {
        failures.push(format!("monotonicity {mono:.3e}"));
    }
    let detail = if failures.is_empty() {
        format!("{draws} draws; symmetry {sym:.1e}, chain {chain:.1e}")
    } else {
        failures.join(", ")
    };
    SuiteReport { name: "info-identities", passed: failures.is_empty(), max_dev: sym.max(neg).max(chain).max(mono), detail }
}

/// A random bounded system over 5 variables with 10 to 40 rows:
/// nonnegativity, a cap on the sum, and random rows through a box around
/// the origin.
pub fn random_system(seed: u64, trial: u64) -> HalfspaceSystem {
    let mut rng = aux_stream(seed, trial, SALT_FM);
    let rows = rng.random_range(10..=40);
    let mut sys = HalfspaceSystem::new(5).with_nonnegativity();
    sys.push(Halfspace::new(vec![1.0; 5], rng.random_range(2.0..6.0))).expect("dim 5");
    while sys.len() < rows {
        let a: Vec<f64> = (0..5)
            .map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random_range(-1.0..1.0f64) })
            .collect();
        if a.iter().all(|&v| v == 0.0) {
            continue;
        }
        sys.push(Halfspace::new(a, rng.random_range(0.2..3.0))).expect("dim 5");
    }
    sys
}

const FM_GROUPS: [&[usize]; 3] = [&[0], &[1, 2], &[3, 4]];

/// Worst support discrepancy over the 26 cube directions between the
/// Fourier-Motzkin projection of `sys` and the sum-mapped vertices.
pub fn fm_discrepancy(sys: &HalfspaceSystem) -> Result<f64, String> {
    let poly = RatePolytope { rate_names: (0..5).map(|i| format!("x{i}")).collect(), system: sys.clone() };
    let groups = FM_GROUPS.map(|g| g.to_vec());
    let proj = project_to_totals(&poly, &groups);
    let mapped: Vec<[f64; 3]> = polytope::enumerate_vertices(sys)
        .iter()
        .map(|v| FM_GROUPS.map(|g| g.iter().map(|&i| v[i]).sum()))
        .collect();
    if mapped.is_empty() {
        return Err("no vertices".into());
    }
    let mut worst = 0.0f64;
    for d in cube_directions() {
        let fm = polytope::support(&proj.system, &d).map_err(|e| e.to_string())?;
        let direct = polytope::support_of_points(&mapped, &d);
        worst = worst.max((fm - direct).abs() / direct.abs().max(1.0));
    }
    Ok(worst)
}

pub fn fm_suite(seed: u64, trials: u64) -> SuiteReport {
    let results: Vec<Result<f64, String>> = (0..trials).into_par_iter().map(|t| fm_discrepancy(&random_system(seed, t))).collect();
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for (t, r) in results.into_iter().enumerate() {
        match r {
            Ok(d) => {
                worst = worst.max(d);
                if d > 1e-9 {
                    bad.push(format!("trial {t}: {d:.3e}"));
                }
            }
            Err(e) => bad.push(format!("trial {t}: {e}")),
        }
    }
    let detail = if bad.is_empty() { format!("{trials} systems, 26 directions") } else { bad.join(", ") };
    SuiteReport { name: "fm-projection", passed: bad.is_empty(), max_dev: worst, detail }
}

/// Cumulative-sharing run whose draws also include their beta-zeroed twin,
/// against the primary-only run on the same seed.
pub fn coupling_suite(spec: &GaussianChannelSpec, seed: u64, draws: u64, threads: Option<usize>) -> Result<SuiteReport, CliError> {
    let none = |_: u64, _: &mut SplittingParams| {};
    let cms = spec.with_variant(ModelVariant::CMS2);
    let pms = spec.with_variant(ModelVariant::PMS2);
    let twin = ExploreOptions { beta_zero_twin: true };
    let big = explore_parallel(&DrawEvaluator::new(&cms)?, draws, seed, threads, twin, &none)?;
    let small = explore_parallel(&DrawEvaluator::new(&pms)?, draws, seed, threads, ExploreOptions::default(), &none)?;
    let violations = undominated(small.pareto.points(), big.pareto.points(), 1e-9);
    let shortfall = small
        .pareto
        .points()
        .iter()
        .map(|p| {
            big.pareto
                .points()
                .iter()
                .map(|q| (0..3).map(|k| p[k] - q[k]).fold(f64::NEG_INFINITY, f64::max))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0f64, f64::max);
    Ok(SuiteReport {
        name: "coupling",
        passed: violations.is_empty(),
        max_dev: shortfall,
        detail: format!(
            "{} violations; {} primary-only points vs {} cumulative points over {draws} draws",
            violations.len(),
            small.pareto.len(),
            big.pareto.len()
        ),
    })
}

pub fn run_all(cfg: &RunConfig, opts: &VerifyOptions) -> Result<Vec<SuiteReport>, CliError> {
    let spec = cfg.spec()?;
    let c2spec = c2(&spec, cfg.model);
    Ok(vec![
        theta_suite(&spec, cfg.seed, opts.theta_draws, opts.perturb_theta),
        sampling_suite(&c2spec, cfg.seed, opts.sampling_draws, opts.samples),
        info_suite(&c2spec, cfg.seed, opts.info_draws),
        fm_suite(cfg.seed, opts.fm_trials),
        coupling_suite(&spec, cfg.seed, opts.coupling_draws, cfg.threads)?,
    ])
}

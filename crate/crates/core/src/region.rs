//! Monte-Carlo union of per-draw rate regions.
//!
//! Each draw samples splitting parameters, builds the covariance,
//! instantiates the catalog, projects onto `(R1, R2, R3)` and contributes
//! the projected vertices. The union is summarized by its exact Pareto
//! front, which does not depend on the order in which draws are merged.

use alloc::vec::Vec;
use core::ops::Range;

use crate::catalog::{self, BoundCatalog, CatalogError, CompiledCatalog, Instantiation, RatePolytope};
use crate::channel::{sample_params, Decoding, GaussianChannelSpec, ModelVariant, SplittingParams};
use crate::gaussian::{build_covariance, ModelError, THETA_NAMES};
use crate::polytope::{self, PointCloud3};

/// Tolerance of the final Pareto pass.
pub const PARETO_TOL: f64 = 1e-9;
/// Default half-width of the band selected by [`slice2d`].
pub const SLICE_TOL: f64 = 0.02;
/// Default number of draws.
pub const DEFAULT_DRAWS: u64 = 200_000;

const COMPACT_AT: usize = 8192;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum RegionError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("at least one draw is required")]
    NoDraws,
    #[error("no points within the slice band")]
    EmptySlice,
    #[error("axis must be 0, 1 or 2")]
    BadAxis,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegionEstimate {
    pub variant: ModelVariant,
    pub draws_total: u64,
    pub draws_vacuous: u64,
    pub pareto: PointCloud3,
    pub max_r1: f64,
    pub max_r2: f64,
    pub max_r3: f64,
    pub max_sum: f64,
    pub seed: u64,
}

/// What one draw contributes to the union.
#[derive(Clone, Debug, PartialEq)]
pub enum DrawOutcome {
    Vertices(Vec<[f64; 3]>),
    Vacuous,
}

/// Evaluates draws of one channel against one catalog.
#[derive(Clone, Debug)]
pub struct DrawEvaluator {
    spec: GaussianChannelSpec,
    compiled: CompiledCatalog,
    recombination: [Vec<usize>; 3],
}

impl DrawEvaluator {
    pub fn new(spec: &GaussianChannelSpec) -> Result<Self, RegionError> {
        Self::with_catalog(spec, &catalog::catalog_for(spec.variant))
    }

    /// Uses `catalog` (for example a restricted one) in place of the
    /// variant's own. The catalog must only reference observables of the
    /// Gaussian construction.
    pub fn with_catalog(spec: &GaussianChannelSpec, catalog: &BoundCatalog) -> Result<Self, RegionError> {
        spec.validate().map_err(ModelError::from)?;
        if spec.variant.decoding == Decoding::Variant1 {
            return Err(ModelError::VariantUnsupported(spec.variant.name().into()).into());
        }
        let names: Vec<_> = THETA_NAMES.iter().map(|s| (*s).into()).collect();
        Ok(Self { spec: *spec, compiled: catalog.compile(&names)?, recombination: catalog.recombination.clone() })
    }

    pub fn spec(&self) -> &GaussianChannelSpec {
        &self.spec
    }

    pub fn instantiate(&self, params: &SplittingParams) -> Result<Instantiation, RegionError> {
        let model = build_covariance(&self.spec, params)?;
        Ok(self.compiled.evaluate(&model.sigma)?)
    }

    /// The draw's region over `(R1, R2, R3)`, or `None` when vacuous.
    pub fn projected(&self, params: &SplittingParams) -> Result<Option<RatePolytope>, RegionError> {
        Ok(match self.instantiate(params)? {
            Instantiation::Polytope(p) => Some(catalog::project_to_totals(&p, &self.recombination)),
            Instantiation::Empty => None,
        })
    }

    pub fn evaluate(&self, params: &SplittingParams) -> Result<DrawOutcome, RegionError> {
        let Instantiation::Polytope(p) = self.instantiate(params)? else {
            return Ok(DrawOutcome::Vacuous);
        };
        let sys = catalog::eliminate_to_totals(&p, &self.recombination);
        let verts = polytope::enumerate_vertices(&sys);
        if verts.is_empty() {
            return Ok(DrawOutcome::Vacuous);
        }
        // vertices satisfy nonnegativity to within the feasibility slack
        Ok(DrawOutcome::Vertices(verts.iter().map(|v| [v[0].max(0.0), v[1].max(0.0), v[2].max(0.0)]).collect()))
    }
}

/// Order-independent accumulator for draw outcomes.
#[derive(Clone, Debug)]
pub struct RegionAccumulator {
    variant: ModelVariant,
    seed: u64,
    draws_total: u64,
    draws_vacuous: u64,
    front: Vec<[f64; 3]>,
    pending: Vec<[f64; 3]>,
}

impl RegionAccumulator {
    pub fn new(variant: ModelVariant, seed: u64) -> Self {
        Self { variant, seed, draws_total: 0, draws_vacuous: 0, front: Vec::new(), pending: alloc::vec![[0.0; 3]] }
    }

    pub fn add(&mut self, outcome: &DrawOutcome) {
        self.draws_total += 1;
        match outcome {
            DrawOutcome::Vacuous => self.draws_vacuous += 1,
            DrawOutcome::Vertices(v) => self.pending.extend_from_slice(v),
        }
        if self.pending.len() >= COMPACT_AT.max(self.front.len()) {
            self.compact();
        }
    }

    fn compact(&mut self) {
        self.pending.append(&mut self.front);
        self.front = polytope::pareto_exact(&self.pending);
        self.pending.clear();
    }

    /// Combines two accumulators of the same run (disjoint draw sets).
    pub fn merge(mut self, mut other: Self) -> Self {
        debug_assert_eq!(self.variant, other.variant);
        self.draws_total += other.draws_total;
        self.draws_vacuous += other.draws_vacuous;
        self.pending.append(&mut other.pending);
        self.pending.append(&mut other.front);
        self.compact();
        self
    }

    pub fn draws(&self) -> u64 {
        self.draws_total
    }

    pub fn finish(mut self) -> RegionEstimate {
        self.compact();
        let pts = polytope::pareto3d(&self.front, PARETO_TOL);
        let max_k = |k: usize| pts.iter().map(|p| p[k]).fold(0.0f64, f64::max);
        let max_sum = pts.iter().map(|p| p[0] + p[1] + p[2]).fold(0.0f64, f64::max);
        RegionEstimate {
            variant: self.variant,
            draws_total: self.draws_total,
            draws_vacuous: self.draws_vacuous,
            max_r1: max_k(0),
            max_r2: max_k(1),
            max_r3: max_k(2),
            max_sum,
            pareto: PointCloud3::from_points(pts).expect("accumulated points are nonnegative"),
            seed: self.seed,
        }
    }
}

/// Knobs for [`explore_range`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ExploreOptions {
    /// Also evaluate every draw with `beta1 = beta2 = 0` and add it to the
    /// union. This couples a cumulative-sharing run to a primary-only run
    /// on the same seed.
    pub beta_zero_twin: bool,
}

/// Union over draws `0..draws` of the seed's parameter stream.
pub fn explore(spec: &GaussianChannelSpec, draws: u64, seed: u64) -> Result<RegionEstimate, RegionError> {
    explore_with(spec, draws, seed, |_, _| {})
}

/// [`explore`] with a hook that may edit each draw's parameters (draw
/// index, parameters) before evaluation.
pub fn explore_with<F>(spec: &GaussianChannelSpec, draws: u64, seed: u64, hook: F) -> Result<RegionEstimate, RegionError>
where
    F: Fn(u64, &mut SplittingParams),
{
    if draws == 0 {
        return Err(RegionError::NoDraws);
    }
    let eval = DrawEvaluator::new(spec)?;
    Ok(explore_range(&eval, seed, 0..draws, ExploreOptions::default(), &hook)?.finish())
}

/// Accumulates the draws with indices in `range`. Splitting a run into
/// ranges and merging the accumulators gives the same estimate as one
/// sequential pass.
pub fn explore_range<F>(
    eval: &DrawEvaluator,
    seed: u64,
    range: Range<u64>,
    options: ExploreOptions,
    hook: &F,
) -> Result<RegionAccumulator, RegionError>
where
    F: Fn(u64, &mut SplittingParams) + ?Sized,
{
    let spec = eval.spec();
    let mut acc = RegionAccumulator::new(spec.variant, seed);
    for i in range {
        let mut params = sample_params(spec, seed, i);
        hook(i, &mut params);
        acc.add(&eval.evaluate(&params)?);
        if options.beta_zero_twin && params.beta != [0.0, 0.0] {
            let twin = eval.evaluate(&params.without_beta())?;
            if let DrawOutcome::Vertices(v) = twin {
                acc.pending.extend_from_slice(&v);
            }
        }
    }
    Ok(acc)
}

/// Support of the down-closure of a point set: `max_p sum_k max(d_k, 0) p_k`.
/// Achievable regions are closed under lowering any rate, so negative
/// direction components never help.
pub fn region_support(points: &[[f64; 3]], direction: &[f64; 3]) -> f64 {
    let d = direction.map(|v| v.max(0.0));
    points.iter().map(|p| p[0] * d[0] + p[1] * d[1] + p[2] * d[2]).fold(0.0f64, f64::max)
}

/// Support values of several regions along common directions.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub directions: Vec<[f64; 3]>,
    /// `support[region][direction]`
    pub support: Vec<Vec<f64>>,
}

impl Comparison {
    /// `min_d support[a][d] - support[b][d]`; nonnegative when region `a`
    /// reaches at least as far as `b` in every direction.
    pub fn margin(&self, a: usize, b: usize) -> f64 {
        self.support[a].iter().zip(&self.support[b]).map(|(x, y)| x - y).fold(f64::INFINITY, f64::min)
    }

    pub fn dominates(&self, a: usize, b: usize, tol: f64) -> bool {
        self.margin(a, b) >= -tol
    }
}

pub fn compare(regions: &[&RegionEstimate], directions: &[[f64; 3]]) -> Comparison {
    Comparison {
        directions: directions.to_vec(),
        support: regions.iter().map(|r| directions.iter().map(|d| region_support(r.pareto.points(), d)).collect()).collect(),
    }
}

/// Points of `inner` not dominated (within `tol`) by some point of `outer`.
pub fn undominated<'a>(inner: &'a [[f64; 3]], outer: &[[f64; 3]], tol: f64) -> Vec<&'a [f64; 3]> {
    inner.iter().filter(|p| !outer.iter().any(|q| (0..3).all(|k| q[k] >= p[k] - tol))).collect()
}

/// Convex hull (counterclockwise) of the Pareto points whose `axis`
/// coordinate lies within `tol` of `value`, projected onto the two other
/// axes in increasing order.
pub fn slice2d(estimate: &RegionEstimate, axis: usize, value: f64, tol: f64) -> Result<Vec<[f64; 2]>, RegionError> {
    if axis > 2 {
        return Err(RegionError::BadAxis);
    }
    let (u, v) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let pts: Vec<[f64; 2]> = estimate
        .pareto
        .points()
        .iter()
        .filter(|p| libm::fabs(p[axis] - value) <= tol)
        .map(|p| [p[u], p[v]])
        .collect();
    if pts.is_empty() {
        return Err(RegionError::EmptySlice);
    }
    Ok(polytope::hull2d(&pts))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_gp(_: u64, p: &mut SplittingParams) {
        p.alpha = [0.0; 4];
        p.beta = [0.0; 2];
    }

    #[test]
    fn single_draw_matches_its_polytope() {
        let spec = GaussianChannelSpec::reference(ModelVariant::CMS2);
        let est = explore_with(&spec, 1, 3, zero_gp).unwrap();
        let mut p = sample_params(&spec, 3, 0);
        zero_gp(0, &mut p);
        let poly = DrawEvaluator::new(&spec).unwrap().projected(&p).unwrap().unwrap();
        for d in polytope::cube_directions() {
            let a = region_support(est.pareto.points(), &d);
            let b = polytope::support(&poly.system, &d.map(|x| x.max(0.0))).unwrap();
            assert!((a - b).abs() < 1e-9, "{d:?}: {a} vs {b}");
        }
        assert_eq!(est.draws_total, 1);
    }

    #[test]
    fn origin_always_present() {
        let mut spec = GaussianChannelSpec::reference(ModelVariant::PMS2);
        spec.p1 = 1e-3;
        let est = explore(&spec, 3, 1).unwrap();
        assert!(!est.pareto.is_empty());
        assert!(est.max_sum >= 0.0);
    }

    #[test]
    fn split_ranges_merge_to_the_same_estimate() {
        let spec = GaussianChannelSpec::reference(ModelVariant::CMS2);
        let eval = DrawEvaluator::new(&spec).unwrap();
        let hook = |_: u64, _: &mut SplittingParams| {};
        let whole = explore_range(&eval, 11, 0..60, ExploreOptions::default(), &hook).unwrap().finish();
        let a = explore_range(&eval, 11, 0..17, ExploreOptions::default(), &hook).unwrap();
        let b = explore_range(&eval, 11, 17..41, ExploreOptions::default(), &hook).unwrap();
        let c = explore_range(&eval, 11, 41..60, ExploreOptions::default(), &hook).unwrap();
        let merged = c.merge(a).merge(b).finish();
        assert_eq!(whole, merged);
    }

    #[test]
    fn metrics_match_pareto_extrema() {
        let spec = GaussianChannelSpec::reference(ModelVariant::CMS2);
        let est = explore(&spec, 50, 2).unwrap();
        let pts = est.pareto.points();
        let m = pts.iter().map(|p| p[0]).fold(0.0, f64::max);
        assert_eq!(m, est.max_r1);
        let s = pts.iter().map(|p| p[0] + p[1] + p[2]).fold(0.0, f64::max);
        assert_eq!(s, est.max_sum);
    }

    #[test]
    fn slice_band() {
        let spec = GaussianChannelSpec::reference(ModelVariant::CMS2);
        let est = explore(&spec, 30, 4).unwrap();
        let s = slice2d(&est, 0, 0.0, SLICE_TOL).unwrap();
        assert!(!s.is_empty());
        assert_eq!(slice2d(&est, 0, 1e6, 0.0), Err(RegionError::EmptySlice));
        assert_eq!(slice2d(&est, 3, 0.0, 0.0), Err(RegionError::BadAxis));
    }

    #[test]
    fn self_comparison_is_flat() {
        let spec = GaussianChannelSpec::reference(ModelVariant::PMS2);
        let est = explore(&spec, 20, 5).unwrap();
        let c = compare(&[&est, &est], &polytope::cube_directions());
        assert_eq!(c.margin(0, 1), 0.0);
        assert!(c.dominates(1, 0, 0.0));
    }

    #[test]
    fn variant1_has_no_gaussian_explorer() {
        let spec = GaussianChannelSpec::reference(ModelVariant::CMS1);
        assert!(matches!(explore(&spec, 1, 0), Err(RegionError::Model(ModelError::VariantUnsupported(_)))));
        let spec = GaussianChannelSpec::reference(ModelVariant::CMS2);
        assert_eq!(explore(&spec, 0, 0), Err(RegionError::NoDraws));
    }
}

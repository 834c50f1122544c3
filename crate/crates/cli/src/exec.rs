//! Experiment execution: parallel exploration and the `region` and
//! `dump-sigma` commands.

use std::path::Path;

use rayon::prelude::*;

use cogrates::catalog::{self, CatalogError, Instantiation};
use cogrates::polytope;
use cogrates::region::{
    explore_range, slice2d, DrawEvaluator, DrawOutcome, ExploreOptions, RegionAccumulator, RegionError, RegionEstimate,
    SLICE_TOL,
};
use cogrates::{build_covariance, channel::sample_params, GaussianChannelSpec, SplittingParams};

use crate::{io, CliError, RunConfig};

/// Draws per work unit. Fixed so that the partition, and therefore every
/// intermediate result, is the same for any number of threads.
pub const CHUNK: u64 = 2048;

pub fn zero_gp(_: u64, p: &mut SplittingParams) {
    p.alpha = [0.0; 4];
    p.beta = [0.0; 2];
}

fn no_hook(_: u64, _: &mut SplittingParams) {}

/// Parallel version of [`cogrates::region::explore_with`] over
/// `0..draws`, using at most `threads` workers.
pub fn explore_parallel(
    eval: &DrawEvaluator,
    draws: u64,
    seed: u64,
    threads: Option<usize>,
    options: ExploreOptions,
    hook: &(dyn Fn(u64, &mut SplittingParams) + Sync),
) -> Result<RegionEstimate, CliError> {
    if draws == 0 {
        return Err(RegionError::NoDraws.into());
    }
    let chunks: Vec<(u64, u64)> = (0..draws.div_ceil(CHUNK)).map(|c| (c * CHUNK, ((c + 1) * CHUNK).min(draws))).collect();
    let work = || -> Result<Vec<RegionAccumulator>, RegionError> {
        chunks.par_iter().map(|&(lo, hi)| explore_range(eval, seed, lo..hi, options, hook)).collect()
    };
    let parts = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Numeric(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }?;
    let acc = parts.into_iter().reduce(RegionAccumulator::merge).expect("at least one chunk");
    Ok(acc.finish())
}

/// Region of one externally supplied covariance (any catalog variant).
pub fn region_from_covariance(cfg: &RunConfig, path: &Path) -> Result<RegionEstimate, CliError> {
    let sigma = io::read_covariance(path)?;
    let cat = catalog::catalog_for(cfg.model);
    let inst = cat.instantiate(&sigma).map_err(|e| match e {
        CatalogError::Info(_) => CliError::Numeric(format!("{}: {e}", path.display())),
        _ => CliError::Config(format!("{}: {e}", path.display())),
    })?;
    let outcome = match inst {
        Instantiation::Empty => DrawOutcome::Vacuous,
        Instantiation::Polytope(p) => {
            let sys = catalog::eliminate_to_totals(&p, &cat.recombination);
            let v = polytope::enumerate_vertices(&sys);
            if v.is_empty() {
                DrawOutcome::Vacuous
            } else {
                DrawOutcome::Vertices(v.iter().map(|v| [v[0].max(0.0), v[1].max(0.0), v[2].max(0.0)]).collect())
            }
        }
    };
    let mut acc = RegionAccumulator::new(cfg.model, cfg.seed);
    acc.add(&outcome);
    Ok(acc.finish())
}

pub fn estimate(cfg: &RunConfig) -> Result<RegionEstimate, CliError> {
    if let Some(path) = &cfg.cov {
        return region_from_covariance(cfg, path);
    }
    let spec = cfg.spec()?;
    let eval = DrawEvaluator::new(&spec)?;
    let hook: &(dyn Fn(u64, &mut SplittingParams) + Sync) = if cfg.zero_gp { &zero_gp } else { &no_hook };
    explore_parallel(&eval, cfg.draws, cfg.seed, cfg.threads, ExploreOptions::default(), hook)
}

/// Runs `region` and writes its three output files. Returns the metrics
/// text for display.
pub fn cmd_region(cfg: &RunConfig) -> Result<String, CliError> {
    let est = estimate(cfg)?;
    let dir = &cfg.out;
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    io::write(&dir.join("pareto.csv"), &io::pareto_csv(est.pareto.points()))?;
    let metrics = io::metrics_txt(&est);
    io::write(&dir.join("metrics.txt"), &metrics)?;
    let slice = match slice2d(&est, 0, 0.0, SLICE_TOL) {
        Ok(h) => h,
        Err(RegionError::EmptySlice) => Vec::new(),
        Err(e) => return Err(e.into()),
    };
    io::write(&dir.join("slice_R1_0.csv"), &io::slice_csv("R2,R3", &slice))?;
    Ok(metrics)
}

pub fn draw_params(spec: &GaussianChannelSpec, cfg: &RunConfig) -> SplittingParams {
    let mut p = sample_params(spec, cfg.seed, cfg.draw);
    if cfg.zero_gp {
        zero_gp(cfg.draw, &mut p);
    }
    p
}

pub fn cmd_dump_sigma(cfg: &RunConfig) -> Result<String, CliError> {
    let spec = cfg.spec()?;
    let model = build_covariance(&spec, &draw_params(&spec, cfg)).map_err(RegionError::from)?;
    Ok(io::sigma_csv(&model.sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use cogrates::region::explore;

    #[test]
    fn parallel_matches_sequential() {
        let spec = GaussianChannelSpec::reference(cogrates::ModelVariant::PMS2);
        let eval = DrawEvaluator::new(&spec).unwrap();
        let seq = explore(&spec, 5000, 3).unwrap();
        for t in [1, 2, 4] {
            let par = explore_parallel(&eval, 5000, 3, Some(t), ExploreOptions::default(), &no_hook).unwrap();
            assert_eq!(par, seq);
        }
    }
}

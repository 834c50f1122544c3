//! Region-level properties: degeneration, coupling, monotonicity and
//! determinism of the Monte-Carlo union.

use cogrates::catalog::{catalog_for, Instantiation};
use cogrates::channel::sample_params;
use cogrates::polytope::{cube_directions, enumerate_vertices, support};
use cogrates::region::{
    explore, explore_with, region_support, slice2d, undominated, DrawEvaluator, DrawOutcome, RegionError,
};
use cogrates::{GaussianChannelSpec, ModelVariant, SplittingParams};

fn outcome_support(o: &DrawOutcome, d: &[f64; 3]) -> f64 {
    match o {
        DrawOutcome::Vacuous => 0.0,
        DrawOutcome::Vertices(v) => region_support(v, d),
    }
}

fn degenerate_spec() -> GaussianChannelSpec {
    let mut spec = GaussianChannelSpec::reference(ModelVariant::CMS2);
    spec.p3 = 1e-9;
    spec
}

#[test]
fn vanishing_third_power_collapses_r3() {
    let spec = degenerate_spec();
    let eval = DrawEvaluator::new(&spec).unwrap();
    let mut nonvacuous = 0;
    for k in 0..3000 {
        let mut p = sample_params(&spec, 8, k);
        p.alpha[2] = 0.0;
        p.alpha[3] = 0.0;
        p.beta = [0.0; 2];
        if let Some(proj) = eval.projected(&p).unwrap() {
            nonvacuous += 1;
            let r3 = support(&proj.system, &[0.0, 0.0, 1.0]).unwrap();
            assert!(r3 <= 1e-6, "draw {k}: R3 up to {r3}");
        }
    }
    assert!(nonvacuous > 0);
}

#[test]
fn vanishing_third_power_with_full_precoding() {
    let spec = degenerate_spec();
    let eval = DrawEvaluator::new(&spec).unwrap();
    let mut worst = 0.0f64;
    for k in 0..3000 {
        let p = sample_params(&spec, 8, k);
        worst = worst.max(outcome_support(&eval.evaluate(&p).unwrap(), &[0.0, 0.0, 1.0]));
    }
    assert!(worst <= 1e-6, "R3 up to {worst}");
}

#[test]
fn beta_zero_cumulative_equals_primary_only() {
    let cms = GaussianChannelSpec::reference(ModelVariant::CMS2);
    let pms = cms.with_variant(ModelVariant::PMS2);
    let (ec, ep) = (DrawEvaluator::new(&cms).unwrap(), DrawEvaluator::new(&pms).unwrap());
    let mut compared = 0;
    for k in 0..3000 {
        let p = sample_params(&pms, 12, k);
        assert_eq!(p.beta, [0.0; 2]);
        match (ec.instantiate(&p).unwrap(), ep.instantiate(&p).unwrap()) {
            (Instantiation::Polytope(a), Instantiation::Polytope(b)) => {
                compared += 1;
                for (x, y) in a.system.rows().iter().zip(b.system.rows()) {
                    assert_eq!(x.a, y.a);
                    assert!((x.b - y.b).abs() <= 1e-10, "draw {k}: {} vs {}", x.b, y.b);
                }
                let (pa, pb) = (ec.evaluate(&p).unwrap(), ep.evaluate(&p).unwrap());
                for d in cube_directions() {
                    assert!(outcome_support(&pb, &d) <= outcome_support(&pa, &d) + 1e-9);
                }
            }
            (Instantiation::Empty, Instantiation::Empty) => {}
            _ => panic!("draw {k}: vacuity differs"),
        }
    }
    assert!(compared > 20);
}

#[test]
fn more_noise_never_enlarges_a_draw() {
    for variant in [ModelVariant::CMS2, ModelVariant::PMS2] {
        let spec = GaussianChannelSpec::reference(variant);
        let mut noisy = spec;
        noisy.q1 *= 10.0;
        noisy.q2 *= 10.0;
        noisy.q3 *= 10.0;
        let (e, en) = (DrawEvaluator::new(&spec).unwrap(), DrawEvaluator::new(&noisy).unwrap());
        for k in 0..1500 {
            let p = sample_params(&spec, 14, k);
            let (a, b) = (e.evaluate(&p).unwrap(), en.evaluate(&p).unwrap());
            for d in cube_directions() {
                assert!(outcome_support(&b, &d) <= outcome_support(&a, &d) + 1e-9, "{variant} draw {k} {d:?}");
            }
        }
    }
}

#[test]
fn union_grows_with_draws() {
    let spec = GaussianChannelSpec::reference(ModelVariant::PMS2);
    let small = explore(&spec, 4000, 6).unwrap();
    let big = explore(&spec, 8000, 6).unwrap();
    assert!(undominated(small.pareto.points(), big.pareto.points(), 0.0).is_empty());
    assert!(big.max_r1 >= small.max_r1 && big.max_r2 >= small.max_r2);
    assert!(big.max_r3 >= small.max_r3 && big.max_sum >= small.max_sum);
    assert_eq!(explore(&spec, 4000, 6).unwrap(), small);
}

#[test]
fn single_forced_draw_matches_projection() {
    let spec = GaussianChannelSpec::reference(ModelVariant::CMS2);
    let zero = |_: u64, p: &mut SplittingParams| {
        p.alpha = [0.0; 4];
        p.beta = [0.0; 2];
    };
    let est = explore_with(&spec, 1, 2, zero).unwrap();
    let mut p = sample_params(&spec, 2, 0);
    zero(0, &mut p);
    let proj = DrawEvaluator::new(&spec).unwrap().projected(&p).unwrap().expect("zero precoding is not vacuous");
    assert!((support(&proj.system, &[1.0, 0.0, 0.0]).unwrap() - est.max_r1).abs() <= 1e-9);
    assert!((support(&proj.system, &[1.0, 1.0, 1.0]).unwrap() - est.max_sum).abs() <= 1e-9);
    // every Pareto point is a vertex of the projected polytope
    let verts = enumerate_vertices(&proj.system);
    for q in est.pareto.points() {
        assert!(verts.iter().any(|v| (0..3).all(|k| (v[k].max(0.0) - q[k]).abs() <= 1e-8)), "{q:?}");
    }
}

#[test]
fn slices() {
    let spec = GaussianChannelSpec::reference(ModelVariant::CMS2);
    let est = explore(&spec, 5000, 4).unwrap();
    let hull = slice2d(&est, 0, 0.0, 0.02).unwrap();
    let best_r2 = est.pareto.points().iter().filter(|p| p[0] <= 0.02).map(|p| p[1]).fold(0.0f64, f64::max);
    assert!(hull.iter().any(|q| q[0] == best_r2));
    assert_eq!(slice2d(&est, 0, 0.123456789, 0.0), Err(RegionError::EmptySlice));
}

#[test]
fn outputs_do_not_depend_on_catalog_reuse() {
    let spec = GaussianChannelSpec::reference(ModelVariant::CMS2);
    let a = DrawEvaluator::new(&spec).unwrap();
    let b = DrawEvaluator::with_catalog(&spec, &catalog_for(ModelVariant::CMS2)).unwrap();
    for k in 0..200 {
        let p = sample_params(&spec, 1, k);
        assert_eq!(a.evaluate(&p).unwrap(), b.evaluate(&p).unwrap());
    }
}

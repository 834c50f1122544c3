//! Information measures on constructed covariances, and catalog
//! right-hand sides recomputed from plain entropy sums.

use cogrates::catalog::{catalog_for, Instantiation};
use cogrates::channel::sample_params;
use cogrates::info::{entropy, evaluate_terms, mutual_information, Sign};
use cogrates::{build_covariance, Covariance, GaussianChannelSpec, MiTerm, ModelVariant, VarSet};
use proptest::prelude::*;

fn sigma_for(variant: ModelVariant, seed: u64, k: u64, a: f64, p_db: f64) -> Covariance {
    let spec = GaussianChannelSpec::symmetric(cogrates::channel::db_to_linear(p_db), 1.0, a, variant);
    build_covariance(&spec, &sample_params(&spec, seed, k)).unwrap().sigma
}

fn set(v: &[usize]) -> VarSet {
    VarSet::new(v.to_vec()).unwrap()
}

/// `h(L) + h(R) - h(L u R)` with every entropy taken separately.
fn mi_by_entropies(sigma: &Covariance, l: &[String], r: &[String]) -> f64 {
    let ls = sigma.var_set(l).unwrap();
    let rs = sigma.var_set(r).unwrap();
    let both: Vec<String> = l.iter().chain(r).cloned().collect();
    entropy(sigma, &ls).unwrap() + entropy(sigma, &rs).unwrap() - entropy(sigma, &sigma.var_set(&both).unwrap()).unwrap()
}

/// Three disjoint nonempty subsets of the 8 variables.
fn partition() -> impl Strategy<Value = (Vec<usize>, Vec<usize>, Vec<usize>)> {
    Just((0..8).collect::<Vec<usize>>()).prop_shuffle().prop_flat_map(|perm| {
        (1usize..=3, 1usize..=3, 1usize..=2).prop_map(move |(a, b, c)| {
            (perm[..a].to_vec(), perm[a..a + b].to_vec(), perm[a + b..a + b + c].to_vec())
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn identities_hold(k in 0u64..10_000, cms in any::<bool>(), a in -1.0f64..1.0, p_db in 0.0f64..20.0, (s, t, u) in partition()) {
        let variant = if cms { ModelVariant::CMS2 } else { ModelVariant::PMS2 };
        let sigma = sigma_for(variant, 5, k, a, p_db);
        let (s, t, u) = (set(&s), set(&t), set(&u));
        let mi = |x: &VarSet, y: &VarSet| mutual_information(&sigma, x, y).unwrap();
        let h = |x: &VarSet| entropy(&sigma, x).unwrap();
        let tu = t.union(&u);
        prop_assert!((mi(&s, &t) - mi(&t, &s)).abs() <= 1e-12);
        prop_assert!(mi(&s, &t) >= -1e-9);
        prop_assert!(mi(&s, &tu) >= -1e-9);
        let cond = h(&s.union(&t)) + h(&u.union(&t)) - h(&t) - h(&s.union(&tu));
        prop_assert!((mi(&s, &tu) - mi(&s, &t) - cond).abs() <= 1e-9);
        prop_assert!(mi(&s, &tu) >= mi(&s, &t) - 1e-9);
    }
}

#[test]
fn catalog_rhs_matches_entropy_sums() {
    for variant in [ModelVariant::CMS2, ModelVariant::PMS2] {
        let cat = catalog_for(variant);
        let mut checked = 0;
        for k in 0..2000 {
            let sigma = sigma_for(variant, 9, k, 0.55, 10.0);
            let Instantiation::Polytope(p) = cat.instantiate(&sigma).unwrap() else { continue };
            for (b, row) in cat.bounds.iter().zip(p.system.rows()) {
                let direct: f64 = b
                    .terms
                    .iter()
                    .map(|t| {
                        let v = mi_by_entropies(&sigma, &t.left, &t.right);
                        if t.sign == Sign::Plus { v } else { -v }
                    })
                    .sum();
                assert!((row.b - direct.max(0.0)).abs() <= 1e-10, "{variant} bound {}: {} vs {direct}", b.index, row.b);
                checked += 1;
            }
        }
        assert!(checked >= 100, "{variant}: only {checked} nonvacuous bounds");
    }
}

#[test]
fn evaluate_terms_matches_entropy_chain() {
    let sigma = sigma_for(ModelVariant::CMS2, 2, 17, 0.55, 10.0);
    let names = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let u1 = sigma.var_set(&["U1"]).unwrap();
    let u2y2 = sigma.var_set(&["U2", "Y2"]).unwrap();
    let w = sigma.var_set(&["W"]).unwrap();
    let terms = [MiTerm::new(u1.clone(), u2y2, Sign::Plus).unwrap(), MiTerm::new(w, u1, Sign::Minus).unwrap()];
    let direct = mi_by_entropies(&sigma, &names(&["U1"]), &names(&["U2", "Y2"]))
        - mi_by_entropies(&sigma, &names(&["W"]), &names(&["U1"]));
    assert!((evaluate_terms(&sigma, &terms).unwrap() - direct).abs() <= 1e-10);
    assert_eq!(evaluate_terms(&sigma, &[]).unwrap(), 0.0);
}

#[test]
fn zero_precoding_removes_penalties() {
    let spec = GaussianChannelSpec::reference(ModelVariant::CMS2);
    let mut p = sample_params(&spec, 4, 0);
    p.alpha = [0.0; 4];
    p.beta = [0.0; 2];
    let sigma = build_covariance(&spec, &p).unwrap().sigma;
    let cat = catalog_for(ModelVariant::CMS2);
    let Instantiation::Polytope(poly) = cat.instantiate(&sigma).unwrap() else { panic!("zero precoding is never vacuous") };
    for (b, row) in cat.bounds.iter().zip(poly.system.rows()) {
        let plain: f64 = b
            .terms
            .iter()
            .filter(|t| t.sign == Sign::Plus)
            .map(|t| mi_by_entropies(&sigma, &t.left, &t.right))
            .sum();
        for t in b.terms.iter().filter(|t| t.sign == Sign::Minus) {
            assert!(mi_by_entropies(&sigma, &t.left, &t.right).abs() < 1e-12, "bound {}: {t}", b.index);
        }
        assert!((row.b - plain).abs() < 1e-10);
    }
}

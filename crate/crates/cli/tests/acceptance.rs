//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! fails. Tolerances and sizes are fixed here.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use cogrates::catalog::catalog_for;
use cogrates::region::{
    explore_range, slice2d, undominated, DrawEvaluator, ExploreOptions, RegionAccumulator, RegionEstimate,
};
use cogrates::{GaussianChannelSpec, ModelVariant, SplittingParams};
use cogrates_cli::exec::explore_parallel;
use cogrates_cli::verify::{coupling_suite, fm_suite, info_suite, sampling_suite, theta_suite, SuiteReport};

const SEED: u64 = 1;

struct Outcome {
    pass: bool,
    detail: String,
}

fn suite(r: SuiteReport) -> Outcome {
    Outcome { pass: r.passed, detail: format!("max_dev={:.3e}; {}", r.max_dev, r.detail) }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> (Outcome, Duration, bool) {
    let t = Instant::now();
    let o = f();
    let el = t.elapsed();
    let in_time = limit.is_none_or(|l| el <= l);
    (o, el, in_time)
}

fn no_hook(_: u64, _: &mut SplittingParams) {}

fn explore(spec: &GaussianChannelSpec, draws: u64) -> RegionEstimate {
    let eval = DrawEvaluator::new(spec).unwrap();
    explore_parallel(&eval, draws, SEED, None, ExploreOptions::default(), &no_hook).unwrap()
}

fn in_band(v: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&v)
}

fn reference_bands() -> Outcome {
    let reference = GaussianChannelSpec::reference(ModelVariant::CMS2);
    let (cms_spec, pms_spec) = (reference, reference.with_variant(ModelVariant::PMS2));
    let cms_small = explore(&cms_spec, 200_000);
    let pms_small = explore(&pms_spec, 200_000);
    let cms = explore(&cms_spec, 2_000_000);
    let pms = explore(&pms_spec, 2_000_000);
    let checks = [
        ("cms max R1", cms.max_r1, 1.68, 2.30, 1.982),
        ("cms sum", cms.max_sum, 2.45, 3.30, 2.880),
        ("pms max R1", pms.max_r1, 1.63, 2.20, 1.919),
        ("pms sum", pms.max_sum, 1.93, 2.60, 2.273),
        ("cms max R2", cms.max_r2, 0.76, 1.00, 0.896),
        ("pms max R2", pms.max_r2, 0.76, 1.00, 0.889),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, v, lo, hi, reference) in checks {
        let ok = in_band(v, lo, hi);
        pass &= ok;
        parts.push(format!("{name}={v:.3} in [{lo}, {hi}] (ref {reference}){}", if ok { "" } else { " OUT" }));
    }
    let metrics = |e: &RegionEstimate| [e.max_r1, e.max_r2, e.max_r3, e.max_sum];
    let monotone = metrics(&cms).iter().zip(metrics(&cms_small)).all(|(b, s)| *b >= s)
        && metrics(&pms).iter().zip(metrics(&pms_small)).all(|(b, s)| *b >= s)
        && undominated(cms_small.pareto.points(), cms.pareto.points(), 0.0).is_empty()
        && undominated(pms_small.pareto.points(), pms.pareto.points(), 0.0).is_empty();
    pass &= monotone;
    parts.push(format!("monotone 2e5->2e6: {monotone}"));
    parts.push(format!(
        "at 2e5 draws: cms R1={:.3} sum={:.3} R2={:.3}, pms R1={:.3} sum={:.3} R2={:.3}",
        cms_small.max_r1, cms_small.max_sum, cms_small.max_r2, pms_small.max_r1, pms_small.max_sum, pms_small.max_r2
    ));
    parts.push(format!("vacuous draws: cms {}, pms {} of 2e6", cms.draws_vacuous, pms.draws_vacuous));
    Outcome { pass, detail: parts.join("; ") }
}

/// Down-closed support of a planar point set.
fn support2(points: &[[f64; 2]], d: [f64; 2]) -> f64 {
    points.iter().map(|p| p[0] * d[0].max(0.0) + p[1] * d[1].max(0.0)).fold(0.0f64, f64::max)
}

fn degeneration() -> Outcome {
    let mut spec = GaussianChannelSpec::reference(ModelVariant::CMS2);
    spec.p3 = 1e-9;
    let hook = |_: u64, p: &mut SplittingParams| {
        p.alpha[2] = 0.0;
        p.alpha[3] = 0.0;
        p.beta = [0.0; 2];
    };
    let draws = 200_000;
    let run = |eval: &DrawEvaluator| -> RegionEstimate {
        let acc = RegionAccumulator::new(spec.variant, SEED);
        let part = explore_range(eval, SEED, 0..draws, ExploreOptions::default(), &hook).unwrap();
        acc.merge(part).finish()
    };
    let three = run(&DrawEvaluator::new(&spec).unwrap());
    let reduced = catalog_for(ModelVariant::CMS2).restrict(&["R31", "R33"], &["V1", "V3", "Y3"]);
    let two = run(&DrawEvaluator::with_catalog(&spec, &reduced).unwrap());
    let slice = match slice2d(&three, 2, 0.0, 0.02) {
        Ok(s) => s,
        Err(e) => return Outcome { pass: false, detail: format!("R3 = 0 slice: {e}") },
    };
    let two_pts: Vec<[f64; 2]> = two.pareto.points().iter().map(|p| [p[0], p[1]]).collect();
    let mut worst = 0.0f64;
    for k in 0..12 {
        let a = (k as f64 * 30.0).to_radians();
        let d = [a.cos(), a.sin()];
        worst = worst.max((support2(&slice, d) - support2(&two_pts, d)).abs());
    }
    Outcome {
        pass: worst <= 1e-3 && three.max_r3 <= 1e-6,
        detail: format!(
            "max support difference {worst:.3e} over 12 directions; max R1 {:.4} vs {:.4}; 3-user max R3 {:.1e}; {draws} draws",
            three.max_r1, two.max_r1, three.max_r3
        ),
    }
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("cogrates-acceptance-{}", std::process::id()));
    let mut outputs = Vec::new();
    for t in ["1", "2", "3", "1"] {
        let out = dir.join(format!("threads{t}-{}", outputs.len()));
        let status = Command::new(env!("CARGO_BIN_EXE_cogrates"))
            .args(["region", "--draws", "20000", "--seed", "7", "--threads", t, "--out"])
            .arg(&out)
            .output()
            .expect("binary runs");
        if !status.status.success() {
            return Outcome { pass: false, detail: format!("threads={t}: exit {:?}", status.status.code()) };
        }
        let read = |f: &str| std::fs::read(out.join(f)).unwrap_or_default();
        outputs.push((t, read("pareto.csv"), read("metrics.txt")));
    }
    let _ = std::fs::remove_dir_all(&dir);
    let same = outputs.windows(2).all(|w| w[0].1 == w[1].1 && w[0].2 == w[1].2);
    Outcome {
        pass: same && !outputs[0].1.is_empty(),
        detail: format!("threads 1, 2, 3, 1: pareto.csv {} bytes, outputs identical: {same}", outputs[0].1.len()),
    }
}

fn coupling() -> Outcome {
    let spec = GaussianChannelSpec::reference(ModelVariant::CMS2);
    let r = match coupling_suite(&spec, SEED, 10_000, None) {
        Ok(r) => r,
        Err(e) => return Outcome { pass: false, detail: e.to_string() },
    };
    let plain_cms = explore(&spec, 10_000);
    let plain_pms = explore(&spec.with_variant(ModelVariant::PMS2), 10_000);
    let plain = undominated(plain_pms.pareto.points(), plain_cms.pareto.points(), 1e-9).len();
    let mut o = suite(r);
    o.detail += &format!("; without the beta-zeroed twin: {plain} of {} points undominated (info)", plain_pms.pareto.len());
    o
}

fn main() -> ExitCode {
    let reference = GaussianChannelSpec::reference(ModelVariant::CMS2);
    let secs = Duration::from_secs;
    let criteria: Vec<(&str, Option<Duration>, Box<dyn FnOnce() -> Outcome>)> = vec![
        ("theta-table cross-validation", Some(secs(5)), Box::new(move || suite(theta_suite(&reference, SEED, 1000, None)))),
        ("sampling oracle", Some(secs(120)), Box::new(move || suite(sampling_suite(&reference, SEED, 20, 1_000_000)))),
        ("information identities", Some(secs(10)), Box::new(move || suite(info_suite(&reference, SEED, 500)))),
        ("projection correctness", Some(secs(30)), Box::new(|| suite(fm_suite(SEED, 200)))),
        ("coupled inclusion", Some(secs(60)), Box::new(coupling)),
        ("reference metric bands", Some(secs(600)), Box::new(reference_bands)),
        ("degeneration", Some(secs(60)), Box::new(degeneration)),
        ("determinism", None, Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.into_iter().enumerate() {
        let (o, el, in_time) = timed(limit, f);
        let pass = o.pass && in_time;
        if !pass {
            failed += 1;
        }
        let budget = limit.map_or(String::new(), |l| format!(" / {} s budget", l.as_secs()));
        println!(
            "criterion {} {name}: {} ({}; {:.1} s{budget}{})",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            el.as_secs_f64(),
            if in_time { "" } else { ", over time" }
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}

//! Acceptance suite. Each test prints one `ACCEPT` line with its verdict
//! before asserting, so `cargo test --test acceptance -- --nocapture`
//! gives a readable report.
//!
//! The long-running GA checks are `#[ignore]`d; run them with
//! `--include-ignored`.

use std::collections::HashMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stardisc::inverse::{bisect_min_n, run_inverse_observed, BisectionOutcome};
use stardisc::optimizer::{crossover, mutate, pmx, random_genotype, run_ga_observed};
use stardisc::{
    exact_star_discrepancy, generate, local_discrepancy, ta_best_of, BoundKind, DiscrepancyBound,
    EvalMeta, EvalMode, GaConfig, GeneratingVector, InverseProblem, PointSet, TaConfig,
};

fn report(id: u32, pass: bool, summary: &str, started: Instant) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!(
        "ACCEPT {id:>2} {verdict} {summary} ({:.1}s)",
        started.elapsed().as_secs_f64()
    );
}

fn random_set(rng: &mut ChaCha8Rng, n: usize, d: usize) -> PointSet {
    PointSet::new(d, (0..n * d).map(|_| rng.gen::<f64>()).collect()).unwrap()
}

fn exact(x: &PointSet) -> f64 {
    exact_star_discrepancy(x, u64::MAX).unwrap().value
}

/// Both local terms at every point of the full grid, counted by brute force.
fn literal_enumeration(x: &PointSet) -> f64 {
    let d = x.dimension();
    let n = x.len() as f64;
    let axes: Vec<Vec<f64>> = (0..d)
        .map(|j| {
            let mut a: Vec<f64> = x.points().map(|p| p[j]).collect();
            a.push(1.0);
            a.sort_by(f64::total_cmp);
            a.dedup();
            a
        })
        .collect();
    let mut idx = vec![0usize; d];
    let mut best = f64::NEG_INFINITY;
    'outer: loop {
        let y: Vec<f64> = (0..d).map(|j| axes[j][idx[j]]).collect();
        let open = x
            .points()
            .filter(|p| p.iter().zip(&y).all(|(c, b)| c < b))
            .count();
        let closed = x
            .points()
            .filter(|p| p.iter().zip(&y).all(|(c, b)| c <= b))
            .count();
        let vol: f64 = y.iter().product();
        best = best.max(vol - open as f64 / n).max(closed as f64 / n - vol);
        for j in 0..d {
            idx[j] += 1;
            if idx[j] < axes[j].len() {
                continue 'outer;
            }
            idx[j] = 0;
        }
        return best;
    }
}

#[test]
fn c01_exact_matches_literal_enumeration() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let d = rng.gen_range(1..=3);
        let n = rng.gen_range(1..=12);
        let x = random_set(&mut rng, n, d);
        worst = worst.max((exact(&x) - literal_enumeration(&x)).abs());
    }
    let pass = worst <= 1e-15 && t.elapsed().as_secs() < 60;
    report(
        1,
        pass,
        &format!("50 sets, max |exact - literal| = {worst:e}"),
        t,
    );
    assert!(pass);
}

#[test]
fn c02_twelve_point_local_value() {
    let t = Instant::now();
    let x = PointSet::from_points(&[
        vec![0.1, 0.2],
        vec![0.3, 0.45],
        vec![0.6, 0.1],
        vec![0.8, 0.3],
        vec![0.9, 0.05],
        vec![0.2, 0.6],
        vec![0.5, 0.75],
        vec![0.65, 0.9],
        vec![0.7, 0.55],
        vec![0.85, 0.8],
        vec![0.4, 0.95],
        vec![0.95, 0.65],
    ])
    .unwrap();
    let v = local_discrepancy(&[2.0 / 3.0, 0.5], &x).unwrap();
    let pass = (v - 1.0 / 12.0).abs() <= 1e-15;
    report(2, pass, &format!("local value {v} vs 1/12"), t);
    assert!(pass);
}

#[test]
fn c03_centered_grid() {
    let t = Instant::now();
    let mut worst = 0.0f64;
    for n in 1..=64usize {
        let coords = (1..=n)
            .map(|i| (2 * i - 1) as f64 / (2 * n) as f64)
            .collect();
        let x = PointSet::new(1, coords).unwrap();
        worst = worst.max((exact(&x) - 0.5 / n as f64).abs());
    }
    let pass = worst <= 1e-12;
    report(3, pass, &format!("n = 1..64, max error {worst:e}"), t);
    assert!(pass);
}

#[test]
fn c04_threshold_accepting_sound_and_accurate() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut violations = 0;
    let mut close = 0;
    let mut worst = f64::INFINITY;
    let total = 200;
    for s in 0..total {
        let d = rng.gen_range(1..=4);
        let n = rng.gen_range(1..=64);
        // Half uniform random, half scrambled Halton.
        let x = if s % 2 == 0 {
            random_set(&mut rng, n, d)
        } else {
            generate(n, &random_genotype(d, &mut rng).to_vector())
        };
        let e = exact(&x);
        let lb = ta_best_of(&x, &TaConfig::default().with_seed(s)).value;
        if lb > e {
            violations += 1;
        }
        if lb >= 0.95 * e {
            close += 1;
        }
        worst = worst.min(lb / e);
    }
    let pass = violations == 0 && close * 10 >= total * 9 && t.elapsed().as_secs() < 600;
    report(
        4,
        pass,
        &format!(
            "{violations} violations, {close}/{total} within 95% of exact, worst ratio {worst:.4}"
        ),
        t,
    );
    assert!(pass);
}

/// Runs the GA in exact mode, asserting the per-generation best never rises.
fn exact_ga_run(dim: usize, n: usize, seed: u64) -> (f64, usize) {
    let mut cfg = GaConfig::for_dimension(dim, n);
    cfg.mode = EvalMode::Exact;
    let mut last = f64::INFINITY;
    let mut rises = 0;
    let out = run_ga_observed(&cfg, seed, |_, pop| {
        let best = pop.iter().map(|i| i.value()).fold(f64::INFINITY, f64::min);
        if best > last {
            rises += 1;
        }
        last = best;
    })
    .unwrap();
    let best = out.best.fitness.clone().unwrap();
    assert_eq!(best.kind, BoundKind::Exact);
    // Cross-check the reported value from scratch.
    let x = generate(n, &out.best.genotype.to_vector());
    assert_eq!(exact(&x), best.value);
    (best.value, rises)
}

#[test]
#[ignore = "about 2.5 minutes"]
fn c05_ga_five_dimensions_25_points() {
    let t = Instant::now();
    let mut values = Vec::new();
    let mut rises = 0;
    for seed in 0..5 {
        let (v, r) = exact_ga_run(5, 25, seed);
        values.push(v);
        rises += r;
    }
    let all_below = values.iter().all(|&v| v <= 0.238297);
    let near_target = values.iter().filter(|&&v| v <= 0.198).count();
    let pass = all_below && near_target >= 3 && rises == 0;
    report(
        5,
        pass,
        &format!("best per seed {values:.6?}, {near_target}/5 at or below 0.198"),
        t,
    );
    assert!(pass);
}

#[test]
#[ignore = "extended, tens of minutes"]
fn c06_ga_four_dimensions_125_points() {
    let t = Instant::now();
    let baseline = exact(&generate(125, &GeneratingVector::identity(4).unwrap()));
    let (v, rises) = exact_ga_run(4, 125, 0);
    let pass = v < baseline && v <= 0.089387 && rises == 0;
    let stretch = if v <= 0.062 { "met" } else { "missed" };
    report(
        6,
        pass,
        &format!("best {v:.6} vs identity {baseline:.6}, stretch 0.062 {stretch}"),
        t,
    );
    assert!(pass);
}

#[test]
fn c07_elitism_and_max_rule() {
    let t = Instant::now();
    // Exact mode: best of each generation never rises.
    let mut rises = 0;
    for seed in 0..3 {
        rises += exact_ga_run(3, 30, seed).1;
    }
    // Heuristic mode: no individual's recorded value ever drops.
    let mut cfg = GaConfig::for_dimension(6, 40);
    cfg.mode = EvalMode::Ta;
    cfg.generations = 8;
    cfg.ta_iterations = 300;
    cfg.ta_runs = 2;
    let mut seen: HashMap<u64, f64> = HashMap::new();
    let mut drops = 0;
    let mut reevaluated = 0;
    run_ga_observed(&cfg, 7, |_, pop| {
        for ind in pop {
            let v = ind.value();
            if let Some(&prev) = seen.get(&ind.id) {
                if v < prev {
                    drops += 1;
                }
                if v > prev {
                    reevaluated += 1;
                }
            }
            seen.insert(ind.id, v);
        }
    })
    .unwrap();
    let pass = rises == 0 && drops == 0;
    report(
        7,
        pass,
        &format!("{rises} rises in exact runs, {drops} drops in heuristic run ({reevaluated} raised by reevaluation)"),
        t,
    );
    assert!(pass);
}

#[test]
fn c08_operators_stay_valid() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut invalid = 0;
    for _ in 0..10_000 {
        let d = rng.gen_range(1..=12);
        let a = random_genotype(d, &mut rng);
        let b = random_genotype(d, &mut rng);
        for child in [crossover(&a, &b, &mut rng), mutate(&a, 0.05, &mut rng)] {
            let ok = child.is_valid()
                && child.to_vector().perms().iter().all(|p| {
                    p.map()[0] == 0 && stardisc::Permutation::new(p.map().to_vec()).is_ok()
                });
            if !ok {
                invalid += 1;
            }
        }
    }
    let mut identity_breaks = 0;
    for _ in 0..1000 {
        let d = rng.gen_range(2..=12);
        let a = random_genotype(d, &mut rng);
        if mutate(&a, 0.0, &mut rng) != a || crossover(&a, &a, &mut rng) != a {
            identity_breaks += 1;
        }
        let p = a.reduced().last().unwrap();
        let len = p.len();
        let c1 = rng.gen_range(0..len);
        let c2 = rng.gen_range(c1 + 1..=len);
        if pmx(p, p, c1, c2).unwrap() != *p {
            identity_breaks += 1;
        }
    }
    let pass = invalid == 0 && identity_breaks == 0;
    report(
        8,
        pass,
        &format!("{invalid} invalid children in 2x10^4, {identity_breaks} identity breaks"),
        t,
    );
    assert!(pass);
}

fn bound(value: f64) -> stardisc::Result<DiscrepancyBound> {
    Ok(DiscrepancyBound {
        value,
        kind: BoundKind::Exact,
        meta: EvalMeta::default(),
    })
}

#[test]
fn c09_bisection_bound_and_linear_scan() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut mismatches = 0;
    let mut over_budget = 0;
    let mut max_ratio = 0.0f64;
    for _ in 0..100 {
        let a = rng.gen_range(1..=200);
        let b = a + rng.gen_range(2..=500);
        // The predicate switches from failing to passing at `cut`.
        let cut = rng.gen_range(a..=b + 1);
        let eps = 0.1;
        let f = |n: usize| if n >= cut { 0.05 } else { 0.5 };
        let res = bisect_min_n(a, b, eps, |n| bound(f(n))).unwrap();
        let scan = (a..=b).find(|&n| f(n) <= eps);
        let got = match res.outcome {
            BisectionOutcome::Feasible { n, .. } => Some(n),
            BisectionOutcome::Infeasible => None,
        };
        if got != scan {
            mismatches += 1;
        }
        let allowed = InverseProblem::new(2, eps, a, b)
            .unwrap()
            .max_bisection_calls();
        if res.calls > allowed {
            over_budget += 1;
        }
        max_ratio = max_ratio.max(res.calls as f64 / allowed as f64);
    }
    let pass = mismatches == 0 && over_budget == 0;
    report(
        9,
        pass,
        &format!("{mismatches} mismatches, {over_budget} call-bound breaches (max calls/bound {max_ratio:.2})"),
        t,
    );
    assert!(pass);
}

#[test]
fn c10_inverse_three_dimensions() {
    let t = Instant::now();
    let reference = exact(&generate(40, &GeneratingVector::identity(3).unwrap()));
    let eps = 1.05 * reference;
    let prob = InverseProblem::new(3, eps, 8, 64).unwrap();
    let mut cfg = GaConfig::for_dimension(3, 64);
    cfg.mode = EvalMode::Exact;
    let mut dominated_generations = 0;
    let out = run_inverse_observed(&prob, &cfg, 10, |_, archive| {
        if !archive.is_nondominated() {
            dominated_generations += 1;
        }
    })
    .unwrap();
    let calls_ok = out
        .population
        .iter()
        .all(|ind| ind.bisection.calls <= prob.max_bisection_calls());
    let entry = out.archive.min_n().expect("a feasible vector");
    let gv = entry.genotype.to_vector();
    let scan = (prob.lower..=prob.upper).find(|&n| exact(&generate(n, &gv)) <= eps);
    let pass = dominated_generations == 0 && calls_ok && scan == Some(entry.n);
    report(
        10,
        pass,
        &format!(
            "eps {eps:.6}, archive min n {} (disc {:.6}), linear scan {scan:?}, {} entries",
            entry.n,
            entry.discrepancy.value,
            out.archive.len()
        ),
        t,
    );
    assert!(pass);
}

#[test]
#[ignore = "optional, report only"]
fn c11_inverse_eight_dimensions() {
    let t = Instant::now();
    let prob = InverseProblem::new(8, 0.125, 64, 128).unwrap();
    let mut cfg = GaConfig::for_dimension(8, 128);
    cfg.mode = EvalMode::Ta;
    let out = run_inverse_observed(&prob, &cfg, 11, |_, _| {}).unwrap();
    let best: Option<&stardisc::ParetoEntry> = out.archive.min_n();
    let summary = match best {
        Some(e) => format!("min n {} with lower bound {:.6}", e.n, e.discrepancy.value),
        None => "no vector met 0.125 within 128 points".to_string(),
    };
    report(11, best.is_some(), &summary, t);
}

use stardisc::inverse::{final_check, run_inverse_observed};
use stardisc::io::{format_points, parse_points, vector_from_json, vector_to_json};
use stardisc::optimizer::{final_evaluation, random_genotype};
use stardisc::seed::rng_for;
use stardisc::{
    exact_star_discrepancy, generate, run_ga, BoundKind, EvalMode, GaConfig, InverseProblem,
    DEFAULT_BUDGET,
};

fn small(dim: usize, n: usize, generations: usize, mode: EvalMode) -> GaConfig {
    GaConfig {
        mu: 5,
        lambda: 10,
        generations,
        mode,
        ta_iterations: 300,
        ta_runs: 2,
        final_runs: 3,
        ..GaConfig::for_dimension(dim, n)
    }
}

#[test]
fn vector_and_points_survive_text_round_trip() {
    let mut rng = rng_for(&[5]);
    for d in [1, 2, 5, 12] {
        let gv = random_genotype(d, &mut rng).to_vector();
        let back = vector_from_json(&vector_to_json(&gv)).unwrap();
        assert_eq!(back, gv);
        let x = generate(37, &back);
        let text = format_points(&x);
        let y = parse_points(&text).unwrap();
        assert_eq!(y, x);
        assert_eq!(format_points(&y), text);
    }
}

#[test]
fn ga_history_and_final_scores_agree() {
    let cfg = small(4, 18, 4, EvalMode::Exact);
    let out = run_ga(&cfg, 3).unwrap();
    assert_eq!(out.history.len(), 5);
    assert_eq!(out.history[0].generation, 0);
    assert_eq!(out.history.last().unwrap().best, out.best.value());
    let finals = final_evaluation(&out, &cfg, 3).unwrap();
    assert_eq!(finals[0].fitness.value, out.archive.best().unwrap().value());
    for r in &finals {
        assert_eq!(r.fitness.kind, BoundKind::Exact);
        let x = generate(18, &r.genotype.to_vector());
        assert_eq!(
            exact_star_discrepancy(&x, DEFAULT_BUDGET).unwrap().value,
            r.fitness.value
        );
    }
}

#[test]
fn heuristic_final_scores_never_drop() {
    let cfg = small(6, 30, 3, EvalMode::Ta);
    let out = run_ga(&cfg, 8).unwrap();
    let mut cfg_final = cfg.clone();
    // Force the heuristic re-scoring path.
    cfg_final.budget = 1;
    for r in final_evaluation(&out, &cfg_final, 8).unwrap() {
        assert_eq!(r.fitness.kind, BoundKind::LowerBound);
        assert!(r.fitness.value >= r.previous);
    }
}

#[test]
fn inverse_history_tracks_archive() {
    let prob = InverseProblem::new(2, 0.15, 4, 60).unwrap();
    let cfg = small(2, 60, 4, EvalMode::Exact);
    let mut sizes = Vec::new();
    let out = run_inverse_observed(&prob, &cfg, 21, |_, a| sizes.push(a.len())).unwrap();
    assert_eq!(out.history.len(), 5);
    let recorded: Vec<usize> = out.history.iter().map(|h| h.archive_size).collect();
    assert_eq!(recorded, sizes);
    assert_eq!(
        out.history.last().unwrap().min_n,
        out.archive.min_n().map(|e| e.n)
    );
    for c in final_check(&out.archive, &prob, &cfg, 21).unwrap() {
        assert!(c.meets_epsilon);
        assert_eq!(c.rescored.value, c.recorded);
        // With exact scores bisection stops on a pass/fail boundary.
        assert_ne!(c.previous_fails, Some(false));
    }
}

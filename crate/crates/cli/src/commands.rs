use std::fs;
use std::io::Write;

use serde::Serialize;
use stardisc::inverse::{final_check, run_inverse_observed};
use stardisc::io::{format_points, read_points, read_vector, vector_to_json};
use stardisc::optimizer::{final_evaluation, run_ga};
use stardisc::seed;
use stardisc::{
    generate, EvalMeta, EvalMode, Evaluator, GaConfig, GeneratingVector, Grid, InverseProblem,
    TaConfig,
};

use crate::args::{
    BaselineArgs, EvaluateArgs, GaArgs, GenerateArgs, InverseArgs, OptimizeArgs, ReplayArgs,
};
use crate::output::{
    now, CliError, CliResult, FinalCheckRow, ParetoRow, RankedRecord, ResultRecord, RunDir,
    RunManifest, Source,
};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn manifest<A: Serialize, C: Serialize>(
    command: &str,
    args: &A,
    config: &C,
    seed: u64,
    started: String,
) -> CliResult<RunManifest> {
    Ok(RunManifest {
        tool: "stardisc".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        args: serde_json::to_value(args)?,
        config: serde_json::to_value(config)?,
        seed,
        started,
        finished: String::new(),
        artifacts: Vec::new(),
    })
}

pub fn generate_cmd(a: &GenerateArgs) -> CliResult<()> {
    if a.n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let gv = match (&a.vector, a.dim) {
        (Some(path), dim) => {
            let gv = read_vector(path)?;
            if let Some(d) = dim.filter(|&d| d != gv.dimension()) {
                return Err(usage(format!(
                    "--dim {d} does not match the vector file's dimension {}",
                    gv.dimension()
                )));
            }
            gv
        }
        (None, Some(d)) => GeneratingVector::identity(d).map_err(|e| usage(e.to_string()))?,
        (None, None) => return Err(usage("--identity needs --dim")),
    };
    let x = generate(a.n, &gv);
    let text = format_points(&x);
    match &a.out {
        Some(path) => {
            fs::write(path, text)?;
            println!("{} {}", x.len(), x.dimension());
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            eprintln!("{} {}", x.len(), x.dimension());
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct EvaluateReport {
    d: usize,
    n: usize,
    value: f64,
    kind: stardisc::BoundKind,
    #[serde(flatten)]
    meta: EvalMeta,
}

pub fn evaluate_cmd(a: &EvaluateArgs) -> CliResult<()> {
    let x = read_points(&a.points)?;
    let mode = match (a.exact, a.ta) {
        (true, _) => EvalMode::Exact,
        (_, true) => EvalMode::Ta,
        _ => EvalMode::Auto,
    };
    if a.runs == 0 || a.iters == 0 {
        return Err(usage("--runs and --iters must be positive"));
    }
    let ev = Evaluator {
        mode,
        budget: a.budget,
        ta: TaConfig {
            iterations: a.iters,
            runs: a.runs,
            seed: a.seed,
        },
    };
    let b = ev.evaluate(&x, a.seed)?;
    let report = EvaluateReport {
        d: x.dimension(),
        n: x.len(),
        value: b.value,
        kind: b.kind,
        meta: b.meta,
    };
    if a.json {
        println!("{}", serde_json::to_string(&report)?);
    } else {
        println!("value: {}", report.value);
        println!("kind: {}", report.kind);
        println!("n: {}", report.n);
        println!("d: {}", report.d);
        println!("evaluations: {}", report.meta.evaluations);
        if let Some(s) = report.meta.seed {
            println!("runs: {}", report.meta.runs);
            println!("seed: {s}");
        }
    }
    Ok(())
}

fn ga_config(dim: usize, n: usize, a: &GaArgs) -> CliResult<GaConfig> {
    if dim == 0 || dim > stardisc::sequence::MAX_DIMENSION {
        return Err(usage(format!(
            "--dim must be in 1..={}",
            stardisc::sequence::MAX_DIMENSION
        )));
    }
    let mut c = GaConfig::for_dimension(dim, n);
    c.generations = a.generations.unwrap_or(c.generations);
    c.mu = a.mu.unwrap_or(c.mu);
    c.lambda = a.lambda.unwrap_or(c.lambda);
    c.crossover_prob = a.pc.unwrap_or(c.crossover_prob);
    c.mutation_prob = a.pm.unwrap_or(c.mutation_prob);
    c.match_prob = a.match_prob.unwrap_or(c.match_prob);
    c.tournament_size = a.tournament.unwrap_or(c.tournament_size);
    c.mode = a.mode.map_or(c.mode, Into::into);
    c.ta_iterations = a.ta_iters.unwrap_or(c.ta_iterations);
    c.ta_runs = a.ta_runs.unwrap_or(c.ta_runs);
    c.final_runs = a.final_runs.unwrap_or(c.final_runs);
    c.budget = a.budget;
    c.validate()?;
    Ok(c)
}

fn write_vector_file(dir: &mut RunDir, name: &str, gv: &GeneratingVector) -> CliResult<()> {
    fs::write(dir.path(name)?, vector_to_json(gv))?;
    Ok(())
}

pub fn optimize_cmd(a: &OptimizeArgs) -> CliResult<()> {
    let started = now();
    if a.n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let cfg = ga_config(a.dim, a.n, &a.ga)?;
    let seed = a.ga.seed;
    let outcome = run_ga(&cfg, seed)?;
    let records = final_evaluation(&outcome, &cfg, seed)?;

    let mut dir = RunDir::create(&a.out)?;
    dir.write_csv("history.csv", &outcome.history)?;
    let mut rows = Vec::with_capacity(records.len());
    for (rank, r) in records.iter().enumerate() {
        let name = format!("vectors/rank_{rank:03}.json");
        write_vector_file(&mut dir, &name, &r.genotype.to_vector())?;
        rows.push(RankedRecord {
            rank,
            d: cfg.dim,
            n: cfg.n,
            discrepancy: r.fitness.value,
            kind: r.fitness.kind,
            source: Source::Optimized,
            recorded: r.previous,
            vector: name,
        });
    }
    dir.write_csv("results.csv", &rows)?;
    dir.write_json("results.json", &rows)?;
    let best = &records[0];
    let gv = best.genotype.to_vector();
    write_vector_file(&mut dir, "best_vector.json", &gv)?;
    fs::write(
        dir.path("best_points.txt")?,
        format_points(&generate(cfg.n, &gv)),
    )?;
    dir.finish(manifest("optimize", a, &cfg, seed, started)?)?;
    println!(
        "best {} ({}) after {} evaluations, written to {}",
        best.fitness.value,
        best.fitness.kind,
        outcome.evaluations,
        a.out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct InverseConfig<'a> {
    problem: &'a InverseProblem,
    ga: &'a GaConfig,
}

pub fn inverse_cmd(a: &InverseArgs) -> CliResult<()> {
    let started = now();
    let [lower, upper] = a.bounds[..] else {
        return Err(usage("--bounds takes two values"));
    };
    let prob = InverseProblem::new(a.dim, a.epsilon, lower, upper)?;
    let cfg = ga_config(a.dim, upper, &a.ga)?;
    let seed = a.ga.seed;
    let outcome = run_inverse_observed(&prob, &cfg, seed, |_, _| {})?;
    let checks = final_check(&outcome.archive, &prob, &cfg, seed)?;

    let mut dir = RunDir::create(&a.out)?;
    dir.write_csv("history.csv", &outcome.history)?;
    let mut rows = Vec::new();
    for (i, e) in outcome.archive.entries().iter().enumerate() {
        let name = format!("vectors/entry_{i:03}.json");
        write_vector_file(&mut dir, &name, &e.genotype.to_vector())?;
        rows.push(ParetoRow {
            n: e.n,
            discrepancy: e.discrepancy.value,
            kind: e.discrepancy.kind,
            vector: name,
        });
    }
    dir.write_csv("pareto.csv", &rows)?;
    dir.write_json("pareto.json", &rows)?;
    let check_rows: Vec<FinalCheckRow> = checks
        .iter()
        .map(|c| FinalCheckRow {
            n: c.n,
            recorded: c.recorded,
            rescored: c.rescored.value,
            kind: c.rescored.kind,
            meets_epsilon: c.meets_epsilon,
            previous_fails: c.previous_fails,
        })
        .collect();
    dir.write_csv("final.csv", &check_rows)?;
    let config = InverseConfig {
        problem: &prob,
        ga: &cfg,
    };
    dir.finish(manifest("inverse", a, &config, seed, started)?)?;
    match outcome.archive.min_n() {
        Some(e) => println!(
            "{} archive entries, smallest n {} (discrepancy {}), written to {}",
            outcome.archive.len(),
            e.n,
            e.discrepancy.value,
            a.out.display()
        ),
        None => println!(
            "no vector reached {} within {} points, written to {}",
            prob.epsilon,
            prob.upper,
            a.out.display()
        ),
    }
    Ok(())
}

pub fn baseline_cmd(a: &BaselineArgs) -> CliResult<()> {
    let started = now();
    if a.from == 0 || a.to < a.from {
        return Err(usage("need 1 <= --from <= --to"));
    }
    if a.runs == 0 || a.iters == 0 {
        return Err(usage("--runs and --iters must be positive"));
    }
    let gv = GeneratingVector::identity(a.dim).map_err(|e| usage(e.to_string()))?;
    let ev = Evaluator {
        mode: a.mode.into(),
        budget: a.budget,
        ta: TaConfig {
            iterations: a.iters,
            runs: a.runs,
            seed: a.seed,
        },
    };
    if ev.mode == EvalMode::Exact {
        // Refuse up front rather than after the cheap prefix of the sweep.
        let cells = Grid::new(&generate(a.to, &gv)).cell_count();
        if cells > a.budget as u128 {
            return Err(stardisc::Error::BudgetExceeded {
                estimated: cells,
                budget: a.budget,
            }
            .into());
        }
    }
    let mut rows = Vec::new();
    for n in a.from..=a.to {
        let b = ev.evaluate(&generate(n, &gv), seed::derive(&[a.seed, n as u64]))?;
        rows.push(ResultRecord {
            d: a.dim,
            n,
            discrepancy: b.value,
            kind: b.kind,
            source: Source::IdentityHalton,
        });
    }
    let mut dir = RunDir::create(&a.out)?;
    dir.write_csv("results.csv", &rows)?;
    dir.write_json("results.json", &rows)?;
    dir.finish(manifest("baseline", a, &ev, a.seed, started)?)?;
    println!("{} rows written to {}", rows.len(), a.out.display());
    Ok(())
}

pub fn replay_cmd(a: &ReplayArgs) -> CliResult<()> {
    let text = fs::read_to_string(&a.manifest)?;
    let m: RunManifest = serde_json::from_str(&text)?;
    match m.command.as_str() {
        "optimize" => {
            let mut args: OptimizeArgs = serde_json::from_value(m.args)?;
            args.out.clone_from(&a.out);
            optimize_cmd(&args)
        }
        "inverse" => {
            let mut args: InverseArgs = serde_json::from_value(m.args)?;
            args.out.clone_from(&a.out);
            inverse_cmd(&args)
        }
        "baseline" => {
            let mut args: BaselineArgs = serde_json::from_value(m.args)?;
            args.out.clone_from(&a.out);
            baseline_cmd(&args)
        }
        other => Err(usage(format!("cannot replay command `{other}`"))),
    }
}

//! (μ+λ) genetic algorithm over generalized Halton genotypes.
//!
//! Each generation creates λ children (crossover of two random parents or
//! mutation of one), scores them, re-scores parents whose fitness is only a
//! lower bound (keeping the maximum), and picks μ survivors from parents and
//! children by tournament. The best individual always survives.

mod operators;

pub use operators::{
    crossover, make_offspring, mutate, mutate_permutation, pmx, random_genotype, sample_positions,
    tournament_index, tournament_select,
};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discrepancy::{exact_star_discrepancy, BoundKind, DiscrepancyBound, Grid};
use crate::error::{Error, Result};
use crate::estimator::{ta_best_of, TaConfig};
use crate::evaluator::{EvalMode, Evaluator};
use crate::seed;
use crate::sequence::{generate, Genotype, MAX_DIMENSION};

pub const ARCHIVE_CAPACITY: usize = 25;

const TAG_VARIATION: u64 = 1;
const TAG_EVALUATE: u64 = 2;
const TAG_REEVALUATE: u64 = 3;
const TAG_FINAL: u64 = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub dim: usize,
    pub n: usize,
    pub mu: usize,
    pub lambda: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub match_prob: f64,
    pub tournament_size: usize,
    pub mode: EvalMode,
    pub budget: u64,
    pub ta_iterations: usize,
    /// Heuristic runs per evaluation during evolution.
    pub ta_runs: usize,
    /// Heuristic runs for the final candidates.
    pub final_runs: usize,
}

impl GaConfig {
    /// Defaults for `dim`: (25+100), p_c 0.7, p_m 0.3, match probability
    /// 0.05, tournaments of 3; 50 generations up to dimension 10, 100 up to
    /// 25, 200 beyond.
    pub fn for_dimension(dim: usize, n: usize) -> Self {
        let generations = match dim {
            0..=10 => 50,
            11..=25 => 100,
            _ => 200,
        };
        let ta = TaConfig::default();
        Self {
            dim,
            n,
            mu: 25,
            lambda: 100,
            generations,
            crossover_prob: 0.7,
            mutation_prob: 0.3,
            match_prob: 0.05,
            tournament_size: 3,
            mode: EvalMode::Auto,
            budget: crate::discrepancy::DEFAULT_BUDGET,
            ta_iterations: ta.iterations,
            ta_runs: ta.runs,
            final_runs: 50,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.dim == 0 || self.dim > MAX_DIMENSION {
            return bad(format!("dimension must be in 1..={MAX_DIMENSION}"));
        }
        if self.n == 0 {
            return bad("point count must be at least 1".into());
        }
        if self.mu == 0 || self.lambda == 0 || self.tournament_size == 0 {
            return bad("mu, lambda and tournament size must be at least 1".into());
        }
        for (name, p) in [
            ("crossover probability", self.crossover_prob),
            ("mutation probability", self.mutation_prob),
            ("match probability", self.match_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} {p} outside [0, 1]"));
            }
        }
        if (self.crossover_prob + self.mutation_prob - 1.0).abs() > 1e-9 {
            return bad("crossover and mutation probabilities must sum to 1".into());
        }
        if self.ta_iterations == 0 || self.ta_runs == 0 || self.final_runs == 0 {
            return bad("threshold-accepting iterations and runs must be at least 1".into());
        }
        Ok(())
    }

    pub fn evaluator(&self) -> Evaluator {
        Evaluator {
            mode: self.mode,
            budget: self.budget,
            ta: TaConfig {
                iterations: self.ta_iterations,
                runs: self.ta_runs,
                seed: 0,
            },
        }
    }

    /// Refuses forced-exact runs whose grids cannot fit the budget.
    fn check_exact_budget(&self, n: usize) -> Result<()> {
        if self.mode != EvalMode::Exact {
            return Ok(());
        }
        let estimated = (n as u128 + 1)
            .checked_pow(self.dim as u32)
            .unwrap_or(u128::MAX);
        if estimated > self.budget as u128 {
            return Err(Error::BudgetExceeded {
                estimated,
                budget: self.budget,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    /// Lineage id; clones made by survivor selection share it.
    pub id: u64,
    pub genotype: Genotype,
    pub fitness: Option<DiscrepancyBound>,
}

impl Individual {
    /// Fitness value, `+inf` when unevaluated.
    pub fn value(&self) -> f64 {
        self.fitness.as_ref().map_or(f64::INFINITY, |f| f.value)
    }

    /// Applies a fresh lower bound with the max rule.
    fn absorb(&mut self, fresh: DiscrepancyBound) {
        match &mut self.fitness {
            Some(f) if f.kind == BoundKind::LowerBound && fresh.kind == BoundKind::LowerBound => {
                f.value = f.value.max(fresh.value);
                f.meta.evaluations += fresh.meta.evaluations;
                f.meta.runs += fresh.meta.runs;
            }
            slot => *slot = Some(fresh),
        }
    }
}

/// The best individuals seen so far, lowest fitness first.
#[derive(Debug, Clone, PartialEq)]
pub struct Archive {
    capacity: usize,
    entries: Vec<Individual>,
}

impl Default for Archive {
    fn default() -> Self {
        Self::with_capacity(ARCHIVE_CAPACITY)
    }
}

impl Archive {
    pub fn with_capacity(capacity: usize) -> Self {
        Self {
            capacity,
            entries: Vec::new(),
        }
    }

    pub fn entries(&self) -> &[Individual] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn best(&self) -> Option<&Individual> {
        self.entries.first()
    }

    /// Inserts `ind`, or refreshes the fitness of its genotype's entry.
    pub fn update(&mut self, ind: &Individual) {
        let Some(fitness) = &ind.fitness else {
            return;
        };
        if let Some(entry) = self.entries.iter_mut().find(|e| e.genotype == ind.genotype) {
            if fitness.kind == BoundKind::LowerBound && entry.value() > fitness.value {
                return;
            }
            entry.fitness = Some(fitness.clone());
        } else {
            self.entries.push(ind.clone());
        }
        self.entries.sort_by(|a, b| a.value().total_cmp(&b.value()));
        self.entries.truncate(self.capacity);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    /// Fitness evaluations so far, initial population included.
    pub evaluations: u64,
}

impl GenerationStats {
    fn of(generation: usize, population: &[Individual], evaluations: u64) -> Self {
        let values: Vec<f64> = population.iter().map(Individual::value).collect();
        Self {
            generation,
            best: values.iter().copied().fold(f64::INFINITY, f64::min),
            mean: values.iter().sum::<f64>() / values.len() as f64,
            evaluations,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GaOutcome {
    pub best: Individual,
    pub archive: Archive,
    pub history: Vec<GenerationStats>,
    pub population: Vec<Individual>,
    pub evaluations: u64,
}

/// Runs the optimizer for `cfg.generations` generations.
pub fn run_ga(cfg: &GaConfig, seed: u64) -> Result<GaOutcome> {
    run_ga_observed(cfg, seed, |_, _| {})
}

/// As [`run_ga`], calling `observe(generation, population)` after the
/// initial population and after every generation's survivor selection.
pub fn run_ga_observed<F>(cfg: &GaConfig, seed: u64, mut observe: F) -> Result<GaOutcome>
where
    F: FnMut(usize, &[Individual]),
{
    cfg.validate()?;
    cfg.check_exact_budget(cfg.n)?;
    let evaluator = cfg.evaluator();
    let mut rng = seed::rng_for(&[seed, TAG_VARIATION]);
    let mut next_id = 0u64;
    let mut evaluations = 0u64;
    let mut archive = Archive::default();

    let initial: Vec<Genotype> = (0..cfg.mu)
        .map(|_| random_genotype(cfg.dim, &mut rng))
        .collect();
    let mut population = evaluate_all(initial, cfg, &evaluator, seed, 0, &mut next_id)?;
    evaluations += population.len() as u64;
    for ind in &population {
        archive.update(ind);
    }
    observe(0, &population);

    let mut history = Vec::with_capacity(cfg.generations + 1);
    history.push(GenerationStats::of(0, &population, evaluations));
    for generation in 1..=cfg.generations {
        let offspring: Vec<Genotype> = {
            let parents: Vec<&Genotype> = population.iter().map(|i| &i.genotype).collect();
            (0..cfg.lambda)
                .map(|_| make_offspring(&parents, cfg, &mut rng))
                .collect()
        };
        let offspring = evaluate_all(offspring, cfg, &evaluator, seed, generation, &mut next_id)?;
        evaluations += offspring.len() as u64;

        let refreshed = reevaluate_parents(&mut population, cfg, &evaluator, seed, generation)?;
        evaluations += refreshed;
        for ind in population.iter().chain(&offspring) {
            archive.update(ind);
        }

        let mut pool = population;
        pool.extend(offspring);
        population = select_survivors(&pool, cfg.mu, cfg.tournament_size, &mut rng)?;
        observe(generation, &population);
        history.push(GenerationStats::of(generation, &population, evaluations));
    }

    let best = population
        .iter()
        .min_by(|a, b| a.value().total_cmp(&b.value()))
        .cloned()
        .expect("population is nonempty");
    Ok(GaOutcome {
        best,
        archive,
        history,
        population,
        evaluations,
    })
}

fn evaluate_all(
    genotypes: Vec<Genotype>,
    cfg: &GaConfig,
    evaluator: &Evaluator,
    seed: u64,
    generation: usize,
    next_id: &mut u64,
) -> Result<Vec<Individual>> {
    let scored: Vec<DiscrepancyBound> = genotypes
        .par_iter()
        .map(|g| {
            let x = generate(cfg.n, &g.to_vector());
            let s = seed::derive(&[seed, TAG_EVALUATE, generation as u64, g.fingerprint()]);
            evaluator.evaluate(&x, s)
        })
        .collect::<Result<_>>()?;
    Ok(genotypes
        .into_iter()
        .zip(scored)
        .map(|(genotype, fitness)| {
            *next_id += 1;
            Individual {
                id: *next_id,
                genotype,
                fitness: Some(fitness),
            }
        })
        .collect())
}

/// Re-scores lower-bound parents and keeps the larger value. Returns the
/// number of evaluations spent.
fn reevaluate_parents(
    population: &mut [Individual],
    cfg: &GaConfig,
    evaluator: &Evaluator,
    seed: u64,
    generation: usize,
) -> Result<u64> {
    let fresh: Vec<Option<DiscrepancyBound>> = population
        .par_iter()
        .map(|ind| match &ind.fitness {
            Some(f) if f.kind == BoundKind::LowerBound => {
                let x = generate(cfg.n, &ind.genotype.to_vector());
                let s = seed::derive(&[
                    seed,
                    TAG_REEVALUATE,
                    generation as u64,
                    ind.genotype.fingerprint(),
                ]);
                evaluator.evaluate(&x, s).map(Some)
            }
            _ => Ok(None),
        })
        .collect::<Result<_>>()?;
    let mut spent = 0;
    for (ind, f) in population.iter_mut().zip(fresh) {
        if let Some(f) = f {
            ind.absorb(f);
            spent += 1;
        }
    }
    Ok(spent)
}

/// The best of `pool` plus `mu - 1` tournament winners.
fn select_survivors<R: Rng>(
    pool: &[Individual],
    mu: usize,
    k: usize,
    rng: &mut R,
) -> Result<Vec<Individual>> {
    let best = (0..pool.len())
        .min_by(|&a, &b| pool[a].value().total_cmp(&pool[b].value()))
        .ok_or_else(|| Error::InvalidConfig("empty selection pool".into()))?;
    let mut next = Vec::with_capacity(mu);
    next.push(pool[best].clone());
    for _ in 1..mu {
        next.push(pool[tournament_index(pool, k, rng)?].clone());
    }
    Ok(next)
}

/// A candidate re-scored at the end of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct FinalRecord {
    pub genotype: Genotype,
    pub fitness: DiscrepancyBound,
    /// Fitness recorded during evolution.
    pub previous: f64,
}

/// Re-scores the archive and final population: exactly when the grid fits
/// the budget, otherwise with `cfg.final_runs` heuristic runs (keeping the
/// larger of old and new bound). Sorted by value, duplicates removed.
pub fn final_evaluation(
    outcome: &GaOutcome,
    cfg: &GaConfig,
    seed: u64,
) -> Result<Vec<FinalRecord>> {
    let mut candidates: Vec<&Individual> = Vec::new();
    for ind in outcome.archive.entries().iter().chain(&outcome.population) {
        if !candidates.iter().any(|c| c.genotype == ind.genotype) {
            candidates.push(ind);
        }
    }
    let ta = TaConfig {
        iterations: cfg.ta_iterations,
        runs: cfg.final_runs,
        seed: 0,
    };
    let mut records: Vec<FinalRecord> = candidates
        .par_iter()
        .map(|ind| {
            let x = generate(cfg.n, &ind.genotype.to_vector());
            let previous = ind.value();
            let fitness = if Grid::new(&x).cell_count() <= cfg.budget as u128 {
                exact_star_discrepancy(&x, cfg.budget)?
            } else {
                let s = seed::derive(&[seed, TAG_FINAL, ind.genotype.fingerprint()]);
                let mut f = ta_best_of(&x, &ta.with_seed(s));
                if previous.is_finite() {
                    f.value = f.value.max(previous);
                }
                f
            };
            Ok(FinalRecord {
                genotype: ind.genotype.clone(),
                fitness,
                previous,
            })
        })
        .collect::<Result<_>>()?;
    records.sort_by(|a, b| a.fitness.value.total_cmp(&b.fitness.value));
    Ok(records)
}

//! Inverse star discrepancy: small point counts meeting a target.
//!
//! Each genotype is scored by bisection on `n` against the predicate
//! `disc(first n points) <= epsilon`, which yields two objectives to
//! minimize, `(n, discrepancy)`. Survivors are chosen by NSGA-II (fast
//! nondominated sorting, then crowding distance), and every feasible
//! evaluation is offered to a Pareto archive.
//!
//! The discrepancy of a Halton prefix is not monotone in `n`, so the
//! bisection result is a boundary of the predicate rather than a certified
//! minimum; [`final_check`] re-examines archive entries afterwards.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discrepancy::{BoundKind, DiscrepancyBound, Grid};
use crate::error::{Error, Result};
use crate::estimator::TaConfig;
use crate::evaluator::{EvalMode, Evaluator};
use crate::optimizer::{make_offspring, random_genotype, GaConfig};
use crate::seed;
use crate::sequence::{generate, Genotype, MAX_DIMENSION};

const TAG_VARIATION: u64 = 11;
const TAG_BISECTION: u64 = 12;
const TAG_FINAL: u64 = 13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseProblem {
    pub dim: usize,
    pub epsilon: f64,
    /// Search interval for `n`, both ends inclusive.
    pub lower: usize,
    pub upper: usize,
}

impl InverseProblem {
    pub fn new(dim: usize, epsilon: f64, lower: usize, upper: usize) -> Result<Self> {
        let p = Self {
            dim,
            epsilon,
            lower,
            upper,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.dim > MAX_DIMENSION {
            return Err(Error::InvalidConfig(format!(
                "dimension must be in 1..={MAX_DIMENSION}"
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon {} outside (0, 1)",
                self.epsilon
            )));
        }
        // Three outcomes (lower, upper, infeasible) cannot be told apart
        // with the single call a width-one interval allows.
        if self.lower == 0 || self.upper < self.lower + 2 {
            return Err(Error::InvalidConfig(format!(
                "bounds ({}, {}) must satisfy 1 <= a and a + 2 <= b",
                self.lower, self.upper
            )));
        }
        Ok(())
    }

    /// `ceil(log2(b - a)) + 1`.
    pub fn max_bisection_calls(&self) -> usize {
        max_calls(self.lower, self.upper)
    }
}

fn max_calls(lower: usize, upper: usize) -> usize {
    let width = (upper - lower) as u64;
    (u64::BITS - (width - 1).leading_zeros()) as usize + 1
}

/// Pareto dominance with both objectives minimized.
pub fn dominates(u: (usize, f64), v: (usize, f64)) -> bool {
    dominates_objectives(&[u.0 as f64, u.1], &[v.0 as f64, v.1])
}

fn dominates_objectives(u: &[f64; 2], v: &[f64; 2]) -> bool {
    u[0] <= v[0] && u[1] <= v[1] && (u[0] < v[0] || u[1] < v[1])
}

#[derive(Debug, Clone, PartialEq)]
pub enum BisectionOutcome {
    /// Smallest `n` found meeting the target, with its discrepancy.
    Feasible {
        n: usize,
        discrepancy: DiscrepancyBound,
    },
    /// Even the upper bound misses the target.
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bisection {
    pub outcome: BisectionOutcome,
    pub calls: usize,
}

/// Bisection for the first `n` in `lower..=upper` with
/// `eval(n).value <= epsilon`, assuming the predicate is monotone.
///
/// `lower - 1` is treated as failing and `upper + 1` as passing without
/// evaluation, so at most `ceil(log2(upper - lower + 2))` calls are made.
pub fn bisect_min_n<F>(lower: usize, upper: usize, epsilon: f64, mut eval: F) -> Result<Bisection>
where
    F: FnMut(usize) -> Result<DiscrepancyBound>,
{
    if lower == 0 || upper < lower {
        return Err(Error::InvalidConfig(format!(
            "invalid bisection bounds ({lower}, {upper})"
        )));
    }
    let mut lo = lower - 1;
    let mut hi = upper + 1;
    let mut at_hi: Option<DiscrepancyBound> = None;
    let mut calls = 0;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let d = eval(mid)?;
        calls += 1;
        if d.value <= epsilon {
            hi = mid;
            at_hi = Some(d);
        } else {
            lo = mid;
        }
    }
    let outcome = match at_hi {
        Some(discrepancy) if hi <= upper => BisectionOutcome::Feasible { n: hi, discrepancy },
        _ => BisectionOutcome::Infeasible,
    };
    Ok(Bisection { outcome, calls })
}

/// Seed for scoring `(genotype, n)`, stable across repeated evaluation.
pub fn evaluation_seed(seed: u64, genotype: &Genotype, n: usize) -> u64 {
    seed::derive(&[seed, TAG_BISECTION, genotype.fingerprint(), n as u64])
}

/// Bisection on the number of points generated by `g`.
pub fn bisection_evaluate(
    g: &Genotype,
    prob: &InverseProblem,
    evaluator: &Evaluator,
    seed: u64,
) -> Result<Bisection> {
    let gv = g.to_vector();
    bisect_min_n(prob.lower, prob.upper, prob.epsilon, |n| {
        evaluator.evaluate(&generate(n, &gv), evaluation_seed(seed, g, n))
    })
}

/// Fronts of mutually nondominated indices, best first.
pub fn nondominated_fronts(objs: &[[f64; 2]]) -> Vec<Vec<usize>> {
    let len = objs.len();
    let mut dominated_by = vec![0usize; len];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); len];
    for i in 0..len {
        for j in i + 1..len {
            if dominates_objectives(&objs[i], &objs[j]) {
                dominates_list[i].push(j);
                dominated_by[j] += 1;
            } else if dominates_objectives(&objs[j], &objs[i]) {
                dominates_list[j].push(i);
                dominated_by[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..len).filter(|&i| dominated_by[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominates_list[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance of each member of `front` (same order).
pub fn crowding_distance(objs: &[[f64; 2]], front: &[usize]) -> Vec<f64> {
    let mut dist = vec![0.0; front.len()];
    if front.len() <= 2 {
        dist.fill(f64::INFINITY);
        return dist;
    }
    for m in [0, 1] {
        let mut order: Vec<usize> = (0..front.len()).collect();
        order.sort_by(|&a, &b| objs[front[a]][m].total_cmp(&objs[front[b]][m]));
        let first = objs[front[order[0]]][m];
        let last = objs[front[order[order.len() - 1]]][m];
        dist[order[0]] = f64::INFINITY;
        dist[order[order.len() - 1]] = f64::INFINITY;
        let range = last - first;
        if !(range.is_finite() && range > 0.0) {
            continue;
        }
        for w in 1..order.len() - 1 {
            let gap = objs[front[order[w + 1]]][m] - objs[front[order[w - 1]]][m];
            if gap.is_finite() {
                dist[order[w]] += gap / range;
            }
        }
    }
    dist
}

/// NSGA-II survivor selection: whole fronts in rank order, the last one
/// truncated by descending crowding distance. Returns indices into `objs`.
pub fn nsga2_select(objs: &[[f64; 2]], mu: usize) -> Vec<usize> {
    let mut chosen = Vec::with_capacity(mu.min(objs.len()));
    for front in nondominated_fronts(objs) {
        let room = mu - chosen.len();
        if room == 0 {
            break;
        }
        if front.len() <= room {
            chosen.extend(front);
            continue;
        }
        let dist = crowding_distance(objs, &front);
        let mut order: Vec<usize> = (0..front.len()).collect();
        order.sort_by(|&a, &b| dist[b].partial_cmp(&dist[a]).unwrap_or(Ordering::Equal));
        chosen.extend(order.into_iter().take(room).map(|k| front[k]));
    }
    chosen
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoEntry {
    pub genotype: Genotype,
    pub n: usize,
    pub discrepancy: DiscrepancyBound,
}

impl ParetoEntry {
    pub fn objectives(&self) -> (usize, f64) {
        (self.n, self.discrepancy.value)
    }
}

/// Mutually nondominated `(n, discrepancy)` entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParetoArchive {
    entries: Vec<ParetoEntry>,
}

impl ParetoArchive {
    /// Entries ordered by `n`, then discrepancy.
    pub fn entries(&self) -> &[ParetoEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds `entry` unless an archived one dominates it or has the same
    /// genotype and objectives; evicts entries it dominates.
    pub fn insert(&mut self, entry: ParetoEntry) -> bool {
        let obj = entry.objectives();
        if self.entries.iter().any(|e| {
            dominates(e.objectives(), obj)
                || (e.genotype == entry.genotype && e.objectives() == obj)
        }) {
            return false;
        }
        self.entries.retain(|e| !dominates(obj, e.objectives()));
        let pos = self
            .entries
            .partition_point(|e| (e.n, e.discrepancy.value) <= (entry.n, entry.discrepancy.value));
        self.entries.insert(pos, entry);
        true
    }

    pub fn min_n(&self) -> Option<&ParetoEntry> {
        self.entries.first()
    }

    pub fn is_nondominated(&self) -> bool {
        self.entries.iter().all(|u| {
            self.entries
                .iter()
                .all(|v| !dominates(u.objectives(), v.objectives()))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InverseIndividual {
    pub genotype: Genotype,
    pub bisection: Bisection,
}

impl InverseIndividual {
    /// `(n, discrepancy)`; infeasible individuals get `(upper + 1, inf)`.
    pub fn objectives(&self, prob: &InverseProblem) -> [f64; 2] {
        match &self.bisection.outcome {
            BisectionOutcome::Feasible { n, discrepancy } => [*n as f64, discrepancy.value],
            BisectionOutcome::Infeasible => [(prob.upper + 1) as f64, f64::INFINITY],
        }
    }

    pub fn entry(&self) -> Option<ParetoEntry> {
        match &self.bisection.outcome {
            BisectionOutcome::Feasible { n, discrepancy } => Some(ParetoEntry {
                genotype: self.genotype.clone(),
                n: *n,
                discrepancy: discrepancy.clone(),
            }),
            BisectionOutcome::Infeasible => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseStats {
    pub generation: usize,
    pub archive_size: usize,
    pub min_n: Option<usize>,
    pub feasible: usize,
    /// Discrepancy evaluations so far.
    pub evaluations: u64,
}

impl InverseStats {
    fn of(
        generation: usize,
        archive: &ParetoArchive,
        population: &[InverseIndividual],
        evaluations: u64,
    ) -> Self {
        Self {
            generation,
            archive_size: archive.len(),
            min_n: archive.min_n().map(|e| e.n),
            feasible: population
                .iter()
                .filter(|i| matches!(i.bisection.outcome, BisectionOutcome::Feasible { .. }))
                .count(),
            evaluations,
        }
    }
}

#[derive(Debug, Clone)]
pub struct InverseOutcome {
    pub archive: ParetoArchive,
    pub population: Vec<InverseIndividual>,
    pub history: Vec<InverseStats>,
    pub evaluations: u64,
}

fn inverse_evaluator(cfg: &GaConfig) -> Evaluator {
    Evaluator {
        mode: cfg.mode,
        budget: cfg.budget,
        ta: TaConfig {
            iterations: cfg.ta_iterations,
            runs: cfg.ta_runs,
            seed: 0,
        },
    }
}

/// Runs the generational loop with bisection scoring and NSGA-II survivor
/// selection. `cfg.n` is ignored; the point count comes from `prob`.
pub fn run_inverse(prob: &InverseProblem, cfg: &GaConfig, seed: u64) -> Result<InverseOutcome> {
    run_inverse_observed(prob, cfg, seed, |_, _| {})
}

/// As [`run_inverse`], calling `observe(generation, archive)` after the
/// initial population and after every generation.
pub fn run_inverse_observed<F>(
    prob: &InverseProblem,
    cfg: &GaConfig,
    seed: u64,
    mut observe: F,
) -> Result<InverseOutcome>
where
    F: FnMut(usize, &ParetoArchive),
{
    prob.validate()?;
    let cfg = GaConfig {
        dim: prob.dim,
        n: prob.upper,
        ..cfg.clone()
    };
    cfg.validate()?;
    if cfg.mode == EvalMode::Exact {
        let estimated = (prob.upper as u128 + 1)
            .checked_pow(prob.dim as u32)
            .unwrap_or(u128::MAX);
        if estimated > cfg.budget as u128 {
            return Err(Error::BudgetExceeded {
                estimated,
                budget: cfg.budget,
            });
        }
    }
    let evaluator = inverse_evaluator(&cfg);
    let mut rng = seed::rng_for(&[seed, TAG_VARIATION]);
    let mut archive = ParetoArchive::default();
    let mut evaluations = 0u64;

    let score = |genotypes: Vec<Genotype>| -> Result<Vec<InverseIndividual>> {
        genotypes
            .into_par_iter()
            .map(|genotype| {
                let bisection = bisection_evaluate(&genotype, prob, &evaluator, seed)?;
                Ok(InverseIndividual {
                    genotype,
                    bisection,
                })
            })
            .collect()
    };

    let initial = (0..cfg.mu)
        .map(|_| random_genotype(prob.dim, &mut rng))
        .collect();
    let mut population = score(initial)?;
    evaluations += population
        .iter()
        .map(|i| i.bisection.calls as u64)
        .sum::<u64>();
    for ind in &population {
        if let Some(e) = ind.entry() {
            archive.insert(e);
        }
    }
    observe(0, &archive);

    let mut history = Vec::with_capacity(cfg.generations + 1);
    history.push(InverseStats::of(0, &archive, &population, evaluations));
    for generation in 1..=cfg.generations {
        let children: Vec<Genotype> = {
            let parents: Vec<&Genotype> = population.iter().map(|i| &i.genotype).collect();
            (0..cfg.lambda)
                .map(|_| make_offspring(&parents, &cfg, &mut rng))
                .collect()
        };
        let offspring = score(children)?;
        evaluations += offspring
            .iter()
            .map(|i| i.bisection.calls as u64)
            .sum::<u64>();
        for ind in &offspring {
            if let Some(e) = ind.entry() {
                archive.insert(e);
            }
        }
        let mut pool = population;
        pool.extend(offspring);
        let objs: Vec<[f64; 2]> = pool.iter().map(|i| i.objectives(prob)).collect();
        let keep = nsga2_select(&objs, cfg.mu);
        let mut slots: Vec<Option<InverseIndividual>> = pool.into_iter().map(Some).collect();
        population = keep.into_iter().filter_map(|i| slots[i].take()).collect();
        observe(generation, &archive);
        history.push(InverseStats::of(
            generation,
            &archive,
            &population,
            evaluations,
        ));
    }

    Ok(InverseOutcome {
        archive,
        population,
        history,
        evaluations,
    })
}

/// Re-examination of one archive entry.
#[derive(Debug, Clone, PartialEq)]
pub struct FinalCheck {
    pub n: usize,
    /// Value recorded during the run.
    pub recorded: f64,
    /// Value under the final profile (exact, or 50 heuristic runs).
    pub rescored: DiscrepancyBound,
    pub meets_epsilon: bool,
    /// Whether `n - 1` points miss the target under the run's seeds;
    /// `None` when `n == 1`.
    pub previous_fails: Option<bool>,
}

/// Re-scores every archive entry with the final profile and checks the
/// bisection boundary. Entries that no longer meet `epsilon` are flagged,
/// not removed.
pub fn final_check(
    archive: &ParetoArchive,
    prob: &InverseProblem,
    cfg: &GaConfig,
    seed: u64,
) -> Result<Vec<FinalCheck>> {
    let run_eval = inverse_evaluator(cfg);
    let final_ta = TaConfig {
        iterations: cfg.ta_iterations,
        runs: cfg.final_runs,
        seed: 0,
    };
    archive
        .entries()
        .par_iter()
        .map(|e| {
            let gv = e.genotype.to_vector();
            let x = generate(e.n, &gv);
            let rescored = if Grid::new(&x).cell_count() <= cfg.budget as u128 {
                crate::discrepancy::exact_star_discrepancy(&x, cfg.budget)?
            } else {
                let s = seed::derive(&[seed, TAG_FINAL, e.genotype.fingerprint(), e.n as u64]);
                let mut f = crate::estimator::ta_best_of(&x, &final_ta.with_seed(s));
                if e.discrepancy.kind == BoundKind::LowerBound {
                    f.value = f.value.max(e.discrepancy.value);
                }
                f
            };
            let previous_fails = if e.n > 1 {
                let prev = run_eval.evaluate(
                    &generate(e.n - 1, &gv),
                    evaluation_seed(seed, &e.genotype, e.n - 1),
                )?;
                Some(prev.value > prob.epsilon)
            } else {
                None
            };
            Ok(FinalCheck {
                n: e.n,
                recorded: e.discrepancy.value,
                meets_epsilon: rescored.value <= prob.epsilon,
                rescored,
                previous_fails,
            })
        })
        .collect()
}

//! Threshold-accepting lower bounds for the star discrepancy.
//!
//! A run walks the grid spanned by the point set with a (1+1) scheme: a
//! neighbour replaces the current grid point when its value is at most
//! `|T|` worse, with the threshold `T < 0` decaying linearly to zero. The
//! largest value seen is returned, so every result is realized at some grid
//! point and never exceeds the exact discrepancy.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::discrepancy::{grid_local_value, BoundKind, DiscrepancyBound, EvalMeta, Grid};
use crate::seed;
use crate::sequence::PointSet;

/// Pairs sampled to estimate the initial threshold.
const THRESHOLD_SAMPLES: usize = 100;
/// Most axes changed by a single move.
const MAX_MOVED_AXES: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaConfig {
    pub iterations: usize,
    pub runs: usize,
    pub seed: u64,
}

impl Default for TaConfig {
    fn default() -> Self {
        Self {
            iterations: 4000,
            runs: 10,
            seed: 0,
        }
    }
}

impl TaConfig {
    /// Profile used to score final candidates.
    pub fn final_profile(seed: u64) -> Self {
        Self {
            runs: 50,
            seed,
            ..Self::default()
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }
}

/// What a single run saw; mostly useful to tests and diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct TaTrace {
    pub best: f64,
    pub best_point: Vec<usize>,
    pub start_value: f64,
    pub final_point: Vec<usize>,
    pub final_value: f64,
    pub evaluations: u64,
}

struct Walker<'a> {
    x: &'a PointSet,
    grid: Grid,
    y: Vec<f64>,
    evaluations: u64,
}

impl<'a> Walker<'a> {
    fn value(&mut self, idx: &[usize]) -> f64 {
        for (j, &k) in idx.iter().enumerate() {
            self.y[j] = self.grid.axis(j)[k];
        }
        self.evaluations += 1;
        grid_local_value(&self.y, self.x)
    }

    /// Random grid point whose coordinates follow `u^(1/d)`, so the box
    /// volume is roughly uniform rather than concentrated near zero.
    fn random_point<R: Rng>(&self, rng: &mut R) -> Vec<usize> {
        let inv_d = 1.0 / self.y.len() as f64;
        self.grid
            .axes()
            .iter()
            .map(|a| {
                let target = rng.gen::<f64>().powf(inv_d);
                a.partition_point(|&v| v < target).min(a.len() - 1)
            })
            .collect()
    }

    fn neighbour<R: Rng>(&self, from: &[usize], radius: usize, rng: &mut R) -> Vec<usize> {
        let d = from.len();
        let k = rng.gen_range(1..=d.min(MAX_MOVED_AXES));
        let mut to = from.to_vec();
        for j in sample(rng, d, k) {
            let len = self.grid.axis(j).len() as i64;
            let mut step = rng.gen_range(1..=radius as i64);
            if rng.gen_bool(0.5) {
                step = -step;
            }
            to[j] = (to[j] as i64 + step).clamp(0, len - 1) as usize;
        }
        to
    }
}

/// Neighbourhood radius at `t`, shrinking linearly from `start` to 1.
fn radius_at(start: usize, t: usize, iterations: usize) -> usize {
    if iterations <= 1 {
        return start;
    }
    let frac = t as f64 / (iterations - 1) as f64;
    (start as f64 - (start as f64 - 1.0) * frac)
        .round()
        .max(1.0) as usize
}

/// One threshold-accepting run with the full trace.
pub fn ta_run_traced(x: &PointSet, cfg: &TaConfig, run_index: u64) -> TaTrace {
    assert!(!x.is_empty(), "point set must be nonempty");
    let mut rng = seed::rng_for(&[cfg.seed, run_index]);
    let mut w = Walker {
        x,
        grid: Grid::new(x),
        y: vec![0.0; x.dimension()],
        evaluations: 0,
    };
    let start_radius = (x.len() + 1).div_ceil(8).max(1);
    let iterations = cfg.iterations.max(1);

    let mut deltas: Vec<f64> = (0..THRESHOLD_SAMPLES)
        .map(|_| {
            let p = w.random_point(&mut rng);
            let o = w.neighbour(&p, start_radius, &mut rng);
            (w.value(&o) - w.value(&p)).abs()
        })
        .collect();
    deltas.sort_by(f64::total_cmp);
    let start_threshold = -deltas[deltas.len() / 2];

    let mut current = w.random_point(&mut rng);
    let mut current_value = w.value(&current);
    let start_value = current_value;
    let mut best = current_value;
    let mut best_point = current.clone();

    for t in 0..iterations {
        let threshold = start_threshold * (1.0 - t as f64 / iterations as f64);
        let radius = radius_at(start_radius, t, iterations);
        let candidate = w.neighbour(&current, radius, &mut rng);
        let value = w.value(&candidate);
        if value - current_value >= threshold {
            current = candidate;
            current_value = value;
            if value > best {
                best = value;
                best_point.clone_from(&current);
            }
        }
    }

    // Zero threshold: finish with steepest ascent over unit moves so the
    // final state is a local maximum.
    loop {
        let mut step: Option<(Vec<usize>, f64)> = None;
        for j in 0..current.len() {
            let len = w.grid.axis(j).len();
            for to in [current[j].wrapping_sub(1), current[j] + 1] {
                if to >= len {
                    continue;
                }
                let mut cand = current.clone();
                cand[j] = to;
                let value = w.value(&cand);
                if value > step.as_ref().map_or(current_value, |s| s.1) {
                    step = Some((cand, value));
                }
            }
        }
        match step {
            Some((cand, value)) => {
                current = cand;
                current_value = value;
                if value > best {
                    best = value;
                    best_point.clone_from(&current);
                }
            }
            None => break,
        }
    }

    TaTrace {
        best,
        best_point,
        start_value,
        final_point: current,
        final_value: current_value,
        evaluations: w.evaluations,
    }
}

/// Largest grid value found by run `run_index`.
pub fn ta_run(x: &PointSet, cfg: &TaConfig, run_index: u64) -> f64 {
    ta_run_traced(x, cfg, run_index).best
}

/// Best of `cfg.runs` independent runs, as a lower bound.
pub fn ta_best_of(x: &PointSet, cfg: &TaConfig) -> DiscrepancyBound {
    assert!(cfg.runs >= 1, "at least one run is required");
    let mut value = 0.0f64;
    let mut evaluations = 0;
    for run in 0..cfg.runs as u64 {
        let trace = ta_run_traced(x, cfg, run);
        value = value.max(trace.best);
        evaluations += trace.evaluations;
    }
    DiscrepancyBound {
        value,
        kind: BoundKind::LowerBound,
        meta: EvalMeta {
            evaluations,
            runs: cfg.runs as u32,
            seed: Some(cfg.seed),
        },
    }
}

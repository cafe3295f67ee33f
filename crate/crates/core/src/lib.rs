//! Low star-discrepancy point sets from generalized Halton sequences.
//!
//! The crate has two halves. The *evaluation* side computes star
//! discrepancies: [`discrepancy`] enumerates the grid spanned by a point set
//! exactly, [`estimator`] runs a threshold-accepting local search that
//! yields lower bounds when the grid is too large. The *optimization* side
//! searches over digit permutations of the generalized Halton construction
//! ([`sequence`]): [`optimizer`] is a (μ+λ) genetic algorithm minimizing the
//! discrepancy of a fixed-size set, and [`inverse`] finds small point counts
//! meeting a discrepancy target with bisection and NSGA-II selection.

pub mod discrepancy;
pub mod error;
pub mod estimator;
pub mod evaluator;
pub mod inverse;
pub mod io;
pub mod optimizer;
pub mod seed;
pub mod sequence;

pub use discrepancy::{
    box_counts, exact_star_discrepancy, grid_local_value, local_discrepancy, BoundKind,
    DiscrepancyBound, EvalMeta, Grid, GridPoint, DEFAULT_BUDGET,
};
pub use error::{Error, Result};
pub use estimator::{ta_best_of, ta_run, TaConfig};
pub use evaluator::{EvalMode, Evaluator};
pub use inverse::{
    bisection_evaluate, dominates, nsga2_select, run_inverse, InverseOutcome, InverseProblem,
    ParetoArchive, ParetoEntry,
};
pub use optimizer::{run_ga, Archive, GaConfig, GaOutcome, Individual};
pub use sequence::{
    first_primes, generate, halton_point, radical_inverse, GeneratingVector, Genotype, Permutation,
    PointSet,
};

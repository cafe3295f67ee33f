//! Benchmark fixtures shared by the criterion targets.

use stardisc::optimizer::random_genotype;
use stardisc::seed::rng_for;
use stardisc::{generate, GeneratingVector, PointSet};

/// Scrambled Halton set with a fixed random generating vector.
pub fn scrambled(n: usize, d: usize, seed: u64) -> PointSet {
    let mut rng = rng_for(&[seed]);
    generate(n, &random_genotype(d, &mut rng).to_vector())
}

pub fn identity(n: usize, d: usize) -> PointSet {
    generate(n, &GeneratingVector::identity(d).expect("valid dimension"))
}

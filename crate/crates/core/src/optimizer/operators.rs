//! Variation and selection operators on permutation genotypes.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{GaConfig, Individual};
use crate::error::{Error, Result};
use crate::sequence::{first_primes, Genotype};

/// Partially matched crossover, parent-`a`-based child.
///
/// Positions `cut1..cut2` take `b`'s alleles; every other position keeps
/// `a`'s allele, followed through the segment's `b[k] -> a[k]` mapping
/// until it no longer collides with the segment.
pub fn pmx(a: &[usize], b: &[usize], cut1: usize, cut2: usize) -> Result<Vec<usize>> {
    if a.len() != b.len() {
        return Err(Error::InvalidGenotype(format!(
            "crossover parents differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if cut1 >= cut2 || cut2 > a.len() {
        return Err(Error::InvalidConfig(format!(
            "crossover cuts ({cut1}, {cut2}) invalid for length {}",
            a.len()
        )));
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_unstable();
    sb.sort_unstable();
    if sa != sb || sa.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidGenotype(
            "crossover parents are not permutations of the same set".into(),
        ));
    }
    let upper = sa.last().map_or(0, |&m| m + 1);
    let mut segment_pos = vec![usize::MAX; upper];
    for k in cut1..cut2 {
        segment_pos[b[k]] = k;
    }
    let mut child = a.to_vec();
    child[cut1..cut2].copy_from_slice(&b[cut1..cut2]);
    for i in (0..cut1).chain(cut2..a.len()) {
        let mut v = a[i];
        while segment_pos[v] != usize::MAX {
            v = a[segment_pos[v]];
        }
        child[i] = v;
    }
    Ok(child)
}

/// Positions picked independently with probability `q`.
pub fn sample_positions<R: Rng>(len: usize, q: f64, rng: &mut R) -> Vec<usize> {
    (0..len).filter(|_| rng.gen_bool(q)).collect()
}

/// Uniform partial reordering: alleles at the sampled positions are
/// shuffled among those positions.
pub fn mutate_permutation<R: Rng>(p: &[usize], q: f64, rng: &mut R) -> Vec<usize> {
    let positions = sample_positions(p.len(), q.clamp(0.0, 1.0), rng);
    let mut alleles: Vec<usize> = positions.iter().map(|&i| p[i]).collect();
    alleles.shuffle(rng);
    let mut out = p.to_vec();
    for (&i, v) in positions.iter().zip(alleles) {
        out[i] = v;
    }
    out
}

/// Two distinct cut points in `0..=len`, ordered.
fn random_cuts<R: Rng>(len: usize, rng: &mut R) -> (usize, usize) {
    let picks = rand::seq::index::sample(rng, len + 1, 2);
    let (x, y) = (picks.index(0), picks.index(1));
    (x.min(y), x.max(y))
}

pub fn random_genotype<R: Rng>(dim: usize, rng: &mut R) -> Genotype {
    let primes = first_primes(dim.max(1));
    let reduced = primes[1..]
        .iter()
        .map(|&p| {
            let mut perm: Vec<usize> = (1..p).collect();
            perm.shuffle(rng);
            perm
        })
        .collect();
    Genotype::from_parts_unchecked(reduced)
}

pub fn crossover<R: Rng>(a: &Genotype, b: &Genotype, rng: &mut R) -> Genotype {
    let reduced = a
        .reduced()
        .iter()
        .zip(b.reduced())
        .map(|(pa, pb)| {
            let (c1, c2) = random_cuts(pa.len(), rng);
            pmx(pa, pb, c1, c2).expect("genotype permutations are valid")
        })
        .collect();
    Genotype::from_parts_unchecked(reduced)
}

pub fn mutate<R: Rng>(g: &Genotype, q: f64, rng: &mut R) -> Genotype {
    let reduced = g
        .reduced()
        .iter()
        .map(|p| mutate_permutation(p, q, rng))
        .collect();
    Genotype::from_parts_unchecked(reduced)
}

/// One child by crossover (probability `p_c`) or mutation.
pub fn make_offspring<R: Rng>(parents: &[&Genotype], cfg: &GaConfig, rng: &mut R) -> Genotype {
    assert!(!parents.is_empty(), "empty parent population");
    if parents.len() >= 2 && rng.gen_bool(cfg.crossover_prob.clamp(0.0, 1.0)) {
        let pair = rand::seq::index::sample(rng, parents.len(), 2);
        crossover(parents[pair.index(0)], parents[pair.index(1)], rng)
    } else {
        let parent = parents[rng.gen_range(0..parents.len())];
        mutate(parent, cfg.match_prob, rng)
    }
}

/// Index of the winner of a size-`k` tournament (sampling with
/// replacement; lowest fitness wins; ties go to the earliest sample).
pub fn tournament_index<R: Rng>(pop: &[Individual], k: usize, rng: &mut R) -> Result<usize> {
    if pop.is_empty() {
        return Err(Error::InvalidConfig(
            "tournament over empty population".into(),
        ));
    }
    if pop.iter().any(|ind| ind.fitness.is_none()) {
        return Err(Error::InvalidConfig(
            "tournament over unevaluated individual".into(),
        ));
    }
    let mut winner = rng.gen_range(0..pop.len());
    for _ in 1..k.max(1) {
        let challenger = rng.gen_range(0..pop.len());
        if pop[challenger].value() < pop[winner].value() {
            winner = challenger;
        }
    }
    Ok(winner)
}

pub fn tournament_select<'a, R: Rng>(
    pop: &'a [Individual],
    k: usize,
    rng: &mut R,
) -> Result<&'a Individual> {
    tournament_index(pop, k, rng).map(|i| &pop[i])
}

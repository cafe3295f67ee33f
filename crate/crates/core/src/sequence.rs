//! Generalized (scrambled) Halton point sets.
//!
//! A point set is fully determined by its [`GeneratingVector`]: one digit
//! permutation per coordinate, coordinate `j` using the `j`-th prime as base.
//! Every permutation fixes `0`, so the optimizer works on a reduced
//! [`Genotype`] where that forced entry (and the forced base-2 permutation)
//! is dropped.

use crate::error::{Error, Result};

/// Largest supported dimension.
pub const MAX_DIMENSION: usize = 200;

/// Returns the first `d` primes in increasing order.
pub fn first_primes(d: usize) -> Vec<usize> {
    let mut primes = Vec::with_capacity(d);
    let mut candidate = 2usize;
    while primes.len() < d {
        if primes
            .iter()
            .take_while(|&&p| p * p <= candidate)
            .all(|&p| !candidate.is_multiple_of(p))
        {
            primes.push(candidate);
        }
        candidate += 1;
    }
    primes
}

/// A digit permutation of `{0, …, base-1}` with `0` as fixpoint.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    base: usize,
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let base = map.len();
        if base < 2 {
            return Err(Error::InvalidPermutation {
                base,
                reason: "base must be at least 2".into(),
            });
        }
        if map[0] != 0 {
            return Err(Error::InvalidPermutation {
                base,
                reason: format!("map[0] = {}, expected 0", map[0]),
            });
        }
        if !is_bijection(&map, 0, base) {
            return Err(Error::InvalidPermutation {
                base,
                reason: "not a bijection".into(),
            });
        }
        Ok(Self { base, map })
    }

    pub fn identity(base: usize) -> Self {
        assert!(base >= 2, "base must be at least 2");
        Self {
            base,
            map: (0..base).collect(),
        }
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    #[inline]
    pub fn apply(&self, digit: usize) -> usize {
        self.map[digit]
    }
}

/// True if `values` is a permutation of `lo..hi`.
pub(crate) fn is_bijection(values: &[usize], lo: usize, hi: usize) -> bool {
    if values.len() != hi - lo {
        return false;
    }
    let mut seen = vec![false; hi - lo];
    for &v in values {
        if v < lo || v >= hi || seen[v - lo] {
            return false;
        }
        seen[v - lo] = true;
    }
    true
}

/// Scrambled radical inverse of `i` in the permutation's base.
///
/// Digits are accumulated from the most significant output position inward
/// (Horner form), so the result is the correctly rounded value of the exact
/// rational for the bases and indices used here.
pub fn radical_inverse(i: u64, perm: &Permutation) -> f64 {
    let base = perm.base as u64;
    let mut digits = [0u8; 64];
    let mut len = 0;
    let mut rest = i;
    while rest > 0 {
        digits[len] = perm.apply((rest % base) as usize) as u8;
        rest /= base;
        len += 1;
    }
    // Exact integer numerator when base^len fits in 53 bits.
    let mut numerator: u64 = 0;
    let mut denominator: u64 = 1;
    let mut exact = true;
    for &digit in &digits[..len] {
        match denominator.checked_mul(base) {
            Some(den) if den <= 1 << 53 => {
                numerator = numerator * base + digit as u64;
                denominator = den;
            }
            _ => {
                exact = false;
                break;
            }
        }
    }
    if exact {
        return numerator as f64 / denominator as f64;
    }
    let inv = 1.0 / base as f64;
    digits[..len]
        .iter()
        .rev()
        .fold(0.0, |acc, &digit| (acc + digit as f64) * inv)
}

/// The tuple of per-coordinate permutations defining a generalized Halton set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GeneratingVector {
    perms: Vec<Permutation>,
}

impl GeneratingVector {
    pub fn new(perms: Vec<Permutation>) -> Result<Self> {
        let d = perms.len();
        if d == 0 || d > MAX_DIMENSION {
            return Err(Error::InvalidConfig(format!(
                "dimension must be in 1..={MAX_DIMENSION}, got {d}"
            )));
        }
        for (j, (perm, p)) in perms.iter().zip(first_primes(d)).enumerate() {
            if perm.base() != p {
                return Err(Error::InvalidPermutation {
                    base: perm.base(),
                    reason: format!("coordinate {j} must use base {p}"),
                });
            }
        }
        Ok(Self { perms })
    }

    /// The classic (unscrambled) Halton generating vector.
    pub fn identity(d: usize) -> Result<Self> {
        Self::new(
            first_primes(d)
                .into_iter()
                .map(Permutation::identity)
                .collect(),
        )
    }

    pub fn dimension(&self) -> usize {
        self.perms.len()
    }

    pub fn perms(&self) -> &[Permutation] {
        &self.perms
    }

    pub fn primes(&self) -> Vec<usize> {
        self.perms.iter().map(Permutation::base).collect()
    }
}

/// Coordinates of the `i`-th generalized Halton point (`i >= 1`).
pub fn halton_point(i: u64, gv: &GeneratingVector) -> Vec<f64> {
    gv.perms.iter().map(|p| radical_inverse(i, p)).collect()
}

/// The first `n` points, indices `1..=n`.
pub fn generate(n: usize, gv: &GeneratingVector) -> PointSet {
    let d = gv.dimension();
    let mut coords = Vec::with_capacity(n * d);
    for i in 1..=n as u64 {
        coords.extend(gv.perms.iter().map(|p| radical_inverse(i, p)));
    }
    PointSet { n, d, coords }
}

/// The optimizer's representation: permutations for bases `3, 5, 7, …`
/// with the fixed `0` removed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Genotype {
    reduced: Vec<Vec<usize>>,
}

impl Genotype {
    pub fn new(reduced: Vec<Vec<usize>>) -> Result<Self> {
        let d = reduced.len() + 1;
        if d > MAX_DIMENSION {
            return Err(Error::InvalidGenotype(format!(
                "dimension {d} exceeds {MAX_DIMENSION}"
            )));
        }
        let primes = first_primes(d);
        for (j, (perm, &p)) in reduced.iter().zip(&primes[1..]).enumerate() {
            if !is_bijection(perm, 1, p) {
                return Err(Error::InvalidGenotype(format!(
                    "entry {j} is not a permutation of 1..={}",
                    p - 1
                )));
            }
        }
        Ok(Self { reduced })
    }

    pub(crate) fn from_parts_unchecked(reduced: Vec<Vec<usize>>) -> Self {
        Self { reduced }
    }

    /// Genotype of the unscrambled Halton set in dimension `d`.
    pub fn identity(d: usize) -> Self {
        let primes = first_primes(d.max(1));
        Self {
            reduced: primes[1..].iter().map(|&p| (1..p).collect()).collect(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.reduced.len() + 1
    }

    pub fn reduced(&self) -> &[Vec<usize>] {
        &self.reduced
    }

    pub fn is_valid(&self) -> bool {
        let primes = first_primes(self.dimension());
        self.reduced
            .iter()
            .zip(&primes[1..])
            .all(|(perm, &p)| is_bijection(perm, 1, p))
    }

    pub fn to_vector(&self) -> GeneratingVector {
        let mut perms = Vec::with_capacity(self.dimension());
        perms.push(Permutation::identity(2));
        for r in &self.reduced {
            let mut map = Vec::with_capacity(r.len() + 1);
            map.push(0);
            map.extend_from_slice(r);
            perms.push(Permutation {
                base: map.len(),
                map,
            });
        }
        GeneratingVector { perms }
    }

    pub fn from_vector(gv: &GeneratingVector) -> Self {
        Self {
            reduced: gv.perms[1..].iter().map(|p| p.map[1..].to_vec()).collect(),
        }
    }

    /// Stable 64-bit fingerprint used to derive evaluation seeds.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for perm in &self.reduced {
            for &v in perm {
                h ^= v as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
            h ^= 0xff;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        h
    }
}

impl From<&Genotype> for GeneratingVector {
    fn from(g: &Genotype) -> Self {
        g.to_vector()
    }
}

/// `n` points in `[0,1)^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    n: usize,
    d: usize,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new(d: usize, coords: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidConfig("dimension must be at least 1".into()));
        }
        if !coords.len().is_multiple_of(d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: coords.len() % d,
            });
        }
        if let Some(bad) = coords.iter().find(|c| !(0.0..1.0).contains(*c)) {
            return Err(Error::InvalidConfig(format!(
                "coordinate {bad} outside [0, 1)"
            )));
        }
        Ok(Self {
            n: coords.len() / d,
            d,
            coords,
        })
    }

    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let d = points.first().map_or(0, Vec::len);
        for p in points {
            if p.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: p.len(),
                });
            }
        }
        Self::new(d, points.concat())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.d)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Copy with two coordinate axes exchanged.
    pub fn swap_axes(&self, a: usize, b: usize) -> Self {
        let mut out = self.clone();
        for row in out.coords.chunks_exact_mut(self.d) {
            row.swap(a, b);
        }
        out
    }
}

//! Local and exact star discrepancy.
//!
//! The star discrepancy of `X` is attained on the grid spanned by the point
//! coordinates (each axis augmented with `1`), where it equals the larger of
//! `V_y - A(y)/n` (open box) and `Ā(y)/n - V_y` (closed box). The exact
//! evaluator enumerates that grid depth-first, axis by axis, filtering the
//! point list at each level so the innermost axis becomes a linear sweep.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequence::PointSet;

/// Default cap on the number of grid cells the exact evaluator may visit.
pub const DEFAULT_BUDGET: u64 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Exact,
    LowerBound,
}

impl BoundKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundKind::Exact => "exact",
            BoundKind::LowerBound => "lower_bound",
        }
    }
}

impl std::fmt::Display for BoundKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalMeta {
    /// Grid cells visited (exact) or local values computed (heuristic).
    pub evaluations: u64,
    pub runs: u32,
    pub seed: Option<u64>,
}

/// A discrepancy value together with how it was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyBound {
    pub value: f64,
    pub kind: BoundKind,
    pub meta: EvalMeta,
}

impl DiscrepancyBound {
    pub fn is_exact(&self) -> bool {
        self.kind == BoundKind::Exact
    }
}

/// Per-axis sorted coordinate values, each ending in `1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    axes: Vec<Vec<f64>>,
}

impl Grid {
    pub fn new(x: &PointSet) -> Self {
        let axes = (0..x.dimension())
            .map(|j| {
                let mut axis: Vec<f64> = x.points().map(|p| p[j]).collect();
                axis.push(1.0);
                axis.sort_by(f64::total_cmp);
                axis.dedup();
                axis
            })
            .collect();
        Self { axes }
    }

    pub fn dimension(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn axis(&self, j: usize) -> &[f64] {
        &self.axes[j]
    }

    /// Number of grid points, `Π |axis_j|`.
    pub fn cell_count(&self) -> u128 {
        self.axes
            .iter()
            .try_fold(1u128, |acc, a| acc.checked_mul(a.len() as u128))
            .unwrap_or(u128::MAX)
    }

    pub fn resolve(&self, point: &GridPoint) -> Vec<f64> {
        point
            .indices
            .iter()
            .zip(&self.axes)
            .map(|(&k, axis)| axis[k])
            .collect()
    }
}

/// A grid point addressed by one index per axis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GridPoint {
    pub indices: Vec<usize>,
}

fn check_dim(y: &[f64], x: &PointSet) -> Result<()> {
    if y.len() != x.dimension() {
        return Err(Error::DimensionMismatch {
            expected: x.dimension(),
            actual: y.len(),
        });
    }
    Ok(())
}

#[inline]
fn counts_unchecked(y: &[f64], x: &PointSet) -> (usize, usize) {
    let mut open = 0;
    let mut closed = 0;
    for p in x.points() {
        let mut inside_open = true;
        let mut inside_closed = true;
        for (&c, &b) in p.iter().zip(y) {
            if c >= b {
                inside_open = false;
                if c > b {
                    inside_closed = false;
                    break;
                }
            }
        }
        open += inside_open as usize;
        closed += inside_closed as usize;
    }
    (open, closed)
}

#[inline]
fn volume(y: &[f64]) -> f64 {
    y.iter().fold(1.0, |acc, &c| acc * c)
}

/// Points strictly inside `[0, y)` and inside the closed box `[0, y]`.
pub fn box_counts(y: &[f64], x: &PointSet) -> Result<(usize, usize)> {
    check_dim(y, x)?;
    Ok(counts_unchecked(y, x))
}

/// `|V_y - A(y, X)/n|`.
pub fn local_discrepancy(y: &[f64], x: &PointSet) -> Result<f64> {
    check_dim(y, x)?;
    let (open, _) = counts_unchecked(y, x);
    Ok((volume(y) - open as f64 / x.len() as f64).abs())
}

/// `max(V_y - A/n, Ā/n - V_y)` at a grid point given by its coordinates.
///
/// Not clamped at zero; only the maximum over the grid is meaningful.
pub fn grid_local_value(y: &[f64], x: &PointSet) -> f64 {
    debug_assert_eq!(y.len(), x.dimension());
    let (open, closed) = counts_unchecked(y, x);
    let n = x.len() as f64;
    let v = volume(y);
    (v - open as f64 / n).max(closed as f64 / n - v)
}

/// Exact star discrepancy by enumerating the grid spanned by `x`.
///
/// Refuses with [`Error::BudgetExceeded`] when the grid has more than
/// `budget` cells. `meta.evaluations` counts the cells actually scored;
/// subtrees whose optimistic bound cannot beat the running maximum are
/// skipped, so this is usually far below the grid size.
pub fn exact_star_discrepancy(x: &PointSet, budget: u64) -> Result<DiscrepancyBound> {
    let grid = Grid::new(x);
    let estimated = grid.cell_count();
    if estimated > budget as u128 {
        return Err(Error::BudgetExceeded { estimated, budget });
    }
    if x.is_empty() {
        return Ok(DiscrepancyBound {
            value: 1.0,
            kind: BoundKind::Exact,
            meta: EvalMeta::default(),
        });
    }
    let mut e = Enumerator::new(x, &grid);
    e.descend(0, 1.0);
    Ok(DiscrepancyBound {
        value: e.best,
        kind: BoundKind::Exact,
        meta: EvalMeta {
            evaluations: e.cells,
            runs: 1,
            seed: None,
        },
    })
}

/// Depth-first enumeration over candidate coordinates.
///
/// At depth `j` only the `j`-th coordinates of points still inside the
/// closed prefix box (plus `1`) are visited. Raising a coordinate to the
/// next such value keeps the open count and grows the volume; lowering it
/// to the previous one keeps the closed count and shrinks the volume; so
/// both maxima are attained on this subset of the grid. Float products and
/// differences are monotone in each operand, so the result is bit-identical
/// to scoring the full grid.
struct Enumerator<'a> {
    d: usize,
    n: f64,
    axes: &'a [Vec<f64>],
    /// Row-major coordinates, rows sorted by the last coordinate.
    coords: Vec<f64>,
    /// Point indices inside the open / closed prefix box, one list per depth.
    open: Vec<Vec<u32>>,
    closed: Vec<Vec<u32>>,
    values: Vec<Vec<f64>>,
    best: f64,
    cells: u64,
}

impl<'a> Enumerator<'a> {
    fn new(x: &PointSet, grid: &'a Grid) -> Self {
        let d = x.dimension();
        let mut rows: Vec<&[f64]> = x.points().collect();
        rows.sort_by(|a, b| a[d - 1].total_cmp(&b[d - 1]));
        let coords = rows.concat();
        let all: Vec<u32> = (0..x.len() as u32).collect();
        let mut open = vec![Vec::with_capacity(x.len()); d];
        let mut closed = vec![Vec::with_capacity(x.len()); d];
        open[0].clone_from(&all);
        closed[0] = all;
        Self {
            d,
            n: x.len() as f64,
            axes: grid.axes(),
            coords,
            open,
            closed,
            values: vec![Vec::with_capacity(x.len() + 1); d],
            best: f64::NEG_INFINITY,
            cells: 0,
        }
    }

    fn descend(&mut self, depth: usize, vol: f64) {
        if depth + 1 == self.d {
            self.sweep(depth, vol);
            return;
        }
        let d = self.d;
        let mut values = std::mem::take(&mut self.values[depth]);
        values.clear();
        values.extend(
            self.closed[depth]
                .iter()
                .map(|&i| self.coords[i as usize * d + depth]),
        );
        values.push(1.0);
        // Large boxes first: they tend to hold the maximum, which tightens
        // the pruning bound early.
        values.sort_unstable_by(|a, b| b.total_cmp(a));
        values.dedup();
        for &v in &values {
            let child_vol = vol * v;
            {
                let coords = &self.coords;
                let (head, tail) = self.open.split_at_mut(depth + 1);
                let child = &mut tail[0];
                child.clear();
                child.extend(
                    head[depth]
                        .iter()
                        .copied()
                        .filter(|&i| coords[i as usize * d + depth] < v),
                );
                let (head, tail) = self.closed.split_at_mut(depth + 1);
                let child = &mut tail[0];
                child.clear();
                child.extend(
                    head[depth]
                        .iter()
                        .copied()
                        .filter(|&i| coords[i as usize * d + depth] <= v),
                );
            }
            // V_y over the subtree is at most child_vol and at least the
            // product with every remaining axis at its smallest value; both
            // are computed in the same multiplication order as the leaves.
            let lower_vol = self.axes[depth + 1..]
                .iter()
                .fold(child_vol, |acc, axis| acc * axis[0]);
            let open_bound = child_vol;
            let closed_bound = self.closed[depth + 1].len() as f64 / self.n - lower_vol;
            if open_bound.max(closed_bound) <= self.best {
                continue;
            }
            self.descend(depth + 1, child_vol);
        }
        self.values[depth] = values;
    }

    fn sweep(&mut self, depth: usize, vol: f64) {
        let d = self.d;
        let last = d - 1;
        let open = &self.open[depth];
        let closed = &self.closed[depth];
        let coords = &self.coords;
        let at = |i: u32| coords[i as usize * d + last];
        let mut a = 0usize;
        let mut c = 0usize;
        let mut best = self.best;
        let mut visited = 0u64;
        // Candidates: distinct last coordinates of the closed list, then 1.
        loop {
            let v = if c < closed.len() { at(closed[c]) } else { 1.0 };
            while a < open.len() && at(open[a]) < v {
                a += 1;
            }
            while c < closed.len() && at(closed[c]) <= v {
                c += 1;
            }
            let vy = vol * v;
            let value = (vy - a as f64 / self.n).max(c as f64 / self.n - vy);
            if value > best {
                best = value;
            }
            visited += 1;
            if v == 1.0 {
                break;
            }
        }
        self.cells += visited;
        self.best = best;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::{generate, GeneratingVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_set(rng: &mut ChaCha8Rng, n: usize, d: usize) -> PointSet {
        PointSet::new(d, (0..n * d).map(|_| rng.gen::<f64>()).collect()).unwrap()
    }

    /// Every grid point, both terms, no filtering or pruning.
    fn literal_enumeration(x: &PointSet) -> f64 {
        let grid = Grid::new(x);
        let d = x.dimension();
        let mut idx = vec![0usize; d];
        let mut best = f64::NEG_INFINITY;
        loop {
            let y: Vec<f64> = (0..d).map(|j| grid.axis(j)[idx[j]]).collect();
            let mut open = 0;
            let mut closed = 0;
            for p in x.points() {
                if p.iter().zip(&y).all(|(c, b)| c < b) {
                    open += 1;
                }
                if p.iter().zip(&y).all(|(c, b)| c <= b) {
                    closed += 1;
                }
            }
            let v: f64 = y.iter().product();
            let n = x.len() as f64;
            best = best.max(v - open as f64 / n).max(closed as f64 / n - v);
            let mut j = 0;
            loop {
                if j == d {
                    return best;
                }
                idx[j] += 1;
                if idx[j] < grid.axis(j).len() {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
        }
    }

    #[test]
    fn single_point() {
        let x = PointSet::new(1, vec![0.5]).unwrap();
        assert_eq!(grid_local_value(&[0.5], &x), 0.5);
        assert_eq!(grid_local_value(&[1.0], &x), 0.0);
        let b = exact_star_discrepancy(&x, DEFAULT_BUDGET).unwrap();
        assert_eq!(b.value, 0.5);
        assert_eq!(b.kind, BoundKind::Exact);
    }

    #[test]
    fn grid_axes_end_in_one_and_are_strictly_increasing() {
        let x = PointSet::new(2, vec![0.5, 0.2, 0.5, 0.7, 0.1, 0.2]).unwrap();
        let grid = Grid::new(&x);
        assert_eq!(grid.axis(0), &[0.1, 0.5, 1.0]);
        assert_eq!(grid.axis(1), &[0.2, 0.7, 1.0]);
        assert_eq!(grid.cell_count(), 9);
        let y = grid.resolve(&GridPoint {
            indices: vec![1, 2],
        });
        assert_eq!(y, vec![0.5, 1.0]);
    }

    #[test]
    fn counts_at_unit_corner() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_set(&mut rng, 17, 3);
        assert_eq!(box_counts(&[1.0; 3], &x).unwrap(), (17, 17));
        assert_eq!(local_discrepancy(&[1.0; 3], &x).unwrap(), 0.0);
        assert!(box_counts(&[1.0; 2], &x).is_err());
        assert!(local_discrepancy(&[1.0; 4], &x).is_err());
    }

    #[test]
    fn counts_match_naive_membership() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let d = rng.gen_range(1..=4);
            let n = rng.gen_range(1..=30);
            let x = random_set(&mut rng, n, d);
            // Mix grid coordinates in so the closed/open distinction matters.
            let y: Vec<f64> = (0..d)
                .map(|j| {
                    if rng.gen_bool(0.5) {
                        x.point(rng.gen_range(0..n))[j]
                    } else {
                        rng.gen::<f64>()
                    }
                })
                .collect();
            let mut open = 0;
            let mut closed = 0;
            for i in 0..n {
                let p = x.point(i);
                let mut o = true;
                let mut c = true;
                for j in 0..d {
                    o &= p[j] < y[j];
                    c &= p[j] <= y[j];
                }
                open += o as usize;
                closed += c as usize;
            }
            let (a, ac) = box_counts(&y, &x).unwrap();
            assert_eq!((a, ac), (open, closed));
            assert!(a <= ac && ac <= n);
        }
    }

    #[test]
    fn twelve_point_configuration() {
        // Twelve points, three of which lie in [0, 2/3) x [0, 1/2).
        let pts = vec![
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
        ];
        let x = PointSet::from_points(&pts).unwrap();
        let y = [2.0 / 3.0, 0.5];
        assert_eq!(box_counts(&y, &x).unwrap().0, 3);
        let v = local_discrepancy(&y, &x).unwrap();
        assert!((v - 1.0 / 12.0).abs() < 1e-15, "{v}");
    }

    #[test]
    fn centered_grid_in_one_dimension() {
        for n in 1..=64usize {
            let coords = (1..=n)
                .map(|i| (2 * i - 1) as f64 / (2 * n) as f64)
                .collect();
            let x = PointSet::new(1, coords).unwrap();
            let v = exact_star_discrepancy(&x, DEFAULT_BUDGET).unwrap().value;
            assert!((v - 1.0 / (2 * n) as f64).abs() < 1e-12, "n={n}: {v}");
            assert_eq!(v, literal_enumeration(&x));
        }
    }

    #[test]
    fn matches_literal_enumeration_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let d = rng.gen_range(1..=3);
            let n = rng.gen_range(1..=12);
            let x = random_set(&mut rng, n, d);
            let exact = exact_star_discrepancy(&x, DEFAULT_BUDGET).unwrap().value;
            assert_eq!(exact.to_bits(), literal_enumeration(&x).to_bits());
        }
        // Sets with repeated coordinates exercise the deduplicated axes.
        for _ in 0..100 {
            let d = rng.gen_range(1..=3);
            let n = rng.gen_range(1..=12);
            let coords = (0..n * d)
                .map(|_| rng.gen_range(0..4) as f64 / 4.0)
                .collect();
            let x = PointSet::new(d, coords).unwrap();
            let exact = exact_star_discrepancy(&x, DEFAULT_BUDGET).unwrap().value;
            assert_eq!(exact.to_bits(), literal_enumeration(&x).to_bits());
        }
    }

    #[test]
    fn halton_sets_match_literal_enumeration() {
        for d in 1..=4 {
            let gv = GeneratingVector::identity(d).unwrap();
            for n in [1, 2, 5, 10, 20] {
                let x = generate(n, &gv);
                let exact = exact_star_discrepancy(&x, DEFAULT_BUDGET).unwrap().value;
                assert_eq!(exact, literal_enumeration(&x), "d={d} n={n}");
            }
        }
    }

    #[test]
    fn dominates_random_local_discrepancies() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let d = rng.gen_range(1..=4);
            let n = rng.gen_range(1..=40);
            let x = random_set(&mut rng, n, d);
            let exact = exact_star_discrepancy(&x, DEFAULT_BUDGET).unwrap().value;
            assert!(exact > 0.0 && exact <= 1.0);
            for _ in 0..10_000 {
                let y: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
                assert!(local_discrepancy(&y, &x).unwrap() <= exact);
            }
        }
    }

    #[test]
    fn invariant_under_point_order_and_axis_swap() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let n = rng.gen_range(2..=30);
            let x = random_set(&mut rng, n, 3);
            let base = exact_star_discrepancy(&x, DEFAULT_BUDGET).unwrap().value;
            let mut rows: Vec<Vec<f64>> = x.points().map(<[f64]>::to_vec).collect();
            rows.reverse();
            let reordered = PointSet::from_points(&rows).unwrap();
            assert_eq!(
                exact_star_discrepancy(&reordered, DEFAULT_BUDGET)
                    .unwrap()
                    .value,
                base
            );
            let swapped = x.swap_axes(0, 2);
            let v = exact_star_discrepancy(&swapped, DEFAULT_BUDGET)
                .unwrap()
                .value;
            // Volumes multiply in a different order after a swap.
            assert!((v - base).abs() < 1e-15);
        }
    }

    #[test]
    fn budget_refusal_carries_estimate() {
        let x = generate(125, &GeneratingVector::identity(10).unwrap());
        match exact_star_discrepancy(&x, DEFAULT_BUDGET) {
            Err(Error::BudgetExceeded { estimated, budget }) => {
                assert_eq!(estimated, 126u128.pow(10));
                assert_eq!(budget, DEFAULT_BUDGET);
            }
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn grid_local_value_is_neighbourhood_supremum() {
        // Below y (inside its cell) the open count is constant, so the open
        // term approaches its value at y from below; just above y the open
        // count equals the closed count at y. Sampling both sides recovers
        // the grid value as a supremum.
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = random_set(&mut rng, 6, 2);
        let grid = Grid::new(&x);
        let n = x.len() as f64;
        let samples = 100_000 / (grid.axis(0).len() * grid.axis(1).len());
        for i in 0..grid.axis(0).len() {
            for k in 0..grid.axis(1).len() {
                let idx = [i, k];
                let y = grid.resolve(&GridPoint {
                    indices: idx.to_vec(),
                });
                let value = grid_local_value(&y, &x);
                let mut sup = f64::NEG_INFINITY;
                for _ in 0..samples {
                    let mut below = [0.0; 2];
                    let mut above = [0.0; 2];
                    for j in 0..2 {
                        let axis = grid.axis(j);
                        let prev = if idx[j] == 0 { 0.0 } else { axis[idx[j] - 1] };
                        let next = axis.get(idx[j] + 1).copied().unwrap_or(y[j]);
                        let u: f64 = rng.gen::<f64>().powi(6);
                        below[j] = y[j] - (y[j] - prev) * u;
                        above[j] = y[j] + (next - y[j]) * u;
                    }
                    let (open_below, _) = box_counts(&below, &x).unwrap();
                    let open_term = volume(&below) - open_below as f64 / n;
                    let (open_above, _) = box_counts(&above, &x).unwrap();
                    let closed_term = open_above as f64 / n - volume(&above);
                    assert!(open_term <= value + 1e-12);
                    if above.iter().zip(&y).all(|(a, b)| a > b || *b == 1.0) {
                        assert!(closed_term <= value + 1e-12);
                    }
                    sup = sup.max(open_term).max(closed_term);
                }
                assert!((sup - value).abs() < 1e-3, "y={y:?}: sup {sup} vs {value}");
            }
        }
    }
}

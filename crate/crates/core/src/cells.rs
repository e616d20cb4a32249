//! Sets of ε-cells of `[0,1]`.

use serde::{Deserialize, Serialize};

use crate::interval::{Interval, IntervalUnion};

/// Number of cells of width `eps` covering `[0,1]`.
pub fn cell_count(eps: f64) -> usize {
    (1.0 / eps - 1e-9).ceil().max(1.0) as usize
}

/// Index of the cell holding `x`; cell `k` is `[kε, (k+1)ε)`, the last one closed.
#[inline]
pub fn cell_of(x: f64, eps: f64, n: usize) -> usize {
    let k = (x / eps).floor();
    if k <= 0.0 {
        0
    } else {
        (k as usize).min(n - 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSet {
    eps: f64,
    n: usize,
    words: Vec<u64>,
}

impl CellSet {
    pub fn new(eps: f64) -> Self {
        let n = cell_count(eps);
        CellSet { eps, n, words: vec![0; n.div_ceil(64)] }
    }

    pub fn full(eps: f64) -> Self {
        let mut s = CellSet::new(eps);
        for k in 0..s.n {
            s.insert_cell(k);
        }
        s
    }

    pub fn from_points(eps: f64, points: impl IntoIterator<Item = f64>) -> Self {
        let mut s = CellSet::new(eps);
        for x in points {
            s.insert_point(x);
        }
        s
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Number of cells in the grid.
    pub fn grid_size(&self) -> usize {
        self.n
    }

    pub fn cell_interval(&self, k: usize) -> Interval {
        Interval::new(k as f64 * self.eps, ((k + 1) as f64 * self.eps).min(1.0))
    }

    #[inline]
    pub fn insert_point(&mut self, x: f64) {
        let k = cell_of(x, self.eps, self.n);
        self.insert_cell(k);
    }

    #[inline]
    pub fn insert_cell(&mut self, k: usize) {
        self.words[k / 64] |= 1u64 << (k % 64);
    }

    pub fn remove_cell(&mut self, k: usize) {
        self.words[k / 64] &= !(1u64 << (k % 64));
    }

    #[inline]
    pub fn contains_cell(&self, k: usize) -> bool {
        k < self.n && self.words[k / 64] & (1u64 << (k % 64)) != 0
    }

    pub fn contains_point(&self, x: f64) -> bool {
        self.contains_cell(cell_of(x, self.eps, self.n))
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * 64 + b)
            })
        })
    }

    fn same_grid(&self, other: &CellSet) {
        assert_eq!(self.n, other.n, "cell sets on different grids");
    }

    pub fn union(&self, other: &CellSet) -> CellSet {
        self.same_grid(other);
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect();
        CellSet { eps: self.eps, n: self.n, words }
    }

    pub fn intersection(&self, other: &CellSet) -> CellSet {
        self.same_grid(other);
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect();
        CellSet { eps: self.eps, n: self.n, words }
    }

    pub fn intersection_len(&self, other: &CellSet) -> usize {
        self.same_grid(other);
        self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    pub fn is_subset(&self, other: &CellSet) -> bool {
        self.same_grid(other);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// Cells within `r` cells of the set.
    pub fn dilate(&self, r: usize) -> CellSet {
        let mut out = CellSet::new(self.eps);
        for k in self.iter() {
            for j in k.saturating_sub(r)..=(k + r).min(self.n - 1) {
                out.insert_cell(j);
            }
        }
        out
    }

    /// The same set on a grid `factor` times coarser.
    pub fn coarsen(&self, factor: usize) -> CellSet {
        let mut out = CellSet::new(self.eps * factor as f64);
        for k in self.iter() {
            out.insert_cell((k / factor).min(out.n - 1));
        }
        out
    }

    /// Maximal runs of consecutive cells, as inclusive index ranges.
    pub fn runs(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for k in self.iter() {
            match out.last_mut() {
                Some(last) if last.1 + 1 == k => last.1 = k,
                _ => out.push((k, k)),
            }
        }
        out
    }

    pub fn to_intervals(&self) -> IntervalUnion {
        IntervalUnion::from_intervals(
            self.runs()
                .into_iter()
                .map(|(a, b)| Interval::new(a as f64 * self.eps, ((b + 1) as f64 * self.eps).min(1.0)))
                .collect(),
        )
    }

    /// Cells with no other member within `r` cells.
    pub fn isolated_cells(&self, r: usize) -> usize {
        let cells: Vec<usize> = self.iter().collect();
        cells
            .iter()
            .enumerate()
            .filter(|&(i, &k)| {
                let left = i > 0 && k - cells[i - 1] <= r;
                let right = i + 1 < cells.len() && cells[i + 1] - k <= r;
                !left && !right
            })
            .count()
    }

    /// Hausdorff distance measured in cells; `usize::MAX` if exactly one side is empty.
    pub fn hausdorff_cells(&self, other: &CellSet) -> usize {
        self.same_grid(other);
        match (self.is_empty(), other.is_empty()) {
            (true, true) => return 0,
            (true, false) | (false, true) => return usize::MAX,
            _ => {}
        }
        let a: Vec<usize> = self.iter().collect();
        let b: Vec<usize> = other.iter().collect();
        directed(&a, &b).max(directed(&b, &a))
    }
}

fn directed(from: &[usize], to: &[usize]) -> usize {
    from.iter()
        .map(|&k| {
            let i = to.partition_point(|&t| t < k);
            let right = to.get(i).map(|&t| t - k).unwrap_or(usize::MAX);
            let left = if i > 0 { k - to[i - 1] } else { usize::MAX };
            left.min(right)
        })
        .max()
        .unwrap_or(0)
}

/// Least-squares slope of `log N(ε)` against `log(1/ε)`.
pub fn box_count_slope(counts: &[(f64, usize)]) -> f64 {
    let pts: Vec<(f64, f64)> = counts
        .iter()
        .filter(|(_, n)| *n > 0)
        .map(|&(eps, n)| ((1.0 / eps).ln(), (n as f64).ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn runs_and_intervals() {
        let mut s = CellSet::new(0.125);
        for k in [0, 1, 2, 5, 7] {
            s.insert_cell(k);
        }
        assert_eq!(s.runs(), vec![(0, 2), (5, 5), (7, 7)]);
        assert_eq!(s.to_intervals().len(), 3);
        assert_eq!(s.isolated_cells(1), 2);
        assert_eq!(s.len(), 5);
        assert!(s.contains_point(1.0));
    }

    #[test]
    fn box_slope_of_full_grid_is_one() {
        let counts: Vec<(f64, usize)> = (4..10).map(|k| (0.5f64.powi(k), 1usize << k)).collect();
        assert!((box_count_slope(&counts) - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn hausdorff_is_symmetric_and_zero_on_self(cells in proptest::collection::vec(0usize..256, 1..40),
                                                  other in proptest::collection::vec(0usize..256, 1..40)) {
            let mut a = CellSet::new(1.0 / 256.0);
            let mut b = CellSet::new(1.0 / 256.0);
            cells.iter().for_each(|&k| a.insert_cell(k));
            other.iter().for_each(|&k| b.insert_cell(k));
            prop_assert_eq!(a.hausdorff_cells(&a), 0);
            prop_assert_eq!(a.hausdorff_cells(&b), b.hausdorff_cells(&a));
            prop_assert!(a.coarsen(2).len() <= a.len());
            prop_assert!(a.is_subset(&a.union(&b)));
        }
    }
}

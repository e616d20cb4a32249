//! Strong transitivity: finitely many forward images of any open subinterval
//! cover the invariant set.

use serde::{Deserialize, Serialize};

use super::{branch_image, split_by_branches};
use crate::interval::{Interval, IntervalUnion};
use crate::map::PiecewiseMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub probe: Interval,
    /// Smallest `N` with `⋃_{n<N} f^n(probe)` covering `J` up to `ε`.
    pub cover_time: Option<usize>,
    pub uncovered: IntervalUnion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitivityReport {
    pub passed: bool,
    pub probes: Vec<ProbeResult>,
}

/// Outward image of a union, split at the critical points and merged.
pub fn union_image(map: &PiecewiseMap, set: &IntervalUnion) -> IntervalUnion {
    let mut parts = Vec::new();
    for p in set.parts() {
        for (a, piece) in split_by_branches(map, *p) {
            parts.push(branch_image(map, a, piece));
        }
    }
    IntervalUnion::from_intervals(parts)
}

pub fn cover_time(map: &PiecewiseMap, j: &IntervalUnion, probe: Interval, max_n: usize, eps: f64) -> ProbeResult {
    let mut current = IntervalUnion::from_intervals(vec![probe]);
    let mut cover = current.clone();
    for n in 1..=max_n {
        if cover.uncovered_length(j) <= eps {
            return ProbeResult { probe, cover_time: Some(n), uncovered: cover.uncovered(j) };
        }
        current = union_image(map, &current);
        cover = cover.union(&current);
    }
    ProbeResult { probe, cover_time: None, uncovered: cover.uncovered(j) }
}

pub fn strong_transitivity_check(map: &PiecewiseMap, j: &IntervalUnion, probes: &[Interval], max_n: usize, eps: f64) -> TransitivityReport {
    let probes: Vec<ProbeResult> = probes.iter().map(|&p| cover_time(map, j, p, max_n, eps)).collect();
    TransitivityReport { passed: probes.iter().all(|p| p.cover_time.is_some()), probes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn logistic_probe_covers() {
        let j = IntervalUnion::from_intervals(vec![Interval::unit()]);
        let r = cover_time(&catalog::logistic(4.0), &j, Interval::new(0.4, 0.41), 30, 2f64.powi(-10));
        assert!(r.cover_time.is_some());
    }

    #[test]
    fn periodic_hull_is_not_a_cycle() {
        let map = catalog::logistic(3.2);
        let disc = (0.2f64 * 4.2).sqrt();
        let (p, q) = ((4.2 - disc) / 6.4, (4.2 + disc) / 6.4);
        let eps = 1e-3;
        let j = IntervalUnion::from_intervals(vec![Interval::new(p - eps, p + eps), Interval::new(q - eps, q + eps)]);
        let r = strong_transitivity_check(&map, &j, &[Interval::new(p - 1e-4, p + 1e-4)], 60, eps / 10.0);
        assert!(!r.passed);
    }
}

//! Lap numbers `ℓ(n)` of `f^n` and the entropy estimate `lim log ℓ(n) / n`.
//!
//! Laps are propagated as their images: two laps of `f^n` with the same image
//! have the same number of descendants, so laps are counted with
//! multiplicities keyed by image. This keeps the state small even when
//! `ℓ(n)` itself is astronomically large.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::map::PiecewiseMap;

/// Image endpoints are merged on a grid of this many points per unit.
const KEY_SCALE: f64 = (1u64 << 44) as f64;
const INSIDE: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LapCount {
    /// `laps[n − 1] = ℓ(n)` for `n = 1..=max_n`.
    pub laps: Vec<u128>,
    pub max_n: usize,
}

impl LapCount {
    pub fn get(&self, n: usize) -> u128 {
        if n == 0 {
            1
        } else {
            self.laps[n - 1]
        }
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.laps.windows(2).all(|w| w[0] <= w[1])
    }

    /// First pair `(n, m)` with `ℓ(n+m) > ℓ(n)·ℓ(m)`, if any.
    pub fn submultiplicativity_violation(&self) -> Option<(usize, usize)> {
        for n in 1..=self.max_n {
            for m in 1..=self.max_n - n {
                if self.get(n + m) > self.get(n).saturating_mul(self.get(m)) {
                    return Some((n, m));
                }
            }
        }
        None
    }

    /// Least-squares slope of `ln ℓ(n)` against `n` over the last third.
    pub fn slope(&self) -> f64 {
        let start = self.max_n - self.max_n / 3 + 1;
        let pts: Vec<(f64, f64)> = (start..=self.max_n).map(|n| (n as f64, (self.get(n) as f64).ln())).collect();
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        if sxx == 0.0 {
            0.0
        } else {
            sxy / sxx
        }
    }
}

/// Critical points where `f` stops being monotone: a change of orientation,
/// or a jump against the common orientation.
fn lap_breaks(map: &PiecewiseMap) -> Vec<f64> {
    map.critical()
        .iter()
        .enumerate()
        .filter(|&(i, _)| {
            let (l, r) = (map.branch(i), map.branch(i + 1));
            if l.increasing != r.increasing {
                return true;
            }
            let (a, b) = (l.right_limit(), r.left_limit());
            if l.increasing {
                a > b
            } else {
                a < b
            }
        })
        .map(|(_, &c)| c)
        .collect()
}

/// Image of `[u, v]` under `f`, evaluating each branch on its closed part.
fn part_image(map: &PiecewiseMap, u: f64, v: f64) -> Interval {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for b in map.branches() {
        let (a, z) = (u.max(b.domain.lo), v.min(b.domain.hi));
        if a < z || (a == z && u == v) {
            for y in [b.eval(a), b.eval(z)] {
                lo = lo.min(y);
                hi = hi.max(y);
            }
        }
    }
    Interval::new(lo.clamp(0.0, 1.0), hi.clamp(0.0, 1.0))
}

fn key(iv: &Interval) -> (i64, i64) {
    ((iv.lo * KEY_SCALE).round() as i64, (iv.hi * KEY_SCALE).round() as i64)
}

/// `ℓ(n)` for the restriction of `f^n` to `start`.
pub fn lap_counts_on(map: &PiecewiseMap, start: Interval, max_n: usize) -> LapCount {
    let breaks = lap_breaks(map);
    let mut state: BTreeMap<(i64, i64), (Interval, u128)> = BTreeMap::new();
    state.insert(key(&start), (start, 1));
    let mut laps = Vec::with_capacity(max_n);
    for _ in 0..max_n {
        let mut next: BTreeMap<(i64, i64), (Interval, u128)> = BTreeMap::new();
        for (iv, mult) in state.values() {
            let mut cuts = vec![iv.lo];
            cuts.extend(breaks.iter().copied().filter(|&c| c > iv.lo + INSIDE && c < iv.hi - INSIDE));
            cuts.push(iv.hi);
            for w in cuts.windows(2) {
                let img = part_image(map, w[0], w[1]);
                let entry = next.entry(key(&img)).or_insert((img, 0));
                entry.1 = entry.1.saturating_add(*mult);
            }
        }
        laps.push(next.values().fold(0u128, |acc, e| acc.saturating_add(e.1)));
        state = next;
    }
    LapCount { laps, max_n }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub h: f64,
    pub laps: LapCount,
}

pub fn lap_entropy(map: &PiecewiseMap, max_n: usize) -> Result<EntropyEstimate> {
    lap_entropy_on(map, Interval::unit(), max_n)
}

/// Entropy of `f` restricted to an invariant interval `j`.
pub fn lap_entropy_on(map: &PiecewiseMap, j: Interval, max_n: usize) -> Result<EntropyEstimate> {
    if max_n < 8 {
        return Err(Error::Precondition("lap entropy needs at least 8 iterates".into()));
    }
    let laps = lap_counts_on(map, j, max_n);
    Ok(EntropyEstimate { h: laps.slope(), laps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn full_maps_double_their_laps() {
        for map in [catalog::tent(2.0), catalog::logistic(4.0)] {
            let l = lap_counts_on(&map, Interval::unit(), 20);
            for n in 1..=20 {
                assert_eq!(l.get(n), 1u128 << n, "{} n = {n}", map.name);
            }
        }
        let l = lap_counts_on(&catalog::chebyshev3(), Interval::unit(), 10);
        assert_eq!(l.get(10), 3u128.pow(10));
    }

    #[test]
    fn contraction_has_one_lap() {
        let l = lap_counts_on(&catalog::contraction(), Interval::unit(), 10);
        assert!(l.laps.iter().all(|&x| x == 1));
    }

    #[test]
    fn attracting_cycle_has_polynomial_laps() {
        let e = lap_entropy(&catalog::logistic(3.2), 24).unwrap();
        assert!(e.h < 0.05, "{}", e.h);
        assert!(e.laps.is_nondecreasing());
        assert!(e.laps.submultiplicativity_violation().is_none());
    }
}

use serde::{Deserialize, Serialize};

use super::Generator;
use crate::cells::CellSet;
use crate::map::{PiecewiseMap, Side, Termination};

/// Approach distances tested for one-sided accumulation at a critical point.
pub const LADDER: [f64; 5] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

/// Critical points approached by an orbit from the left (`minus`) and from
/// the right (`plus`).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SignedCriticalSides {
    pub minus: Vec<f64>,
    pub plus: Vec<f64>,
    /// Sides that reached some rungs of the ladder but not the finest one.
    pub unreached: Vec<(f64, Side)>,
}

impl SignedCriticalSides {
    pub fn is_empty(&self) -> bool {
        self.minus.is_empty() && self.plus.is_empty()
    }

    /// The critical values `f(c−)`, `c ∈ minus`, and `f(c+)`, `c ∈ plus`.
    pub fn generators(&self, map: &PiecewiseMap) -> Vec<Generator> {
        let mut out = Vec::new();
        for (list, side) in [(&self.minus, Side::Minus), (&self.plus, Side::Plus)] {
            for &c in list {
                if let Ok(value) = map.one_sided_limit(c, side) {
                    out.push(Generator { c, side, value });
                }
            }
        }
        out
    }
}

pub fn signed_critical_sides(map: &PiecewiseMap, x0: f64, n: usize) -> SignedCriticalSides {
    let orbit = map.iterate_orbit(x0, n, map.default_continue());
    signed_critical_sides_of(map, &orbit.points)
}

/// `c ∈ C₋` iff the orbit enters `(c − η, c)` for every rung `η` of the ladder.
pub fn signed_critical_sides_of(map: &PiecewiseMap, points: &[f64]) -> SignedCriticalSides {
    let crit = map.critical();
    let mut closest = vec![[f64::INFINITY; 2]; crit.len()];
    for &x in points {
        let i = crit.partition_point(|&c| c < x);
        if i > 0 {
            let d = x - crit[i - 1];
            if d > 0.0 {
                closest[i - 1][1] = closest[i - 1][1].min(d);
            }
        }
        if i < crit.len() {
            let d = crit[i] - x;
            if d > 0.0 {
                closest[i][0] = closest[i][0].min(d);
            }
        }
    }
    let finest = LADDER[LADDER.len() - 1];
    let mut out = SignedCriticalSides::default();
    for (k, &c) in crit.iter().enumerate() {
        for (s, side) in [(0, Side::Minus), (1, Side::Plus)] {
            let d = closest[k][s];
            if d < finest {
                match side {
                    Side::Minus => out.minus.push(c),
                    Side::Plus => out.plus.push(c),
                }
            } else if d < LADDER[0] {
                out.unreached.push((c, side));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosureEstimate {
    pub cells: crate::cells::CellSet,
    pub generators: Vec<Generator>,
    /// Generators whose orbit stopped before the horizon.
    pub truncated: Vec<Generator>,
}

/// Cells visited by the `n`-orbits of the signed critical values. Orbits pass
/// near-hits of `C` through the one-sided limit on the side of approach.
pub fn critical_orbit_closure(map: &PiecewiseMap, sides: &SignedCriticalSides, n: usize, eps: f64) -> ClosureEstimate {
    let generators = sides.generators(map);
    let mut cells = CellSet::new(eps);
    let mut truncated = Vec::new();
    for g in &generators {
        let mut it = map.sided_orbit(g.value, n);
        for x in it.by_ref() {
            cells.insert_point(x);
        }
        if !matches!(it.termination, Some(Termination::HorizonReached)) {
            truncated.push(*g);
        }
    }
    ClosureEstimate { cells, generators, truncated }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn sides_of_simple_orbits() {
        let s = signed_critical_sides(&catalog::logistic(4.0), 0.2137, 10_000_000);
        assert_eq!((s.minus.as_slice(), s.plus.as_slice()), (&[0.5][..], &[0.5][..]));
        let s = signed_critical_sides(&catalog::logistic(3.2), 0.3, 1_000_000);
        assert!(s.is_empty());
        let orbit = crate::sampling::rational_orbit(&catalog::doubling(), 1, 3, 1000).unwrap();
        assert!(signed_critical_sides_of(&catalog::doubling(), &orbit.points).is_empty());
    }

    #[test]
    fn closure_at_full_logistic_is_two_cells() {
        let map = catalog::logistic(4.0);
        let sides = SignedCriticalSides { minus: vec![0.5], plus: vec![0.5], unreached: vec![] };
        let cl = critical_orbit_closure(&map, &sides, 1000, 1e-3);
        assert_eq!(cl.cells.iter().collect::<Vec<_>>(), vec![0, 999]);
    }
}

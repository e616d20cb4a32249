//! Attractor estimates: periodic-like orbits, closures of critical-value
//! orbits, the periodic / Cantor / cycle-of-intervals classification and
//! basin censuses.
//!
//! The census samples starts uniformly at random. That approximates typical
//! points in the sense of Lebesgue measure only; residual (Baire-generic)
//! behaviour is exhibited by the constructed witnesses in [`crate::witness`].

mod census;
mod critical;
mod periodic_like;

use serde::{Deserialize, Serialize};

use crate::cells::{box_count_slope, CellSet};
use crate::interval::{Interval, IntervalUnion};
use crate::map::{PiecewiseMap, Side};
use crate::structure::transitivity::union_image;

pub use census::{basin_census, CensusConfig, CensusReport, Cluster};
pub use critical::{critical_orbit_closure, signed_critical_sides, signed_critical_sides_of, SignedCriticalSides};
pub use periodic_like::{detect_periodic_like, PeriodicLikeReport};

/// Box-count slope at or above this reads as interval-like.
pub const INTERVAL_SLOPE: f64 = 0.95;
/// Box-count slope at or below this reads as Cantor-like.
pub const CANTOR_SLOPE: f64 = 0.8;
/// A cell is isolated when no other support cell lies within this many cells.
pub const ISOLATION_RADIUS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttractorKind {
    PeriodicLike,
    Cantor,
    CycleOfIntervals,
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Support {
    Points { points: Vec<f64> },
    Intervals { intervals: IntervalUnion },
    Cells { cells: CellSet },
}

/// A critical value `f(c±)` used as an orbit generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub c: f64,
    pub side: Side,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractorEstimate {
    pub kind: AttractorKind,
    pub support: Support,
    pub generators: Vec<Generator>,
    pub eps: f64,
    /// Box-count slope behind the verdict, when one was measured.
    pub box_slope: Option<f64>,
}

impl AttractorEstimate {
    pub fn periodic(points: Vec<f64>, eps: f64) -> Self {
        AttractorEstimate { kind: AttractorKind::PeriodicLike, support: Support::Points { points }, generators: Vec::new(), eps, box_slope: None }
    }

    pub fn points(&self) -> Option<&[f64]> {
        match &self.support {
            Support::Points { points } => Some(points),
            _ => None,
        }
    }

    pub fn intervals(&self) -> Option<&IntervalUnion> {
        match &self.support {
            Support::Intervals { intervals } => Some(intervals),
            _ => None,
        }
    }

    /// The support as a cell set at the estimate's resolution.
    pub fn cells(&self) -> CellSet {
        match &self.support {
            Support::Points { points } => CellSet::from_points(self.eps, points.iter().copied()),
            Support::Cells { cells } => cells.clone(),
            Support::Intervals { intervals } => {
                let mut out = CellSet::new(self.eps);
                for p in intervals.parts() {
                    let n = out.grid_size();
                    let a = crate::cells::cell_of(p.lo, self.eps, n);
                    let b = crate::cells::cell_of(p.hi, self.eps, n);
                    (a..=b).for_each(|k| out.insert_cell(k));
                }
                out
            }
        }
    }
}

/// Evidence for classifying a support: cells at the finest level and a few
/// orbit points from its tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportSample {
    /// Resolution of the verdict.
    pub eps: f64,
    /// Support cells at `eps / 4`.
    pub fine: CellSet,
    /// Last points of a generating orbit, in order.
    pub tail: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub max_period: usize,
    pub max_intervals: usize,
    /// Coarsest level used for the box-count slope, as a multiple of `eps`.
    pub coarsest_factor: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { max_period: 64, max_intervals: 64, coarsest_factor: 16 }
    }
}

/// Cell counts from `eps / 4` up to `coarsest_factor · eps`.
pub fn box_counts(fine: &CellSet, coarsest_factor: usize) -> Vec<(f64, usize)> {
    let mut out = Vec::new();
    let mut factor = 1;
    while factor <= 4 * coarsest_factor {
        let level = if factor == 1 { fine.clone() } else { fine.coarsen(factor) };
        out.push((level.eps(), level.len()));
        factor *= 2;
    }
    out
}

/// Shortest period `q ≤ max_period` of the tail, if it has settled.
fn tail_period(tail: &[f64], max_period: usize) -> Option<usize> {
    let n = tail.len();
    (1..=max_period)
        .take_while(|&q| 2 * q <= n)
        .find(|&q| (0..q).all(|i| (tail[n - 1 - i] - tail[n - 1 - i - q]).abs() <= 1e-9))
}

/// Classify a support as periodic-like, a cycle of intervals, Cantor, or leave
/// it unresolved.
pub fn classify_attractor(sample: &SupportSample, map: &PiecewiseMap, opts: ClassifyOptions) -> AttractorEstimate {
    let eps = sample.eps;
    let at_eps = sample.fine.coarsen(4);
    if let Some(q) = tail_period(&sample.tail, opts.max_period) {
        let n = sample.tail.len();
        let mut points: Vec<f64> = sample.tail[n - q..].to_vec();
        let lead = (0..q).min_by(|&a, &b| points[a].total_cmp(&points[b])).unwrap_or(0);
        points.rotate_left(lead);
        let settled = at_eps.len() <= opts.max_period && sample.fine.len() == sample.fine.coarsen(2).len();
        if settled {
            return AttractorEstimate::periodic(points, eps);
        }
    }
    if sample.fine.is_empty() {
        return AttractorEstimate { kind: AttractorKind::Unresolved, support: Support::Cells { cells: at_eps }, generators: Vec::new(), eps, box_slope: None };
    }
    let counts = box_counts(&sample.fine, opts.coarsest_factor);
    let slope = box_count_slope(&counts);
    let unresolved = |support| AttractorEstimate {
        kind: AttractorKind::Unresolved,
        support,
        generators: Vec::new(),
        eps,
        box_slope: Some(slope),
    };
    if slope >= INTERVAL_SLOPE {
        let runs = at_eps.to_intervals();
        let finer = sample.fine.coarsen(2).to_intervals();
        let stable = runs.len() == finer.len() && runs.len() <= opts.max_intervals;
        if stable && maps_into_itself(map, &runs, eps) {
            return AttractorEstimate {
                kind: AttractorKind::CycleOfIntervals,
                support: Support::Intervals { intervals: runs },
                generators: Vec::new(),
                eps,
                box_slope: Some(slope),
            };
        }
        return unresolved(Support::Cells { cells: at_eps });
    }
    if slope <= CANTOR_SLOPE && at_eps.isolated_cells(ISOLATION_RADIUS) == 0 {
        return AttractorEstimate {
            kind: AttractorKind::Cantor,
            support: Support::Cells { cells: at_eps },
            generators: Vec::new(),
            eps,
            box_slope: Some(slope),
        };
    }
    unresolved(Support::Cells { cells: at_eps })
}

/// `f(U) ⊆ U` up to `max(1, L)·ε`, with outward-rounded images. `U` is a cell
/// cover of the attractor, overshooting it by up to one cell at each end;
/// `L` is the largest `|f'|` on `U`, which bounds how far that overshoot maps.
pub fn maps_into_itself(map: &PiecewiseMap, union: &IntervalUnion, eps: f64) -> bool {
    let image = union_image(map, union);
    let slack = lipschitz_on(map, union).max(1.0) * eps;
    let grown = IntervalUnion::from_intervals(union.parts().iter().map(|p| p.inflate(slack).clamp_unit()).collect());
    grown.uncovered_length(&image) == 0.0
}

/// Largest `|f'|` over 256 sample points per part, plus part ends and the
/// one-sided derivatives at critical points inside.
fn lipschitz_on(map: &PiecewiseMap, union: &IntervalUnion) -> f64 {
    let mut l: f64 = 0.0;
    for p in union.parts() {
        for k in 0..=256 {
            l = l.max(map.derivative(p.lo + p.width() * k as f64 / 256.0).abs());
        }
        for (a, part) in crate::structure::split_by_branches(map, *p) {
            let b = map.branch(a);
            l = l.max(b.derivative(part.lo).abs()).max(b.derivative(part.hi).abs());
        }
    }
    l
}

/// Hull of an estimate's support, for interval-valued consumers.
pub fn support_hull(est: &AttractorEstimate) -> Option<Interval> {
    match &est.support {
        Support::Points { points } => {
            let lo = points.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = points.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Some(Interval::new(lo, hi))
        }
        Support::Intervals { intervals } => {
            let p = intervals.parts();
            Some(Interval::new(p.first()?.lo, p.last()?.hi))
        }
        Support::Cells { cells } => {
            let runs = cells.runs();
            let (a, b) = (runs.first()?.0, runs.last()?.1);
            Some(Interval::new(a as f64 * cells.eps(), ((b + 1) as f64 * cells.eps()).min(1.0)))
        }
    }
}

//! Basin census: random starts, ω-limit estimates per start, clustering by
//! Hausdorff cell distance, classification of each cluster.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::critical::signed_critical_sides_of;
use super::{classify_attractor, AttractorEstimate, AttractorKind, ClassifyOptions, Generator, SupportSample};
use crate::cells::CellSet;
use crate::map::{PiecewiseMap, Side};
use crate::sampling::{random_sided_orbit, rng_for};
use crate::stats::omega_limit_of;

/// Clusters closer than this many cells are the same attractor.
pub const CLUSTER_DISTANCE: usize = 2;
const TAIL: usize = 256;
/// A cycle point this close to a discontinuity makes the cycle one-sided.
const ONE_SIDED_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusConfig {
    pub samples: usize,
    pub seed: u64,
    pub horizon: usize,
    pub eps: f64,
    /// Defaults to `horizon / 10`.
    pub n_transient: Option<usize>,
    pub classify: ClassifyOptions,
}

impl CensusConfig {
    pub fn new(samples: usize, seed: u64, horizon: usize, eps: f64) -> Self {
        CensusConfig { samples, seed, horizon, eps, n_transient: None, classify: ClassifyOptions::default() }
    }

    pub fn transient(&self) -> usize {
        self.n_transient.unwrap_or(self.horizon / 10)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub estimate: AttractorEstimate,
    pub basin_fraction: f64,
    pub members: usize,
    /// Two earlier clusters were both within the clustering distance of a
    /// sample and were merged.
    pub ambiguous: bool,
    /// The signed critical sides were not unanimous across members.
    pub dissent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub map: String,
    pub config: CensusConfig,
    pub clusters: Vec<Cluster>,
    /// Attractors that are not periodic-like.
    pub non_periodic_like: usize,
    /// `#C` for continuous maps, `#C + 2^{2#C}` otherwise.
    pub bound: usize,
    pub bound_ok: bool,
    /// Periodic-like attractors passing a discontinuity one-sidedly.
    pub one_sided_cycles: usize,
    /// `2#C`.
    pub one_sided_bound: usize,
    pub one_sided_ok: bool,
    /// Samples whose orbit stopped at a critical point before the horizon.
    pub truncated_samples: usize,
}

struct SampleResult {
    cells: CellSet,
    fine: CellSet,
    tail: Vec<f64>,
    sides: Vec<(f64, Side)>,
    truncated: bool,
}

fn run_sample(map: &PiecewiseMap, cfg: &CensusConfig, k: usize) -> SampleResult {
    let mut rng = rng_for(cfg.seed, k as u64);
    let orbit = random_sided_orbit(map, &mut rng, cfg.horizon);
    let skip = cfg.transient();
    let cells = omega_limit_of(&orbit, skip, cfg.eps).cells;
    let fine = omega_limit_of(&orbit, skip, cfg.eps / 4.0).cells;
    let from = orbit.points.len().saturating_sub(TAIL);
    let tail = orbit.points[from..].to_vec();
    let s = signed_critical_sides_of(map, &orbit.points[skip.min(orbit.points.len())..]);
    let sides = s.minus.iter().map(|&c| (c, Side::Minus)).chain(s.plus.iter().map(|&c| (c, Side::Plus))).collect();
    SampleResult { cells, fine, tail, sides, truncated: !matches!(orbit.termination, crate::map::Termination::HorizonReached) }
}

struct Group {
    cells: CellSet,
    fine: CellSet,
    tail: Vec<f64>,
    members: Vec<usize>,
    ambiguous: bool,
}

pub fn basin_census(map: &PiecewiseMap, cfg: &CensusConfig) -> CensusReport {
    assert!(cfg.samples >= 1, "census needs at least one sample");
    let results: Vec<SampleResult> = (0..cfg.samples).into_par_iter().map(|k| run_sample(map, cfg, k)).collect();

    let mut groups: Vec<Group> = Vec::new();
    for (k, r) in results.iter().enumerate() {
        let near: Vec<usize> = (0..groups.len())
            .filter(|&g| groups[g].cells.hausdorff_cells(&r.cells) <= CLUSTER_DISTANCE)
            .collect();
        match near.as_slice() {
            [] => groups.push(Group {
                cells: r.cells.clone(),
                fine: r.fine.clone(),
                tail: r.tail.clone(),
                members: vec![k],
                ambiguous: false,
            }),
            [first, rest @ ..] => {
                for &g in rest.iter().rev() {
                    let other = groups.remove(g);
                    let keep = &mut groups[*first];
                    keep.cells = keep.cells.union(&other.cells);
                    keep.fine = keep.fine.union(&other.fine);
                    keep.members.extend(other.members);
                    keep.ambiguous = true;
                }
                let keep = &mut groups[*first];
                keep.cells = keep.cells.union(&r.cells);
                keep.fine = keep.fine.union(&r.fine);
                keep.members.push(k);
            }
        }
    }

    let clusters: Vec<Cluster> = groups
        .into_iter()
        .map(|g| {
            let sample = SupportSample { eps: cfg.eps, fine: g.fine, tail: g.tail };
            let mut estimate = classify_attractor(&sample, map, cfg.classify);
            let (generators, dissent) = vote(map, &g.members, &results);
            if estimate.generators.is_empty() {
                estimate.generators = generators;
            }
            Cluster {
                estimate,
                basin_fraction: g.members.len() as f64 / cfg.samples as f64,
                members: g.members.len(),
                ambiguous: g.ambiguous,
                dissent,
            }
        })
        .collect();

    let n_crit = map.critical().len();
    let non_periodic_like = clusters.iter().filter(|c| c.estimate.kind != AttractorKind::PeriodicLike).count();
    let bound = if map.is_continuous() { n_crit } else { n_crit + (1 << (2 * n_crit)) };
    let one_sided_cycles = clusters.iter().filter(|c| is_one_sided(map, &c.estimate)).count();
    CensusReport {
        map: map.name.clone(),
        config: cfg.clone(),
        non_periodic_like,
        bound,
        bound_ok: non_periodic_like <= bound,
        one_sided_cycles,
        one_sided_bound: 2 * n_crit,
        one_sided_ok: one_sided_cycles <= 2 * n_crit,
        truncated_samples: results.iter().filter(|r| r.truncated).count(),
        clusters,
    }
}

/// Majority vote of the signed critical sides over a cluster's members.
fn vote(map: &PiecewiseMap, members: &[usize], results: &[SampleResult]) -> (Vec<Generator>, bool) {
    let mut tally: Vec<((f64, Side), usize)> = Vec::new();
    for &k in members {
        for &key in &results[k].sides {
            match tally.iter_mut().find(|(t, _)| *t == key) {
                Some((_, n)) => *n += 1,
                None => tally.push((key, 1)),
            }
        }
    }
    let dissent = tally.iter().any(|&(_, n)| n < members.len());
    let mut generators: Vec<Generator> = tally
        .into_iter()
        .filter(|&(_, n)| 2 * n > members.len())
        .filter_map(|((c, side), _)| map.one_sided_limit(c, side).ok().map(|value| Generator { c, side, value }))
        .collect();
    generators.sort_by(|a, b| a.c.total_cmp(&b.c).then((a.side == Side::Plus).cmp(&(b.side == Side::Plus))));
    (generators, dissent)
}

fn is_one_sided(map: &PiecewiseMap, est: &AttractorEstimate) -> bool {
    let Some(points) = est.points() else { return false };
    map.critical()
        .iter()
        .enumerate()
        .any(|(i, &c)| !map.is_continuous_at(i) && points.iter().any(|&x| (x - c).abs() <= ONE_SIDED_TOL))
}

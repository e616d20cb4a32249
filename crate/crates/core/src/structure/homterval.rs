//! Homterval candidates, their classification into basin or wandering
//! intervals, and the comparison of a wandering interval's ω-limit with
//! closures of critical-value orbits.
//!
//! Every verdict here is relative to a finite horizon. Disjoint images up to
//! step `n` are evidence of wandering, not a proof.

use serde::{Deserialize, Serialize};

use super::{branch_image, split_by_branches};
use crate::attractors::{detect_periodic_like, Generator};
use crate::cells::{cell_count, cell_of, CellSet};
use crate::error::Result;
use crate::interval::Interval;
use crate::map::{PiecewiseMap, CRITICAL_TOL};
use crate::stats::omega_limit_of;
use crate::witness::dyadic::{precision_for, DyBranch, DyInterval};

/// Forward image of `iv` if it lies in one branch and keeps `C` out of its
/// closure; `None` once the interval is cut.
fn homeomorphic_step(map: &PiecewiseMap, iv: Interval) -> Option<Interval> {
    let parts: Vec<_> = split_by_branches(map, iv).into_iter().filter(|(_, p)| p.width() > 0.0).collect();
    let (a, piece) = match parts.as_slice() {
        [one] => *one,
        [] => split_by_branches(map, iv).into_iter().next()?,
        _ => return None,
    };
    let image = branch_image(map, a, piece);
    let hits = map.critical().iter().any(|&c| image.lo - CRITICAL_TOL <= c && c <= image.hi + CRITICAL_TOL);
    (!hits).then_some(image)
}

/// `f^k(iv)` for `k = 0..=n`, or `None` if some image is cut by `C`.
/// Propagated in dyadic arithmetic when every branch allows it, so the
/// enclosures do not inflate over long horizons.
fn images(map: &PiecewiseMap, iv: Interval, n: usize) -> Option<Vec<Interval>> {
    match map.branches().iter().map(DyBranch::new).collect::<Option<Vec<_>>>() {
        Some(dy) => dyadic_images(map, &dy, iv, n),
        None => float_images(map, iv, n),
    }
}

fn dyadic_images(map: &PiecewiseMap, dy: &[DyBranch], iv: Interval, n: usize) -> Option<Vec<Interval>> {
    let mut out = Vec::with_capacity(n + 1);
    let mut cur = DyInterval::from_interval(iv);
    out.push(iv);
    for _ in 0..n {
        let a = dy.iter().position(|b| b.domain.contains(&cur))?;
        let p = precision_for(&cur.width());
        cur = dy[a].image(&cur, p);
        let image = cur.outward();
        if map.critical().iter().any(|&c| image.lo - CRITICAL_TOL <= c && c <= image.hi + CRITICAL_TOL) {
            return None;
        }
        out.push(image);
    }
    Some(out)
}

fn float_images(map: &PiecewiseMap, iv: Interval, n: usize) -> Option<Vec<Interval>> {
    let mut out = Vec::with_capacity(n + 1);
    let mut cur = iv;
    out.push(cur);
    for _ in 0..n {
        cur = homeomorphic_step(map, cur)?;
        out.push(cur);
    }
    Some(out)
}

fn survives(map: &PiecewiseMap, iv: Interval, n: usize) -> bool {
    let mut cur = iv;
    for _ in 0..n {
        match homeomorphic_step(map, cur) {
            Some(next) => cur = next,
            None => return false,
        }
    }
    true
}

/// Maximal surviving sub-runs of the grid cells `lo..hi`, by halving.
fn split_run(map: &PiecewiseMap, n: usize, w: f64, lo: usize, hi: usize, min_cells: usize, out: &mut Vec<Interval>) {
    if hi - lo < min_cells {
        return;
    }
    let iv = Interval::new(lo as f64 * w, (hi as f64 * w).min(1.0));
    if survives(map, iv, n) {
        out.push(iv);
        return;
    }
    if hi - lo == 1 {
        return;
    }
    let mid = (lo + hi) / 2;
    split_run(map, n, w, lo, mid, min_cells, out);
    split_run(map, n, w, mid, hi, min_cells, out);
}

/// Intervals of length at least `min_len` whose first `n` outward images
/// stay inside single branches and avoid `C`.
///
/// Grid cells of width `min_len / 2` are propagated one by one; surviving
/// neighbours are merged and the merged run is re-checked as a whole.
pub fn find_homtervals(map: &PiecewiseMap, n: usize, min_len: f64) -> Vec<Interval> {
    let w = min_len / 2.0;
    let cells = cell_count(w);
    let alive: Vec<bool> = (0..cells)
        .map(|k| survives(map, Interval::new(k as f64 * w, ((k + 1) as f64 * w).min(1.0)), n))
        .collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < cells {
        if !alive[k] {
            k += 1;
            continue;
        }
        let start = k;
        while k < cells && alive[k] {
            k += 1;
        }
        split_run(map, n, w, start, k, 2, &mut out);
    }
    out.retain(|iv| iv.width() >= min_len * (1.0 - 1e-12));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HomtervalClass {
    Wandering,
    BasinOfPeriodicLike,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomtervalReport {
    pub interval: Interval,
    pub class: HomtervalClass,
    pub horizon: usize,
    /// Pairs `j < k ≤ horizon` with overlapping images, counted by a sweep.
    pub overlapping_pairs: usize,
    /// The periodic-like orbit the midpoint converged to.
    pub attractor: Option<Vec<f64>>,
    /// Image lengths at the first and last step.
    pub image_widths: (f64, f64),
}

/// Number of overlapping pairs among intervals, via a sweep over left ends.
fn overlapping_pairs(images: &[Interval]) -> usize {
    let mut sorted: Vec<Interval> = images.to_vec();
    sorted.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut active: Vec<f64> = Vec::new();
    let mut count = 0;
    for iv in sorted {
        active.retain(|&hi| hi > iv.lo);
        count += active.len();
        active.push(iv.hi);
    }
    count
}

const ATTRACTOR_PERIOD: usize = 16;
const CONVERGENCE: f64 = 1e-8;

pub fn classify_homterval(map: &PiecewiseMap, j: Interval, horizon: usize) -> Result<HomtervalReport> {
    let report = |class, overlapping_pairs, attractor, widths| HomtervalReport {
        interval: j,
        class,
        horizon,
        overlapping_pairs,
        attractor,
        image_widths: widths,
    };
    let orbit = map.iterate_sided(j.mid(), horizon);
    if let Some(&last) = orbit.points.last() {
        let attractors = detect_periodic_like(map, ATTRACTOR_PERIOD, 1e-3, 2000)?.attractors;
        for a in attractors {
            let pts = a.points().unwrap_or(&[]);
            if pts.iter().any(|&p| (p - last).abs() <= CONVERGENCE) {
                return Ok(report(HomtervalClass::BasinOfPeriodicLike, 0, Some(pts.to_vec()), (j.width(), 0.0)));
            }
        }
    }
    let Some(imgs) = images(map, j, horizon) else {
        return Ok(report(HomtervalClass::Undecided, 0, None, (j.width(), 0.0)));
    };
    let widths = (imgs[0].width(), imgs[imgs.len() - 1].width());
    let pairs = overlapping_pairs(&imgs);
    let class = if pairs == 0 { HomtervalClass::Wandering } else { HomtervalClass::Undecided };
    Ok(report(class, pairs, None, widths))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetDistance {
    pub values: Vec<Generator>,
    /// Hausdorff distance in cells between the ω-estimate and the closure.
    pub hausdorff: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WanderingMatch {
    pub eps: f64,
    pub omega_cells: usize,
    /// Every non-empty `V ⊆ {f(c±)}` with its distance.
    pub candidates: Vec<SubsetDistance>,
    /// Index into `candidates` of the preferred match: the largest `V` within
    /// two cells.
    pub matched: Option<usize>,
    /// The matched closure contains a cell adjacent to some `c ∈ C`.
    pub contains_critical: bool,
    /// `2^{2#C}`, the bound on the number of such attractors.
    pub bound: usize,
}

/// Compare the ω-limit estimate of `J`'s midpoint with the closures of the
/// critical-value orbits over all subsets `V`. All orbits pass near-hits of
/// `C` through the one-sided limit on the side of approach.
pub fn wandering_attractor_check(map: &PiecewiseMap, j: Interval, n: usize, eps: f64) -> WanderingMatch {
    let orbit = map.iterate_sided(j.mid(), n);
    let omega = omega_limit_of(&orbit, n / 10, eps).cells;
    let values: Vec<Generator> = map
        .critical_values()
        .into_iter()
        .map(|(i, side, value)| Generator { c: map.critical()[i], side, value })
        .collect();
    let closures: Vec<CellSet> = values
        .iter()
        .map(|g| CellSet::from_points(eps, map.sided_orbit(g.value, n)))
        .collect();
    let mut candidates = Vec::new();
    for mask in 1usize..(1 << values.len()) {
        let mut set = CellSet::new(eps);
        let mut chosen = Vec::new();
        for (k, g) in values.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1) {
            set = set.union(&closures[k]);
            chosen.push(*g);
        }
        candidates.push((SubsetDistance { values: chosen, hausdorff: omega.hausdorff_cells(&set) }, set));
    }
    let matched = candidates
        .iter()
        .enumerate()
        .filter(|(_, (d, _))| d.hausdorff <= 2)
        .max_by(|(_, (a, _)), (_, (b, _))| a.values.len().cmp(&b.values.len()).then(b.hausdorff.cmp(&a.hausdorff)))
        .map(|(k, _)| k);
    let grid = cell_count(eps);
    let contains_critical = matched.is_some_and(|k| {
        let set = &candidates[k].1;
        map.critical().iter().any(|&c| {
            let below = cell_of((c - eps / 2.0).max(0.0), eps, grid);
            let above = cell_of((c + eps / 2.0).min(1.0), eps, grid);
            set.contains_cell(below) || set.contains_cell(above)
        })
    });
    WanderingMatch {
        eps,
        omega_cells: omega.len(),
        candidates: candidates.into_iter().map(|(d, _)| d).collect(),
        matched,
        contains_critical,
        bound: 1 << (2 * map.critical().len()),
    }
}

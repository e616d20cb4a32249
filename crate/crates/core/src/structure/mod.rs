//! Symbolic structure of a map: itinerary cylinders, periodic orbits, first
//! return maps, homtervals, lap numbers and transitivity checks.

pub mod entropy;
pub mod homterval;
pub mod oracle;
pub mod periodic;
pub mod returnmap;
pub mod transitivity;

use crate::interval::Interval;
use crate::map::PiecewiseMap;

pub use entropy::{lap_entropy, LapCount};
pub use homterval::{classify_homterval, find_homtervals, wandering_attractor_check, HomtervalClass, HomtervalReport, SubsetDistance, WanderingMatch};
pub use oracle::{birkhoff_max_oracle, OracleValue};
pub use periodic::{periodic_orbits, PeriodicOrbit, PeriodicOrbitTable};
pub use returnmap::{first_return_map, is_full_branch, ReturnBranch, ReturnMap};
pub use transitivity::{strong_transitivity_check, TransitivityReport};

const SLIVER: f64 = 1e-15;

/// `f_w(x)`: the branch formulas of `word` applied in order, without any
/// check that `x` follows the itinerary.
pub fn compose(map: &PiecewiseMap, word: &[usize], x: f64) -> f64 {
    word.iter().fold(x, |y, &a| map.branch(a).eval(y))
}

/// Derivative of [`compose`] by the chain rule.
pub fn compose_derivative(map: &PiecewiseMap, word: &[usize], x: f64) -> f64 {
    let mut y = x;
    let mut d = 1.0;
    for &a in word {
        d *= map.branch(a).derivative(y);
        y = map.branch(a).eval(y);
    }
    d
}

/// Outward enclosure of `{x : x ∈ B_{w_0}, f(x) ∈ B_{w_1}, …}` (closed branch
/// domains), pulling `target` back through the word.
pub fn pull_back(map: &PiecewiseMap, word: &[usize], target: Interval) -> Option<Interval> {
    let mut t = target;
    for &a in word.iter().rev() {
        t = map.branch(a).preimage(t)?;
    }
    Some(t)
}

/// Outward image of an interval lying in the closed domain of branch `a`.
pub fn branch_image(map: &PiecewiseMap, a: usize, iv: Interval) -> Interval {
    map.branch(a).image(iv).clamp_unit()
}

/// Split `iv` along the branch domains: `(branch, piece)` pairs, in order.
pub fn split_by_branches(map: &PiecewiseMap, iv: Interval) -> Vec<(usize, Interval)> {
    map.branches()
        .iter()
        .enumerate()
        .filter_map(|(a, b)| iv.intersect(&b.domain).map(|p| (a, p)))
        // Outward rounding leaves slivers of a few ulps in the neighbour branch.
        .filter(|(_, p)| p.width() > SLIVER || iv.width() <= SLIVER)
        .collect()
}

/// Visit every word of length `q` whose cylinder is nonempty, with the outward
/// cylinder enclosure. Cylinders narrower than `min_width` are pruned.
pub fn for_each_cylinder(map: &PiecewiseMap, q: usize, min_width: f64, visit: &mut dyn FnMut(&[usize], Interval)) {
    let mut word = Vec::with_capacity(q);
    for a in 0..map.branches().len() {
        let d = map.branch(a).domain;
        word.push(a);
        descend(map, q, min_width, &mut word, d, branch_image(map, a, d), visit);
        word.pop();
    }
}

fn descend(
    map: &PiecewiseMap,
    q: usize,
    min_width: f64,
    word: &mut Vec<usize>,
    domain: Interval,
    image: Interval,
    visit: &mut dyn FnMut(&[usize], Interval),
) {
    if word.len() == q {
        visit(word, domain);
        return;
    }
    for (a, part) in split_by_branches(map, image) {
        let Some(sub) = pull_back(map, word, part) else { continue };
        let Some(sub) = sub.intersect(&domain) else { continue };
        if sub.width() < min_width {
            continue;
        }
        word.push(a);
        descend(map, q, min_width, word, sub, branch_image(map, a, part), visit);
        word.pop();
    }
}

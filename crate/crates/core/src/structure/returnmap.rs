//! First return maps to a base interval, built by following itinerary
//! cylinders until their images come back.

use serde::{Deserialize, Serialize};

use super::{branch_image, pull_back, split_by_branches, SLIVER};
use crate::interval::Interval;
use crate::map::PiecewiseMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnBranch {
    pub domain: Interval,
    pub time: usize,
    pub increasing: bool,
    pub image: Interval,
    pub word: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnMap {
    pub base: Interval,
    /// Sorted by domain.
    pub branches: Vec<ReturnBranch>,
    pub horizon: usize,
    /// Domains that did not return within the horizon or were too thin.
    pub residual: Vec<Interval>,
    pub residual_length: f64,
}

struct Item {
    word: Vec<usize>,
    domain: Interval,
    image: Interval,
    increasing: bool,
}

pub fn first_return_map(map: &PiecewiseMap, base: Interval, horizon: usize, min_branch_width: f64) -> ReturnMap {
    let mut work: Vec<Item> = split_by_branches(map, base)
        .into_iter()
        .map(|(a, part)| Item {
            word: vec![a],
            domain: part,
            image: branch_image(map, a, part),
            increasing: map.branch(a).increasing,
        })
        .collect();
    let mut branches = Vec::new();
    let mut residual = Vec::new();
    while let Some(item) = work.pop() {
        let t = item.word.len();
        if let Some(back) = item.image.intersect(&base).filter(|r| r.width() > SLIVER) {
            match pull_back(map, &item.word, back).and_then(|d| d.intersect(&item.domain)) {
                Some(d) if d.width() >= min_branch_width => branches.push(ReturnBranch {
                    domain: d,
                    time: t,
                    increasing: item.increasing,
                    image: back,
                    word: item.word.clone(),
                }),
                Some(d) => residual.push(d),
                None => {}
            }
        }
        let outside = [(item.image.lo, item.image.hi.min(base.lo)), (item.image.lo.max(base.hi), item.image.hi)];
        for piece in outside.into_iter().filter(|p| p.1 - p.0 > SLIVER).map(|(lo, hi)| Interval::new(lo, hi)) {
            let Some(d) = pull_back(map, &item.word, piece).and_then(|d| d.intersect(&item.domain)) else {
                continue;
            };
            if t >= horizon || d.width() < min_branch_width {
                residual.push(d);
                continue;
            }
            for (a, part) in split_by_branches(map, piece) {
                let Some(sub) = pull_back(map, &item.word, part).and_then(|s| s.intersect(&d)) else { continue };
                let mut word = item.word.clone();
                word.push(a);
                work.push(Item {
                    word,
                    domain: sub,
                    image: branch_image(map, a, part),
                    increasing: item.increasing == map.branch(a).increasing,
                });
            }
        }
    }
    branches.sort_by(|a: &ReturnBranch, b| a.domain.lo.total_cmp(&b.domain.lo));
    let covered: f64 = branches.iter().map(|b| b.domain.width()).sum();
    let residual_length = (base.width() - covered).max(0.0);
    ReturnMap { base, branches, horizon, residual, residual_length }
}

/// Every branch maps onto the whole base up to `tol` at both ends.
pub fn is_full_branch(rm: &ReturnMap, tol: f64) -> bool {
    !rm.branches.is_empty()
        && rm.branches.iter().all(|b| b.image.lo <= rm.base.lo + tol && b.image.hi >= rm.base.hi - tol)
}

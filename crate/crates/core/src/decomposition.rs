//! Grid dynamics on ε-cells and the sets `U(c)`: recurrent cells whose
//! forward orbits reach the cell of a critical point, merged into classes.
//!
//! The nonwandering estimate is the chain-recurrent set of the grid graph.
//! It over-approximates `Ω(f)`. Cells cannot tell fat sets from meager ones,
//! so membership in the recurrent estimate stands in for both.

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cells::{cell_count, cell_of, CellSet};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::map::PiecewiseMap;
use crate::structure::{branch_image, split_by_branches};

/// Finest resolution accepted by [`grid_graph`].
pub const MIN_EPS: f64 = 1e-5;
/// Pairs overlapping in more than this fraction of the smaller set merge.
pub const MERGE_FRACTION: f64 = 0.5;
/// Cells of slack per boundary point of a component.
pub const BOUNDARY_SLACK: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDynamics {
    pub eps: f64,
    pub cells: usize,
    /// Per cell, inclusive ranges of target cells, one per branch piece.
    pub edges: Vec<Vec<(usize, usize)>>,
}

impl GridDynamics {
    pub fn targets(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges[k].iter().flat_map(|&(a, b)| a..=b)
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges[from].iter().any(|&(a, b)| a <= to && to <= b)
    }

    pub fn cell_interval(&self, k: usize) -> Interval {
        Interval::new(k as f64 * self.eps, ((k + 1) as f64 * self.eps).min(1.0))
    }

    fn graph(&self) -> DiGraph<(), ()> {
        let mut g = DiGraph::with_capacity(self.cells, 0);
        for _ in 0..self.cells {
            g.add_node(());
        }
        for k in 0..self.cells {
            for t in self.targets(k) {
                g.add_edge(NodeIndex::new(k), NodeIndex::new(t), ());
            }
        }
        g
    }
}

/// Closed ε-cells with edges to every cell meeting the outward image. A cell
/// holding a point of `C` is split there and gets both one-sided images.
pub fn grid_graph(map: &PiecewiseMap, eps: f64) -> Result<GridDynamics> {
    if eps < MIN_EPS {
        return Err(Error::ResolutionTooFine { eps, guard: MIN_EPS });
    }
    let n = cell_count(eps);
    let edges = (0..n)
        .into_par_iter()
        .map(|k| {
            let cell = Interval::new(k as f64 * eps, ((k + 1) as f64 * eps).min(1.0));
            let mut out: Vec<(usize, usize)> = split_by_branches(map, cell)
                .into_iter()
                .map(|(a, piece)| {
                    let img = branch_image(map, a, piece);
                    (cell_of(img.lo, eps, n), cell_of(img.hi, eps, n))
                })
                .collect();
            out.sort_unstable();
            out.dedup();
            out
        })
        .collect();
    Ok(GridDynamics { eps, cells: n, edges })
}

/// Cells on a directed cycle of the grid graph.
pub fn nonwandering_estimate(gd: &GridDynamics) -> CellSet {
    let mut out = CellSet::new(gd.eps);
    for scc in tarjan_scc(&gd.graph()) {
        let recurrent = scc.len() > 1 || {
            let k = scc[0].index();
            gd.has_edge(k, k)
        };
        if recurrent {
            scc.iter().for_each(|v| out.insert_cell(v.index()));
        }
    }
    out
}

/// Cells whose closure contains `c`.
fn cells_at(c: f64, eps: f64, n: usize) -> Vec<usize> {
    let mut v = vec![cell_of((c - eps / 2.0).max(0.0), eps, n), cell_of(c, eps, n), cell_of((c + eps / 2.0).min(1.0), eps, n)];
    v.retain(|&k| k as f64 * eps <= c && c <= (k + 1) as f64 * eps);
    v.dedup();
    v
}

/// `U(c)`: cells of `omega` from which the cell of `c` is reachable.
pub fn component_of_critical(gd: &GridDynamics, omega: &CellSet, c: f64) -> CellSet {
    let mut reverse: Vec<Vec<usize>> = vec![Vec::new(); gd.cells];
    for k in 0..gd.cells {
        for t in gd.targets(k) {
            reverse[t].push(k);
        }
    }
    let mut seen = vec![false; gd.cells];
    let mut stack = cells_at(c, gd.eps, gd.cells);
    stack.iter().for_each(|&k| seen[k] = true);
    while let Some(k) = stack.pop() {
        for &p in &reverse[k] {
            if !seen[p] {
                seen[p] = true;
                stack.push(p);
            }
        }
    }
    let mut out = CellSet::new(gd.eps);
    omega.iter().filter(|&k| seen[k]).for_each(|k| out.insert_cell(k));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalComponent {
    pub c: f64,
    pub cells: CellSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentClass {
    /// Critical points whose `U(c)` joined the class; the first is the
    /// representative.
    pub members: Vec<f64>,
    pub cells: CellSet,
    /// Cell runs `(first, last)` of the class.
    pub runs: Vec<(usize, usize)>,
    /// The class is one strongly connected piece of the grid graph.
    pub strongly_connected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentEstimate {
    pub eps: f64,
    pub components: Vec<CriticalComponent>,
    pub classes: Vec<ComponentClass>,
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while parent[r] != r {
        r = parent[r];
    }
    parent[i] = r;
    r
}

/// Merge `U(c)`s that overlap in more than half of the smaller one. An
/// unmerged pair may share at most the boundary layer.
pub fn merge_components(gd: &GridDynamics, components: Vec<CriticalComponent>) -> Result<ComponentEstimate> {
    let fat: Vec<usize> = (0..components.len()).filter(|&i| !components[i].cells.is_empty()).collect();
    let mut parent: Vec<usize> = (0..components.len()).collect();
    for (x, &i) in fat.iter().enumerate() {
        for &j in &fat[x + 1..] {
            let (a, b) = (&components[i].cells, &components[j].cells);
            let overlap = a.intersection_len(b);
            let smaller = if a.len() <= b.len() { a } else { b };
            if overlap as f64 > MERGE_FRACTION * smaller.len() as f64 {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri.max(rj)] = ri.min(rj);
            } else if overlap > BOUNDARY_SLACK * 2 * smaller.runs().len() {
                return Err(Error::DichotomyViolation {
                    c1: components[i].c,
                    c2: components[j].c,
                    fraction: overlap as f64 / smaller.len() as f64,
                });
            }
        }
    }
    let graph = gd.graph();
    let mut classes: Vec<ComponentClass> = Vec::new();
    let mut roots: Vec<usize> = Vec::new();
    for &i in &fat {
        let r = find(&mut parent, i);
        match roots.iter().position(|&x| x == r) {
            Some(p) => {
                classes[p].members.push(components[i].c);
                classes[p].cells = classes[p].cells.union(&components[i].cells);
            }
            None => {
                roots.push(r);
                classes.push(ComponentClass {
                    members: vec![components[i].c],
                    cells: components[i].cells.clone(),
                    runs: Vec::new(),
                    strongly_connected: false,
                });
            }
        }
    }
    for class in &mut classes {
        class.runs = class.cells.runs();
        class.strongly_connected = strongly_connected(&graph, &class.cells);
    }
    Ok(ComponentEstimate { eps: gd.eps, components, classes })
}

fn strongly_connected(graph: &DiGraph<(), ()>, cells: &CellSet) -> bool {
    let sub = graph.filter_map(
        |v, _| cells.contains_cell(v.index()).then_some(()),
        |_, _| Some(()),
    );
    sub.node_count() > 0 && tarjan_scc(&sub).len() == 1
}

/// Grid graph, nonwandering estimate, every `U(c)` and the merged classes.
pub fn decompose(map: &PiecewiseMap, eps: f64) -> Result<ComponentEstimate> {
    let gd = grid_graph(map, eps)?;
    let omega = nonwandering_estimate(&gd);
    let components = map
        .critical()
        .iter()
        .map(|&c| CriticalComponent { c, cells: component_of_critical(&gd, &omega, c) })
        .collect();
    merge_components(&gd, components)
}

//! Periodic orbits by itinerary: every root of `f_w(x) = x` on the cylinder of
//! a word `w`, for all words up to a maximal length.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{compose, compose_derivative, for_each_cylinder};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::map::PiecewiseMap;
use crate::observable::Observable;

const SAMPLES: usize = 256;
const ROOT_WIDTH: f64 = 1e-13;
const DISTINCT: f64 = 1e-10;
const ITINERARY_TOL: f64 = 1e-12;
/// Residual allowed per unit of multiplier at a float-isolated root.
pub const RESIDUAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub period: usize,
    /// Orbit points in dynamical order, starting from the smallest.
    pub points: Vec<f64>,
    /// Itinerary of `points[0]`.
    pub word: Vec<usize>,
    /// `|(f^q)'|` along the orbit.
    pub multiplier: f64,
    /// Orbit mean of each registered observable.
    pub means: Vec<f64>,
    /// Critical points lying on the orbit.
    pub through_critical: Vec<f64>,
    /// False when the orbit passes a discontinuity through a one-sided limit.
    pub genuine: bool,
}

impl PeriodicOrbit {
    pub fn residual(&self, map: &PiecewiseMap) -> f64 {
        (compose(map, &self.word, self.points[0]) - self.points[0]).abs()
    }

    /// Residual check scaled by the multiplier: a root isolated to one ulp
    /// of `x` has residual about `|(f^q)'|·ulp`.
    pub fn verifies(&self, map: &PiecewiseMap) -> bool {
        self.residual(map) <= RESIDUAL_TOL * self.multiplier.max(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbitTable {
    pub max_period: usize,
    pub observables: Vec<String>,
    /// `by_period[q − 1]`: orbits of prime period `q`.
    pub by_period: Vec<Vec<PeriodicOrbit>>,
}

impl PeriodicOrbitTable {
    pub fn orbits(&self) -> impl Iterator<Item = &PeriodicOrbit> {
        self.by_period.iter().flatten()
    }

    /// `#Fix(f^q)`, counting points of every period dividing `q`.
    pub fn fixed_point_count(&self, q: usize) -> usize {
        (1..=q.min(self.max_period)).filter(|p| q % p == 0).map(|p| p * self.by_period[p - 1].len()).sum()
    }

    /// CSV: period, points, multiplier, observable means.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("period,points,multiplier,genuine");
        for o in &self.observables {
            let _ = write!(out, ",mean[{o}]");
        }
        out.push('\n');
        for orbit in self.orbits() {
            let pts: Vec<String> = orbit.points.iter().map(|x| format!("{x:.17e}")).collect();
            let _ = write!(out, "{},{},{:.17e},{}", orbit.period, pts.join(" "), orbit.multiplier, orbit.genuine);
            for m in &orbit.means {
                let _ = write!(out, ",{m:.17e}");
            }
            out.push('\n');
        }
        out
    }
}

struct Root {
    x: f64,
    word: Vec<usize>,
}

pub fn periodic_orbits(map: &PiecewiseMap, max_period: usize, observables: &[Observable]) -> Result<PeriodicOrbitTable> {
    if max_period == 0 {
        return Err(Error::Precondition("maximal period must be at least 1".into()));
    }
    let mut by_period: Vec<Vec<PeriodicOrbit>> = Vec::with_capacity(max_period);
    let mut earlier: Vec<(usize, f64)> = Vec::new();
    for q in 1..=max_period {
        let mut roots: Vec<Root> = Vec::new();
        let mut failure = None;
        for_each_cylinder(map, q, 0.0, &mut |word, domain| {
            if failure.is_some() {
                return;
            }
            match roots_on_cylinder(map, word, domain) {
                Ok(xs) => roots.extend(xs.into_iter().map(|x| Root { x, word: word.to_vec() })),
                Err(e) => failure = Some(e),
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        roots.sort_by(|a, b| a.x.total_cmp(&b.x));
        roots.dedup_by(|b, a| (a.x - b.x).abs() <= DISTINCT);
        // Keep points of prime period q.
        roots.retain(|r| !earlier.iter().any(|&(p, y)| q % p == 0 && (y - r.x).abs() <= DISTINCT));
        earlier.extend(roots.iter().map(|r| (q, r.x)));
        by_period.push(assemble_orbits(map, q, &roots, observables));
    }
    Ok(PeriodicOrbitTable {
        max_period,
        observables: observables.iter().map(|o| o.to_string()).collect(),
        by_period,
    })
}

fn follows_itinerary(map: &PiecewiseMap, word: &[usize], x: f64) -> bool {
    let mut y = x;
    for &a in word {
        let d = map.branch(a).domain;
        if y < d.lo - ITINERARY_TOL || y > d.hi + ITINERARY_TOL {
            return false;
        }
        y = map.branch(a).eval(y.clamp(d.lo, d.hi));
    }
    true
}

fn roots_on_cylinder(map: &PiecewiseMap, word: &[usize], domain: Interval) -> Result<Vec<f64>> {
    let g = |x: f64| compose(map, word, x) - x;
    let n = if domain.width() == 0.0 { 1 } else { SAMPLES };
    let xs: Vec<f64> = (0..=n).map(|i| domain.lo + domain.width() * i as f64 / n as f64).collect();
    let gs: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
    let mut flat_run = 0;
    let mut out = Vec::new();
    for i in 0..xs.len() {
        if gs[i].abs() <= ROOT_WIDTH {
            flat_run += 1;
            if flat_run >= 8 && domain.width() > 1e-9 {
                return Err(Error::DegenerateFamily(format!(
                    "f^{} fixes an interval near {} (itinerary {:?})",
                    word.len(),
                    xs[i],
                    word
                )));
            }
        } else {
            flat_run = 0;
        }
        if gs[i] == 0.0 {
            out.push(xs[i]);
        } else if i + 1 < xs.len() && gs[i + 1] != 0.0 && gs[i].signum() != gs[i + 1].signum() {
            out.push(bisect(&g, xs[i], xs[i + 1], gs[i]));
        }
    }
    out.retain(|&x| follows_itinerary(map, word, x));
    Ok(out)
}

fn bisect(g: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut ga: f64) -> f64 {
    let mut gb = g(b);
    while b - a > ROOT_WIDTH {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if gm.signum() == ga.signum() {
            a = m;
            ga = gm;
        } else {
            b = m;
            gb = gm;
        }
    }
    if ga.abs() <= gb.abs() {
        a
    } else {
        b
    }
}

fn assemble_orbits(map: &PiecewiseMap, q: usize, roots: &[Root], observables: &[Observable]) -> Vec<PeriodicOrbit> {
    let nearest = |y: f64| -> Option<usize> {
        let i = roots.partition_point(|r| r.x < y);
        [i.checked_sub(1), Some(i)]
            .into_iter()
            .flatten()
            .filter(|&j| j < roots.len())
            .min_by(|&j, &k| (roots[j].x - y).abs().total_cmp(&(roots[k].x - y).abs()))
    };
    let mut used = vec![false; roots.len()];
    let mut out = Vec::new();
    for start in 0..roots.len() {
        if used[start] {
            continue;
        }
        let mut idx = vec![start];
        let mut current = start;
        for _ in 1..q {
            let r = &roots[current];
            let y = map.branch(r.word[0]).eval(r.x);
            match nearest(y) {
                Some(j) if (roots[j].x - y).abs() <= 1e-6 => {
                    idx.push(j);
                    current = j;
                }
                _ => break,
            }
        }
        if idx.len() != q {
            continue;
        }
        idx.iter().for_each(|&j| used[j] = true);
        // Rotate so the smallest point leads.
        let lead = (0..q).min_by(|&a, &b| roots[idx[a]].x.total_cmp(&roots[idx[b]].x)).unwrap_or(0);
        idx.rotate_left(lead);
        let points: Vec<f64> = idx.iter().map(|&j| roots[j].x).collect();
        let word = roots[idx[0]].word.clone();
        let multiplier = compose_derivative(map, &word, points[0]).abs();
        let means = observables.iter().map(|o| points.iter().map(|&x| o.eval(x)).sum::<f64>() / q as f64).collect();
        let mut through_critical = Vec::new();
        let mut genuine = true;
        for &x in &points {
            if let Some(i) = map.critical().iter().position(|&c| (c - x).abs() <= ITINERARY_TOL) {
                through_critical.push(map.critical()[i]);
                genuine &= map.is_continuous_at(i);
            }
        }
        out.push(PeriodicOrbit { period: q, points, word, multiplier, means, through_critical, genuine });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn logistic_four_fixed_points() {
        let table = periodic_orbits(&catalog::logistic(4.0), 1, &[]).unwrap();
        let fixed: Vec<f64> = table.by_period[0].iter().map(|o| o.points[0]).collect();
        assert_eq!(fixed.len(), 2);
        assert!(fixed[0].abs() < 1e-15 && (fixed[1] - 0.75).abs() < 1e-13);
    }

    #[test]
    fn period_two_mean_at_three_point_two() {
        let lambda = 3.2;
        let table = periodic_orbits(&catalog::logistic(lambda), 2, &[Observable::identity()]).unwrap();
        assert_eq!(table.by_period[1].len(), 1);
        let orbit = &table.by_period[1][0];
        // Closed form of the roots of f²(x) = x other than the fixed points.
        let disc = ((lambda - 3.0) * (lambda + 1.0)).sqrt();
        let p_minus = (lambda + 1.0 - disc) / (2.0 * lambda);
        let p_plus = (lambda + 1.0 + disc) / (2.0 * lambda);
        assert!((orbit.points[0] - p_minus).abs() < 1e-12 && (orbit.points[1] - p_plus).abs() < 1e-12);
        assert!((orbit.means[0] - (lambda + 1.0) / (2.0 * lambda)).abs() < 1e-12);
        assert!(orbit.multiplier < 1.0);
    }

    #[test]
    fn contraction_has_only_zero() {
        let table = periodic_orbits(&catalog::contraction(), 4, &[]).unwrap();
        assert_eq!(table.orbits().count(), 1);
        assert_eq!(table.by_period[0][0].points, vec![0.0]);
    }
}

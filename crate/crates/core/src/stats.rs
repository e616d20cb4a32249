//! Empirical statistics along orbits: visiting frequencies, ω-limit and
//! statistical ω-limit cell sets, Birkhoff averages and their tail envelopes.
//!
//! Every estimator is horizon-relative. The `*_of` variants work on an orbit
//! that was already computed, so one orbit can feed several estimators.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cells::{cell_count, cell_of, CellSet};
use crate::error::{Error, Result};
use crate::map::{OrbitResult, PiecewiseMap, Termination};
use crate::observable::Observable;

/// One interval of a [`Region`] with open or closed ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Segment {
    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }
}

/// A finite union of intervals of `[0,1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub segments: Vec<Segment>,
}

impl Region {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Region { segments: vec![Segment { lo, hi, lo_closed: true, hi_closed: true }] }
    }

    pub fn half_open(lo: f64, hi: f64) -> Self {
        Region { segments: vec![Segment { lo, hi, lo_closed: true, hi_closed: false }] }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.segments.iter().any(|s| s.contains(x))
    }

    /// Number of boundary points, the error budget for cell straddling.
    pub fn boundary_count(&self) -> usize {
        2 * self.segments.len()
    }

    /// `[0,1] \ self`, for disjoint sorted segments.
    pub fn complement(&self) -> Region {
        let mut segs = self.segments.clone();
        segs.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut out = Vec::new();
        let (mut at, mut at_closed) = (0.0, true);
        for s in &segs {
            if s.lo > at || (s.lo == at && at_closed && !s.lo_closed) {
                out.push(Segment { lo: at, hi: s.lo, lo_closed: at_closed, hi_closed: !s.lo_closed });
            }
            at = s.hi;
            at_closed = !s.hi_closed;
        }
        if at < 1.0 || (at == 1.0 && at_closed) {
            out.push(Segment { lo: at, hi: 1.0, lo_closed: at_closed, hi_closed: true });
        }
        Region { segments: out }
    }

    /// Parse a union such as `[0,0.5) u (0.7,1]`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = |m: String| Error::Parse { line: 1, column: 1, message: m };
        let mut segments = Vec::new();
        for part in text.split('u').map(str::trim).filter(|p| !p.is_empty()) {
            let lo_closed = match part.chars().next() {
                Some('[') => true,
                Some('(') => false,
                _ => return Err(bad(format!("segment '{part}' must start with [ or ("))),
            };
            let hi_closed = match part.chars().last() {
                Some(']') => true,
                Some(')') => false,
                _ => return Err(bad(format!("segment '{part}' must end with ] or )"))),
            };
            let inner = &part[1..part.len() - 1];
            let (a, b) = inner.split_once(',').ok_or_else(|| bad(format!("segment '{part}' needs two ends")))?;
            let lo: f64 = a.trim().parse().map_err(|_| bad(format!("bad number '{a}'")))?;
            let hi: f64 = b.trim().parse().map_err(|_| bad(format!("bad number '{b}'")))?;
            if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
                return Err(bad(format!("segment '{part}' is not inside [0,1]")));
            }
            segments.push(Segment { lo, hi, lo_closed, hi_closed });
        }
        Ok(Region { segments })
    }
}

/// Dyadic checkpoints `1, 2, 4, …` up to `n`, with `n` itself last.
pub fn checkpoints(n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = std::iter::successors(Some(1usize), |&m| m.checked_mul(2)).take_while(|&m| m <= n).collect();
    if out.last() != Some(&n) && n > 0 {
        out.push(n);
    }
    out
}

fn used_points(orbit: &OrbitResult, n: usize) -> &[f64] {
    &orbit.points[..orbit.points.len().min(n)]
}

fn truncation(orbit: &OrbitResult) -> Option<Termination> {
    match orbit.termination {
        Termination::HorizonReached => None,
        t => Some(t),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencySeries {
    /// `(m, (1/m)·#{j < m : x_j ∈ V})` at dyadic checkpoints.
    pub checkpoints: Vec<(usize, f64)>,
    /// Largest frequency over `m ∈ [n/2, n]`, the limsup estimate.
    pub upper_estimate: f64,
    /// Number of orbit points actually used.
    pub horizon: usize,
    pub truncated: Option<Termination>,
}

impl FrequencySeries {
    pub fn last(&self) -> f64 {
        self.checkpoints.last().map(|c| c.1).unwrap_or(0.0)
    }
}

pub fn visiting_frequency(map: &PiecewiseMap, x0: f64, v: &Region, n: usize) -> FrequencySeries {
    let orbit = map.iterate_orbit(x0, n, map.default_continue());
    visiting_frequency_of(&orbit, v, n)
}

pub fn visiting_frequency_of(orbit: &OrbitResult, v: &Region, n: usize) -> FrequencySeries {
    let pts = used_points(orbit, n);
    let m_total = pts.len();
    let marks = checkpoints(m_total);
    let mut out = Vec::with_capacity(marks.len());
    let mut next = 0;
    let mut hits = 0usize;
    let mut upper: f64 = 0.0;
    for (j, &x) in pts.iter().enumerate() {
        hits += v.contains(x) as usize;
        let m = j + 1;
        let freq = hits as f64 / m as f64;
        if 2 * m >= m_total {
            upper = upper.max(freq);
        }
        if next < marks.len() && marks[next] == m {
            out.push((m, freq));
            next += 1;
        }
    }
    FrequencySeries { checkpoints: out, upper_estimate: upper, horizon: m_total, truncated: truncation(orbit) }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellEstimate {
    pub cells: CellSet,
    pub truncated: Option<Termination>,
}

/// Cells visited by `x_j`, `n_transient ≤ j ≤ n`.
pub fn omega_limit_estimate(map: &PiecewiseMap, x0: f64, n_transient: usize, n: usize, eps: f64) -> CellEstimate {
    let orbit = map.iterate_orbit(x0, n, map.default_continue());
    omega_limit_of(&orbit, n_transient, eps)
}

pub fn omega_limit_of(orbit: &OrbitResult, n_transient: usize, eps: f64) -> CellEstimate {
    let start = n_transient.min(orbit.points.len());
    let cells = CellSet::from_points(eps, orbit.points[start..].iter().copied());
    CellEstimate { cells, truncated: truncation(orbit) }
}

/// Default frequency threshold `1/√n`.
pub fn default_theta(n: usize) -> f64 {
    1.0 / (n.max(1) as f64).sqrt()
}

/// Cells whose visit frequency over `x_0, …, x_{n−1}` exceeds `theta`.
pub fn statistical_omega_estimate(map: &PiecewiseMap, x0: f64, n: usize, eps: f64, theta: Option<f64>) -> CellEstimate {
    let orbit = map.iterate_orbit(x0, n, map.default_continue());
    statistical_omega_of(&orbit, n, eps, theta.unwrap_or_else(|| default_theta(n)))
}

pub fn statistical_omega_of(orbit: &OrbitResult, n: usize, eps: f64, theta: f64) -> CellEstimate {
    let measure = EmpiricalMeasure::from_points(used_points(orbit, n), eps);
    let mut cells = CellSet::new(eps);
    for (k, &w) in measure.weights.iter().enumerate() {
        if w > theta {
            cells.insert_cell(k);
        }
    }
    CellEstimate { cells, truncated: truncation(orbit) }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    pub eps: f64,
    pub weights: Vec<f64>,
    pub sample_length: usize,
}

impl EmpiricalMeasure {
    pub fn from_points(points: &[f64], eps: f64) -> Self {
        let n_cells = cell_count(eps);
        let mut counts = vec![0u64; n_cells];
        for &x in points {
            counts[cell_of(x, eps, n_cells)] += 1;
        }
        let total = points.len().max(1) as f64;
        let weights = counts.iter().map(|&c| c as f64 / total).collect();
        EmpiricalMeasure { eps, weights, sample_length: points.len() }
    }

    pub fn total_mass(&self) -> f64 {
        let mut s = Neumaier::default();
        self.weights.iter().for_each(|&w| s.add(w));
        s.value()
    }
}

/// Compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub n: usize,
    pub average: f64,
    /// Sup and inf of the partial averages over `m ∈ [n/2, n]`.
    pub tail_sup: f64,
    pub tail_inf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffSeries {
    pub observable: String,
    pub checkpoints: Vec<Checkpoint>,
    pub horizon: usize,
    pub truncated: Option<Termination>,
}

impl BirkhoffSeries {
    pub fn last(&self) -> Option<&Checkpoint> {
        self.checkpoints.last()
    }

    pub fn upper_estimate(&self) -> f64 {
        self.last().map(|c| c.tail_sup).unwrap_or(f64::NAN)
    }

    pub fn lower_estimate(&self) -> f64 {
        self.last().map(|c| c.tail_inf).unwrap_or(f64::NAN)
    }

    pub fn gap(&self) -> f64 {
        self.last().map(|c| c.tail_sup - c.tail_inf).unwrap_or(0.0)
    }
}

pub fn birkhoff_envelope(map: &PiecewiseMap, x0: f64, phi: &Observable, n: usize) -> BirkhoffSeries {
    let orbit = map.iterate_orbit(x0, n, map.default_continue());
    birkhoff_of(&orbit, phi, n)
}

pub fn birkhoff_of(orbit: &OrbitResult, phi: &Observable, n: usize) -> BirkhoffSeries {
    let pts = used_points(orbit, n);
    let mut series = birkhoff_of_values(pts.iter().map(|&x| phi.eval(x)), pts.len(), phi);
    series.truncated = truncation(orbit);
    series
}

/// Envelope of partial averages of a stream of `len` observable values.
pub fn birkhoff_of_values(values: impl Iterator<Item = f64>, len: usize, phi: &Observable) -> BirkhoffSeries {
    let marks = checkpoints(len);
    let constant = match phi {
        Observable::Constant { value } => Some(*value),
        _ => None,
    };
    let (phi_min, phi_max) = phi.bounds();
    let mut out: Vec<Checkpoint> = Vec::with_capacity(marks.len());
    let mut sum = Neumaier::default();
    let mut next = 0;
    let (mut sup, mut inf) = (f64::NEG_INFINITY, f64::INFINITY);
    for (j, v) in values.enumerate().take(len) {
        sum.add(v);
        let m = j + 1;
        let avg = constant.unwrap_or_else(|| sum.value() / m as f64);
        // The window of checkpoint `marks[next]` starts at ⌈marks[next]/2⌉.
        if next < marks.len() && 2 * m >= marks[next] {
            sup = sup.max(avg);
            inf = inf.min(avg);
        }
        if next < marks.len() && marks[next] == m {
            if let Some(prev) = out.last() {
                debug_assert!(sup <= prev.tail_sup + 0.5 * (phi_max - phi_min) + 1e-12);
            }
            out.push(Checkpoint { n: m, average: avg, tail_sup: sup, tail_inf: inf });
            next += 1;
            // Windows of consecutive dyadic checkpoints share their endpoint.
            sup = avg;
            inf = avg;
            if next < marks.len() && 2 * m < marks[next] {
                sup = f64::NEG_INFINITY;
                inf = f64::INFINITY;
            }
        }
    }
    BirkhoffSeries { observable: phi.to_string(), checkpoints: out, horizon: len, truncated: None }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoricVerdict {
    pub historic: bool,
    pub gap: f64,
    pub horizon: usize,
}

/// Historic iff the final tail gap exceeds `gap_tol` and the gap did not
/// shrink strictly over the last three checkpoints.
pub fn detect_historic_of(series: &BirkhoffSeries, gap_tol: f64) -> HistoricVerdict {
    let gaps: Vec<f64> = series.checkpoints.iter().map(|c| c.tail_sup - c.tail_inf).collect();
    let gap = gaps.last().copied().unwrap_or(0.0);
    let decaying = gaps.len() >= 3 && {
        let g = &gaps[gaps.len() - 3..];
        g[0] > g[1] && g[1] > g[2]
    };
    HistoricVerdict { historic: gap > gap_tol && !decaying, gap, horizon: series.horizon }
}

pub fn detect_historic(map: &PiecewiseMap, x0: f64, phi: &Observable, n: usize, gap_tol: f64) -> Result<HistoricVerdict> {
    if gap_tol <= 0.0 {
        return Err(Error::Precondition("gap_tol must be positive".into()));
    }
    Ok(detect_historic_of(&birkhoff_envelope(map, x0, phi, n), gap_tol))
}

/// CSV with one row per checkpoint of `series`, plus frequency columns.
pub fn checkpoint_csv(series: &BirkhoffSeries, freqs: &[(String, FrequencySeries)]) -> String {
    let mut out = String::from("n,average,tail_sup,tail_inf");
    for (name, _) in freqs {
        let _ = write!(out, ",freq[{name}]");
    }
    out.push('\n');
    for c in &series.checkpoints {
        let _ = write!(out, "{},{:.17e},{:.17e},{:.17e}", c.n, c.average, c.tail_sup, c.tail_inf);
        for (_, f) in freqs {
            match f.checkpoints.iter().find(|p| p.0 == c.n) {
                Some(p) => {
                    let _ = write!(out, ",{:.17e}", p.1);
                }
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::sampling::rational_orbit;
    use proptest::prelude::*;

    #[test]
    fn checkpoint_grid() {
        assert_eq!(checkpoints(8), vec![1, 2, 4, 8]);
        assert_eq!(checkpoints(10), vec![1, 2, 4, 8, 10]);
    }

    #[test]
    fn region_parse_and_complement() {
        let v = Region::parse("[0,0.5)").unwrap();
        let c = v.complement();
        assert_eq!(c.segments, vec![Segment { lo: 0.5, hi: 1.0, lo_closed: true, hi_closed: true }]);
        let w = Region::parse("(0.1,0.2] u [0.5,0.6]").unwrap();
        for x in [0.0, 0.1, 0.15, 0.2, 0.3, 0.5, 0.55, 0.6, 0.9, 1.0] {
            assert_ne!(w.contains(x), w.complement().contains(x), "{x}");
        }
        assert!(Region::parse("[0,2]").is_err());
    }

    #[test]
    fn doubling_third_spends_half_its_time_left() {
        let orbit = rational_orbit(&catalog::doubling(), 1, 3, 4096).unwrap();
        let f = visiting_frequency_of(&orbit, &Region::half_open(0.0, 0.5), 4096);
        for &(m, freq) in &f.checkpoints[1..] {
            assert_eq!(freq, 0.5, "m = {m}");
        }
        let b = birkhoff_of(&orbit, &Observable::identity(), 4096);
        for c in &b.checkpoints[1..] {
            assert!((c.average - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn fixed_point_statistics() {
        let map = catalog::logistic(4.0);
        let b = birkhoff_envelope(&map, 0.75, &Observable::identity(), 1000);
        assert!(b.checkpoints.iter().all(|c| c.average == 0.75 && c.tail_sup == 0.75));
        let f = visiting_frequency(&map, 0.75, &Region::closed(0.7, 0.8), 1000);
        assert_eq!(f.last(), 1.0);
        let w = omega_limit_estimate(&map, 0.75, 0, 1000, 1e-3);
        assert_eq!(w.cells.len(), 1);
    }

    #[test]
    fn constant_observable_is_exact() {
        let map = catalog::logistic(3.9);
        let b = birkhoff_envelope(&map, 0.123, &Observable::constant(0.37), 5000);
        assert!(b.checkpoints.iter().all(|c| c.average == 0.37 && c.tail_inf == 0.37 && c.tail_sup == 0.37));
    }

    #[test]
    fn csv_has_row_per_checkpoint() {
        let map = catalog::logistic(3.2);
        let orbit = map.iterate_orbit(0.3, 64, true);
        let b = birkhoff_of(&orbit, &Observable::identity(), 64);
        let f = visiting_frequency_of(&orbit, &Region::closed(0.0, 0.5), 64);
        let csv = checkpoint_csv(&b, &[("[0,0.5]".into(), f)]);
        assert_eq!(csv.lines().count(), 1 + b.checkpoints.len());
        assert!(csv.starts_with("n,average,tail_sup,tail_inf,freq[[0,0.5]]"));
    }

    proptest! {
        #[test]
        fn frequencies_of_complements_sum_to_one(x0 in 0.01f64..0.99, cut in 0.05f64..0.95, n in 1usize..3000) {
            let map = catalog::logistic(3.7);
            let orbit = map.iterate_orbit(x0, n, true);
            let v = Region::half_open(0.0, cut);
            let a = visiting_frequency_of(&orbit, &v, n);
            let b = visiting_frequency_of(&orbit, &v.complement(), n);
            for (p, q) in a.checkpoints.iter().zip(&b.checkpoints) {
                prop_assert!((p.1 + q.1 - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn envelope_brackets_averages(x0 in 0.01f64..0.99, n in 2usize..5000) {
            let map = catalog::logistic(3.9);
            let b = birkhoff_envelope(&map, x0, &Observable::identity(), n);
            for c in &b.checkpoints {
                prop_assert!(c.tail_sup >= c.average && c.average >= c.tail_inf);
                prop_assert!(c.tail_inf >= 0.0 && c.tail_sup <= 1.0);
            }
        }

        #[test]
        fn statistical_omega_inside_omega(x0 in 0.01f64..0.99, n in 10usize..5000) {
            let map = catalog::logistic(3.8);
            let orbit = map.iterate_orbit(x0, n, true);
            let stat = statistical_omega_of(&orbit, n, 1e-2, default_theta(n));
            let all = omega_limit_of(&orbit, 0, 1e-2);
            prop_assert!(stat.cells.is_subset(&all.cells));
            let m = EmpiricalMeasure::from_points(&orbit.points[..n], 1e-2);
            prop_assert!((m.total_mass() - 1.0).abs() < 1e-12);
        }
    }
}

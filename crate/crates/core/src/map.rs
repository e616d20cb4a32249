//! Piecewise-smooth interval maps `f: [0,1] \ C → [0,1]`.
//!
//! A map is an ordered list of monotone branches tiling `[0,1]`; the interior
//! boundaries between branches form the critical set `C`. Every branch is a
//! closed-form expression, which makes one-sided limits, interval images and
//! monotone inverses exact up to a priori rounding bounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Form;
use crate::interval::{next_down, next_up, Interval};

/// Orbits landing this close to a critical point are treated as hitting it.
pub const CRITICAL_TOL: f64 = 1e-14;
/// Branch overshoot of `[0,1]` tolerated (and clamped) as rounding.
pub const RANGE_TOL: f64 = 1e-12;
/// One-sided limits closer than this count as a continuity point.
pub const CONTINUITY_TOL: f64 = 1e-12;
const SAMPLES: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    pub fn label(self) -> &'static str {
        match self {
            Side::Minus => "minus",
            Side::Plus => "plus",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub start: f64,
    #[serde(flatten)]
    pub form: Form,
}

/// One monotone branch on an open subinterval of `[0,1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub domain: Interval,
    pub pieces: Vec<Piece>,
    pub increasing: bool,
}

impl Branch {
    pub fn new(lo: f64, hi: f64, form: Form, increasing: bool) -> Self {
        Branch { domain: Interval::new(lo, hi), pieces: vec![Piece { start: lo, form }], increasing }
    }

    /// Branch with monotonicity read off the endpoint values.
    pub fn inferred(lo: f64, hi: f64, form: Form) -> Self {
        let increasing = form.eval(hi) >= form.eval(lo);
        Branch::new(lo, hi, form, increasing)
    }

    fn piece_at(&self, x: f64) -> &Piece {
        let idx = self.pieces.partition_point(|p| p.start <= x);
        &self.pieces[idx.saturating_sub(1)]
    }

    /// Closed-form value, valid on the closure of the domain.
    pub fn eval(&self, x: f64) -> f64 {
        self.piece_at(x).form.eval(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.piece_at(x).form.derivative(x)
    }

    pub fn error_bound(&self, x: f64) -> f64 {
        self.piece_at(x).form.error_bound(x)
    }

    /// Rigorous enclosure of the exact value at the double `x`.
    pub fn enclose(&self, x: f64) -> Interval {
        let v = self.eval(x);
        Interval::point(v).inflate(self.error_bound(x))
    }

    pub fn left_limit(&self) -> f64 {
        self.eval(self.domain.lo)
    }

    pub fn right_limit(&self) -> f64 {
        self.eval(self.domain.hi)
    }

    /// Outward-rounded image of `iv`, which must lie in the closed domain.
    pub fn image(&self, iv: Interval) -> Interval {
        let a = self.enclose(iv.lo);
        let b = self.enclose(iv.hi);
        a.hull(&b)
    }

    /// Image of the whole closed domain.
    pub fn range(&self) -> Interval {
        self.image(self.domain)
    }

    fn boundary(&self, target: f64, upper: bool) -> f64 {
        // Smallest (upper = false) or largest (upper = true) x whose value may
        // reach past `target` in the direction that keeps it inside.
        let (mut lo, mut hi) = (self.domain.lo, self.domain.hi);
        let inside = |x: f64| -> bool {
            let v = self.eval(x);
            let e = self.error_bound(x);
            if upper {
                v - e <= target
            } else {
                v + e >= target
            }
        };
        let rising = self.increasing != upper;
        // `inside` is monotone in x: true on the far side for `rising`.
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if inside(mid) == rising {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        if rising {
            lo
        } else {
            hi
        }
    }

    /// Outward enclosure of `{x ∈ closed domain : f(x) ∈ target}`.
    pub fn preimage(&self, target: Interval) -> Option<Interval> {
        let range = self.range();
        let t = target.intersect(&range)?;
        let (x_for_lo, x_for_hi) = if self.increasing {
            let a = if t.lo <= range.lo { self.domain.lo } else { self.boundary(t.lo, false) };
            let b = if t.hi >= range.hi { self.domain.hi } else { self.boundary(t.hi, true) };
            (a, b)
        } else {
            let a = if t.hi >= range.hi { self.domain.lo } else { self.boundary(t.hi, true) };
            let b = if t.lo <= range.lo { self.domain.hi } else { self.boundary(t.lo, false) };
            (a, b)
        };
        let lo = next_down(next_down(x_for_lo)).max(self.domain.lo);
        let hi = next_up(next_up(x_for_hi)).min(self.domain.hi);
        (lo <= hi).then(|| Interval::new(lo, hi))
    }

    /// Point inverse by bisection; `y` must lie in the branch range.
    pub fn inverse(&self, y: f64) -> f64 {
        let (mut lo, mut hi) = (self.domain.lo, self.domain.hi);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let below = self.eval(mid) < y;
            if below == self.increasing {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    HorizonReached,
    CriticalTruncation { step: usize, c: f64 },
    NumericallyDegenerate { step: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitResult {
    pub points: Vec<f64>,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalDiagnostics {
    pub c: f64,
    pub alpha_minus: f64,
    pub alpha_plus: f64,
    pub continuous: bool,
}

/// An excluded side of a critical point together with its gap interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub c: f64,
    pub side: Side,
    /// The far endpoint: `a_c < c` for the minus side, `b_c > c` for the plus side.
    pub far: f64,
}

impl Gap {
    pub fn interval(&self) -> Interval {
        Interval::hull_of(self.c, self.far)
    }
}

/// Exponent of the power join used by [`PiecewiseMap::localize`].
pub const LOCALIZE_EXPONENT: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseMap {
    pub name: String,
    critical: Vec<f64>,
    branches: Vec<Branch>,
    continuous: Vec<bool>,
}

impl PiecewiseMap {
    pub fn new(name: impl Into<String>, branches: Vec<Branch>) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::InvalidMap("no branches".into()));
        }
        if branches[0].domain.lo != 0.0 || branches[branches.len() - 1].domain.hi != 1.0 {
            return Err(Error::InvalidMap("branch domains must start at 0 and end at 1".into()));
        }
        for w in branches.windows(2) {
            if w[0].domain.hi != w[1].domain.lo {
                return Err(Error::InvalidMap(format!(
                    "domains ({}, {}) and ({}, {}) do not tile [0,1]",
                    w[0].domain.lo, w[0].domain.hi, w[1].domain.lo, w[1].domain.hi
                )));
            }
        }
        for b in &branches {
            validate_branch(b)?;
        }
        let critical: Vec<f64> = branches[..branches.len() - 1].iter().map(|b| b.domain.hi).collect();
        let continuous = branches
            .windows(2)
            .map(|w| (w[0].right_limit() - w[1].left_limit()).abs() <= CONTINUITY_TOL)
            .collect();
        Ok(PiecewiseMap { name: name.into(), critical, branches, continuous })
    }

    pub fn critical(&self) -> &[f64] {
        &self.critical
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn branch(&self, i: usize) -> &Branch {
        &self.branches[i]
    }

    pub fn is_continuous_at(&self, i: usize) -> bool {
        self.continuous[i]
    }

    /// True when every critical point is a continuity point.
    pub fn is_continuous(&self) -> bool {
        self.continuous.iter().all(|&c| c)
    }

    /// Index of the branch whose closed domain holds `x` (left branch wins ties).
    pub fn branch_index(&self, x: f64) -> usize {
        self.critical.partition_point(|&c| c < x)
    }

    /// Index of the critical point within `CRITICAL_TOL` of `x`, if any.
    pub fn near_critical(&self, x: f64) -> Option<usize> {
        let idx = self.critical.partition_point(|&c| c < x);
        [idx.checked_sub(1), Some(idx)]
            .into_iter()
            .flatten()
            .find(|&i| i < self.critical.len() && (self.critical[i] - x).abs() <= CRITICAL_TOL)
    }

    fn checked(&self, x: f64, v: f64) -> Result<f64> {
        if !(-RANGE_TOL..=1.0 + RANGE_TOL).contains(&v) {
            return Err(Error::RangeViolation { x, value: v });
        }
        Ok(v.clamp(0.0, 1.0))
    }

    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if let Some(i) = self.near_critical(x) {
            return Err(Error::CriticalPoint { x, c: self.critical[i] });
        }
        let v = self.branches[self.branch_index(x)].eval(x);
        self.checked(x, v)
    }

    /// Evaluation without the critical check, for tight loops. Points on `C`
    /// take the left branch's limit.
    #[inline]
    pub fn eval_unchecked(&self, x: f64) -> f64 {
        self.branches[self.branch_index(x)].eval(x).clamp(0.0, 1.0)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.branches[self.branch_index(x)].derivative(x)
    }

    /// Exact branch-expression limit `f(c±)`.
    pub fn one_sided_limit(&self, c: f64, side: Side) -> Result<f64> {
        let i = self
            .critical
            .iter()
            .position(|&k| k == c)
            .or_else(|| self.near_critical(c))
            .ok_or_else(|| Error::Precondition(format!("{c} is not a critical point")))?;
        Ok(self.limit_at(i, side))
    }

    pub fn limit_at(&self, i: usize, side: Side) -> f64 {
        let v = match side {
            Side::Minus => self.branches[i].right_limit(),
            Side::Plus => self.branches[i + 1].left_limit(),
        };
        v.clamp(0.0, 1.0)
    }

    /// All critical values `f(c±)` tagged by index and side.
    pub fn critical_values(&self) -> Vec<(usize, Side, f64)> {
        (0..self.critical.len())
            .flat_map(|i| [(i, Side::Minus, self.limit_at(i, Side::Minus)), (i, Side::Plus, self.limit_at(i, Side::Plus))])
            .collect()
    }

    /// One orbit step under the truncation convention. `Ok(None)` marks a
    /// critical hit that is not continued.
    #[inline]
    pub fn step(&self, x: f64, continue_through: bool) -> Result<Option<f64>> {
        if let Some(i) = self.near_critical(x) {
            if continue_through && self.continuous[i] {
                return Ok(Some(self.limit_at(i, Side::Minus)));
            }
            return Ok(None);
        }
        let v = self.branches[self.branch_index(x)].eval(x);
        self.checked(x, v).map(Some)
    }

    /// One step that passes a near-hit of `c` through the one-sided limit on
    /// the side of approach. Only an exact hit at a discontinuity stops.
    #[inline]
    pub fn sided_step(&self, x: f64) -> Result<Option<f64>> {
        if let Some(i) = self.near_critical(x) {
            let c = self.critical[i];
            return Ok(match (x < c, x > c) {
                (true, _) => Some(self.limit_at(i, Side::Minus)),
                (_, true) => Some(self.limit_at(i, Side::Plus)),
                _ if self.continuous[i] => Some(self.limit_at(i, Side::Minus)),
                _ => None,
            });
        }
        let v = self.branches[self.branch_index(x)].eval(x);
        self.checked(x, v).map(Some)
    }

    pub fn orbit(&self, x0: f64, n: usize, continue_through: bool) -> Orbit<'_> {
        Orbit { map: self, x: x0, emitted: 0, n, continue_through, sided: false, termination: None }
    }

    /// Orbit under [`PiecewiseMap::sided_step`].
    pub fn sided_orbit(&self, x0: f64, n: usize) -> Orbit<'_> {
        Orbit { map: self, x: x0, emitted: 0, n, continue_through: true, sided: true, termination: None }
    }

    pub fn iterate_sided(&self, x0: f64, n: usize) -> OrbitResult {
        let mut it = self.sided_orbit(x0, n);
        let points: Vec<f64> = it.by_ref().collect();
        OrbitResult { points, termination: it.termination.unwrap_or(Termination::HorizonReached) }
    }

    /// Default continuation flag: on for continuous maps, off otherwise.
    pub fn default_continue(&self) -> bool {
        self.is_continuous()
    }

    pub fn iterate_orbit(&self, x0: f64, n: usize, continue_through: bool) -> OrbitResult {
        let continue_through = continue_through && self.is_continuous();
        let mut it = self.orbit(x0, n, continue_through);
        let points: Vec<f64> = it.by_ref().collect();
        OrbitResult { points, termination: it.termination.unwrap_or(Termination::HorizonReached) }
    }

    /// Non-flat normal-form check at every critical point.
    pub fn check_nonflat(&self) -> Result<Vec<CriticalDiagnostics>> {
        self.critical
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let alpha_minus = local_exponent(&self.branches[i], c, Side::Minus)?;
                let alpha_plus = local_exponent(&self.branches[i + 1], c, Side::Plus)?;
                Ok(CriticalDiagnostics { c, alpha_minus, alpha_plus, continuous: self.continuous[i] })
            })
            .collect()
    }

    /// Surgery that redirects the excluded sides of critical points to `{0,1}`
    /// inside the given gaps and leaves `f` unchanged elsewhere.
    pub fn localize(&self, keep_minus: &[f64], keep_plus: &[f64], gaps: &[Gap]) -> Result<PiecewiseMap> {
        let mut seen: Vec<Interval> = Vec::new();
        for g in gaps {
            let ci = self
                .critical
                .iter()
                .position(|&k| k == g.c)
                .ok_or_else(|| Error::GapOverlap(format!("{} is not a critical point", g.c)))?;
            let ok_side = match g.side {
                Side::Minus => g.far < g.c && g.far > self.branches[ci].domain.lo,
                Side::Plus => g.far > g.c && g.far < self.branches[ci + 1].domain.hi,
            };
            if !ok_side {
                return Err(Error::GapOverlap(format!(
                    "gap ({}, {}) leaves the branch next to {}",
                    g.c.min(g.far),
                    g.c.max(g.far),
                    g.c
                )));
            }
            let iv = g.interval();
            if seen.iter().any(|s| s.overlaps_open(&iv)) {
                return Err(Error::GapOverlap(format!("gap ({}, {}) intersects another gap", iv.lo, iv.hi)));
            }
            seen.push(iv);
        }
        let mut branches = self.branches.clone();
        for (i, &c) in self.critical.iter().enumerate() {
            for side in [Side::Minus, Side::Plus] {
                let kept = match side {
                    Side::Minus => keep_minus.contains(&c),
                    Side::Plus => keep_plus.contains(&c),
                };
                let gap = gaps.iter().find(|g| g.c == c && g.side == side);
                match (kept, gap) {
                    (true, _) | (false, None) => {}
                    (false, Some(g)) => {
                        let bi = if side == Side::Minus { i } else { i + 1 };
                        branches[bi] = join_to_boundary(&branches[bi], c, g.far, side);
                    }
                }
            }
        }
        PiecewiseMap::new(format!("{}-localized", self.name), branches)
    }
}

fn join_to_boundary(b: &Branch, c: f64, far: f64, side: Side) -> Branch {
    let y_far = b.eval(far);
    // Increasing on the left of c climbs to 1; increasing on the right starts at 0.
    let target = match (side, b.increasing) {
        (Side::Minus, true) | (Side::Plus, false) => 1.0,
        _ => 0.0,
    };
    let denom = far - c;
    let join = Form::power(target, y_far - target, vec![-c / denom, 1.0 / denom], LOCALIZE_EXPONENT);
    let mut pieces: Vec<Piece> = Vec::new();
    match side {
        Side::Minus => {
            pieces.extend(b.pieces.iter().filter(|p| p.start < far).cloned());
            pieces.push(Piece { start: far, form: join });
        }
        Side::Plus => {
            let carry = b.piece_at(far).form.clone();
            pieces.push(Piece { start: b.domain.lo, form: join });
            pieces.push(Piece { start: far, form: carry });
            pieces.extend(b.pieces.iter().filter(|p| p.start > far).cloned());
        }
    }
    Branch { domain: b.domain, pieces, increasing: b.increasing }
}

fn local_exponent(b: &Branch, c: f64, side: Side) -> Result<f64> {
    let form = &b.piece_at(c).form;
    let form = match side {
        Side::Minus => &b.pieces.last().expect("branch has pieces").form,
        Side::Plus => form,
    };
    let flat = |reason: String| Error::FlatBranch { c, side: side.label(), reason };
    match form {
        Form::Poly { poly } => {
            let shifted = poly.taylor_shift(c);
            let tol = 1e-9 * poly.scale();
            shifted
                .iter()
                .enumerate()
                .skip(1)
                .find(|(_, v)| v.abs() > tol)
                .map(|(k, _)| k as f64)
                .ok_or_else(|| flat("polynomial is constant near the critical point".into()))
        }
        Form::Power { scale, inner, exponent, .. } => {
            if scale.abs() < 1e-12 {
                return Err(flat("zero scale".into()));
            }
            let u = inner.eval(c);
            let du = inner.derivative().eval(c);
            if du.abs() <= 1e-12 * inner.scale() {
                return Err(flat("inner map is not a local diffeomorphism".into()));
            }
            if u.abs() <= 1e-12 * inner.scale() {
                Ok(*exponent)
            } else {
                Ok(1.0)
            }
        }
    }
}

fn validate_branch(b: &Branch) -> Result<()> {
    let (lo, hi) = (b.domain.lo, b.domain.hi);
    if !(lo < hi) {
        return Err(Error::InvalidMap(format!("empty domain ({lo}, {hi})")));
    }
    if b.pieces.first().map(|p| p.start) != Some(lo) || b.pieces.windows(2).any(|w| w[0].start >= w[1].start) {
        return Err(Error::InvalidMap(format!("bad piece layout on ({lo}, {hi})")));
    }
    for p in &b.pieces {
        if let Form::Power { exponent, .. } = p.form {
            if exponent < 1.0 {
                return Err(Error::InvalidMap(format!("exponent {exponent} < 1")));
            }
        }
    }
    for w in b.pieces.windows(2) {
        let x = w[1].start;
        if (w[0].form.eval(x) - w[1].form.eval(x)).abs() > CONTINUITY_TOL {
            return Err(Error::InvalidMap(format!("pieces disagree at {x}")));
        }
    }
    let mut prev: Option<f64> = None;
    for k in 0..=SAMPLES {
        let x = lo + (hi - lo) * k as f64 / SAMPLES as f64;
        let v = b.eval(x);
        if !v.is_finite() || !(-RANGE_TOL..=1.0 + RANGE_TOL).contains(&v) {
            return Err(Error::RangeViolation { x, value: v });
        }
        if k > 0 && k < SAMPLES {
            let d = b.derivative(x);
            if d == 0.0 || (d > 0.0) != b.increasing {
                return Err(Error::InvalidMap(format!(
                    "declared monotonicity fails at {x} (derivative {d})"
                )));
            }
        }
        if let Some(p) = prev {
            if (v > p && !b.increasing) || (v < p && b.increasing) {
                return Err(Error::InvalidMap(format!("branch is not monotone near {x}")));
            }
        }
        prev = Some(v);
    }
    Ok(())
}

/// Streaming orbit; yields `x0, f(x0), …` up to `n + 1` points.
pub struct Orbit<'a> {
    map: &'a PiecewiseMap,
    x: f64,
    emitted: usize,
    n: usize,
    continue_through: bool,
    sided: bool,
    pub termination: Option<Termination>,
}

impl Iterator for Orbit<'_> {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        if self.termination.is_some() {
            return None;
        }
        let current = self.x;
        if self.emitted == self.n {
            self.emitted += 1;
            self.termination = Some(Termination::HorizonReached);
            return Some(current);
        }
        let step = if self.sided { self.map.sided_step(current) } else { self.map.step(current, self.continue_through) };
        match step {
            Ok(Some(next)) => self.x = next,
            Ok(None) => {
                let c = self.map.critical[self.map.near_critical(current).expect("critical hit")];
                self.termination = Some(Termination::CriticalTruncation { step: self.emitted, c });
            }
            Err(_) => self.termination = Some(Termination::NumericallyDegenerate { step: self.emitted }),
        }
        self.emitted += 1;
        Some(current)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn evaluate_examples() {
        let tent = catalog::tent(2.0);
        assert_eq!(tent.evaluate(0.25).unwrap(), 0.5);
        let logistic = catalog::logistic(4.0);
        assert!(matches!(logistic.evaluate(0.5), Err(Error::CriticalPoint { .. })));
        let doubling = catalog::doubling();
        assert_eq!(doubling.evaluate(0.75).unwrap(), 0.5);
    }

    #[test]
    fn one_sided_limits() {
        let d = catalog::doubling();
        assert_eq!(d.one_sided_limit(0.5, Side::Minus).unwrap(), 1.0);
        assert_eq!(d.one_sided_limit(0.5, Side::Plus).unwrap(), 0.0);
        let l = catalog::logistic(4.0);
        assert_eq!(l.one_sided_limit(0.5, Side::Minus).unwrap(), 1.0);
        assert_eq!(l.one_sided_limit(0.5, Side::Plus).unwrap(), 1.0);
        assert!(!d.is_continuous() && l.is_continuous());
    }

    #[test]
    fn orbit_conventions() {
        let l = catalog::logistic(4.0);
        let off = l.iterate_orbit(0.5, 10, false);
        assert_eq!(off.points, vec![0.5]);
        assert_eq!(off.termination, Termination::CriticalTruncation { step: 0, c: 0.5 });
        let on = l.iterate_orbit(0.5, 4, true);
        assert_eq!(on.points, vec![0.5, 1.0, 0.0, 0.0, 0.0]);
        let d = catalog::doubling();
        let o = d.iterate_orbit(1.0 / 3.0, 4, false);
        let want = [1.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0];
        for (a, b) in o.points.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        // discontinuous maps ignore the continuation flag
        let through = d.iterate_orbit(0.5, 3, true);
        assert_eq!(through.points.len(), 1);
    }

    #[test]
    fn nonflat_exponents() {
        let diag = catalog::logistic(4.0).check_nonflat().unwrap();
        assert_eq!((diag[0].alpha_minus, diag[0].alpha_plus), (2.0, 2.0));
        let diag = catalog::tent(2.0).check_nonflat().unwrap();
        assert_eq!((diag[0].alpha_minus, diag[0].alpha_plus), (1.0, 1.0));
    }

    #[test]
    fn rejects_out_of_range_and_non_monotone() {
        let bad = Branch::new(0.0, 1.0, Form::poly(vec![0.0, 2.0]), true);
        assert!(matches!(PiecewiseMap::new("bad", vec![bad]), Err(Error::RangeViolation { .. })));
        let wiggle = Branch::new(0.0, 1.0, Form::poly(vec![0.0, 4.0, -4.0]), true);
        assert!(PiecewiseMap::new("wiggle", vec![wiggle]).is_err());
        let gap = vec![
            Branch::new(0.0, 0.4, Form::poly(vec![0.0, 1.0]), true),
            Branch::new(0.5, 1.0, Form::poly(vec![0.0, 1.0]), true),
        ];
        assert!(PiecewiseMap::new("gap", gap).is_err());
    }

    #[test]
    fn preimage_encloses_exact_inverse() {
        let l = catalog::logistic(4.0);
        let left = l.branch(0);
        let pre = left.preimage(Interval::new(0.75, 0.75)).unwrap();
        // 4x(1-x) = 3/4 at x = 1/4
        assert!(pre.contains(0.25));
        assert!(pre.width() < 1e-12);
        let right = l.branch(1);
        let pre = right.preimage(Interval::new(0.0, 0.1)).unwrap();
        assert!(pre.hi == 1.0 && pre.contains(right.inverse(0.1)));
    }

    #[test]
    fn localize_identity_and_doubling_gap() {
        let d = catalog::doubling();
        let same = d.localize(&[0.5], &[0.5], &[]).unwrap();
        for k in 0..100 {
            let x = (k as f64 + 0.37) / 100.0;
            assert_eq!(same.eval_unchecked(x), d.eval_unchecked(x));
        }
        let g = d.localize(&[0.5], &[], &[Gap { c: 0.5, side: Side::Plus, far: 0.6 }]).unwrap();
        assert_ne!(g.evaluate(0.55).unwrap(), d.evaluate(0.55).unwrap());
        assert!(g.evaluate(0.55).unwrap() < 0.05);
        assert_eq!(g.evaluate(0.7).unwrap(), d.evaluate(0.7).unwrap());
        assert_eq!(g.one_sided_limit(0.5, Side::Plus).unwrap(), 0.0);
        assert_eq!(g.critical(), d.critical());
    }

    #[test]
    fn localize_rejects_overlaps() {
        let d = catalog::doubling();
        let err = d.localize(&[], &[], &[Gap { c: 0.5, side: Side::Plus, far: 1.5 }]);
        assert!(matches!(err, Err(Error::GapOverlap(_))));
        let b = catalog::bimodal_halves(3.9);
        let err = b.localize(&[], &[], &[Gap { c: 0.25, side: Side::Plus, far: 0.8 }]);
        assert!(matches!(err, Err(Error::GapOverlap(_))));
    }
}

//! Closed intervals with outward rounding, and finite unions of them.

use serde::{Deserialize, Serialize};

/// Next representable double below `x`.
pub fn next_down(x: f64) -> f64 {
    if x.is_nan() || x == f64::NEG_INFINITY {
        return x;
    }
    if x == 0.0 {
        return -f64::from_bits(1);
    }
    let bits = x.to_bits();
    if x > 0.0 {
        f64::from_bits(bits - 1)
    } else {
        f64::from_bits(bits + 1)
    }
}

/// Next representable double above `x`.
pub fn next_up(x: f64) -> f64 {
    -next_down(-x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "inverted interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    /// Interval spanned by two values in either order.
    pub fn hull_of(a: f64, b: f64) -> Self {
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn unit() -> Self {
        Interval { lo: 0.0, hi: 1.0 }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interior(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    /// True when the open interiors meet.
    pub fn overlaps_open(&self, other: &Interval) -> bool {
        self.lo.max(other.lo) < self.hi.min(other.hi)
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    /// Widen by an absolute amount plus one ulp on each side.
    pub fn inflate(&self, abs: f64) -> Interval {
        Interval { lo: next_down(self.lo - abs), hi: next_up(self.hi + abs) }
    }

    pub fn clamp_unit(&self) -> Interval {
        Interval { lo: self.lo.clamp(0.0, 1.0), hi: self.hi.clamp(0.0, 1.0) }
    }
}

/// Sorted union of pairwise-disjoint closed intervals.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalUnion {
    parts: Vec<Interval>,
}

impl IntervalUnion {
    pub fn empty() -> Self {
        IntervalUnion { parts: Vec::new() }
    }

    pub fn from_intervals(mut parts: Vec<Interval>) -> Self {
        parts.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut merged: Vec<Interval> = Vec::with_capacity(parts.len());
        for p in parts {
            match merged.last_mut() {
                Some(last) if p.lo <= last.hi => last.hi = last.hi.max(p.hi),
                _ => merged.push(p),
            }
        }
        IntervalUnion { parts: merged }
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.parts.iter().map(Interval::width).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        let idx = self.parts.partition_point(|p| p.hi < x);
        self.parts.get(idx).is_some_and(|p| p.contains(x))
    }

    pub fn union(&self, other: &IntervalUnion) -> IntervalUnion {
        let mut all = self.parts.clone();
        all.extend_from_slice(&other.parts);
        IntervalUnion::from_intervals(all)
    }

    /// Merge parts separated by gaps no longer than `gap`.
    pub fn close_gaps(&self, gap: f64) -> IntervalUnion {
        let mut merged: Vec<Interval> = Vec::with_capacity(self.parts.len());
        for p in &self.parts {
            match merged.last_mut() {
                Some(last) if p.lo - last.hi <= gap => last.hi = last.hi.max(p.hi),
                _ => merged.push(*p),
            }
        }
        IntervalUnion { parts: merged }
    }

    /// Length of `target` not covered by this union.
    pub fn uncovered_length(&self, target: &IntervalUnion) -> f64 {
        let mut total = 0.0;
        for t in target.parts() {
            let mut covered = 0.0;
            for p in &self.parts {
                if let Some(i) = p.intersect(t) {
                    covered += i.width();
                }
            }
            total += (t.width() - covered).max(0.0);
        }
        total
    }

    /// Parts of `target` not covered by this union.
    pub fn uncovered(&self, target: &IntervalUnion) -> IntervalUnion {
        let mut out = Vec::new();
        for t in target.parts() {
            let mut cursor = t.lo;
            for p in &self.parts {
                if p.hi < cursor || p.lo > t.hi {
                    continue;
                }
                if p.lo > cursor {
                    out.push(Interval::new(cursor, p.lo));
                }
                cursor = cursor.max(p.hi);
            }
            if cursor < t.hi {
                out.push(Interval::new(cursor, t.hi));
            }
        }
        IntervalUnion { parts: out }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ulp_steps_bracket() {
        for x in [0.0, 1.0, 0.5, 1e-300, -2.5] {
            assert!(next_down(x) < x && x < next_up(x));
        }
    }

    #[test]
    fn union_merges_overlaps() {
        let u = IntervalUnion::from_intervals(vec![
            Interval::new(0.5, 0.7),
            Interval::new(0.0, 0.2),
            Interval::new(0.1, 0.3),
        ]);
        assert_eq!(u.len(), 2);
        assert_eq!(u.parts()[0], Interval::new(0.0, 0.3));
        assert!(u.contains(0.6) && !u.contains(0.4));
    }

    #[test]
    fn uncovered_parts() {
        let cover = IntervalUnion::from_intervals(vec![Interval::new(0.1, 0.4), Interval::new(0.6, 1.0)]);
        let target = IntervalUnion::from_intervals(vec![Interval::unit()]);
        let gap = cover.uncovered(&target);
        assert_eq!(gap.len(), 2);
        assert!((cover.uncovered_length(&target) - 0.3).abs() < 1e-12);
    }
}

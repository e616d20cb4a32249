//! Dyadic rationals `m·2^e` on big integers, with directed rounding to a
//! fixed absolute precision, exact polynomial evaluation and inner-rounded
//! branch inverses.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_traits::{Signed, ToPrimitive, Zero};

use crate::expr::Form;
use crate::interval::{next_down, next_up, Interval};
use crate::map::{Branch, Piece};

/// Bits kept below the width of an interval when choosing its precision.
pub const GUARD_BITS: u64 = 64;
const NEWTON_EXTRA: u64 = 32;
const MAX_NEWTON: usize = 200;
const MAX_NUDGES: usize = 256;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dyadic {
    m: BigInt,
    e: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Round {
    Down,
    Up,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic { m: BigInt::zero(), e: 0 }
    }

    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "dyadic from non-finite {x}");
        if x == 0.0 {
            return Dyadic::zero();
        }
        let bits = x.to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
        let m = BigInt::from(mant);
        Dyadic { m: if x < 0.0 { -m } else { m }, e }.normalized()
    }

    fn normalized(mut self) -> Self {
        if self.m.is_zero() {
            self.e = 0;
            return self;
        }
        let tz = self.m.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.m >>= tz;
            self.e += tz as i64;
        }
        self
    }

    fn aligned(&self, e: i64) -> BigInt {
        debug_assert!(e <= self.e);
        &self.m << (self.e - e) as usize
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        let e = self.e.min(other.e);
        Dyadic { m: self.aligned(e) + other.aligned(e), e }.normalized()
    }

    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        let e = self.e.min(other.e);
        Dyadic { m: self.aligned(e) - other.aligned(e), e }.normalized()
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        Dyadic { m: &self.m * &other.m, e: self.e + other.e }.normalized()
    }

    pub fn half(&self) -> Dyadic {
        Dyadic { m: self.m.clone(), e: self.e - 1 }.normalized()
    }

    /// `2^-p`.
    pub fn ulp(p: u64) -> Dyadic {
        Dyadic { m: BigInt::from(1), e: -(p as i64) }
    }

    pub fn is_negative(&self) -> bool {
        self.m.is_negative()
    }

    /// Round to a multiple of `2^-p`.
    pub fn round(&self, p: u64, dir: Round) -> Dyadic {
        let target = -(p as i64);
        if self.e >= target {
            return self.clone();
        }
        let shift = (target - self.e) as usize;
        // `>>` on BigInt rounds toward negative infinity.
        let floor = &self.m >> shift;
        let m = match dir {
            Round::Down => floor,
            Round::Up => {
                if (&floor << shift) == self.m {
                    floor
                } else {
                    floor + 1
                }
            }
        };
        Dyadic { m, e: target }.normalized()
    }

    /// `⌊log2 |x|⌋`, or `None` at zero.
    pub fn log2_floor(&self) -> Option<i64> {
        (!self.m.is_zero()).then(|| self.m.bits() as i64 - 1 + self.e)
    }

    /// Nearest double, within one ulp.
    fn approx(&self) -> f64 {
        if self.m.is_zero() {
            return 0.0;
        }
        let bits = self.m.bits() as i64;
        let shift = (bits - 64).max(0);
        let top = (&self.m >> shift as usize).to_i128().expect("64-bit mantissa");
        let scale = self.e + shift;
        ldexp(top as f64, scale)
    }

    pub fn to_f64(&self, dir: Round) -> f64 {
        let mut x = self.approx();
        match dir {
            Round::Down => {
                while Dyadic::from_f64(x).cmp(self) == Ordering::Greater {
                    x = next_down(x);
                }
            }
            Round::Up => {
                while Dyadic::from_f64(x).cmp(self) == Ordering::Less {
                    x = next_up(x);
                }
            }
        }
        x
    }

    /// `0x<hex mantissa>p<exponent>`, exact.
    pub fn to_hex(&self) -> String {
        let sign = if self.m.is_negative() { "-" } else { "" };
        format!("{sign}0x{}p{}", self.m.abs().to_str_radix(16), self.e)
    }

    pub fn parse_hex(text: &str) -> Option<Dyadic> {
        let (neg, rest) = match text.strip_prefix('-') {
            Some(r) => (true, r),
            None => (false, text),
        };
        let rest = rest.strip_prefix("0x")?;
        let (mant, exp) = rest.split_once('p')?;
        let m = BigInt::parse_bytes(mant.as_bytes(), 16)?;
        let e: i64 = exp.parse().ok()?;
        Some(Dyadic { m: if neg { -m } else { m }, e }.normalized())
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.m.sign(), other.m.sign()) {
            (a, b) if a != b => sign_rank(a).cmp(&sign_rank(b)),
            _ => {
                let e = self.e.min(other.e);
                self.aligned(e).cmp(&other.aligned(e))
            }
        }
    }
}

fn sign_rank(s: Sign) -> i8 {
    match s {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Closed interval with dyadic endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyInterval {
    pub lo: Dyadic,
    pub hi: Dyadic,
}

impl DyInterval {
    pub fn new(lo: Dyadic, hi: Dyadic) -> Self {
        assert!(lo <= hi, "dyadic interval with lo > hi");
        DyInterval { lo, hi }
    }

    pub fn from_interval(iv: Interval) -> Self {
        DyInterval::new(Dyadic::from_f64(iv.lo), Dyadic::from_f64(iv.hi))
    }

    pub fn point(x: Dyadic) -> Self {
        DyInterval { lo: x.clone(), hi: x }
    }

    pub fn width(&self) -> Dyadic {
        self.hi.sub(&self.lo)
    }

    pub fn mid(&self) -> Dyadic {
        self.lo.add(&self.hi).half()
    }

    /// Outward double enclosure.
    pub fn outward(&self) -> Interval {
        Interval::new(self.lo.to_f64(Round::Down), self.hi.to_f64(Round::Up))
    }

    pub fn contains(&self, other: &DyInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// `other` lies in the interior with `margin` to spare on each side.
    pub fn contains_with_margin(&self, other: &DyInterval, margin: &Dyadic) -> bool {
        self.lo.add(margin) <= other.lo && other.hi.add(margin) <= self.hi
    }

    pub fn round_outward(&self, p: u64) -> DyInterval {
        DyInterval { lo: self.lo.round(p, Round::Down), hi: self.hi.round(p, Round::Up) }
    }
}

/// Absolute precision for an interval of the given width: at least
/// [`GUARD_BITS`] bits below it, doubled from 64.
pub fn precision_for(width: &Dyadic) -> u64 {
    let need = match width.log2_floor() {
        Some(l) => (GUARD_BITS as i64 - l).max(64) as u64,
        None => GUARD_BITS,
    };
    let mut p = 64;
    while p < need {
        p *= 2;
    }
    p
}

/// Polynomial with exact dyadic coefficients (ascending order).
#[derive(Clone, Debug)]
pub struct DyPoly {
    coeffs: Vec<Dyadic>,
    deriv: Vec<Dyadic>,
}

impl DyPoly {
    pub fn new(coeffs: &[f64]) -> Self {
        DyPoly::from_dyadic(coeffs.iter().map(|&c| Dyadic::from_f64(c)).collect())
    }

    pub fn from_dyadic(coeffs: Vec<Dyadic>) -> Self {
        let deriv = coeffs.iter().enumerate().skip(1).map(|(i, c)| c.mul(&Dyadic::from_f64(i as f64))).collect();
        DyPoly { coeffs, deriv }
    }

    fn product(a: &[Dyadic], b: &[Dyadic]) -> Vec<Dyadic> {
        let mut out = vec![Dyadic::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] = out[i + j].add(&x.mul(y));
            }
        }
        out
    }

    /// `offset + scale·(sign·inner)^k`, expanded exactly.
    fn power(offset: f64, scale: f64, inner: &[f64], sign: f64, k: usize) -> Self {
        let base: Vec<Dyadic> = inner.iter().map(|&c| Dyadic::from_f64(sign * c)).collect();
        let mut acc = vec![Dyadic::from_f64(scale)];
        for _ in 0..k {
            acc = DyPoly::product(&acc, &base);
        }
        acc[0] = acc[0].add(&Dyadic::from_f64(offset));
        DyPoly::from_dyadic(acc)
    }

    fn horner(coeffs: &[Dyadic], x: &Dyadic) -> Dyadic {
        coeffs.iter().rev().fold(Dyadic::zero(), |acc, c| acc.mul(x).add(c))
    }

    /// Exact value.
    pub fn eval(&self, x: &Dyadic) -> Dyadic {
        DyPoly::horner(&self.coeffs, x)
    }

    pub fn eval_derivative(&self, x: &Dyadic) -> Dyadic {
        DyPoly::horner(&self.deriv, x)
    }

    /// Root of `p(x) = y` near `guess` to about `2^-p`, by Newton steps with
    /// a Newton-refined reciprocal of the derivative. `None` if it stalls.
    pub fn solve(&self, y: &Dyadic, guess: f64, p: u64) -> Option<Dyadic> {
        let full = p + NEWTON_EXTRA;
        let d0 = self.eval_derivative(&Dyadic::from_f64(guess)).approx();
        if d0 == 0.0 || !d0.is_finite() {
            return None;
        }
        let mut x = Dyadic::from_f64(guess);
        let mut r = Dyadic::from_f64(1.0 / d0);
        let two = Dyadic::from_f64(2.0);
        let tol = Dyadic::ulp(p + 2);
        // Working precision doubles until it reaches `full`.
        let mut work = 64.min(full);
        for _ in 0..MAX_NEWTON {
            let yw = y.round(work + 8, Round::Down);
            let residual = self.eval(&x).sub(&yw);
            let step = residual.mul(&r).round(work, Round::Down);
            x = x.sub(&step).round(work, Round::Down);
            let d = self.eval_derivative(&x);
            r = r.mul(&two.sub(&d.mul(&r))).round(work, Round::Down);
            if work < full {
                work = (2 * work).min(full);
                continue;
            }
            let size = if step.is_negative() { Dyadic::zero().sub(&step) } else { step };
            if size <= tol {
                return Some(x.round(p, Round::Down));
            }
        }
        None
    }
}

/// Largest integer exponent expanded into a polynomial.
const MAX_POWER: f64 = 8.0;
const ZERO_SLACK: f64 = 1e-12;

/// Monotone polynomial branch on a closed dyadic domain.
#[derive(Clone, Debug)]
pub struct DyBranch {
    pub poly: DyPoly,
    pub domain: DyInterval,
    pub increasing: bool,
    /// The double-precision branch, for Newton starting points.
    pub float: Branch,
}

impl DyBranch {
    /// `None` unless the branch is a single piece that is a polynomial or
    /// an integer power of a polynomial keeping one sign on the domain.
    pub fn new(branch: &Branch) -> Option<Self> {
        let domain = DyInterval::from_interval(branch.domain);
        let poly = match branch.pieces.as_slice() {
            [Piece { form: Form::Poly { poly }, .. }] => DyPoly::new(&poly.coeffs),
            [Piece { form: Form::Power { offset, scale, inner, exponent }, .. }] => {
                if exponent.fract() != 0.0 || *exponent < 1.0 || *exponent > MAX_POWER {
                    return None;
                }
                let sign = if inner.eval(branch.domain.mid()) < 0.0 { -1.0 } else { 1.0 };
                // The zero of `inner` sits at a domain end up to rounding of
                // its coefficients; the expansion is off by that much there.
                let signed = |x: f64| sign * inner.eval(x);
                if signed(branch.domain.lo) < -ZERO_SLACK || signed(branch.domain.hi) < -ZERO_SLACK {
                    return None;
                }
                DyPoly::power(*offset, *scale, &inner.coeffs, sign, *exponent as usize)
            }
            _ => return None,
        };
        Some(DyBranch { poly, domain, increasing: branch.increasing, float: branch.clone() })
    }

    /// Exact image of `iv ⊆ domain`, rounded outward to `p`.
    pub fn image(&self, iv: &DyInterval, p: u64) -> DyInterval {
        let (a, b) = (self.poly.eval(&iv.lo), self.poly.eval(&iv.hi));
        let (lo, hi) = if self.increasing { (a, b) } else { (b, a) };
        DyInterval { lo: lo.round(p, Round::Down), hi: hi.round(p, Round::Up) }
    }

    /// Exact image without rounding.
    pub fn image_exact(&self, iv: &DyInterval) -> DyInterval {
        let (a, b) = (self.poly.eval(&iv.lo), self.poly.eval(&iv.hi));
        if self.increasing {
            DyInterval { lo: a, hi: b }
        } else {
            DyInterval { lo: b, hi: a }
        }
    }

    /// Preimage of `y` by exact bisection on the domain, to `2^-p`. Slow;
    /// used near folds where Newton starts badly.
    fn bisect(&self, y: &Dyadic, p: u64) -> Option<Dyadic> {
        let (mut lo, mut hi) = (self.domain.lo.clone(), self.domain.hi.clone());
        let tol = Dyadic::ulp(p);
        while hi.sub(&lo) > tol {
            let mid = lo.add(&hi).half();
            let below = self.poly.eval(&mid) < *y;
            if below == self.increasing {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(lo)
    }

    /// An interval inside the domain whose exact image lies in `target`,
    /// endpoints within a few `2^-p` of the true preimage. `None` if the
    /// target misses the range or the solver stalls.
    pub fn pull_back(&self, target: &DyInterval, p: u64) -> Option<DyInterval> {
        let range = self.image_exact(&self.domain);
        let lo_t = if target.lo > range.lo { target.lo.clone() } else { range.lo.clone() };
        let hi_t = if target.hi < range.hi { target.hi.clone() } else { range.hi.clone() };
        if lo_t > hi_t {
            return None;
        }
        // Preimages of the target's lower and upper ends.
        let at = |y: &Dyadic, clamp_low: bool| -> Option<Dyadic> {
            let on_range_end = if clamp_low { *y == range.lo } else { *y == range.hi };
            if on_range_end {
                let at_domain_lo = clamp_low == self.increasing;
                return Some(if at_domain_lo { self.domain.lo.clone() } else { self.domain.hi.clone() });
            }
            let g = self.float.inverse(y.approx());
            self.poly.solve(y, g, p).or_else(|| self.bisect(y, p))
        };
        let x_lo_t = at(&lo_t, true)?;
        let x_hi_t = at(&hi_t, false)?;
        let (mut left, mut right) = if self.increasing { (x_lo_t, x_hi_t) } else { (x_hi_t, x_lo_t) };
        let ulp = Dyadic::ulp(p);
        let inside = |x: &Dyadic| {
            let v = self.poly.eval(x);
            lo_t <= v && v <= hi_t
        };
        left = max(&left.round(p, Round::Up), &self.domain.lo);
        right = min(&right.round(p, Round::Down), &self.domain.hi);
        let mut nudges = 0;
        while !inside(&left) {
            left = left.add(&ulp);
            nudges += 1;
            if nudges > MAX_NUDGES {
                return None;
            }
        }
        while !inside(&right) {
            right = right.sub(&ulp);
            nudges += 1;
            if nudges > MAX_NUDGES {
                return None;
            }
        }
        (left <= right).then(|| DyInterval::new(left, right))
    }
}

/// `x·2^e` without intermediate underflow.
fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 0 && x.is_finite() {
        let s = e.min(512);
        x *= 2f64.powi(s as i32);
        e -= s;
    }
    while e < 0 && x != 0.0 {
        let s = e.max(-512);
        x *= 2f64.powi(s as i32);
        e -= s;
    }
    x
}

fn max(a: &Dyadic, b: &Dyadic) -> Dyadic {
    if a >= b { a.clone() } else { b.clone() }
}

fn min(a: &Dyadic, b: &Dyadic) -> Dyadic {
    if a <= b { a.clone() } else { b.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_power_branches_expand() {
        let map = crate::catalog::lorenz_default();
        for b in map.branches() {
            let dy = DyBranch::new(b).expect("affine power branches convert");
            for k in 1..10 {
                let x = b.domain.lo + b.domain.width() * k as f64 / 10.0;
                let exact = dy.poly.eval(&Dyadic::from_f64(x)).approx();
                assert!((exact - b.eval(x)).abs() < 1e-15, "{x}: {exact} vs {}", b.eval(x));
            }
        }
        let sqrt_like = crate::map::Branch::new(0.0, 0.5, Form::power(0.0, 1.0, vec![0.0, 2.0], 1.5), true);
        assert!(DyBranch::new(&sqrt_like).is_none());
    }

    #[test]
    fn f64_round_trip_and_hex() {
        for x in [0.0, 1.0, -0.75, 1e-300, 5e-324, 0.1, 123456.789] {
            let d = Dyadic::from_f64(x);
            assert_eq!(d.to_f64(Round::Down), x);
            assert_eq!(d.to_f64(Round::Up), x);
            assert_eq!(Dyadic::parse_hex(&d.to_hex()), Some(d));
        }
    }

    #[test]
    fn directed_rounding_brackets() {
        let third = Dyadic::from_f64(1.0).mul(&Dyadic::from_f64(1.0 / 3.0));
        let x = third.mul(&third);
        for p in [3, 10, 80, 200] {
            assert!(x.round(p, Round::Down) <= x && x <= x.round(p, Round::Up));
            let neg = Dyadic::zero().sub(&x);
            assert!(neg.round(p, Round::Down) <= neg && neg <= neg.round(p, Round::Up));
        }
        assert!(x.to_f64(Round::Down) < x.to_f64(Round::Up));
    }

    #[test]
    fn newton_finds_quadratic_root() {
        // 4x(1 − x) = 1/2 has root (1 − √(1/2))/2 on the left branch.
        let p = DyPoly::new(&[0.0, 4.0, -4.0]);
        let y = Dyadic::from_f64(0.5);
        let exact = (1.0 - 0.5f64.sqrt()) / 2.0;
        let x = p.solve(&y, exact * (1.0 + 1e-9), 400).unwrap();
        let r = p.eval(&x).sub(&y);
        assert!(r.log2_floor().unwrap_or(i64::MIN) < -395);
    }
}

//! Observables `φ: [0,1] → ℝ` given as specs rather than callbacks, so they
//! can be enclosed over intervals and averaged over periodic orbits.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Poly;
use crate::interval::Interval;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Observable {
    Constant { value: f64 },
    Polynomial { coeffs: Vec<f64> },
    /// Linear interpolation through `(x, y)` knots sorted by `x`, covering `[0,1]`.
    PiecewiseLinear { knots: Vec<(f64, f64)> },
}

impl Observable {
    pub fn identity() -> Self {
        Observable::Polynomial { coeffs: vec![0.0, 1.0] }
    }

    pub fn constant(value: f64) -> Self {
        Observable::Constant { value }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Observable::Constant { value } => *value,
            Observable::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c),
            Observable::PiecewiseLinear { knots } => {
                let i = knots.partition_point(|k| k.0 <= x).clamp(1, knots.len() - 1);
                let (x0, y0) = knots[i - 1];
                let (x1, y1) = knots[i];
                if x1 == x0 {
                    y1
                } else {
                    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
                }
            }
        }
    }

    /// Bound on `|φ'|` over `[0,1]`.
    pub fn lipschitz(&self) -> f64 {
        match self {
            Observable::Constant { .. } => 0.0,
            Observable::Polynomial { coeffs } => {
                coeffs.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c.abs()).sum()
            }
            Observable::PiecewiseLinear { knots } => knots
                .windows(2)
                .filter(|w| w[1].0 > w[0].0)
                .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
                .fold(0.0, f64::max),
        }
    }

    /// Rigorous enclosure of `φ(iv)`.
    pub fn enclose(&self, iv: Interval) -> Interval {
        match self {
            Observable::Constant { value } => Interval::point(*value),
            Observable::Polynomial { coeffs } => {
                let p = Poly::new(coeffs.clone());
                let a = p.eval(iv.lo);
                let b = p.eval(iv.hi);
                let m = p.eval(iv.mid());
                let err = p.error_bound(iv.lo.abs().max(iv.hi.abs()));
                let range = if is_monotone(&p, iv) {
                    Interval::hull_of(a, b)
                } else {
                    let spread = self.lipschitz() * iv.width() * 0.5;
                    Interval::new(m - spread, m + spread)
                };
                range.inflate(err + f64::EPSILON * (range.lo.abs().max(range.hi.abs())))
            }
            Observable::PiecewiseLinear { knots } => {
                let mut out = Interval::hull_of(self.eval(iv.lo), self.eval(iv.hi));
                for &(x, y) in knots {
                    if iv.contains(x) {
                        out = out.hull(&Interval::point(y));
                    }
                }
                out.inflate(4.0 * f64::EPSILON * out.lo.abs().max(out.hi.abs()))
            }
        }
    }

    /// `(min φ, max φ)` over `[0,1]`, outward.
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            Observable::Constant { value } => (*value, *value),
            Observable::PiecewiseLinear { knots } => knots
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), k| (lo.min(k.1), hi.max(k.1))),
            Observable::Polynomial { .. } => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                let n = 256;
                for i in 0..n {
                    let e = self.enclose(Interval::new(i as f64 / n as f64, (i + 1) as f64 / n as f64));
                    lo = lo.min(e.lo);
                    hi = hi.max(e.hi);
                }
                (lo, hi)
            }
        }
    }

    /// Parse `x`, `const:κ`, `poly:c0,c1,…` or `pl:x0:y0,x1:y1,…`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let bad = |m: String| Error::Parse { line: 1, column: 1, message: m };
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(format!("bad number '{s}'")));
        if text == "x" {
            return Ok(Observable::identity());
        }
        let (kind, rest) = text.split_once(':').ok_or_else(|| bad(format!("unknown observable '{text}'")))?;
        match kind {
            "const" => Ok(Observable::Constant { value: num(rest)? }),
            "poly" => Ok(Observable::Polynomial { coeffs: rest.split(',').map(num).collect::<Result<_>>()? }),
            "pl" => {
                let knots: Vec<(f64, f64)> = rest
                    .split(',')
                    .map(|kv| {
                        let (a, b) = kv.split_once(':').ok_or_else(|| bad(format!("bad knot '{kv}'")))?;
                        Ok((num(a)?, num(b)?))
                    })
                    .collect::<Result<_>>()?;
                if knots.len() < 2 || knots.windows(2).any(|w| w[1].0 < w[0].0) {
                    return Err(bad("knots must be sorted and at least two".into()));
                }
                if knots[0].0 > 0.0 || knots[knots.len() - 1].0 < 1.0 {
                    return Err(bad("knots must cover [0,1]".into()));
                }
                Ok(Observable::PiecewiseLinear { knots })
            }
            _ => Err(bad(format!("unknown observable kind '{kind}'"))),
        }
    }
}

fn is_monotone(p: &Poly, iv: Interval) -> bool {
    // Sign of the derivative is constant if its enclosure avoids zero.
    let d = p.derivative();
    let m = d.eval(iv.mid());
    let l: f64 = d.derivative().coeffs.iter().enumerate().map(|(i, c)| c.abs() * iv.lo.abs().max(iv.hi.abs()).powi(i as i32)).sum();
    m.abs() > l * iv.width() * 0.5 + d.error_bound(iv.mid())
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::Constant { value } => write!(f, "const:{value}"),
            Observable::Polynomial { coeffs } if coeffs.as_slice() == [0.0, 1.0] => write!(f, "x"),
            Observable::Polynomial { coeffs } => {
                let s: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
                write!(f, "poly:{}", s.join(","))
            }
            Observable::PiecewiseLinear { knots } => {
                let s: Vec<String> = knots.iter().map(|(x, y)| format!("{x}:{y}")).collect();
                write!(f, "pl:{}", s.join(","))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_round_trip() {
        for s in ["x", "const:0.3", "poly:1,0,-2", "pl:0:0,0.5:1,1:0"] {
            let o = Observable::parse(s).unwrap();
            assert_eq!(o.to_string(), s);
        }
        assert!(Observable::parse("pl:0:0,0.5:1").is_err());
        assert_eq!(Observable::parse("pl:0:0,0.5:1,1:0").unwrap().eval(0.25), 0.5);
    }

    proptest! {
        #[test]
        fn enclosure_contains_values(a in 0.0f64..1.0, w in 0.0f64..0.5, t in 0.0f64..1.0) {
            let iv = Interval::new(a, (a + w).min(1.0));
            let x = iv.lo + t * iv.width();
            for o in [Observable::identity(), Observable::parse("poly:0.1,-3,2,5").unwrap(),
                      Observable::parse("pl:0:0,0.3:1,1:-1").unwrap()] {
                prop_assert!(o.enclose(iv).contains(o.eval(x)));
            }
        }
    }
}

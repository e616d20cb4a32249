//! Closed-form branch expressions: polynomials and power composites
//! `a + s·|φ(x)|^α`, with derivatives and rounding-error bounds.

use serde::{Deserialize, Serialize};

const UNIT_ROUNDOFF: f64 = f64::EPSILON * 0.5;

fn gamma(k: usize) -> f64 {
    let ku = k as f64 * UNIT_ROUNDOFF;
    ku / (1.0 - ku)
}

/// Polynomial with coefficients in ascending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poly {
    pub coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Poly { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::new(vec![0.0]);
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    /// A priori bound on the Horner rounding error at `x`.
    pub fn error_bound(&self, x: f64) -> f64 {
        let ax = x.abs();
        let magnitude = self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * ax + c.abs());
        gamma(2 * self.degree() + 1) * magnitude
    }

    /// Coefficients of `p(c + t)` as a polynomial in `t`.
    pub fn taylor_shift(&self, c: f64) -> Vec<f64> {
        let mut out = self.coeffs.clone();
        let n = out.len();
        for i in 0..n {
            for j in (i..n - 1).rev() {
                out[j] += c * out[j + 1];
            }
        }
        out
    }

    /// Sum of absolute coefficients, used as a scale for zero tests.
    pub fn scale(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum::<f64>().max(1.0)
    }
}

/// A single closed-form piece.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Form {
    Poly { poly: Poly },
    /// `offset + scale·|inner(x)|^exponent`, exponent ≥ 1.
    Power { offset: f64, scale: f64, inner: Poly, exponent: f64 },
}

impl Form {
    pub fn poly(coeffs: Vec<f64>) -> Self {
        Form::Poly { poly: Poly::new(coeffs) }
    }

    pub fn power(offset: f64, scale: f64, inner: Vec<f64>, exponent: f64) -> Self {
        Form::Power { offset, scale, inner: Poly::new(inner), exponent }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Form::Poly { poly } => poly.eval(x),
            Form::Power { offset, scale, inner, exponent } => {
                offset + scale * inner.eval(x).abs().powf(*exponent)
            }
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            Form::Poly { poly } => poly.derivative().eval(x),
            Form::Power { scale, inner, exponent, .. } => {
                let u = inner.eval(x);
                let du = inner.derivative().eval(x);
                if u == 0.0 {
                    return if *exponent == 1.0 { scale * du.abs() } else { 0.0 };
                }
                scale * exponent * u.abs().powf(exponent - 1.0) * u.signum() * du
            }
        }
    }

    /// Bound on |computed − exact| at `x`.
    pub fn error_bound(&self, x: f64) -> f64 {
        match self {
            Form::Poly { poly } => poly.error_bound(x) + f64::MIN_POSITIVE,
            Form::Power { offset, scale, inner, exponent } => {
                let u = inner.eval(x).abs();
                let eu = inner.error_bound(x);
                let pw = u.powf(*exponent);
                let upper = (u + eu).powf(*exponent);
                let propagated = (upper - pw).max(exponent * u.powf(exponent - 1.0) * eu);
                let term = scale.abs() * (propagated + 4.0 * UNIT_ROUNDOFF * upper);
                term + 2.0 * UNIT_ROUNDOFF * (offset.abs() + scale.abs() * upper) + f64::MIN_POSITIVE
            }
        }
    }

    /// Whether the expression may be evaluated on all of `[lo, hi]` without NaN.
    pub fn is_finite_on(&self, lo: f64, hi: f64) -> bool {
        (0..=64).all(|i| {
            let x = lo + (hi - lo) * i as f64 / 64.0;
            self.eval(x).is_finite()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horner_and_derivative() {
        let p = Poly::new(vec![0.0, 4.0, -4.0]);
        assert_eq!(p.eval(0.25), 0.75);
        assert_eq!(p.derivative().eval(0.5), 0.0);
        assert_eq!(p.degree(), 2);
    }

    #[test]
    fn taylor_shift_of_logistic_at_half() {
        let p = Poly::new(vec![0.0, 4.0, -4.0]);
        let t = p.taylor_shift(0.5);
        assert!((t[0] - 1.0).abs() < 1e-15);
        assert!(t[1].abs() < 1e-15);
        assert!((t[2] + 4.0).abs() < 1e-15);
    }

    #[test]
    fn power_form_values() {
        // 1 - 0.5·|(0.5 - x)/0.5|^2
        let f = Form::power(1.0, -0.5, vec![1.0, -2.0], 2.0);
        assert!((f.eval(0.5) - 1.0).abs() < 1e-15);
        assert!((f.eval(0.0) - 0.5).abs() < 1e-15);
        let h = 1e-6;
        let fd = (f.eval(0.2 + h) - f.eval(0.2 - h)) / (2.0 * h);
        assert!((fd - f.derivative(0.2)).abs() < 1e-6);
    }

    #[test]
    fn error_bound_covers_exact_rational_value() {
        // 4x(1-x) at x = 1/3 is 8/9; compare in f64 against a bound.
        let p = Poly::new(vec![0.0, 4.0, -4.0]);
        let x = 1.0 / 3.0;
        let exact_at_rounded_x = 4.0 * x - 4.0 * x * x;
        assert!((p.eval(x) - exact_at_rounded_x).abs() <= 2.0 * p.error_bound(x));
    }
}

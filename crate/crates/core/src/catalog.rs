//! Bundled map families.

use serde::{Deserialize, Serialize};

use crate::expr::Form;
use crate::map::{Branch, PiecewiseMap};

/// Contracting Lorenz map defaults. Both branches are affine with slope
/// `1 − gap`, so images of the gap shrink slowly enough to stay resolvable in
/// double precision for well over 10⁴ steps. The shift is tuned so the
/// rotation number sits at `(3 − √5)/2` up to plateaus of period above 10⁴.
pub const LORENZ_ALPHA: f64 = 1.0;
pub const LORENZ_GAP: f64 = 1e-3;
pub const LORENZ_SHIFT: f64 = 0.381_466_043_133_672_94;
/// `(1 − shift − gap) / (1 − gap)`, which equalises the two slopes.
pub const LORENZ_C: f64 = 0.618_152_108_975_302_37;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Logistic { lambda: f64 },
    Tent { slope: f64 },
    Doubling,
    Lorenz { c: f64, alpha: f64, shift: f64, gap: f64 },
    BimodalHalves { lambda: f64 },
    Chebyshev3,
    Contraction,
}

impl Family {
    pub fn build(&self) -> PiecewiseMap {
        match *self {
            Family::Logistic { lambda } => logistic(lambda),
            Family::Tent { slope } => tent(slope),
            Family::Doubling => doubling(),
            Family::Lorenz { c, alpha, shift, gap } => lorenz(c, alpha, shift, gap),
            Family::BimodalHalves { lambda } => bimodal_halves(lambda),
            Family::Chebyshev3 => chebyshev3(),
            Family::Contraction => contraction(),
        }
    }
}

fn build(name: String, branches: Vec<Branch>) -> PiecewiseMap {
    PiecewiseMap::new(name, branches).expect("catalog maps are valid")
}

/// `λx(1 − x)` with turning point 1/2.
pub fn logistic(lambda: f64) -> PiecewiseMap {
    let f = || Form::poly(vec![0.0, lambda, -lambda]);
    build(
        format!("logistic({lambda})"),
        vec![Branch::new(0.0, 0.5, f(), true), Branch::new(0.5, 1.0, f(), false)],
    )
}

pub fn tent(slope: f64) -> PiecewiseMap {
    build(
        format!("tent({slope})"),
        vec![
            Branch::new(0.0, 0.5, Form::poly(vec![0.0, slope]), true),
            Branch::new(0.5, 1.0, Form::poly(vec![slope, -slope]), false),
        ],
    )
}

/// `x ↦ 2x mod 1` with the discontinuity at 1/2; `f(1) = 1`.
pub fn doubling() -> PiecewiseMap {
    build(
        "doubling".into(),
        vec![
            Branch::new(0.0, 0.5, Form::poly(vec![0.0, 2.0]), true),
            Branch::new(0.5, 1.0, Form::poly(vec![-1.0, 2.0]), true),
        ],
    )
}

/// `x ↦ x/2` with a formal critical point at 1/2 (global contraction to 0).
pub fn contraction() -> PiecewiseMap {
    build(
        "contraction".into(),
        vec![
            Branch::new(0.0, 0.5, Form::poly(vec![0.0, 0.5]), true),
            Branch::new(0.5, 1.0, Form::poly(vec![0.0, 0.5]), true),
        ],
    )
}

/// Contracting Lorenz gap map: both branches increasing, `f(c−) = 1`,
/// `f(c+) = 0`, `f(0) = shift + gap`, `f(1) = shift`. The interval
/// `(shift, shift + gap)` is not in the image.
pub fn lorenz(c: f64, alpha: f64, shift: f64, gap: f64) -> PiecewiseMap {
    let top = shift + gap;
    let left = Form::power(1.0, -(1.0 - top), vec![1.0, -1.0 / c], alpha);
    let right = Form::power(0.0, shift, vec![-c / (1.0 - c), 1.0 / (1.0 - c)], alpha);
    build(
        format!("lorenz(c={c},alpha={alpha},shift={shift},gap={gap})"),
        vec![Branch::new(0.0, c, left, true), Branch::new(c, 1.0, right, true)],
    )
}

pub fn lorenz_default() -> PiecewiseMap {
    lorenz(LORENZ_C, LORENZ_ALPHA, LORENZ_SHIFT, LORENZ_GAP)
}

/// Bimodal map whose halves `[0,1/2]` and `[1/2,1]` are each invariant and
/// carry a copy of the logistic map with parameter `lambda`.
pub fn bimodal_halves(lambda: f64) -> PiecewiseMap {
    let left = Form::poly(vec![0.5, -lambda, 2.0 * lambda]);
    let right = Form::poly(vec![0.5 - lambda, 3.0 * lambda, -2.0 * lambda]);
    let middle = Branch {
        domain: crate::interval::Interval::new(0.25, 0.75),
        pieces: vec![
            crate::map::Piece { start: 0.25, form: left.clone() },
            crate::map::Piece { start: 0.5, form: right.clone() },
        ],
        increasing: true,
    };
    build(
        format!("bimodal_halves({lambda})"),
        vec![Branch::new(0.0, 0.25, left, false), middle, Branch::new(0.75, 1.0, right, false)],
    )
}

/// Full three-lap cubic `16x³ − 24x² + 9x` (Chebyshev T₃ on [0,1]).
pub fn chebyshev3() -> PiecewiseMap {
    let f = || Form::poly(vec![0.0, 9.0, -24.0, 16.0]);
    build(
        "chebyshev3".into(),
        vec![
            Branch::new(0.0, 0.25, f(), true),
            Branch::new(0.25, 0.75, f(), false),
            Branch::new(0.75, 1.0, f(), true),
        ],
    )
}

/// Rotation number of a degree-one increasing gap map (Lorenz-type, single
/// discontinuity), from the lift over `n` steps.
pub fn rotation_number(map: &PiecewiseMap, x0: f64, n: usize) -> f64 {
    let c = map.critical()[0];
    let mut x = x0;
    let mut turns = 0u64;
    for _ in 0..n {
        if x >= c {
            turns += 1;
        }
        x = map.eval_unchecked(x);
    }
    turns as f64 / n as f64
}

fn superstable_residual(lambda: f64, period: usize) -> f64 {
    let mut x = 0.5;
    for _ in 0..period {
        x = lambda * x * (1.0 - x);
    }
    x - 0.5
}

/// Superstable parameters of the logistic period-doubling cascade: `s_k`
/// where 1/2 has period `2^k`.
pub fn superstable_parameters(levels: usize) -> Vec<f64> {
    let mut s = vec![2.0, 1.0 + 5f64.sqrt()];
    let mut ratio = 4.669;
    while s.len() < levels {
        let k = s.len();
        let step = (s[k - 1] - s[k - 2]) / ratio;
        let guess = s[k - 1] + step;
        let period = 1usize << k;
        let (mut a, mut b) = (guess - 0.4 * step, guess + 0.4 * step);
        let mut fa = superstable_residual(a, period);
        let fb = superstable_residual(b, period);
        assert!(fa * fb < 0.0, "superstable bracket lost at level {k}");
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = superstable_residual(m, period);
            if fm * fa <= 0.0 {
                b = m;
            } else {
                a = m;
                fa = fm;
            }
        }
        let root = 0.5 * (a + b);
        if k >= 3 {
            ratio = (s[k - 1] - s[k - 2]) / (root - s[k - 1]);
        }
        s.push(root);
    }
    s
}

/// Accumulation point of the period-doubling cascade, by geometric
/// extrapolation of the superstable parameters.
pub fn feigenbaum_parameter() -> f64 {
    let s = superstable_parameters(13);
    let n = s.len();
    let delta = (s[n - 2] - s[n - 3]) / (s[n - 1] - s[n - 2]);
    s[n - 1] + (s[n - 1] - s[n - 2]) / (delta - 1.0)
}

/// The acceptance catalog plus the Lorenz and bimodal maps.
pub fn standard_catalog() -> Vec<PiecewiseMap> {
    vec![
        logistic(3.2),
        logistic(3.5),
        logistic(3.83),
        logistic(feigenbaum_parameter()),
        logistic(4.0),
        tent(2.0),
        doubling(),
        lorenz_default(),
        bimodal_halves(3.9),
        chebyshev3(),
    ]
}

//! Random orbit starts.
//!
//! Maps whose branches are all `x ↦ 2x − k` or `x ↦ k − 2x` shift the binary
//! expansion by one digit per step, so double-precision iteration collapses
//! onto `0` after about 53 steps. For those maps a random start is simulated
//! as a random real: a 64-bit window of its expansion, refilled from the RNG.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::Form;
use crate::map::{OrbitResult, PiecewiseMap, Termination};

/// Per-branch action on binary digits: plain shift or shift then complement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Digit {
    Shift,
    Flip,
}

fn binary_actions(map: &PiecewiseMap) -> Option<[Digit; 2]> {
    if map.critical() != [0.5] {
        return None;
    }
    let mut out = [Digit::Shift; 2];
    for (i, b) in map.branches().iter().enumerate() {
        if b.pieces.len() != 1 {
            return None;
        }
        let Form::Poly { poly } = &b.pieces[0].form else { return None };
        let c = &poly.coeffs;
        if c.len() != 2 {
            return None;
        }
        out[i] = match (i, c[0], c[1]) {
            (0, a, s) if a == 0.0 && s == 2.0 => Digit::Shift,
            (0, a, s) if a == 1.0 && s == -2.0 => Digit::Flip,
            (1, a, s) if a == -1.0 && s == 2.0 => Digit::Shift,
            (1, a, s) if a == 2.0 && s == -2.0 => Digit::Flip,
            _ => return None,
        };
    }
    Some(out)
}

/// True when random starts use the binary-expansion engine.
pub fn uses_bitstream(map: &PiecewiseMap) -> bool {
    binary_actions(map).is_some()
}

/// Deterministic RNG for a seed and a stream index.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Orbit of a random start: uniform in `(0,1)`, `n` steps.
pub fn random_orbit(map: &PiecewiseMap, rng: &mut ChaCha8Rng, n: usize) -> OrbitResult {
    match binary_actions(map) {
        Some(actions) => bitstream_orbit(map, actions, rng, n),
        None => {
            let x0: f64 = rng.gen_range(f64::EPSILON..1.0);
            map.iterate_orbit(x0, n, map.default_continue())
        }
    }
}

/// As [`random_orbit`], but float orbits pass near-hits of `C` through the
/// one-sided limit (see [`PiecewiseMap::sided_step`]).
pub fn random_sided_orbit(map: &PiecewiseMap, rng: &mut ChaCha8Rng, n: usize) -> OrbitResult {
    match binary_actions(map) {
        Some(actions) => bitstream_orbit(map, actions, rng, n),
        None => {
            let x0: f64 = rng.gen_range(f64::EPSILON..1.0);
            map.iterate_sided(x0, n)
        }
    }
}

fn bitstream_orbit(map: &PiecewiseMap, actions: [Digit; 2], rng: &mut ChaCha8Rng, n: usize) -> OrbitResult {
    let mut window: u64 = rng.gen();
    // Parity applied to digits not yet in the window.
    let mut flipped = false;
    let mut points = Vec::with_capacity(n + 1);
    let to_f64 = |w: u64| (w >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    for step in 0..=n {
        let x = to_f64(window);
        points.push(x);
        if step == n {
            break;
        }
        if let Some(i) = map.near_critical(x) {
            let c = map.critical()[i];
            return OrbitResult { points, termination: Termination::CriticalTruncation { step, c } };
        }
        let top = (window >> 63) as usize;
        let fresh = rng.gen::<bool>() ^ flipped;
        window = (window << 1) | fresh as u64;
        if actions[top] == Digit::Flip {
            window = !window;
            flipped = !flipped;
        }
    }
    OrbitResult { points, termination: Termination::HorizonReached }
}

/// Exact orbit of the rational `p/q` under a binary map, computed on
/// numerators; `None` for maps without the binary structure.
pub fn rational_orbit(map: &PiecewiseMap, p: u64, q: u64, n: usize) -> Option<OrbitResult> {
    let actions = binary_actions(map)?;
    assert!(q > 0 && p <= q && q < 1 << 62, "rational start out of range");
    let mut p = p;
    let mut points = Vec::with_capacity(n + 1);
    for step in 0..=n {
        points.push(p as f64 / q as f64);
        if step == n {
            break;
        }
        if 2 * p == q {
            return Some(OrbitResult { points, termination: Termination::CriticalTruncation { step, c: 0.5 } });
        }
        let top = (2 * p > q) as usize;
        let shifted = if top == 0 { 2 * p } else { 2 * p - q };
        p = match actions[top] {
            Digit::Shift => shifted,
            Digit::Flip => q - shifted,
        };
    }
    Some(OrbitResult { points, termination: Termination::HorizonReached })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn rational_orbits_are_exact() {
        let d = catalog::doubling();
        let o = rational_orbit(&d, 1, 3, 1000).unwrap();
        assert!(o.points.iter().step_by(2).all(|&x| x == 1.0 / 3.0));
        assert!(o.points.iter().skip(1).step_by(2).all(|&x| x == 2.0 / 3.0));
        let t = rational_orbit(&catalog::tent(2.0), 2, 5, 4).unwrap();
        assert_eq!(t.points, vec![0.4, 0.8, 0.4, 0.8, 0.4]);
        assert!(rational_orbit(&catalog::logistic(4.0), 1, 3, 4).is_none());
    }

    #[test]
    fn detects_binary_maps() {
        assert!(uses_bitstream(&catalog::doubling()));
        assert!(uses_bitstream(&catalog::tent(2.0)));
        assert!(!uses_bitstream(&catalog::logistic(4.0)));
        assert!(!uses_bitstream(&catalog::tent(1.9)));
    }

    #[test]
    fn bitstream_orbit_follows_the_map() {
        for map in [catalog::doubling(), catalog::tent(2.0)] {
            let mut rng = rng_for(7, 0);
            let orbit = random_orbit(&map, &mut rng, 10_000);
            assert_eq!(orbit.points.len(), 10_001);
            let mut below = 0;
            for w in orbit.points.windows(2) {
                // The window carries 64 digits; the f64 keeps 53 of them.
                assert!((map.eval_unchecked(w[0]) - w[1]).abs() < 1e-15);
                below += (w[0] < 0.5) as usize;
            }
            let frac = below as f64 / 10_000.0;
            assert!((frac - 0.5).abs() < 0.03, "{frac}");
        }
    }
}

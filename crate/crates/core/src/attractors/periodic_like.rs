use serde::{Deserialize, Serialize};

use super::{AttractorEstimate, Generator};
use crate::error::Result;
use crate::map::{PiecewiseMap, Side};
use crate::structure::periodic_orbits;

const CONVERGED: f64 = 1e-9;
const PROBE_FRACTIONS: [f64; 3] = [1.0, 0.5, 0.1];
const SUPPORT_EPS: f64 = 1.0 / 4096.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicLikeReport {
    pub attractors: Vec<AttractorEstimate>,
    /// Orbits whose probes neither converged nor escaped.
    pub unresolved: Vec<Vec<f64>>,
    /// Attracting orbits that pass a discontinuity through a one-sided limit.
    pub non_genuine: usize,
    pub candidates: usize,
}

enum Probe {
    Converged,
    Escaped,
    Inconclusive,
}

fn probe(map: &PiecewiseMap, p: f64, q: usize, x0: f64, r: f64, horizon: usize) -> Probe {
    let ct = map.default_continue();
    let mut x = x0;
    for _ in 0..horizon {
        for _ in 0..q {
            x = match map.step(x, ct) {
                Ok(Some(y)) => y,
                Ok(None) => return if (x - p).abs() <= CONVERGED { Probe::Converged } else { Probe::Inconclusive },
                Err(_) => return Probe::Inconclusive,
            };
        }
        let d = (x - p).abs();
        if d <= CONVERGED {
            return Probe::Converged;
        }
        if d > 2.0 * r {
            return Probe::Escaped;
        }
    }
    Probe::Inconclusive
}

/// Periodic orbits (one-sided at `C`) that attract some one-sided
/// neighbourhood, certified by probes iterated under `f^q`.
pub fn detect_periodic_like(map: &PiecewiseMap, max_period: usize, r_probe: f64, contraction_horizon: usize) -> Result<PeriodicLikeReport> {
    let table = periodic_orbits(map, max_period, &[])?;
    let mut report = PeriodicLikeReport { attractors: Vec::new(), unresolved: Vec::new(), non_genuine: 0, candidates: 0 };
    for orbit in table.orbits() {
        report.candidates += 1;
        let p = orbit.points[0];
        let mut verdicts = Vec::new();
        for side in [-1.0, 1.0] {
            for frac in PROBE_FRACTIONS {
                let x0 = p + side * r_probe * frac;
                if !(0.0..=1.0).contains(&x0) {
                    continue;
                }
                verdicts.push(probe(map, p, orbit.period, x0, r_probe, contraction_horizon));
            }
        }
        if verdicts.iter().any(|v| matches!(v, Probe::Converged)) {
            let mut est = AttractorEstimate::periodic(orbit.points.clone(), SUPPORT_EPS);
            for &c in &orbit.through_critical {
                for side in [Side::Minus, Side::Plus] {
                    if let Ok(value) = map.one_sided_limit(c, side) {
                        est.generators.push(Generator { c, side, value });
                    }
                }
            }
            if !orbit.genuine {
                report.non_genuine += 1;
            }
            report.attractors.push(est);
        } else if verdicts.iter().any(|v| matches!(v, Probe::Inconclusive)) {
            report.unresolved.push(orbit.points.clone());
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::attractors::AttractorKind;

    #[test]
    fn contraction_attracts_to_zero() {
        let r = detect_periodic_like(&catalog::contraction(), 4, 0.1, 1000).unwrap();
        assert_eq!(r.attractors.len(), 1);
        assert_eq!(r.attractors[0].points().unwrap(), &[0.0]);
        assert_eq!(r.attractors[0].kind, AttractorKind::PeriodicLike);
    }

    #[test]
    fn logistic_two_cycle() {
        let r = detect_periodic_like(&catalog::logistic(3.2), 6, 1e-3, 2000).unwrap();
        assert_eq!(r.attractors.len(), 1);
        let pts = r.attractors[0].points().unwrap();
        assert_eq!(pts.len(), 2);
        let disc = (0.2f64 * 4.2).sqrt();
        assert!((pts[0] - (4.2 - disc) / 6.4).abs() < 1e-12 && (pts[1] - (4.2 + disc) / 6.4).abs() < 1e-12);
        assert_eq!(r.non_genuine, 0);
    }
}

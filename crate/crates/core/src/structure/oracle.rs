//! Maximal space average of an observable over invariant measures carried by
//! an attractor estimate.

use serde::{Deserialize, Serialize};

use super::periodic::{periodic_orbits, PeriodicOrbit};
use crate::attractors::{AttractorEstimate, AttractorKind, Support};
use crate::error::{Error, Result};
use crate::observable::Observable;
use crate::map::PiecewiseMap;
use crate::stats::birkhoff_of_values;

/// Steps of the critical orbit averaged for Cantor attractors.
pub const CANTOR_HORIZON: usize = 1 << 20;
/// Distance at which a detected cycle point is matched to a refined root.
const MATCH_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    pub value: f64,
    pub kind: AttractorKind,
    /// `(Q', value)` for cycles of intervals (running maximum over periods up
    /// to `Q'`); `(n, average)` checkpoints for Cantor attractors.
    pub trace: Vec<(usize, f64)>,
    /// The periodic orbit attaining the value, when there is one.
    pub argmax: Option<PeriodicOrbit>,
}

pub fn birkhoff_max_oracle(map: &PiecewiseMap, a: &AttractorEstimate, phi: &Observable, q: usize) -> Result<OracleValue> {
    if a.kind == AttractorKind::Unresolved {
        return Err(Error::NotClassified);
    }
    if q < 8 {
        return Err(Error::Precondition(format!("oracle needs Q ≥ 8, got {q}")));
    }
    if let Observable::Constant { value } = *phi {
        return Ok(OracleValue { value, kind: a.kind, trace: vec![(q, value)], argmax: None });
    }
    match a.kind {
        AttractorKind::PeriodicLike => periodic_like(map, a, phi),
        AttractorKind::CycleOfIntervals => cycle_max(map, a, phi, q),
        AttractorKind::Cantor => cantor_average(map, a, phi),
        AttractorKind::Unresolved => unreachable!(),
    }
}

/// The cycle's own mean, refined to the isolated root when one matches.
fn periodic_like(map: &PiecewiseMap, a: &AttractorEstimate, phi: &Observable) -> Result<OracleValue> {
    let points = a.points().ok_or(Error::NotClassified)?;
    let period = points.len();
    let refined = periodic_orbits(map, period, std::slice::from_ref(phi))
        .ok()
        .and_then(|t| {
            t.by_period[period - 1]
                .iter()
                .find(|o| points.iter().all(|&p| o.points.iter().any(|&y| (y - p).abs() <= MATCH_TOL)))
                .cloned()
        });
    let value = match &refined {
        Some(o) => o.means[0],
        None => points.iter().map(|&x| phi.eval(x)).sum::<f64>() / period as f64,
    };
    Ok(OracleValue { value, kind: a.kind, trace: vec![(period, value)], argmax: refined })
}

fn inside(support: &Support, eps: f64, x: f64) -> bool {
    match support {
        Support::Intervals { intervals } => intervals.parts().iter().any(|p| p.inflate(eps).contains(x)),
        Support::Cells { cells } => cells.contains_point(x),
        Support::Points { points } => points.iter().any(|&p| (p - x).abs() <= eps),
    }
}

fn cycle_max(map: &PiecewiseMap, a: &AttractorEstimate, phi: &Observable, q: usize) -> Result<OracleValue> {
    let table = periodic_orbits(map, q, std::slice::from_ref(phi))?;
    let mut best: Option<PeriodicOrbit> = None;
    let mut trace = Vec::with_capacity(q);
    for (k, orbits) in table.by_period.iter().enumerate() {
        for o in orbits.iter().filter(|o| o.points.iter().all(|&x| inside(&a.support, a.eps, x))) {
            if best.as_ref().is_none_or(|b| o.means[0] > b.means[0]) {
                best = Some(o.clone());
            }
        }
        if let Some(b) = &best {
            trace.push((k + 1, b.means[0]));
        }
    }
    let best = best.ok_or_else(|| Error::Precondition("no periodic orbit inside the cycle".into()))?;
    Ok(OracleValue { value: best.means[0], kind: a.kind, trace, argmax: Some(best) })
}

/// Birkhoff average of `φ` along the first generator's orbit.
fn cantor_average(map: &PiecewiseMap, a: &AttractorEstimate, phi: &Observable) -> Result<OracleValue> {
    let g = a.generators.first().ok_or_else(|| Error::Precondition("Cantor estimate without a generator".into()))?;
    let orbit = map.iterate_orbit(g.value, CANTOR_HORIZON, map.default_continue());
    let series = birkhoff_of_values(orbit.points.iter().copied(), orbit.points.len(), phi);
    let trace: Vec<(usize, f64)> = series.checkpoints.iter().map(|c| (c.n, c.average)).collect();
    let value = trace.last().map(|&(_, v)| v).ok_or_else(|| Error::Precondition("empty critical orbit".into()))?;
    Ok(OracleValue { value, kind: a.kind, trace, argmax: None })
}

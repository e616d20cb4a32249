//! Witness points with prescribed Birkhoff behaviour, built as nested
//! intervals. Stage `k` shadows a target periodic orbit for `L_k` steps,
//! with `L_k` dominating all earlier history, so the partial averages swing
//! toward the stage's orbit mean.
//!
//! Endpoints are exact dyadic rationals. Pullbacks are rounded inward and
//! checked exactly; the envelope comes from outward propagation of the final
//! interval, so it is sound for every point of it whatever the plan did.
//!
//! A witness shows that the behaviour occurs, not that it is typical in any
//! sense. Stages are open conditions, which is the shape of a residual set,
//! but nothing here certifies residuality.

pub mod dyadic;

use serde::{Deserialize, Serialize};

use crate::attractors::{support_hull, AttractorEstimate, AttractorKind, Support};
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalUnion};
use crate::map::PiecewiseMap;
use crate::observable::Observable;
use crate::stats::{birkhoff_of_values, checkpoints, detect_historic_of, BirkhoffSeries, HistoricVerdict, Neumaier};
use crate::structure::oracle::birkhoff_max_oracle;
use crate::structure::periodic::{periodic_orbits, PeriodicOrbit};
use crate::structure::transitivity::strong_transitivity_check;
use crate::structure::{branch_image, split_by_branches};
use dyadic::{precision_for, DyBranch, DyInterval, Dyadic};

/// Nesting margin relative to the enclosing interval.
pub const NESTING_MARGIN: f64 = 1e-3;
/// Smallest admissible ratio `L_k / T_{k−1}`.
pub const MIN_RATIO: f64 = 4.0;
/// Gap tolerance used by [`verify_witness`] for its historic verdict.
pub const HISTORIC_GAP_TOL: f64 = 0.1;
/// Connection sources are end windows shrunk by this factor.
const SOURCE_SHRINK: f64 = 0.9;
const MIN_PIECE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessConfig {
    pub stages: usize,
    /// `L_k = max(base_length, ⌈ratio · (time before the block)⌉)`.
    pub ratio: f64,
    pub base_length: usize,
    pub eps_shadow: f64,
    /// Longest connecting word tried.
    pub connection_horizon: usize,
    /// Frontier cap of the connection search.
    pub max_pieces: usize,
    /// Every stage targets the high orbit.
    pub single_phase: bool,
}

impl Default for WitnessConfig {
    fn default() -> Self {
        WitnessConfig {
            stages: 3,
            ratio: 8.0,
            base_length: 16,
            eps_shadow: 1e-3,
            connection_horizon: 64,
            max_pieces: 1 << 16,
            single_phase: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    High,
    Low,
}

/// Closed interval with exact hex-float endpoints (see [`Dyadic::to_hex`]).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HexInterval {
    pub lo: String,
    pub hi: String,
}

impl HexInterval {
    fn of(iv: &DyInterval) -> Self {
        HexInterval { lo: iv.lo.to_hex(), hi: iv.hi.to_hex() }
    }

    fn parse(&self) -> Result<DyInterval> {
        let bad = || Error::Precondition(format!("bad witness endpoint in [{}, {}]", self.lo, self.hi));
        let lo = Dyadic::parse_hex(&self.lo).ok_or_else(bad)?;
        let hi = Dyadic::parse_hex(&self.hi).ok_or_else(bad)?;
        if lo > hi {
            return Err(bad());
        }
        Ok(DyInterval::new(lo, hi))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub phase: Phase,
    /// Target orbit from its entry point on, with the entry point's itinerary.
    pub orbit: Vec<f64>,
    pub orbit_word: Vec<usize>,
    pub mean: f64,
    /// Itinerary leading from the previous end window to the entry window.
    pub connect: Vec<usize>,
    /// `L_k`.
    pub shadow: usize,
    /// `T_{k−1}`.
    pub start: usize,
    /// `T_k`.
    pub end: usize,
    /// `2·ε·Lip(φ) + (max φ − min φ)·(pre-block time + period)/L_k`.
    pub delta: f64,
    /// Certified bound at `T_k`: lower for high stages, upper for low ones.
    pub certified: f64,
    /// `J_k`: points following the itinerary up to `T_k` and ending in the
    /// stage's end window.
    pub interval: HexInterval,
    pub precision: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePoint {
    pub n: usize,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestedWitness {
    pub map: String,
    pub observable: Observable,
    pub config: WitnessConfig,
    /// `J_0`.
    pub base: HexInterval,
    pub stages: Vec<Stage>,
    /// Bounds on the partial averages of every point of `J_K`; the entry at
    /// `n = 0` is the trivial range of `φ` on `J_0`.
    pub envelope: Vec<EnvelopePoint>,
    /// Certified bound at the end of the last high stage.
    pub limsup_proxy: Option<f64>,
    /// Certified bound at the end of the last low stage.
    pub liminf_proxy: Option<f64>,
    pub gap: Option<f64>,
}

impl NestedWitness {
    /// `T_K`.
    pub fn horizon(&self) -> usize {
        self.stages.last().map_or(0, |s| s.end)
    }

    /// Full itinerary up to `T_K`.
    pub fn word(&self) -> Vec<usize> {
        let mut w = Vec::with_capacity(self.horizon());
        for s in &self.stages {
            w.extend_from_slice(&s.connect);
            w.extend(s.orbit_word.iter().cycle().take(s.shadow));
        }
        w
    }

    pub fn final_interval(&self) -> Result<DyInterval> {
        self.stages.last().map_or(&self.base, |s| &s.interval).parse()
    }
}

/// A target orbit rotated to start at `entry`.
#[derive(Debug, Clone)]
struct Target {
    points: Vec<f64>,
    word: Vec<usize>,
    mean: f64,
}

impl Target {
    fn of(o: &PeriodicOrbit, phi: &Observable) -> Target {
        let mean = o.points.iter().map(|&x| phi.eval(x)).sum::<f64>() / o.points.len() as f64;
        Target { points: o.points.clone(), word: o.word.clone(), mean }
    }

    fn rotated(&self, entry: usize) -> Target {
        let q = self.points.len();
        let r = |v: &[f64]| (0..q).map(|i| v[(entry + i) % q]).collect::<Vec<f64>>();
        Target { points: r(&self.points), word: (0..q).map(|i| self.word[(entry + i) % q]).collect(), mean: self.mean }
    }
}

fn window(p: f64, eps: f64) -> Interval {
    Interval::new((p - eps).max(0.0), (p + eps).min(1.0))
}

fn cycle_support(a: &AttractorEstimate) -> Result<(Interval, IntervalUnion)> {
    if a.kind != AttractorKind::CycleOfIntervals {
        return Err(Error::Precondition(format!(
            "witness construction needs a cycle of intervals, got {:?}",
            a.kind
        )));
    }
    let hull = support_hull(a).ok_or_else(|| Error::Precondition("empty support".into()))?;
    let union = match &a.support {
        Support::Intervals { intervals } => intervals.clone(),
        _ => IntervalUnion::from_intervals(vec![hull]),
    };
    Ok((hull, union))
}

fn dy_branches(map: &PiecewiseMap) -> Result<Vec<DyBranch>> {
    map.branches()
        .iter()
        .map(|b| {
            DyBranch::new(b).ok_or_else(|| {
                Error::Precondition("witness construction needs single-piece polynomial branches".into())
            })
        })
        .collect()
}

fn check_orbit(map: &PiecewiseMap, union: &IntervalUnion, o: &PeriodicOrbit, eps: f64, slack: f64) -> Result<()> {
    if !o.genuine || !o.through_critical.is_empty() {
        return Err(Error::Precondition("target orbit passes a critical point".into()));
    }
    for &x in &o.points {
        if !union.parts().iter().any(|p| p.inflate(slack).contains(x)) {
            return Err(Error::Precondition(format!("target orbit point {x} lies outside the cycle")));
        }
        if map.critical().iter().any(|&c| (x - c).abs() <= 2.0 * eps) {
            return Err(Error::Precondition(format!("target orbit point {x} is within 2ε of a critical point")));
        }
    }
    Ok(())
}

fn check_transitive(map: &PiecewiseMap, hull: Interval, union: &IntervalUnion) -> Result<()> {
    let w = hull.width() / 100.0;
    let probes: Vec<Interval> = [0.1, 0.35, 0.6, 0.85]
        .iter()
        .map(|&f| {
            let x = hull.lo + f * hull.width();
            Interval::new(x, x + w)
        })
        .filter(|p| union.parts().iter().any(|u| u.contains_interval(p)))
        .collect();
    let report = strong_transitivity_check(map, union, &probes, 256, 1e-3 * hull.width());
    if !report.passed {
        return Err(Error::Precondition("strong transitivity check failed on the cycle".into()));
    }
    Ok(())
}

/// Shortest word whose branch images carry `source` over `target`, by
/// breadth-first search over the cylinders of `source`.
fn connect(map: &PiecewiseMap, source: Interval, target: Interval, horizon: usize, max_pieces: usize) -> Option<Vec<usize>> {
    let goal = target.inflate(1e-9).clamp_unit();
    let mut frontier: Vec<(Interval, Vec<usize>)> = vec![(source, Vec::new())];
    for depth in 0..=horizon {
        if let Some((_, w)) = frontier.iter().find(|(img, _)| img.contains_interval(&goal)) {
            return Some(w.clone());
        }
        if depth == horizon {
            break;
        }
        let mut next = Vec::with_capacity(2 * frontier.len());
        for (img, w) in &frontier {
            for (a, piece) in split_by_branches(map, *img) {
                let child = branch_image(map, a, piece);
                if child.width() >= MIN_PIECE {
                    let mut word = w.clone();
                    word.push(a);
                    next.push((child, word));
                }
            }
        }
        if next.len() > max_pieces {
            next.sort_by(|a, b| b.0.width().total_cmp(&a.0.width()));
            next.truncate(max_pieces);
        }
        frontier = next;
    }
    None
}

struct Planned {
    phase: Phase,
    target: Target,
    connect: Vec<usize>,
    shadow: usize,
    start: usize,
    end: usize,
    pre: usize,
    /// End window.
    window: Interval,
}

fn plan(map: &PiecewiseMap, cfg: &WitnessConfig, base: Interval, hi: &Target, lo: &Target) -> Result<Vec<Planned>> {
    let mut out: Vec<Planned> = Vec::with_capacity(cfg.stages);
    let mut t = 0usize;
    // Orbit index reached at the end of the previous stage.
    let mut carry: Option<(Phase, usize)> = None;
    for k in 0..cfg.stages {
        let phase = if cfg.single_phase || k % 2 == 0 { Phase::High } else { Phase::Low };
        let orbit = if phase == Phase::High { hi } else { lo };
        let q = orbit.points.len();
        let (connect, entry) = match (carry, out.last()) {
            (Some((p, idx)), _) if p == phase => (Vec::new(), idx),
            (_, prev) => {
                let source = match prev {
                    Some(s) => {
                        let r = 0.5 * SOURCE_SHRINK * s.window.width();
                        Interval::new(s.window.mid() - r, s.window.mid() + r)
                    }
                    None => base,
                };
                (0..q)
                    .filter_map(|j| {
                        connect(map, source, window(orbit.points[j], cfg.eps_shadow), cfg.connection_horizon, cfg.max_pieces)
                            .map(|w| (w, j))
                    })
                    .min_by_key(|(w, j)| (w.len(), *j))
                    .ok_or_else(|| {
                        Error::ShadowingFailed(format!(
                            "stage {k}: no connection within {} steps from {source:?} to the windows of {:?}",
                            cfg.connection_horizon, orbit.points
                        ))
                    })?
            }
        };
        let pre = t + connect.len();
        let shadow = cfg.base_length.max((cfg.ratio * pre as f64).ceil() as usize);
        assert!(shadow as f64 >= MIN_RATIO * t as f64, "block dominance");
        let exit = (entry + shadow) % q;
        out.push(Planned {
            phase,
            target: orbit.rotated(entry),
            connect,
            shadow,
            start: t,
            end: pre + shadow,
            pre,
            window: window(orbit.points[exit], cfg.eps_shadow),
        });
        carry = Some((phase, exit));
        t = pre + shadow;
    }
    Ok(out)
}

fn full_word(stages: &[Planned]) -> Vec<usize> {
    let mut w = Vec::new();
    for s in stages {
        w.extend_from_slice(&s.connect);
        w.extend(s.target.word.iter().cycle().take(s.shadow));
    }
    w
}

/// Points of the closed target following `word` backwards, rounded inward.
fn pull_back_word(br: &[DyBranch], word: &[usize], target: DyInterval) -> Option<(DyInterval, u64)> {
    let mut cur = target;
    let mut p = 64;
    for &a in word.iter().rev() {
        // A few bits for the contraction of this step.
        p = precision_for(&cur.width().mul(&Dyadic::ulp(8)));
        cur = br[a].pull_back(&cur, p)?;
    }
    Some((cur, p))
}

struct Forward {
    /// Outward double enclosures of `f^t(J)`, `t < T`.
    images: Vec<Interval>,
    /// Midpoint orbit, one double per step.
    mids: Vec<f64>,
}

/// Outward propagation of `j` along `word`, with the midpoint alongside at
/// the same precision.
fn forward(br: &[DyBranch], word: &[usize], j: &DyInterval, with_mid: bool) -> Result<Forward> {
    let mut cur = j.clone();
    let mut mid = DyInterval::point(j.mid());
    let mut images = Vec::with_capacity(word.len());
    let mut mids = Vec::with_capacity(if with_mid { word.len() } else { 0 });
    for (t, &a) in word.iter().enumerate() {
        images.push(cur.outward());
        if with_mid {
            mids.push(mid.outward().mid());
        }
        if !br[a].domain.contains(&cur) {
            return Err(Error::ShadowingFailed(format!("step {t}: interval leaves the domain of branch {a}")));
        }
        let exact = br[a].image_exact(&cur);
        let p = precision_for(&exact.width());
        cur = exact.round_outward(p);
        if with_mid {
            mid = br[a].image(&mid, p);
        }
    }
    Ok(Forward { images, mids })
}

fn envelope_marks(stages: &[Planned], horizon: usize) -> Vec<usize> {
    let mut marks = checkpoints(horizon);
    marks.extend(stages.iter().map(|s| s.end));
    marks.push(0);
    marks.sort_unstable();
    marks.dedup();
    marks
}

fn envelope(phi: &Observable, base: Interval, images: &[Interval], marks: &[usize]) -> Vec<EnvelopePoint> {
    let range = phi.enclose(base);
    if let Observable::Constant { value } = *phi {
        return marks.iter().map(|&n| EnvelopePoint { n, lower: value, upper: value }).collect();
    }
    let (mut lo, mut hi) = (Neumaier::default(), Neumaier::default());
    let mut scale: f64 = range.lo.abs().max(range.hi.abs());
    let mut out = Vec::with_capacity(marks.len());
    let mut next = 0;
    for (t, iv) in std::iter::once(None).chain(images.iter().map(Some)).enumerate() {
        if let Some(iv) = iv {
            let b = phi.enclose(*iv);
            lo.add(b.lo);
            hi.add(b.hi);
            scale = scale.max(b.lo.abs()).max(b.hi.abs());
        }
        while next < marks.len() && marks[next] == t {
            let point = if t == 0 {
                EnvelopePoint { n: 0, lower: range.lo, upper: range.hi }
            } else {
                let slack = 8.0 * f64::EPSILON * scale;
                EnvelopePoint { n: t, lower: lo.value() / t as f64 - slack, upper: hi.value() / t as f64 + slack }
            };
            out.push(point);
            next += 1;
        }
    }
    out
}

fn build(map: &PiecewiseMap, phi: &Observable, cfg: &WitnessConfig, base: Interval, hi: &Target, lo: &Target) -> Result<NestedWitness> {
    let br = dy_branches(map)?;
    let planned = plan(map, cfg, base, hi, lo)?;
    let word = full_word(&planned);
    let base_dy = DyInterval::from_interval(base);
    let mut chain: Vec<(DyInterval, u64)> = Vec::with_capacity(planned.len());
    for (k, s) in planned.iter().enumerate() {
        let target = DyInterval::from_interval(s.window);
        let j = pull_back_word(&br, &word[..s.end], target)
            .ok_or_else(|| Error::ShadowingFailed(format!("stage {k}: pullback of the end window {:?} failed", s.window)))?;
        let outer = chain.last().map_or(&base_dy, |(iv, _)| iv);
        let margin = outer.width().mul(&Dyadic::from_f64(NESTING_MARGIN));
        if !outer.contains_with_margin(&j.0, &margin) {
            return Err(Error::ShadowingFailed(format!("stage {k}: nesting margin lost")));
        }
        chain.push(j);
    }
    let last = chain.last().map_or(base_dy.clone(), |(iv, _)| iv.clone());
    let fw = forward(&br, &word, &last, false)?;
    let marks = envelope_marks(&planned, word.len());
    let env = envelope(phi, base, &fw.images, &marks);
    let range = phi.enclose(base);
    let lip = phi.lipschitz();
    let mut stages = Vec::with_capacity(planned.len());
    for (k, (s, (j, p))) in planned.into_iter().zip(chain).enumerate() {
        let q = s.target.points.len();
        let delta = 2.0 * cfg.eps_shadow * lip + (range.hi - range.lo) * (s.pre + q) as f64 / s.shadow as f64;
        let at = env.iter().find(|e| e.n == s.end).expect("stage end is a mark");
        let certified = match s.phase {
            Phase::High => at.lower,
            Phase::Low => at.upper,
        };
        let holds = match s.phase {
            Phase::High => certified >= s.target.mean - delta,
            Phase::Low => certified <= s.target.mean + delta,
        };
        if !holds {
            return Err(Error::ShadowingFailed(format!(
                "stage {k}: certified bound {certified} misses the target mean {} by more than δ = {delta}",
                s.target.mean
            )));
        }
        stages.push(Stage {
            phase: s.phase,
            orbit: s.target.points,
            orbit_word: s.target.word,
            mean: s.target.mean,
            connect: s.connect,
            shadow: s.shadow,
            start: s.start,
            end: s.end,
            delta,
            certified,
            interval: HexInterval::of(&j),
            precision: p,
        });
    }
    // Tail quantities: the last stage of each phase.
    let last = |ph: Phase| stages.iter().rev().find(|s| s.phase == ph).map(|s| s.certified);
    let limsup_proxy = last(Phase::High);
    let liminf_proxy = last(Phase::Low);
    let gap = limsup_proxy.zip(liminf_proxy).map(|(a, b)| a - b);
    Ok(NestedWitness {
        map: map.name.clone(),
        observable: phi.clone(),
        config: cfg.clone(),
        base: HexInterval::of(&base_dy),
        stages,
        envelope: env,
        limsup_proxy,
        liminf_proxy,
        gap,
    })
}

/// Nested-interval point whose partial averages of `φ` alternate between
/// the means of `orbit_hi` and `orbit_lo`.
pub fn construct_historic_point(
    map: &PiecewiseMap,
    cycle: &AttractorEstimate,
    phi: &Observable,
    orbit_hi: &PeriodicOrbit,
    orbit_lo: &PeriodicOrbit,
    cfg: &WitnessConfig,
) -> Result<NestedWitness> {
    let (hull, union) = cycle_support(cycle)?;
    dy_branches(map)?;
    if cfg.ratio < MIN_RATIO || !cfg.ratio.is_finite() {
        return Err(Error::Precondition(format!("block ratio must be at least {MIN_RATIO}, got {}", cfg.ratio)));
    }
    if !(cfg.eps_shadow > 0.0) {
        return Err(Error::Precondition("ε_shadow must be positive".into()));
    }
    check_orbit(map, &union, orbit_hi, cfg.eps_shadow, cycle.eps)?;
    check_orbit(map, &union, orbit_lo, cfg.eps_shadow, cycle.eps)?;
    let (hi, lo) = (Target::of(orbit_hi, phi), Target::of(orbit_lo, phi));
    if !cfg.single_phase && hi.mean <= lo.mean {
        return Err(Error::Precondition(format!("need m_hi > m_lo, got {} and {}", hi.mean, lo.mean)));
    }
    check_transitive(map, hull, &union)?;
    build(map, phi, cfg, hull, &hi, &lo)
}

/// Witness whose upper average reaches the largest periodic mean found by
/// the oracle up to period `q`. The low phase uses the smallest mean up to
/// period `min(q, 8)` unless `cfg.single_phase` is set.
pub fn construct_max_average_point(
    map: &PiecewiseMap,
    cycle: &AttractorEstimate,
    phi: &Observable,
    q: usize,
    cfg: &WitnessConfig,
) -> Result<NestedWitness> {
    let (_, union) = cycle_support(cycle)?;
    let oracle = birkhoff_max_oracle(map, cycle, phi, q)?;
    let table = periodic_orbits(map, q.min(8), std::slice::from_ref(phi))?;
    let usable: Vec<&PeriodicOrbit> =
        table.orbits().filter(|o| check_orbit(map, &union, o, cfg.eps_shadow, cycle.eps).is_ok()).collect();
    // A constant observable has no argmax; any orbit of the cycle will do.
    let hi = match oracle.argmax {
        Some(o) => o,
        None => usable
            .iter()
            .max_by(|a, b| a.means[0].total_cmp(&b.means[0]))
            .map(|&o| o.clone())
            .ok_or_else(|| Error::Precondition("no periodic orbit in the cycle".into()))?,
    };
    let lo = if cfg.single_phase {
        hi.clone()
    } else {
        usable
            .iter()
            .min_by(|a, b| a.means[0].total_cmp(&b.means[0]))
            .map(|&o| o.clone())
            .ok_or_else(|| Error::Precondition("no second periodic orbit in the cycle".into()))?
    };
    construct_historic_point(map, cycle, phi, &hi, &lo, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessCheck {
    /// `min(n, T_K)`.
    pub horizon: usize,
    /// Envelope points compared against the midpoint run.
    pub checked: usize,
    pub envelope: Vec<EnvelopePoint>,
    pub observed: BirkhoffSeries,
    pub historic: HistoricVerdict,
    /// Largest tail-window gap over all checkpoints of the midpoint run.
    pub max_tail_gap: f64,
    pub certified_gap: Option<f64>,
}

/// Replay the witness: recompute the envelope from `J_K`, run its midpoint
/// to `min(n, T_K)` and check the observed averages against the envelope.
pub fn verify_witness(map: &PiecewiseMap, w: &NestedWitness, n: usize) -> Result<WitnessCheck> {
    if w.map != map.name {
        return Err(Error::Precondition(format!("witness is for map {}, not {}", w.map, map.name)));
    }
    let br = dy_branches(map)?;
    let word = w.word();
    let base = w.base.parse()?.outward();
    let j = w.final_interval()?;
    let fw = forward(&br, &word, &j, true)?;
    let marks: Vec<usize> = w.envelope.iter().map(|e| e.n).collect();
    let replay = envelope(&w.observable, base, &fw.images, &marks);
    if let Some((old, new)) = w.envelope.iter().zip(&replay).find(|(a, b)| a != b) {
        return Err(Error::EnvelopeViolation { n: old.n as u64, observed: new.lower, lower: old.lower, upper: old.upper });
    }
    let h = n.min(word.len());
    let phi = &w.observable;
    let scale = w.envelope.iter().map(|e| e.lower.abs().max(e.upper.abs())).fold(0.0, f64::max);
    let tol = 8.0 * f64::EPSILON * scale;
    let mut sum = Neumaier::default();
    let mut checked = 0;
    let mut env = w.envelope.iter().filter(|e| e.n <= h).peekable();
    env.next_if(|e| e.n == 0);
    for (t, &x) in fw.mids[..h].iter().enumerate() {
        sum.add(phi.eval(x));
        let m = t + 1;
        while let Some(e) = env.next_if(|e| e.n == m) {
            let avg = match *phi {
                Observable::Constant { value } => value,
                _ => sum.value() / m as f64,
            };
            if avg < e.lower - tol || avg > e.upper + tol {
                return Err(Error::EnvelopeViolation { n: m as u64, observed: avg, lower: e.lower, upper: e.upper });
            }
            checked += 1;
        }
    }
    let observed = birkhoff_of_values(fw.mids[..h].iter().map(|&x| phi.eval(x)), h, phi);
    let historic = detect_historic_of(&observed, HISTORIC_GAP_TOL);
    let max_tail_gap = observed.checkpoints.iter().map(|c| c.tail_sup - c.tail_inf).fold(0.0, f64::max);
    Ok(WitnessCheck {
        horizon: h,
        checked,
        envelope: w.envelope.iter().filter(|e| e.n <= h).copied().collect(),
        observed,
        historic,
        max_tail_gap,
        certified_gap: w.gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::structure::periodic::periodic_orbits;

    fn unit_cycle() -> AttractorEstimate {
        AttractorEstimate {
            kind: AttractorKind::CycleOfIntervals,
            support: Support::Intervals { intervals: IntervalUnion::from_intervals(vec![Interval::unit()]) },
            generators: Vec::new(),
            eps: 1.0 / 4096.0,
            box_slope: None,
        }
    }

    fn fixed_points(map: &PiecewiseMap) -> (PeriodicOrbit, PeriodicOrbit) {
        let t = periodic_orbits(map, 1, &[Observable::identity()]).unwrap();
        let mut f: Vec<PeriodicOrbit> = t.by_period[0].clone();
        f.sort_by(|a, b| a.points[0].total_cmp(&b.points[0]));
        (f[f.len() - 1].clone(), f[0].clone())
    }

    #[test]
    fn tent_witness_swings_and_replays() {
        let map = catalog::tent(2.0);
        let (hi, lo) = fixed_points(&map);
        let w = construct_historic_point(&map, &unit_cycle(), &Observable::identity(), &hi, &lo, &WitnessConfig::default()).unwrap();
        assert!(w.gap.unwrap() >= 0.4, "gap {:?}", w.gap);
        for pair in w.stages.windows(2) {
            assert!(pair[1].shadow as f64 >= MIN_RATIO * pair[0].end as f64);
        }
        let json = serde_json::to_string(&w).unwrap();
        let back: NestedWitness = serde_json::from_str(&json).unwrap();
        assert_eq!(back, w);
        let check = verify_witness(&map, &back, usize::MAX).unwrap();
        assert_eq!(check.horizon, w.horizon());
        assert!(check.checked > 0);
    }

    #[test]
    fn equal_orbits_are_rejected() {
        let map = catalog::tent(2.0);
        let (hi, _) = fixed_points(&map);
        let err = construct_historic_point(&map, &unit_cycle(), &Observable::identity(), &hi, &hi, &WitnessConfig::default());
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn constant_observable_gives_constant_envelope() {
        let map = catalog::doubling();
        let w = construct_max_average_point(&map, &unit_cycle(), &Observable::constant(0.3), 8, &WitnessConfig { single_phase: true, ..Default::default() }).unwrap();
        assert!(w.envelope.iter().all(|e| e.lower == 0.3 && e.upper == 0.3));
    }

    #[test]
    fn tampered_envelope_is_caught() {
        let map = catalog::tent(2.0);
        let (hi, lo) = fixed_points(&map);
        let mut w = construct_historic_point(&map, &unit_cycle(), &Observable::identity(), &hi, &lo, &WitnessConfig { stages: 2, ..Default::default() }).unwrap();
        w.envelope[3].upper = w.envelope[3].lower - 0.5;
        assert!(matches!(verify_witness(&map, &w, usize::MAX), Err(Error::EnvelopeViolation { .. })));
    }
}

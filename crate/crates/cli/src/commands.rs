use std::fmt::Write as _;
use std::fs;

use intervalmap::attractors::{basin_census, CensusConfig, CensusReport};
use intervalmap::attractors::{AttractorKind, Support};
use intervalmap::decomposition::decompose;
use intervalmap::map::OrbitResult;
use intervalmap::observable::Observable;
use intervalmap::sampling::{random_orbit, rng_for};
use intervalmap::stats::{
    birkhoff_of, checkpoint_csv, detect_historic_of, omega_limit_of, statistical_omega_of, visiting_frequency_of,
    default_theta, Region,
};
use intervalmap::structure::compose;
use intervalmap::structure::entropy::lap_entropy;
use intervalmap::structure::returnmap::{first_return_map, is_full_branch};
use intervalmap::witness::{construct_max_average_point, verify_witness, WitnessConfig};
use intervalmap::{parse_map, Interval, PiecewiseMap};
use serde_json::json;

use crate::output::{AnalysisConfig, Output};
use crate::svg::{Plot, PALETTE};
use crate::{Cli, CliError, Command};

pub const EPS_RANGE: (f64, f64) = (1e-5, 0.5);
pub const MAX_HORIZON: usize = 100_000_000;
pub const MAX_SAMPLES: usize = 100_000;
pub const LAP_RANGE: (usize, usize) = (8, 64);

pub struct Loaded {
    pub map: PiecewiseMap,
    pub spec: String,
    pub path: String,
}

fn usage(m: impl Into<String>) -> CliError {
    CliError::Usage(m.into())
}

pub fn load(cli: &Cli) -> Result<Loaded, CliError> {
    let path = cli.map.as_ref().ok_or_else(|| usage("--map <path> is required"))?;
    let shown = path.display().to_string();
    let spec = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {shown}: {e}")))?;
    let map = parse_map(&spec).map_err(|e| usage(format!("{shown}: {e}")))?;
    Ok(Loaded { map, spec, path: shown })
}

pub fn eps_or(cli: &Cli, default: f64) -> Result<f64, CliError> {
    let eps = cli.eps.unwrap_or(default);
    if !(eps >= EPS_RANGE.0 && eps <= EPS_RANGE.1) {
        return Err(usage(format!("--eps must lie in [{}, {}], got {eps}", EPS_RANGE.0, EPS_RANGE.1)));
    }
    Ok(eps)
}

pub fn horizon_or(cli: &Cli, default: usize) -> Result<usize, CliError> {
    let n = cli.horizon.unwrap_or(default);
    if n == 0 || n > MAX_HORIZON {
        return Err(usage(format!("--horizon must lie in [1, {MAX_HORIZON}], got {n}")));
    }
    Ok(n)
}

pub fn samples_ok(samples: usize) -> Result<usize, CliError> {
    if samples == 0 || samples > MAX_SAMPLES {
        return Err(usage(format!("--samples must lie in [1, {MAX_SAMPLES}], got {samples}")));
    }
    Ok(samples)
}

fn x0_ok(x0: Option<f64>) -> Result<Option<f64>, CliError> {
    match x0 {
        Some(x) if !(0.0..=1.0).contains(&x) => Err(usage(format!("--x0 must lie in [0, 1], got {x}"))),
        _ => Ok(x0),
    }
}

pub fn output(cli: &Cli, l: &Loaded, command: &str, eps: f64, horizon: usize, params: serde_json::Value) -> Result<Output, CliError> {
    let config = AnalysisConfig {
        command: command.into(),
        map_path: l.path.clone(),
        map_spec: l.spec.clone(),
        seed: cli.seed,
        eps,
        horizon,
        params,
    };
    Ok(Output::new(&cli.out, config, cli.format)?)
}

pub fn finish(out: &Output) {
    println!("config hash {}", out.hash());
    for p in &out.written {
        println!("wrote {}", p.display());
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let l = load(cli)?;
    match &cli.command {
        Command::Orbit { x0 } => orbit(cli, &l, x0_ok(*x0)?),
        Command::Stats { x0, observable, region } => stats(cli, &l, x0_ok(*x0)?, observable, region),
        Command::Attractors { samples } => attractors(cli, &l, samples_ok(*samples)?),
        Command::Returnmap { base, min_width } => returnmap(cli, &l, base, *min_width),
        Command::Entropy => entropy(cli, &l),
        Command::Decompose => decomposition(cli, &l),
        Command::Historic { observable, q, stages, ratio, single_phase, samples } => {
            let wcfg = WitnessConfig { stages: *stages, ratio: *ratio, single_phase: *single_phase, ..WitnessConfig::default() };
            historic(cli, &l, observable, *q, wcfg, samples_ok(*samples)?)
        }
        Command::Verify { samples } => crate::verify::run(cli, &l, samples_ok(*samples)?),
    }
}

/// Orbit from `x0`, or a seeded random orbit.
pub fn start_orbit(map: &PiecewiseMap, x0: Option<f64>, seed: u64, n: usize) -> OrbitResult {
    match x0 {
        Some(x) => map.iterate_orbit(x, n, map.default_continue()),
        None => random_orbit(map, &mut rng_for(seed, 0), n),
    }
}

fn map_graph(plot: &mut Plot, map: &PiecewiseMap) {
    for b in map.branches() {
        let pts: Vec<(f64, f64)> = (0..=256)
            .map(|k| {
                let x = b.domain.lo + b.domain.width() * k as f64 / 256.0;
                (x, b.eval(x))
            })
            .collect();
        plot.polyline(&pts, "black", 1.5);
    }
}

fn orbit(cli: &Cli, l: &Loaded, x0: Option<f64>) -> Result<(), CliError> {
    let n = horizon_or(cli, 1000)?;
    let eps = cli.eps.unwrap_or(0.0);
    let mut out = output(cli, l, "orbit", eps, n, json!({ "x0": x0 }))?;
    let orb = start_orbit(&l.map, x0, cli.seed, n);
    let mut csv = format!("# termination: {}\nn,x\n", serde_json::to_string(&orb.termination).unwrap_or_default());
    for (k, x) in orb.points.iter().enumerate() {
        let _ = writeln!(csv, "{k},{x:.17e}");
    }
    out.csv("orbit.csv", &csv)?;

    let mut plot = Plot::new(&format!("{} cobweb", l.map.name), (0.0, 1.0), (0.0, 1.0));
    plot.segment((0.0, 0.0), (1.0, 1.0), "#999999", 1.0);
    map_graph(&mut plot, &l.map);
    let shown = &orb.points[..orb.points.len().min(200)];
    let mut path = Vec::with_capacity(2 * shown.len());
    if let Some(&x) = shown.first() {
        path.push((x, 0.0));
    }
    for w in shown.windows(2) {
        path.push((w[0], w[1]));
        path.push((w[1], w[1]));
    }
    plot.polyline(&path, PALETTE[1], 0.6);
    out.svg("cobweb.svg", &plot)?;
    println!("{} points, termination {:?}", orb.points.len(), orb.termination);
    finish(&out);
    Ok(())
}

fn stats(cli: &Cli, l: &Loaded, x0: Option<f64>, observable: &str, regions: &[String]) -> Result<(), CliError> {
    let n = horizon_or(cli, 100_000)?;
    let eps = eps_or(cli, 1.0 / 256.0)?;
    let phi = Observable::parse(observable).map_err(|e| usage(format!("--observable: {e}")))?;
    let regions: Vec<(String, Region)> = regions
        .iter()
        .map(|r| Region::parse(r).map(|v| (r.clone(), v)).map_err(|e| usage(format!("--region {r}: {e}"))))
        .collect::<Result<_, _>>()?;
    let params = json!({ "x0": x0, "observable": phi.to_string(), "regions": regions.iter().map(|r| &r.0).collect::<Vec<_>>() });
    let mut out = output(cli, l, "stats", eps, n, params)?;

    let orb = start_orbit(&l.map, x0, cli.seed, n);
    let series = birkhoff_of(&orb, &phi, n);
    let freqs: Vec<_> = regions.iter().map(|(name, v)| (name.clone(), visiting_frequency_of(&orb, v, n))).collect();
    out.csv("stats.csv", &checkpoint_csv(&series, &freqs))?;

    let omega = omega_limit_of(&orb, n / 2, eps);
    let omega_star = statistical_omega_of(&orb, n, eps, default_theta(n));
    let verdict = detect_historic_of(&series, 0.1);
    let summary = json!({
        "observable": phi.to_string(),
        "points": orb.points.len(),
        "termination": orb.termination,
        "upper_estimate": series.upper_estimate(),
        "lower_estimate": series.lower_estimate(),
        "historic": verdict,
        "frequencies": freqs.iter().map(|(k, f)| json!({ "region": k, "last": f.last(), "upper_estimate": f.upper_estimate })).collect::<Vec<_>>(),
        "omega_cells": omega.cells.runs(),
        "statistical_omega_cells": omega_star.cells.runs(),
        "omega_hausdorff_cells": omega.cells.hausdorff_cells(&omega_star.cells),
    });
    out.json("stats.json", &summary)?;

    let lg = |m: usize| (m as f64).log2();
    let xs = (0.0, lg(series.horizon.max(2)));
    let (lo, hi) = phi.bounds();
    let mut plot = Plot::new(&format!("Birkhoff averages of {}", phi), xs, (lo, hi));
    let pick = |f: fn(&intervalmap::stats::Checkpoint) -> f64| series.checkpoints.iter().map(|c| (lg(c.n), f(c))).collect::<Vec<_>>();
    plot.polyline(&pick(|c| c.tail_sup), PALETTE[1], 1.0);
    plot.polyline(&pick(|c| c.tail_inf), PALETTE[0], 1.0);
    plot.polyline(&pick(|c| c.average), "black", 1.5);
    out.svg("stats.svg", &plot)?;
    println!("average {:.6}, tail range [{:.6}, {:.6}]", series.last().map_or(f64::NAN, |c| c.average), series.lower_estimate(), series.upper_estimate());
    finish(&out);
    Ok(())
}

pub fn census(l: &Loaded, samples: usize, seed: u64, horizon: usize, eps: f64) -> CensusReport {
    basin_census(&l.map, &CensusConfig::new(samples, seed, horizon, eps))
}

fn attractors(cli: &Cli, l: &Loaded, samples: usize) -> Result<(), CliError> {
    let n = horizon_or(cli, 100_000)?;
    let eps = eps_or(cli, 1.0 / 4096.0)?;
    let mut out = output(cli, l, "attractors", eps, n, json!({ "samples": samples }))?;
    let report = census(l, samples, cli.seed, n, eps);
    out.json("attractors.json", &report)?;

    let rows = report.clusters.len().max(1) as f64;
    let mut plot = Plot::new(&format!("{} attractors", l.map.name), (0.0, 1.0), (0.0, rows));
    for (i, c) in report.clusters.iter().enumerate() {
        let (y0, y1) = (rows - i as f64 - 0.8, rows - i as f64 - 0.2);
        let color = PALETTE[i % PALETTE.len()];
        match &c.estimate.support {
            Support::Points { points } => points.iter().for_each(|&x| plot.rect(x - 2e-3, x + 2e-3, y0, y1, color)),
            Support::Intervals { intervals } => intervals.parts().iter().for_each(|p| plot.rect(p.lo, p.hi, y0, y1, color)),
            Support::Cells { cells } => cells.runs().iter().for_each(|&(a, b)| {
                let e = cells.eps();
                plot.rect(a as f64 * e, (b + 1) as f64 * e, y0, y1, color)
            }),
        }
        plot.label(0.0, y1 + 0.05, &format!("{:?} basin {:.3}", c.estimate.kind, c.basin_fraction));
    }
    out.svg("attractors.svg", &plot)?;
    for c in &report.clusters {
        let detail = match &c.estimate.support {
            Support::Points { points } => format!("{} points", points.len()),
            Support::Intervals { intervals } => format!("{} intervals", intervals.len()),
            Support::Cells { cells } => format!("{} cells", cells.len()),
        };
        println!("{:?}: {detail}, basin {:.3}", c.estimate.kind, c.basin_fraction);
    }
    println!("bound {} ok={}, one-sided bound {} ok={}", report.bound, report.bound_ok, report.one_sided_bound, report.one_sided_ok);
    finish(&out);
    Ok(())
}

fn parse_base(text: &str) -> Result<Interval, CliError> {
    let bad = || usage(format!("--base must be `lo,hi` with 0 <= lo < hi <= 1, got {text}"));
    let (a, b) = text.split_once(',').ok_or_else(bad)?;
    let lo: f64 = a.trim().parse().map_err(|_| bad())?;
    let hi: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(0.0 <= lo && lo < hi && hi <= 1.0) {
        return Err(bad());
    }
    Ok(Interval::new(lo, hi))
}

fn returnmap(cli: &Cli, l: &Loaded, base: &str, min_width: f64) -> Result<(), CliError> {
    let n = horizon_or(cli, 50)?;
    if n > 10_000 {
        return Err(usage(format!("returnmap --horizon must be at most 10000, got {n}")));
    }
    if !(min_width > 0.0 && min_width < 1.0) {
        return Err(usage(format!("--min-width must lie in (0, 1), got {min_width}")));
    }
    let base = parse_base(base)?;
    let mut out = output(cli, l, "returnmap", 0.0, n, json!({ "base": [base.lo, base.hi], "min_width": min_width }))?;
    let rm = first_return_map(&l.map, base, n, min_width);
    let full = is_full_branch(&rm, 1e-12);
    out.json("returnmap.json", &json!({ "full_branch": full, "return_map": rm }))?;

    let mut plot = Plot::new("first return map", (base.lo, base.hi), (base.lo, base.hi));
    for (i, b) in rm.branches.iter().take(400).enumerate() {
        let pts: Vec<(f64, f64)> = (0..=32)
            .map(|k| {
                let x = b.domain.lo + b.domain.width() * k as f64 / 32.0;
                (x, compose(&l.map, &b.word, x).clamp(base.lo, base.hi))
            })
            .collect();
        plot.polyline(&pts, PALETTE[i % PALETTE.len()], 1.0);
    }
    out.svg("returnmap.svg", &plot)?;
    println!("{} branches, full branch {full}, residual length {:.3e}", rm.branches.len(), rm.residual_length);
    finish(&out);
    Ok(())
}

fn entropy(cli: &Cli, l: &Loaded) -> Result<(), CliError> {
    let n = cli.horizon.unwrap_or(24);
    if !(LAP_RANGE.0..=LAP_RANGE.1).contains(&n) {
        return Err(usage(format!("entropy --horizon must lie in [{}, {}], got {n}", LAP_RANGE.0, LAP_RANGE.1)));
    }
    let mut out = output(cli, l, "entropy", 0.0, n, json!({}))?;
    let est = lap_entropy(&l.map, n)?;
    let mut csv = String::from("n,laps,log_laps_over_n\n");
    for k in 1..=n {
        let laps = est.laps.get(k);
        let _ = writeln!(csv, "{k},{laps},{:.17e}", (laps as f64).ln() / k as f64);
    }
    let _ = writeln!(csv, "# slope: {:.17e}", est.h);
    out.csv("entropy.csv", &csv)?;
    let summary = json!({
        "entropy": est.h,
        "nondecreasing": est.laps.is_nondecreasing(),
        "submultiplicativity_violation": est.laps.submultiplicativity_violation(),
        "laps": est.laps,
    });
    out.json("entropy.json", &summary)?;
    println!("entropy slope {:.6}", est.h);
    finish(&out);
    Ok(())
}

fn decomposition(cli: &Cli, l: &Loaded) -> Result<(), CliError> {
    let eps = eps_or(cli, 1.0 / 256.0)?;
    let mut out = output(cli, l, "decompose", eps, 0, json!({}))?;
    let est = decompose(&l.map, eps)?;
    out.json("decompose.json", &est)?;

    let rows = (est.components.len() + est.classes.len()).max(1) as f64;
    let mut plot = Plot::new(&format!("{} components", l.map.name), (0.0, 1.0), (0.0, rows));
    let mut row = 0.0;
    let mut draw = |plot: &mut Plot, runs: &[(usize, usize)], color: &str, text: String| {
        let (y0, y1) = (rows - row - 0.8, rows - row - 0.2);
        for &(a, b) in runs {
            plot.rect(a as f64 * eps, ((b + 1) as f64 * eps).min(1.0), y0, y1, color);
        }
        plot.label(0.0, y1 + 0.05, &text);
        row += 1.0;
    };
    for c in &est.components {
        draw(&mut plot, &c.cells.runs(), "#888888", format!("U({:.6})", c.c));
    }
    for (i, class) in est.classes.iter().enumerate() {
        draw(&mut plot, &class.runs, PALETTE[i % PALETTE.len()], format!("class {i}: {} members", class.members.len()));
    }
    out.svg("decompose.svg", &plot)?;
    println!("{} critical points, {} classes", est.components.len(), est.classes.len());
    finish(&out);
    Ok(())
}

/// The census cluster with the largest basin among cycles of intervals.
pub fn find_cycle(report: &CensusReport) -> Option<&intervalmap::attractors::AttractorEstimate> {
    report
        .clusters
        .iter()
        .filter(|c| c.estimate.kind == AttractorKind::CycleOfIntervals)
        .max_by(|a, b| a.basin_fraction.total_cmp(&b.basin_fraction))
        .map(|c| &c.estimate)
}

fn historic(cli: &Cli, l: &Loaded, observable: &str, q: usize, mut wcfg: WitnessConfig, samples: usize) -> Result<(), CliError> {
    let n = horizon_or(cli, 100_000)?;
    if !(1..=16).contains(&q) {
        return Err(usage(format!("--q must lie in [1, 16], got {q}")));
    }
    if wcfg.stages > 6 {
        return Err(usage(format!("--stages must be at most 6, got {}", wcfg.stages)));
    }
    let eps_shadow = cli.eps.unwrap_or(1e-3);
    if !(eps_shadow > 0.0 && eps_shadow <= 0.1) {
        return Err(usage(format!("historic --eps must lie in (0, 0.1], got {eps_shadow}")));
    }
    wcfg.eps_shadow = eps_shadow;
    let phi = Observable::parse(observable).map_err(|e| usage(format!("--observable: {e}")))?;
    let params = json!({ "observable": phi.to_string(), "q": q, "samples": samples, "witness": wcfg });
    let mut out = output(cli, l, "historic", eps_shadow, n, params)?;

    let report = census(l, samples, cli.seed, n, 1.0 / 1024.0);
    let cycle = find_cycle(&report).ok_or_else(|| usage("no cycle of intervals found; the construction needs one"))?;
    let w = construct_max_average_point(&l.map, cycle, &phi, q, &wcfg)?;
    let check = verify_witness(&l.map, &w, w.horizon())?;
    out.json("historic.json", &json!({ "witness": w, "check": check }))?;

    let lg = |m: usize| (m.max(1) as f64).log2();
    let (lo, hi) = phi.bounds();
    let mut plot = Plot::new("certified envelope", (0.0, lg(w.horizon())), (lo, hi));
    for (i, e) in w.envelope.iter().enumerate().filter(|(_, e)| e.n > 0) {
        plot.segment((lg(e.n), e.lower), (lg(e.n), e.upper), PALETTE[0], 2.0);
        if i + 1 == w.envelope.len() {
            plot.label(lg(e.n), e.upper, &format!("[{:.4}, {:.4}]", e.lower, e.upper));
        }
    }
    let obs: Vec<(f64, f64)> = check.observed.checkpoints.iter().map(|c| (lg(c.n), c.average)).collect();
    plot.polyline(&obs, PALETTE[1], 1.0);
    out.svg("envelope.svg", &plot)?;
    println!(
        "T = {}, limsup proxy {}, liminf proxy {}, certified gap {}, {} envelope points checked",
        w.horizon(),
        fmt_opt(w.limsup_proxy),
        fmt_opt(w.liminf_proxy),
        fmt_opt(w.gap),
        check.checked
    );
    finish(&out);
    Ok(())
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |x| format!("{x:.6}"))
}

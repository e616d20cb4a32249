//! Cross-check suite run by `intervalmap verify`.

use intervalmap::attractors::AttractorKind;
use intervalmap::decomposition::decompose;
use intervalmap::observable::Observable;
use intervalmap::sampling::{random_orbit, rng_for};
use intervalmap::stats::{default_theta, omega_limit_of, statistical_omega_of};
use intervalmap::structure::{birkhoff_max_oracle, lap_entropy};
use intervalmap::witness::{construct_max_average_point, verify_witness, WitnessConfig};
use intervalmap::Error;
use serde::Serialize;
use serde_json::json;

use crate::commands::{census, eps_or, find_cycle, finish, fmt_opt, horizon_or, output, Loaded};
use crate::{Cli, CliError};

/// Entropy threshold separating cycles of intervals from the rest.
const ENTROPY_THRESHOLD: f64 = 0.1;
const OMEGA_AGREEMENT: f64 = 0.95;
const OMEGA_SLACK_CELLS: usize = 2;
const ORACLE_TOL: f64 = 0.02;
const ORACLE_Q: usize = 12;
const OMEGA_EPS: f64 = 1.0 / 256.0;
const OMEGA_RUNS: usize = 20;

#[derive(Debug, Serialize)]
struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

#[derive(Default)]
struct Suite {
    checks: Vec<Check>,
}

impl Suite {
    fn push(&mut self, name: &'static str, passed: bool, detail: String) {
        println!("{} {name}: {detail}", if passed { "PASS" } else { "FAIL" });
        self.checks.push(Check { name, passed, detail });
    }
}

/// Inside the suite every library error is a failed check.
fn failed(e: Error) -> CliError {
    CliError::Failure(e.to_string())
}

pub fn run(cli: &Cli, l: &Loaded, samples: usize) -> Result<(), CliError> {
    let n = horizon_or(cli, 1_000_000)?;
    let eps = eps_or(cli, 1.0 / 1024.0)?;
    let mut out = output(cli, l, "verify", eps, n, json!({ "samples": samples }))?;
    let map = &l.map;
    let phi = Observable::identity();
    let mut s = Suite::default();

    let report = census(l, samples, cli.seed, n, eps);
    s.push("attractor_bound", report.bound_ok, format!("{} attractors, bound {}", report.clusters.len(), report.bound));
    s.push(
        "one_sided_bound",
        report.one_sided_ok,
        format!("{} one-sided cycles, bound {}", report.one_sided_cycles, report.one_sided_bound),
    );
    let unresolved = report.clusters.iter().filter(|c| c.estimate.kind == AttractorKind::Unresolved).count();
    let kinds: Vec<String> = report.clusters.iter().map(|c| format!("{:?}", c.estimate.kind)).collect();
    s.push("trichotomy", unresolved == 0, format!("kinds [{}]", kinds.join(", ")));

    let cycle = find_cycle(&report);
    let entropy = lap_entropy(map, 24).map_err(failed)?;
    match cycle {
        Some(_) => s.push(
            "entropy_positive",
            entropy.h > ENTROPY_THRESHOLD,
            format!("lap slope {:.4} with a cycle of intervals", entropy.h),
        ),
        None => s.push("entropy_reported", true, format!("lap slope {:.4}", entropy.h)),
    }
    s.push(
        "lap_submultiplicative",
        entropy.laps.submultiplicativity_violation().is_none(),
        format!("{:?}", entropy.laps.submultiplicativity_violation()),
    );

    let theta = default_theta(n);
    let mut agree = 0;
    let mut subset = true;
    for k in 0..OMEGA_RUNS {
        let orb = random_orbit(map, &mut rng_for(cli.seed, 1000 + k as u64), n);
        let omega = omega_limit_of(&orb, n / 2, OMEGA_EPS).cells;
        let star = statistical_omega_of(&orb, n, OMEGA_EPS, theta).cells;
        subset &= star.is_subset(&omega.dilate(OMEGA_SLACK_CELLS));
        if omega.hausdorff_cells(&star) <= OMEGA_SLACK_CELLS {
            agree += 1;
        }
    }
    let frac = agree as f64 / OMEGA_RUNS as f64;
    s.push("omega_star_subset", subset, format!("statistical estimate inside the topological one on {OMEGA_RUNS} runs"));
    s.push(
        "omega_agreement",
        frac >= OMEGA_AGREEMENT,
        format!("{agree}/{OMEGA_RUNS} runs within {OMEGA_SLACK_CELLS} cells at eps {OMEGA_EPS}"),
    );

    let mut witness = serde_json::Value::Null;
    match cycle {
        Some(c) => {
            let w = construct_max_average_point(map, c, &phi, ORACLE_Q, &WitnessConfig::default()).map_err(failed)?;
            let check = verify_witness(map, &w, w.horizon());
            let gap = w.gap.unwrap_or(0.0);
            s.push(
                "historic_witness",
                check.is_ok() && gap > 0.0,
                match &check {
                    Ok(v) => format!("certified gap {gap:.4}, {} envelope points replayed", v.checked),
                    Err(e) => e.to_string(),
                },
            );
            let oracle = birkhoff_max_oracle(map, c, &phi, ORACLE_Q).map_err(failed)?;
            let single = WitnessConfig { single_phase: true, ..WitnessConfig::default() };
            let sw = construct_max_average_point(map, c, &phi, ORACLE_Q, &single).map_err(failed)?;
            let last = *sw.envelope.last().expect("envelope has a final point");
            let ok = (last.lower - oracle.value).abs() <= ORACLE_TOL && (last.upper - oracle.value).abs() <= ORACLE_TOL;
            s.push(
                "max_average_witness",
                ok,
                format!("oracle {:.6}, final envelope [{:.6}, {:.6}]", oracle.value, last.lower, last.upper),
            );
            witness = json!({
                "gap": w.gap,
                "limsup_proxy": w.limsup_proxy,
                "liminf_proxy": w.liminf_proxy,
                "horizon": w.horizon(),
                "oracle": oracle.value,
                "single_phase_final": last,
            });
            println!("witness proxies {} / {}", fmt_opt(w.limsup_proxy), fmt_opt(w.liminf_proxy));
        }
        None => {
            let mut rejected = 0;
            for c in &report.clusters {
                if matches!(
                    construct_max_average_point(map, &c.estimate, &phi, ORACLE_Q, &WitnessConfig::default()),
                    Err(Error::Precondition(_))
                ) {
                    rejected += 1;
                }
            }
            s.push(
                "no_historic_without_cycle",
                rejected == report.clusters.len(),
                format!("{rejected}/{} attractors rejected by the witness construction", report.clusters.len()),
            );
        }
    }

    let d = decompose(map, 1.0 / 256.0).map_err(failed)?;
    let nc = map.critical().len();
    s.push("decomposition_bound", d.classes.len() <= nc, format!("{} classes, {} critical points", d.classes.len(), nc));

    let passed = s.checks.iter().all(|c| c.passed);
    out.json(
        "verify.json",
        &json!({ "passed": passed, "checks": s.checks, "entropy": entropy.h, "witness": witness, "census": report }),
    )?;
    finish(&out);
    if passed {
        Ok(())
    } else {
        let failed: Vec<&str> = s.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        Err(CliError::Failure(format!("checks failed: {}", failed.join(", "))))
    }
}

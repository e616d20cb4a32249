use intervalmap::attractors::{basin_census, AttractorKind, CensusConfig, Support};
use intervalmap::decomposition::decompose;
use intervalmap::observable::Observable;
use intervalmap::sampling::rational_orbit;
use intervalmap::stats::{visiting_frequency_of, Region};
use intervalmap::structure::{lap_entropy, periodic_orbits};
use intervalmap::{catalog, cells::cell_of};
use proptest::prelude::*;

/// Period-3 points of the logistic map by Newton on f³(x) − x, with the
/// derivative by the chain rule. Returns sorted distinct roots.
fn logistic_three_cycles(lambda: f64) -> Vec<(f64, f64)> {
    let f = |x: f64| lambda * x * (1.0 - x);
    let df = |x: f64| lambda * (1.0 - 2.0 * x);
    let mut roots: Vec<(f64, f64)> = Vec::new();
    for i in 1..2000 {
        let mut x = i as f64 / 2000.0;
        for _ in 0..100 {
            let (x1, x2) = (f(x), f(f(x)));
            let g = f(x2) - x;
            let dg = df(x) * df(x1) * df(x2) - 1.0;
            if dg == 0.0 {
                break;
            }
            x -= g / dg;
        }
        let fixed = 1.0 - 1.0 / lambda;
        let (x1, x2) = (f(x), f(f(x)));
        if (0.0..=1.0).contains(&x) && (f(x2) - x).abs() < 1e-13 && (x - fixed).abs() > 1e-6 && x > 1e-6 {
            let mult = (df(x) * df(x1) * df(x2)).abs();
            if roots.iter().all(|r| (r.0 - x).abs() > 1e-9) {
                roots.push((x, mult));
            }
        }
    }
    roots.sort_by(|a, b| a.0.total_cmp(&b.0));
    roots
}

#[test]
fn three_cycles_match_newton_oracle() {
    let lambda = 3.83;
    let oracle = logistic_three_cycles(lambda);
    assert_eq!(oracle.len(), 6, "two 3-cycles expected, got {oracle:?}");
    let table = periodic_orbits(&catalog::logistic(lambda), 3, &[Observable::identity()]).unwrap();
    let mut found: Vec<f64> = table.by_period[2].iter().flat_map(|o| o.points.clone()).collect();
    found.sort_by(f64::total_cmp);
    assert_eq!(found.len(), 6);
    for (a, b) in found.iter().zip(&oracle) {
        assert!((a - b.0).abs() < 1e-10, "{a} vs {}", b.0);
    }
    for o in &table.by_period[2] {
        let m = oracle.iter().find(|r| (r.0 - o.points[0]).abs() < 1e-9).unwrap().1;
        assert!((o.multiplier - m).abs() <= 1e-8 * m.max(1.0));
    }
}

#[test]
fn census_finds_the_attracting_three_cycle() {
    let lambda = 3.83;
    let stable: Vec<f64> = logistic_three_cycles(lambda).into_iter().filter(|r| r.1 < 1.0).map(|r| r.0).collect();
    assert_eq!(stable.len(), 3);
    let eps = 2f64.powi(-12);
    let report = basin_census(&catalog::logistic(lambda), &CensusConfig::new(20, 5, 20_000, eps));
    assert!(report.bound_ok && report.one_sided_ok);
    assert_eq!(report.clusters.len(), 1);
    let est = &report.clusters[0].estimate;
    assert_eq!(est.kind, AttractorKind::PeriodicLike);
    let Support::Points { points } = &est.support else { panic!("point support expected") };
    let n = (1.0 / eps) as usize;
    let mut got: Vec<usize> = points.iter().map(|&x| cell_of(x, eps, n)).collect();
    let mut want: Vec<usize> = stable.iter().map(|&x| cell_of(x, eps, n)).collect();
    got.sort();
    want.sort();
    assert_eq!(got, want);
}

#[test]
fn lap_counts_of_full_maps_are_powers() {
    for (map, base) in [(catalog::tent(2.0), 2u128), (catalog::logistic(4.0), 2), (catalog::chebyshev3(), 3)] {
        let e = lap_entropy(&map, 16).unwrap();
        for n in 1..=16 {
            assert_eq!(e.laps.get(n), base.pow(n as u32), "{} at n = {n}", map.name);
        }
        assert!((e.h - (base as f64).ln()).abs() < 1e-9);
    }
}

#[test]
fn doubling_frequency_at_one_third_is_one_half() {
    let orbit = rational_orbit(&catalog::doubling(), 1, 3, 1024).unwrap();
    let f = visiting_frequency_of(&orbit, &Region::half_open(0.0, 0.5), 1024);
    assert_eq!(f.last(), 0.5);
}

#[test]
fn decomposition_classes_sit_on_critical_cells() {
    let eps = 1.0 / 256.0;
    let n = (1.0 / eps) as usize;
    for (map, classes) in [(catalog::logistic(4.0), 1), (catalog::bimodal_halves(3.9), 2), (catalog::tent(2.0), 1)] {
        let d = decompose(&map, eps).unwrap();
        assert_eq!(d.classes.len(), classes, "{}", map.name);
        for class in &d.classes {
            for &c in &class.members {
                assert!(class.cells.contains_cell(cell_of(c, eps, n)), "{} misses c = {c}", map.name);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn census_respects_attractor_bound(lambda in 2.8f64..=4.0, seed in any::<u64>()) {
        let report = basin_census(&catalog::logistic(lambda), &CensusConfig::new(12, seed, 20_000, 2f64.powi(-10)));
        prop_assert!(report.bound_ok && report.one_sided_ok, "{lambda}: {} clusters", report.clusters.len());
        let mass: f64 = report.clusters.iter().map(|c| c.basin_fraction).sum();
        prop_assert!((mass - 1.0).abs() < 1e-9 || report.truncated_samples > 0);
    }
}

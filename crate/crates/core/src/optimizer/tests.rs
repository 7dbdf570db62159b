use super::*;
use crate::datamodel::Technology;
use std::f64::consts::PI;

fn sun(h: usize) -> f64 {
    (PI * ((h % 24) as f64 - 6.0) / 12.0).sin().max(0.0)
}

/// Flat 1 GW demand, PV shape peaking at 1 GW per GWp at noon.
fn periodic_problem() -> PlanningProblem {
    PlanningProblem {
        demand: HourlySeries::constant(1_000.0, "d"),
        portfolio: Portfolio::default(),
        pv_shape: HourlySeries::from_fn("pv", |h| 1_000.0 * sun(h)),
        storage: StorageSpec::reference(0.0),
        cost: CostModel::reference(),
        sweep: SweepParams {
            pv_step_gwp: 0.25,
            stop_threshold_gwh_per_gwp: 0.01,
            capacity_factor: 0.5,
            ..SweepParams::default()
        },
        pv_limit_gwp: None,
    }
}

/// Daily energy (GWh) the battery must carry with `pv` GWp installed.
fn daily_deficit(pv: f64) -> f64 {
    (0..24).map(|h| (1.0 - pv * sun(h)).max(0.0)).sum()
}

fn daily_surplus(pv: f64) -> f64 {
    (0..24).map(|h| (pv * sun(h) - 1.0).max(0.0)).sum()
}

#[test]
fn analytic_isoquant_points() {
    let p = periodic_problem();
    for pv in [3.5, 3.75, 4.0, 10.0] {
        assert!(0.95 * daily_surplus(pv) >= daily_deficit(pv));
        let s = p.min_storage_for_full_coverage(pv).unwrap();
        let exact = daily_deficit(pv);
        assert!((s - exact).abs() <= 2e-3 * exact, "pv {pv}: {s} vs {exact}");
    }
}

#[test]
fn analytic_sweep_reaches_night_asymptote() {
    let sweep = pv_storage_isoquant(&periodic_problem()).unwrap();
    assert!(sweep.points.len() > 3, "{}", sweep.points.len());
    for pt in &sweep.points {
        let exact = daily_deficit(pt.metrics.pv_gwp);
        assert!((pt.metrics.storage_gwh - exact).abs() <= 2e-3 * exact);
        assert!(pt.metrics.served_fraction > 1.0 - 1e-5);
    }
    assert!((sweep.min_storage_asymptote_gwh - 13.0).abs() < 0.03);
    assert_eq!(sweep.stop_reason, StopReason::Saturated);
    assert!(sweep.skipped_infeasible > 0);
    let best = sweep.least_cost();
    assert!(sweep
        .points
        .iter()
        .all(|p| p.metrics.lcoe_eur_mwh >= best.metrics.lcoe_eur_mwh));
}

#[test]
fn covered_every_hour_needs_no_storage() {
    let p = periodic_problem();
    let mut p2 = p.clone();
    p2.pv_shape = HourlySeries::constant(1_000.0, "pv");
    assert_eq!(p2.min_storage_for_full_coverage(1.0).unwrap(), 0.0);
    assert_eq!(p2.min_storage_for_full_coverage(3.0).unwrap(), 0.0);
}

#[test]
fn infeasible_reports_gap() {
    let p = periodic_problem();
    match p.min_storage_for_full_coverage(0.5) {
        Err(Error::Infeasible { gap_mwh }) => assert!(gap_mwh > 0.0),
        other => panic!("{other:?}"),
    }
    let mut limited = p.clone();
    limited.pv_limit_gwp = Some(1.2);
    assert!(matches!(
        pv_storage_isoquant(&limited),
        Err(Error::NoFeasiblePoint { .. })
    ));
}

#[test]
fn single_point_sweep() {
    let mut p = periodic_problem();
    p.sweep.capacity_factor = 0.2;
    p.pv_limit_gwp = Some(p.initial_pv_guess().unwrap() + 10.0);
    p.sweep.pv_step_gwp = 1_000.0;
    let sweep = pv_storage_isoquant(&p).unwrap();
    assert_eq!(sweep.points.len(), 1);
    assert_eq!(sweep.least_cost_index, 0);
    assert_eq!(sweep.stop_reason, StopReason::RooftopLimit);
}

#[test]
fn sweep_is_deterministic_across_pools() {
    let p = periodic_problem();
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| pv_storage_isoquant(&p));
    let many = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(|| pv_storage_isoquant(&p));
    assert_eq!(one.unwrap(), many.unwrap());
}

#[test]
fn coverage_curve() {
    let p = periodic_problem();
    let grid = [0.0, 2.0, 5.0, 10.0, 20.0, 50.0];
    let curve = p.coverage_vs_storage_curve(4.0, &grid).unwrap();
    assert!(curve.windows(2).all(|w| w[1].1 >= w[0].1));
    // no storage: only daylight hours with at least 1 GW of PV are covered
    let direct: f64 = (0..24).map(|h| (4.0 * sun(h)).min(1.0)).sum::<f64>() / 24.0;
    assert!((curve[0].1 - direct).abs() < 1e-9);
    assert!((curve[5].1 - 1.0).abs() < 1e-9);
    assert!(p.coverage_vs_storage_curve(4.0, &[3.0, 1.0]).is_err());
}

fn brute_force_min_storage(net: &[f64], demand: f64, flex: Flexibility, fine: f64) -> f64 {
    let feasible = |c: f64| {
        let plant = flex.plant(c);
        let mut soc = 0.0;
        let mut unserved = 0.0;
        for _ in 0..2 {
            let mut budget = plant.budget;
            unserved = 0.0;
            for &n in net {
                if n < 0.0 {
                    soc = f64::min(
                        plant.capacity,
                        soc + plant.efficiency * f64::min(-n, (plant.capacity - soc) / plant.efficiency),
                    );
                } else {
                    let from_battery = n.min(soc);
                    soc -= from_battery;
                    let m = (n - from_battery).min(plant.power_cap).min(budget);
                    budget -= m;
                    unserved += n - from_battery - m;
                }
            }
        }
        unserved <= FEASIBILITY_TOL * demand
    };
    let mut c = 0.0;
    while !feasible(c) {
        c += fine;
    }
    c
}

#[test]
fn bisection_matches_scan_on_small_windows() {
    let mut state = 0x2545_f491_u64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state % 10_000) as f64 / 10_000.0
    };
    for _ in 0..8 {
        let window: Vec<f64> = (0..48)
            .map(|h| 3.0 * next() - if h % 24 > 8 && h % 24 < 17 { 4.0 } else { 0.5 })
            .collect();
        let net = HourlySeries::padded(&window, 0, "w").unwrap();
        let demand: f64 = window.iter().map(|n| n.max(0.0)).sum();
        let flex = Flexibility {
            efficiency: 0.9,
            budget_mwh: 2.0 * next(),
            power_cap_mw: next(),
        };
        let Ok(bisect) = min_storage_mwh(net.values(), demand, flex, 1e-3) else {
            continue;
        };
        let step = (1e-3 * bisect).max(1e-9);
        let scan = brute_force_min_storage(net.values(), demand, flex, step);
        assert!((bisect - scan).abs() <= step + 1e-3 * bisect, "{bisect} vs {scan}");
    }
}

fn hydro_problem() -> PlanningProblem {
    let mut p = periodic_problem();
    let hydro = Technology::new("hydro", 400.0, 0.0, HourlySeries::constant(200.0, "hydro"), 0.0).unwrap();
    p.portfolio = Portfolio::new(vec![hydro]);
    p.sweep.pv_step_gwp = 0.25;
    p
}

#[test]
fn hydro_sweep_single_fraction_matches_plain_sweep() {
    let p = hydro_problem();
    let rows = hydro_manageability_sweep(&p, &[0.5]).unwrap();
    let plain = pv_storage_isoquant(&p.with_hydro_manageability(0.5).unwrap()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].least_cost, plain.least_cost().metrics);
}

#[test]
fn more_manageable_hydro_is_not_dearer() {
    let rows = hydro_manageability_sweep(&hydro_problem(), &[0.8, 0.0, 0.4]).unwrap();
    assert_eq!(
        rows.iter().map(|r| r.hydro_fraction).collect::<Vec<_>>(),
        vec![0.0, 0.4, 0.8]
    );
    for w in rows.windows(2) {
        assert!(w[1].least_cost.lcoe_eur_mwh <= w[0].least_cost.lcoe_eur_mwh + 1e-6);
    }
}

#[test]
fn isoquant_csv_round_trip() {
    let sweep = pv_storage_isoquant(&periodic_problem()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("isoquant.csv");
    write_isoquant_csv(&path, &sweep).unwrap();
    let back = read_isoquant_csv(&path).unwrap();
    assert_eq!(back.len(), sweep.points.len());
    for (a, b) in back.iter().zip(&sweep.points) {
        assert_eq!(a.metrics.pv_gwp, b.metrics.pv_gwp);
        assert_eq!(a.metrics.storage_gwh, b.metrics.storage_gwh);
        assert_eq!(a.flag, b.flag);
    }
}

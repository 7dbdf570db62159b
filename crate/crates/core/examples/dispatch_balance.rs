//! Hour-by-hour dispatch: a four-hour toy case, then a synthetic national
//! year with an existing fleet, rooftop PV and a battery.
//!
//! cargo run --example dispatch_balance -- [storage_gwh]

use gridmix::balance::{periodic_balance, simulate_balance, DispatchInputs, Period};
use gridmix::cli::{Bundle, SystemModel};
use gridmix::datamodel::{HourlySeries, ScenarioConfig, StorageSpec};
use gridmix::synthetic::{FixtureDataset, FixtureSpec};

fn toy() -> anyhow::Result<()> {
    let padded = |v: &[f64]| HourlySeries::padded(v, 0, "toy");
    let inputs = DispatchInputs {
        demand: padded(&[0.0, 5.0, 5.0, 5.0])?,
        nonmanageable_production: padded(&[10.0, 0.0, 0.0, 0.0])?,
        manageable_budget_mwh: 100.0,
        manageable_power_cap_mw: 100.0,
        storage: StorageSpec::reference(10.0),
    };
    let r = simulate_balance(&inputs);
    println!(
        "toy: stored {:.2} MWh, lost {:.2}, manageable {:.2}, unserved {:.2}",
        r.battery_charge_input - r.storage_losses,
        r.storage_losses,
        r.manageable_used,
        r.unserved
    );
    Ok(())
}

fn main() -> anyhow::Result<()> {
    toy()?;
    let storage_gwh: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(100.0);

    let dir = tempfile::tempdir()?;
    FixtureDataset::generate(FixtureSpec::default())?.write(dir.path())?;
    let bundle = Bundle::load(dir.path())?;
    let mut scenario = ScenarioConfig::brownfield();
    scenario.storage = scenario.storage.with_capacity(storage_gwh * 1e3);
    let model = SystemModel::build(&bundle, &scenario)?;
    let inputs = model.dispatch_inputs(&scenario)?;
    let r = simulate_balance(&inputs);
    let s = r.summary();

    println!(
        "year: {:.2} GWp rooftop PV, {storage_gwh} GWh battery, demand {:.2} TWh",
        model.deployed_pv_gwp(&scenario),
        s.total_demand_mwh / 1e6
    );
    println!(
        "  direct {:.2}, battery {:.2}, manageable {:.2}, unserved {:.2}, curtailed {:.2} TWh",
        s.direct_supplied_mwh / 1e6,
        s.battery_discharged_mwh / 1e6,
        s.manageable_used_mwh / 1e6,
        s.unserved_mwh / 1e6,
        s.curtailed_mwh / 1e6
    );
    println!(
        "  coverage {:.1}%, cyclic state of charge: {}",
        100.0 * s.coverage,
        s.cyclic
    );
    for b in periodic_balance(&inputs.demand, &inputs.nonmanageable_production, Period::Quarter) {
        println!("  {} net {:>8.2} TWh ({})", b.period, b.net_mwh / 1e6, b.status);
    }
    Ok(())
}

//! PV/storage isoquant of a rooftop-only system: the smallest battery that
//! reaches full coverage for each PV size, with its cost.
//!
//! Electric vehicles are left out: with them the synthetic rooftops cannot
//! cover the year on their own.
//!
//! cargo run --release --example storage_isoquant -- [out.csv]

use gridmix::cli::{Bundle, SystemModel};
use gridmix::datamodel::ScenarioConfig;
use gridmix::optimizer::{pv_storage_isoquant, storage_hours, write_isoquant_csv};
use gridmix::synthetic::{FixtureDataset, FixtureSpec};

fn main() -> anyhow::Result<()> {
    let dir = tempfile::tempdir()?;
    FixtureDataset::generate(FixtureSpec::default())?.write(dir.path())?;
    let bundle = Bundle::load(dir.path())?;
    let mut scenario = ScenarioConfig::greenfield();
    scenario.include_ev = false;
    let model = SystemModel::build(&bundle, &scenario)?;
    scenario.sweep.pv_step_gwp = model.rooftop_potential_gwp / 40.0;
    let problem = model.planning_problem(&scenario)?;

    println!(
        "demand {:.2} TWh, rooftop potential {:.2} GWp, first guess {:.2} GWp",
        problem.demand.total() / 1e6,
        model.rooftop_potential_gwp,
        problem.initial_pv_guess()?
    );
    let sweep = pv_storage_isoquant(&problem)?;
    println!("{:>8} {:>10} {:>10} {:>10}  flag", "GWp", "GWh", "LCOE", "curt TWh");
    for p in &sweep.points {
        let m = &p.metrics;
        println!(
            "{:>8.2} {:>10.2} {:>10.2} {:>10.3}  {:?}",
            m.pv_gwp, m.storage_gwh, m.lcoe_eur_mwh, m.curtailed_twh, p.flag
        );
    }
    let best = &sweep.least_cost().metrics;
    println!(
        "least cost {:.2} GWp + {:.2} GWh at {:.2} EUR/MWh, {:.1} h of storage; stopped: {:?}",
        best.pv_gwp,
        best.storage_gwh,
        best.lcoe_eur_mwh,
        storage_hours(best.storage_gwh, best.rated_power_gw)?,
        sweep.stop_reason
    );
    if let Some(path) = std::env::args().nth(1) {
        write_isoquant_csv(path.as_ref(), &sweep)?;
    }
    Ok(())
}

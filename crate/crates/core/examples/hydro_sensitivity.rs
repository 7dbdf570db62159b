//! Least-cost PV and storage next to an existing fleet as a growing share of
//! hydro becomes dispatchable.
//!
//! cargo run --release --example hydro_sensitivity -- [fractions]
//!
//! The PV ceiling is lifted so every sweep can reach its own minimum.

use gridmix::cli::{parse_fraction_list, Bundle, SystemModel};
use gridmix::datamodel::ScenarioConfig;
use gridmix::optimizer::hydro_manageability_sweep;
use gridmix::synthetic::{FixtureDataset, FixtureSpec};

fn main() -> anyhow::Result<()> {
    let fractions = parse_fraction_list(&std::env::args().nth(1).unwrap_or_else(|| "0.4,0.55,0.7,0.85".into()))?;
    let dir = tempfile::tempdir()?;
    FixtureDataset::generate(FixtureSpec {
        municipalities: 40,
        ..FixtureSpec::default()
    })?
    .write(dir.path())?;
    let bundle = Bundle::load(dir.path())?;
    let mut scenario = ScenarioConfig::brownfield();
    let model = SystemModel::build(&bundle, &scenario)?;
    scenario.sweep.pv_step_gwp = model.rooftop_potential_gwp / 40.0;
    let mut problem = model.planning_problem(&scenario)?;
    problem.pv_limit_gwp = None;

    println!("rooftop potential {:.2} GWp", model.rooftop_potential_gwp);
    println!(
        "{:>9} {:>9} {:>10} {:>10} {:>7}",
        "fraction", "PV GWp", "store GWh", "LCOE", "points"
    );
    for row in hydro_manageability_sweep(&problem, &fractions)? {
        let m = &row.least_cost;
        println!(
            "{:>9.2} {:>9.2} {:>10.2} {:>10.2} {:>7}",
            row.hydro_fraction, m.pv_gwp, m.storage_gwh, m.lcoe_eur_mwh, row.sweep_points
        );
    }
    Ok(())
}

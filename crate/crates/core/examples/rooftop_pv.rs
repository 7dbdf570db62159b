//! Rooftop inventory, installable capacity and hourly production for one
//! municipality, plus the national potential of a synthetic set.
//!
//! cargo run --example rooftop_pv

use gridmix::rooftop_pv::{
    classify_rooftops, hourly_pv_production, installable_capacity, interpolate_canonical_days, PvParams,
};
use gridmix::synthetic::{FixtureDataset, FixtureSpec};

fn main() -> anyhow::Result<()> {
    let data = FixtureDataset::generate(FixtureSpec::default())?;
    let params = PvParams::default();

    let town = data
        .municipalities
        .entries()
        .iter()
        .max_by_key(|m| m.population)
        .expect("non-empty set");
    let inventory = classify_rooftops(town, &data.rooftop_split, &params)?;
    let capacity = installable_capacity(&inventory, &params);
    let yields = interpolate_canonical_days(data.canonical_yields.region(&town.region)?);
    let production = hourly_pv_production(&capacity, &yields, &params)?;

    println!(
        "{} ({}, {} inhabitants, zone {:?})",
        town.name, town.region, town.population, town.climate_zone
    );
    println!(
        "footprint {:.0} m², usable {:.0} m²",
        town.footprint_area,
        inventory.total()
    );
    for (orientation, kwp) in capacity.producing_classes() {
        println!("  {:<6} {:>10.0} kWp", orientation.as_str(), kwp);
    }
    let kwp = capacity.producing_kwp();
    println!(
        "{:.1} MWp producing {:.1} GWh/yr ({:.0} kWh/kWp)",
        kwp / 1e3,
        production.total() / 1e3,
        production.total() * 1e3 / kwp
    );

    let mut national_kwp = 0.0;
    for m in data.municipalities.entries() {
        let cap = installable_capacity(&classify_rooftops(m, &data.rooftop_split, &params)?, &params);
        national_kwp += cap.producing_kwp();
    }
    println!("synthetic national rooftop potential {:.2} GWp", national_kwp / 1e6);
    Ok(())
}

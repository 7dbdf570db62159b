//! Converts a national vehicle stock into equivalent cars and an hourly
//! charging demand.
//!
//! cargo run --example ev_fleet

use std::collections::BTreeMap;

use gridmix::demand::{equivalent_car_fleet, ev_demand, EvConversionTable};
use gridmix::synthetic::ev_profile;

fn main() -> anyhow::Result<()> {
    let table = EvConversionTable::spanish_default();
    let stock = BTreeMap::from([
        ("cars".to_owned(), 22_113_723),
        ("vans".to_owned(), 2_193_230),
        ("buses".to_owned(), 56_071),
        ("motorbikes".to_owned(), 3_166_800),
    ]);
    for (category, count) in &stock {
        let c = table.get(category).expect("known category");
        println!(
            "{category:<12} {count:>11} vehicles, {:.3} MWh/yr each, factor {:.2}",
            c.annual_consumption_mwh(),
            c.equivalence_factor
        );
    }
    let fleet = equivalent_car_fleet(&stock, &table)?;
    let per_car = table.per_car_annual_mwh();
    let hourly = ev_demand(fleet, per_car, &ev_profile())?;
    println!("{:.2} M equivalent cars at {per_car:.4} MWh/yr", fleet / 1e6);
    println!(
        "annual charging demand {:.2} TWh, peak {:.1} GW",
        hourly.total() / 1e6,
        hourly.max() / 1e3
    );
    Ok(())
}

//! Fits the municipal demand regression on a synthetic set with a known
//! linear truth, then predicts and rescales to regional totals.
//!
//! cargo run --example demand_regression -- [noise]

use gridmix::demand::{estimate_municipal_demand, DemandSource};
use gridmix::synthetic::{FixtureDataset, FixtureSpec, TRUTH_COEFFICIENTS};

const COLUMNS: [&str; 9] = [
    "intercept",
    "population",
    "income",
    "cadastral",
    "altitude",
    "zone II",
    "zone III",
    "zone IV",
    "zone V",
];

fn main() -> anyhow::Result<()> {
    let noise = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0.0);
    let data = FixtureDataset::generate(FixtureSpec {
        noise,
        ..FixtureSpec::default()
    })?;
    let estimate = estimate_municipal_demand(&data.municipalities, Some(&data.regional_totals))?;
    let model = &estimate.model;

    println!(
        "trained on {} municipalities, R² = {:.6}",
        model.training_size, model.r_squared
    );
    println!("{:<12} {:>14} {:>14}", "column", "fitted", "truth");
    for ((name, fit), truth) in COLUMNS.iter().zip(&model.coefficients).zip(TRUTH_COEFFICIENTS) {
        println!("{name:<12} {fit:>14.6} {truth:>14.6}");
    }

    let predicted = estimate
        .municipalities
        .iter()
        .filter(|d| d.source == DemandSource::Predicted)
        .count();
    let extrapolated = estimate.municipalities.iter().filter(|d| d.extrapolated).count();
    println!("{predicted} municipalities predicted, {extrapolated} clamped at zero");
    let total: f64 = estimate.municipalities.iter().map(|d| d.annual_mwh).sum();
    let target: f64 = data.regional_totals.values().sum();
    println!(
        "scaled national demand {:.3} GWh (regional totals {:.3} GWh)",
        total / 1e3,
        target / 1e3
    );
    Ok(())
}

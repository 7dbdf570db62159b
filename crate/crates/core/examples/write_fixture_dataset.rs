//! Writes a seeded synthetic data directory that the `gridmix` binary can read.
//!
//! cargo run --example write_fixture_dataset -- <dir> [seed] [municipalities]

use std::path::PathBuf;

use gridmix::synthetic::{FixtureDataset, FixtureSpec};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "fixture-data".into()));
    let mut spec = FixtureSpec::default();
    if let Some(seed) = args.next() {
        spec.seed = seed.parse()?;
    }
    if let Some(n) = args.next() {
        spec.municipalities = n.parse()?;
    }
    let data = FixtureDataset::generate(spec)?;
    data.write(&dir)?;
    let demand: f64 = data.regional_totals.values().sum();
    println!(
        "{} municipalities, {:.1} GWh/yr of demand, written to {}",
        data.municipalities.len(),
        demand / 1e3,
        dir.display()
    );
    Ok(())
}

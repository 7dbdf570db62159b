//! Loads a municipality table, merges small villages per province and
//! writes the prepared bundle.
//!
//! cargo run --example ingest_and_aggregate -- [data_dir] [threshold]
//!
//! Without a data directory a seeded synthetic set is used.

use std::path::PathBuf;

use gridmix::cli::Bundle;
use gridmix::datamodel::{aggregate_small_municipalities, DEFAULT_AGGREGATION_THRESHOLD};
use gridmix::synthetic::{FixtureDataset, FixtureSpec};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let tmp = tempfile::tempdir()?;
    let dir = match args.next() {
        Some(d) => PathBuf::from(d),
        None => {
            FixtureDataset::generate(FixtureSpec::default())?.write(tmp.path())?;
            tmp.path().to_path_buf()
        }
    };
    let threshold = match args.next() {
        Some(t) => t.parse()?,
        None => DEFAULT_AGGREGATION_THRESHOLD,
    };

    let bundle = Bundle::load(&dir)?;
    let raw = &bundle.municipalities;
    let merged = aggregate_small_municipalities(raw, threshold)?;
    let virtual_count = merged.entries().iter().filter(|m| m.is_virtual()).count();
    println!("{} municipalities read from {}", raw.len(), dir.display());
    println!(
        "{} entities after merging villages below {threshold} inhabitants ({virtual_count} virtual)",
        merged.len()
    );
    println!("population {} -> {}", raw.total_population(), merged.total_population());
    for m in merged.entries().iter().filter(|m| m.is_virtual()) {
        println!(
            "  {:<24} {:>8} inhabitants, zone {:?}",
            m.name, m.population, m.climate_zone
        );
    }

    let out = tmp.path().join("bundle");
    bundle.aggregated(threshold)?.write(&out)?;
    println!(
        "prepared bundle re-loads with {} entities",
        Bundle::load(&out)?.municipalities.len()
    );
    Ok(())
}

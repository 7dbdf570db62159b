use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::datamodel::{expect_header, file_label, open_csv, parse_f64, ClimateZone, Municipality};
use crate::error::{Error, Result};

pub const ROOFTOP_SPLIT_HEADER: [&str; 4] = ["climate_zone", "pop_band", "flat_fraction", "pitched_fraction"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PopulationBand {
    /// Fewer than 10,000 inhabitants, and every aggregated entity.
    Small,
    /// 10,000 up to 100,000.
    Medium,
    /// 100,000 and above.
    Large,
}

impl PopulationBand {
    pub const ALL: [PopulationBand; 3] = [PopulationBand::Small, PopulationBand::Medium, PopulationBand::Large];

    pub fn from_population(population: u64) -> Self {
        match population {
            p if p >= 100_000 => PopulationBand::Large,
            p if p >= 10_000 => PopulationBand::Medium,
            _ => PopulationBand::Small,
        }
    }

    pub fn of(m: &Municipality) -> Self {
        if m.is_virtual() {
            PopulationBand::Small
        } else {
            Self::from_population(m.population)
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PopulationBand::Small => "small",
            PopulationBand::Medium => "medium",
            PopulationBand::Large => "large",
        }
    }
}

impl fmt::Display for PopulationBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PopulationBand {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "small" | "<10000" | "1000-10000" => Ok(PopulationBand::Small),
            "medium" | "10000-100000" => Ok(PopulationBand::Medium),
            "large" | ">100000" | ">=100000" => Ok(PopulationBand::Large),
            other => Err(format!("unknown population band `{other}`")),
        }
    }
}

/// Flat/pitched roof shares per climate zone and population band.
#[derive(Clone, Debug, PartialEq)]
pub struct RooftopSplitTable {
    rows: BTreeMap<(ClimateZone, PopulationBand), (f64, f64)>,
}

impl RooftopSplitTable {
    pub fn empty() -> Self {
        Self { rows: BTreeMap::new() }
    }

    /// Inserts a row, rescaling it to a partition when the two shares do not
    /// add up to one.
    pub fn set(&mut self, zone: ClimateZone, band: PopulationBand, flat: f64, pitched: f64) {
        let sum = flat + pitched;
        let (f, p) = if sum > 0.0 && (sum - 1.0).abs() > 1e-9 {
            log::warn!(
                "rooftop split for zone {zone}, band {band} sums to {sum:.3}; rescaled to {:.3}/{:.3}",
                flat / sum,
                pitched / sum
            );
            (flat / sum, pitched / sum)
        } else {
            (flat, pitched)
        };
        self.rows.insert((zone, band), (f, p));
    }

    /// Survey-based shares for mainland Spain (regional outliers not applied).
    pub fn spanish_default() -> Self {
        use ClimateZone::*;
        const ROWS: [(ClimateZone, [(f64, f64); 3]); 5] = [
            (I, [(0.10, 0.90), (0.10, 0.90), (0.20, 0.90)]),
            (II, [(0.10, 0.90), (0.20, 0.80), (0.40, 0.60)]),
            (III, [(0.20, 0.80), (0.30, 0.70), (0.30, 0.70)]),
            (IV, [(0.10, 0.90), (0.30, 0.70), (0.50, 0.50)]),
            (V, [(0.20, 0.80), (0.40, 0.60), (0.70, 0.30)]),
        ];
        let mut t = Self::empty();
        for (zone, bands) in ROWS {
            for (band, (flat, pitched)) in PopulationBand::ALL.into_iter().zip(bands) {
                t.set(zone, band, flat, pitched);
            }
        }
        t
    }

    /// `(flat_fraction, pitched_fraction)`.
    pub fn get(&self, zone: ClimateZone, band: PopulationBand) -> Result<(f64, f64)> {
        self.rows
            .get(&(zone, band))
            .copied()
            .ok_or_else(|| Error::MissingSplitEntry {
                zone: zone.to_string(),
                band: band.to_string(),
            })
    }

    pub fn rows(&self) -> impl Iterator<Item = (ClimateZone, PopulationBand, f64, f64)> + '_ {
        self.rows.iter().map(|(&(z, b), &(f, p))| (z, b, f, p))
    }
}

pub fn load_rooftop_split(path: &Path) -> Result<RooftopSplitTable> {
    let label = file_label(path);
    let mut reader = open_csv(path)?;
    expect_header(&mut reader, path, &ROOFTOP_SPLIT_HEADER)?;
    let mut table = RooftopSplitTable::empty();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::Row {
            file: label.clone(),
            row,
            message: e.to_string(),
        })?;
        let zone: ClimateZone = record[0]
            .parse()
            .map_err(|e: String| Error::field(&label, row, "climate_zone", e))?;
        let band: PopulationBand = record[1]
            .parse()
            .map_err(|e: String| Error::field(&label, row, "pop_band", e))?;
        let flat = parse_f64(&label, row, "flat_fraction", &record[2])?;
        let pitched = parse_f64(&label, row, "pitched_fraction", &record[3])?;
        for (name, v) in [("flat_fraction", flat), ("pitched_fraction", pitched)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::field(&label, row, name, format!("{v} outside [0, 1]")));
            }
        }
        if flat + pitched <= 0.0 {
            return Err(Error::field(&label, row, "pitched_fraction", "row sums to zero"));
        }
        table.set(zone, band, flat, pitched);
    }
    Ok(table)
}

pub fn write_rooftop_split(path: &Path, table: &RooftopSplitTable) -> Result<()> {
    let mut text = ROOFTOP_SPLIT_HEADER.join(",");
    text.push('\n');
    for (zone, band, flat, pitched) in table.rows() {
        text.push_str(&format!("{zone},{band},{flat},{pitched}\n"));
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn write_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("split.csv");
        let t = RooftopSplitTable::spanish_default();
        write_rooftop_split(&path, &t).unwrap();
        let back = load_rooftop_split(&path).unwrap();
        assert_eq!(back.rows().collect::<Vec<_>>(), t.rows().collect::<Vec<_>>());
    }

    #[test]
    fn default_rows_are_partitions() {
        let t = RooftopSplitTable::spanish_default();
        assert_eq!(t.rows().count(), 15);
        for (_, _, f, p) in t.rows() {
            assert!((f + p - 1.0).abs() < 1e-9);
            assert!((0.0..=1.0).contains(&f) && (0.0..=1.0).contains(&p));
        }
        let (f, p) = t.get(ClimateZone::I, PopulationBand::Large).unwrap();
        assert!((f - 0.2 / 1.1).abs() < 1e-12 && (p - 0.9 / 1.1).abs() < 1e-12);
    }

    #[test]
    fn bands() {
        assert_eq!(PopulationBand::from_population(9_999), PopulationBand::Small);
        assert_eq!(PopulationBand::from_population(10_000), PopulationBand::Medium);
        assert_eq!(PopulationBand::from_population(99_999), PopulationBand::Medium);
        assert_eq!(PopulationBand::from_population(100_000), PopulationBand::Large);
    }

    #[test]
    fn load_and_missing_entry() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(
            f,
            "climate_zone,pop_band,flat_fraction,pitched_fraction\nIII,medium,0.3,0.7\nI,large,0.2,0.9"
        )
        .unwrap();
        let t = load_rooftop_split(f.path()).unwrap();
        assert_eq!(t.get(ClimateZone::III, PopulationBand::Medium).unwrap(), (0.3, 0.7));
        assert!((t.get(ClimateZone::I, PopulationBand::Large).unwrap().0 - 0.2 / 1.1).abs() < 1e-12);
        assert!(matches!(
            t.get(ClimateZone::V, PopulationBand::Small),
            Err(Error::MissingSplitEntry { .. })
        ));
    }

    #[test]
    fn rejects_bad_fraction() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(
            f,
            "climate_zone,pop_band,flat_fraction,pitched_fraction\nIII,medium,1.3,0.7"
        )
        .unwrap();
        assert!(matches!(load_rooftop_split(f.path()), Err(Error::Field { row: 1, .. })));
    }
}

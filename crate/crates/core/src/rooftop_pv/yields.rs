use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{Orientation, YieldSeries};
use crate::datamodel::{
    expect_header, file_label, open_csv, parse_f64, HourlySeries, Sign, DAYS_PER_YEAR, MONTH_START_DAY,
};
use crate::error::{Error, Result};

pub const CANONICAL_YIELDS_HEADER: [&str; 5] = ["region", "orientation", "month", "hour", "kwh_per_kwp"];

/// Calendar day each monthly profile represents.
pub const CANONICAL_DAY_OF_MONTH: usize = 15;

/// Twelve typical days (January first) of 24 hourly per-kWp yields.
pub type CanonicalDays = [[f64; 24]; 12];

/// Canonical days per orientation for one region.
pub type RegionYields = BTreeMap<Orientation, CanonicalDays>;

const REQUIRED: [Orientation; 4] = [
    Orientation::Flat,
    Orientation::South,
    Orientation::East,
    Orientation::West,
];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CanonicalYieldTable {
    pub regions: BTreeMap<String, RegionYields>,
}

impl CanonicalYieldTable {
    pub fn region(&self, name: &str) -> Result<&RegionYields> {
        self.regions
            .get(name)
            .ok_or_else(|| Error::YieldTable(format!("no canonical days for region `{name}`")))
    }
}

fn anchor(month: usize) -> f64 {
    (MONTH_START_DAY[month] + CANONICAL_DAY_OF_MONTH - 1) as f64
}

/// Expands canonical days to a full year, linear in day-of-year per hour
/// slot between mid-month anchors and wrapping from December to January.
pub fn interpolate_days(days: &CanonicalDays, label: &str) -> HourlySeries {
    let mut values = Vec::with_capacity(DAYS_PER_YEAR * 24);
    let year = DAYS_PER_YEAR as f64;
    for day in 0..DAYS_PER_YEAR {
        let d = day as f64;
        let (lo, hi, t) = match (0..12).rev().find(|&m| anchor(m) <= d) {
            Some(11) => (11, 0, (d - anchor(11)) / (anchor(0) + year - anchor(11))),
            Some(m) => (m, m + 1, (d - anchor(m)) / (anchor(m + 1) - anchor(m))),
            None => (11, 0, (d + year - anchor(11)) / (anchor(0) + year - anchor(11))),
        };
        for slot in 0..24 {
            let v = if t == 0.0 {
                days[lo][slot]
            } else {
                (1.0 - t) * days[lo][slot] + t * days[hi][slot]
            };
            values.push(v);
        }
    }
    HourlySeries::new(values, label, Sign::NonNegative).expect("convex combination of non-negative yields")
}

pub fn interpolate_canonical_days(region: &RegionYields) -> YieldSeries {
    region
        .iter()
        .map(|(&o, days)| (o, interpolate_days(days, o.as_str())))
        .collect()
}

/// Reads `canonical_yields.csv`. Every region needs all 12 × 24 entries for
/// flat, south, east and west; a north block is optional.
pub fn load_canonical_yields(path: &Path) -> Result<CanonicalYieldTable> {
    let label = file_label(path);
    let mut reader = open_csv(path)?;
    expect_header(&mut reader, path, &CANONICAL_YIELDS_HEADER)?;
    let mut seen: BTreeMap<(String, Orientation), [[bool; 24]; 12]> = BTreeMap::new();
    let mut table = CanonicalYieldTable::default();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::Row {
            file: label.clone(),
            row,
            message: e.to_string(),
        })?;
        let region = record[0].to_owned();
        let orientation = Orientation::parse(&record[1])
            .ok_or_else(|| Error::field(&label, row, "orientation", format!("unknown `{}`", &record[1])))?;
        let month: usize =
            record[2].parse().ok().filter(|m| (1..=12).contains(m)).ok_or_else(|| {
                Error::field(&label, row, "month", format!("expected 1..=12, found `{}`", &record[2]))
            })?;
        let hour: usize = record[3]
            .parse()
            .ok()
            .filter(|h| *h < 24)
            .ok_or_else(|| Error::field(&label, row, "hour", format!("expected 0..=23, found `{}`", &record[3])))?;
        let value = parse_f64(&label, row, "kwh_per_kwp", &record[4])?;
        if value < 0.0 {
            return Err(Error::field(&label, row, "kwh_per_kwp", "must be non-negative"));
        }
        let flags = seen.entry((region.clone(), orientation)).or_insert([[false; 24]; 12]);
        if std::mem::replace(&mut flags[month - 1][hour], true) {
            return Err(Error::Row {
                file: label.clone(),
                row,
                message: format!("duplicate entry for {region}/{}/{month}/{hour}", orientation.as_str()),
            });
        }
        table
            .regions
            .entry(region)
            .or_default()
            .entry(orientation)
            .or_insert([[0.0; 24]; 12])[month - 1][hour] = value;
    }
    for ((region, orientation), flags) in &seen {
        if let Some(month) = flags.iter().position(|m| m.iter().any(|f| !f)) {
            return Err(Error::YieldTable(format!(
                "{region}/{}: month {} incomplete",
                orientation.as_str(),
                month + 1
            )));
        }
    }
    for (region, yields) in &table.regions {
        for o in REQUIRED {
            if !yields.contains_key(&o) {
                return Err(Error::YieldTable(format!(
                    "{region}: missing orientation `{}`",
                    o.as_str()
                )));
            }
        }
    }
    if table.regions.is_empty() {
        return Err(Error::YieldTable(format!("{label}: no rows")));
    }
    Ok(table)
}

pub fn write_canonical_yields(path: &Path, table: &CanonicalYieldTable) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(out, "{}", CANONICAL_YIELDS_HEADER.join(",")).map_err(io)?;
    for (region, yields) in &table.regions {
        for (o, days) in yields {
            for (m, day) in days.iter().enumerate() {
                for (h, v) in day.iter().enumerate() {
                    writeln!(out, "{region},{},{},{h},{v}", o.as_str(), m + 1).map_err(io)?;
                }
            }
        }
    }
    out.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ramp() -> CanonicalDays {
        let mut d = [[0.0; 24]; 12];
        for (m, day) in d.iter_mut().enumerate() {
            for h in 7..18 {
                day[h] = (m + 1) as f64 * 0.1 + h as f64 * 0.01;
            }
        }
        d
    }

    #[test]
    fn exact_at_anchors() {
        let days = ramp();
        let s = interpolate_days(&days, "t");
        for m in 0..12 {
            let d = MONTH_START_DAY[m] + 14;
            assert_eq!(&s.values()[d * 24..d * 24 + 24], &days[m][..]);
        }
    }

    #[test]
    fn zero_slots_stay_zero() {
        let s = interpolate_days(&ramp(), "t");
        for d in 0..DAYS_PER_YEAR {
            assert_eq!(s.values()[d * 24 + 3], 0.0);
            assert_eq!(s.values()[d * 24 + 20], 0.0);
        }
    }

    #[test]
    fn midpoint_and_wrap() {
        let mut days = [[0.0; 24]; 12];
        days[0][12] = 2.0;
        days[5][12] = 2.0;
        days[6][12] = 4.0;
        days[11][12] = 6.0;
        let s = interpolate_days(&days, "t");
        // 15 Jun is day 165 and 15 Jul day 195
        assert!((s.values()[180 * 24 + 12] - 3.0).abs() < 1e-12);
        // 15 Dec (day 348) to 15 Jan (day 14 + 365) spans 31 days
        let first = s.values()[12];
        assert!((first - (6.0 + (2.0 - 6.0) * 17.0 / 31.0)).abs() < 1e-12);
        let last = s.values()[364 * 24 + 12];
        assert!((last - (6.0 + (2.0 - 6.0) * 16.0 / 31.0)).abs() < 1e-12);
    }

    #[test]
    fn csv_round_trip() {
        let mut region = RegionYields::new();
        for (i, o) in REQUIRED.into_iter().enumerate() {
            let mut d = ramp();
            d[5][12] += i as f64;
            region.insert(o, d);
        }
        let table = CanonicalYieldTable {
            regions: BTreeMap::from([("Andalucia".to_owned(), region)]),
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("canonical_yields.csv");
        write_canonical_yields(&path, &table).unwrap();
        assert_eq!(load_canonical_yields(&path).unwrap(), table);
    }

    #[test]
    fn incomplete_table() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("y.csv");
        std::fs::write(&path, "region,orientation,month,hour,kwh_per_kwp\nR,flat,1,12,0.5\n").unwrap();
        assert!(matches!(load_canonical_yields(&path), Err(Error::YieldTable(_))));
        std::fs::write(&path, "region,orientation,month,hour,kwh_per_kwp\nR,up,1,12,0.5\n").unwrap();
        assert!(matches!(load_canonical_yields(&path), Err(Error::Field { .. })));
    }

    proptest! {
        #[test]
        fn interpolation_bounded_by_neighbors(vals in proptest::collection::vec(0.0f64..5.0, 12)) {
            let mut days = [[0.0; 24]; 12];
            for (m, v) in vals.iter().enumerate() {
                days[m][10] = *v;
            }
            let s = interpolate_days(&days, "p");
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(0.0, f64::max);
            for d in 0..DAYS_PER_YEAR {
                let v = s.values()[d * 24 + 10];
                prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
            }
        }
    }
}

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::series::{expect_header, file_label, open_csv, parse_f64};
use crate::error::{Error, Result};

pub const MUNICIPALITY_HEADER: [&str; 16] = [
    "id",
    "name",
    "province",
    "region",
    "population",
    "income_eur",
    "cadastral_eur",
    "altitude_m",
    "climate_zone",
    "footprint_m2",
    "cars",
    "vans",
    "buses",
    "motorbikes",
    "motorcycles",
    "annual_demand_mwh",
];

pub const VEHICLE_CATEGORIES: [&str; 5] = ["cars", "vans", "buses", "motorbikes", "motorcycles"];

/// Ids of per-province aggregates of small villages carry this prefix.
pub const VIRTUAL_ID_PREFIX: &str = "virtual:";

pub const DEFAULT_AGGREGATION_THRESHOLD: u64 = 1_000;

/// Building climate zone, I (coldest) to V.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClimateZone {
    I,
    II,
    III,
    IV,
    V,
}

impl ClimateZone {
    pub const ALL: [ClimateZone; 5] = [
        ClimateZone::I,
        ClimateZone::II,
        ClimateZone::III,
        ClimateZone::IV,
        ClimateZone::V,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ClimateZone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ClimateZone::I => "I",
            ClimateZone::II => "II",
            ClimateZone::III => "III",
            ClimateZone::IV => "IV",
            ClimateZone::V => "V",
        };
        f.write_str(s)
    }
}

impl FromStr for ClimateZone {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let s = s.strip_prefix("Zone ").or_else(|| s.strip_prefix("zone ")).unwrap_or(s);
        match s {
            "I" | "1" => Ok(ClimateZone::I),
            "II" | "2" => Ok(ClimateZone::II),
            "III" | "3" => Ok(ClimateZone::III),
            "IV" | "4" => Ok(ClimateZone::IV),
            "V" | "5" => Ok(ClimateZone::V),
            other => Err(format!("unknown climate zone `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Municipality {
    pub id: String,
    pub name: String,
    pub province: String,
    pub region: String,
    pub population: u64,
    /// €/person/yr
    pub income: f64,
    /// €, industrial land excluded
    pub cadastral_value: f64,
    /// m
    pub altitude: f64,
    pub climate_zone: ClimateZone,
    /// m²
    pub footprint_area: f64,
    pub vehicle_counts: BTreeMap<String, u64>,
    /// MWh/yr, when measured
    pub known_annual_demand: Option<f64>,
}

impl Municipality {
    pub fn is_virtual(&self) -> bool {
        self.id.starts_with(VIRTUAL_ID_PREFIX)
    }

    pub fn vehicles(&self, category: &str) -> u64 {
        self.vehicle_counts.get(category).copied().unwrap_or(0)
    }

    fn validate(&self, file: &str, row: usize) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::field(file, row, "id", "is empty"));
        }
        let checks = [
            ("income_eur", self.income),
            ("cadastral_eur", self.cadastral_value),
            ("footprint_m2", self.footprint_area),
        ];
        for (field, value) in checks {
            if !(value >= 0.0) {
                return Err(Error::field(
                    file,
                    row,
                    field,
                    format!("must be non-negative, got {value}"),
                ));
            }
        }
        if let Some(demand) = self.known_annual_demand {
            if !(demand >= 0.0) {
                return Err(Error::field(
                    file,
                    row,
                    "annual_demand_mwh",
                    format!("must be non-negative, got {demand}"),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Raw,
    Aggregated,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MunicipalitySet {
    entries: Vec<Municipality>,
    provenance: Provenance,
}

impl MunicipalitySet {
    /// Validates id uniqueness; provenance is inferred from the presence of virtual entries.
    pub fn new(entries: Vec<Municipality>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (index, m) in entries.iter().enumerate() {
            m.validate("<memory>", index + 1)?;
            if !seen.insert(m.id.as_str()) {
                return Err(Error::DuplicateId {
                    file: "<memory>".into(),
                    row: index + 1,
                    id: m.id.clone(),
                });
            }
        }
        let provenance = if entries.iter().any(Municipality::is_virtual) {
            Provenance::Aggregated
        } else {
            Provenance::Raw
        };
        Ok(Self { entries, provenance })
    }

    pub fn entries(&self) -> &[Municipality] {
        &self.entries
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Municipality> {
        self.entries.iter().find(|m| m.id == id)
    }

    pub fn total_population(&self) -> u64 {
        self.entries.iter().map(|m| m.population).sum()
    }
}

fn parse_count(file: &str, row: usize, field: &str, raw: &str) -> Result<u64> {
    let value = parse_f64(file, row, field, raw)?;
    if value < 0.0 {
        return Err(Error::field(
            file,
            row,
            field,
            format!("must be non-negative, got {raw}"),
        ));
    }
    if value.fract() != 0.0 || value > u64::MAX as f64 {
        return Err(Error::field(
            file,
            row,
            field,
            format!("must be a whole count, got {raw}"),
        ));
    }
    Ok(value as u64)
}

pub fn load_municipalities(path: impl AsRef<Path>) -> Result<MunicipalitySet> {
    let path = path.as_ref();
    let file = file_label(path);
    let mut reader = open_csv(path)?;
    expect_header(&mut reader, path, &MUNICIPALITY_HEADER)?;

    let mut entries = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    for (index, record) in reader.records().enumerate() {
        let row = index + 1;
        let record = record.map_err(|e| Error::Row {
            file: file.clone(),
            row,
            message: e.to_string(),
        })?;
        let id = record[0].to_owned();
        if id.is_empty() {
            return Err(Error::field(&file, row, "id", "is missing"));
        }
        if !seen.insert(id.clone()) {
            return Err(Error::DuplicateId { file, row, id });
        }
        let climate_zone = record[8]
            .parse::<ClimateZone>()
            .map_err(|msg| Error::field(&file, row, "climate_zone", msg))?;
        let mut vehicle_counts = BTreeMap::new();
        for (offset, category) in VEHICLE_CATEGORIES.iter().enumerate() {
            let count = parse_count(&file, row, category, &record[10 + offset])?;
            vehicle_counts.insert((*category).to_owned(), count);
        }
        let known_annual_demand = match record[15].trim() {
            "" => None,
            raw => Some(parse_f64(&file, row, "annual_demand_mwh", raw)?),
        };
        let m = Municipality {
            id,
            name: record[1].to_owned(),
            province: record[2].to_owned(),
            region: record[3].to_owned(),
            population: parse_count(&file, row, "population", &record[4])?,
            income: parse_f64(&file, row, "income_eur", &record[5])?,
            cadastral_value: parse_f64(&file, row, "cadastral_eur", &record[6])?,
            altitude: parse_f64(&file, row, "altitude_m", &record[7])?,
            climate_zone,
            footprint_area: parse_f64(&file, row, "footprint_m2", &record[9])?,
            vehicle_counts,
            known_annual_demand,
        };
        m.validate(&file, row)?;
        entries.push(m);
    }
    log::info!("{}: loaded {} municipalities", file, entries.len());
    MunicipalitySet::new(entries)
}

pub fn write_municipalities(path: impl AsRef<Path>, set: &MunicipalitySet) -> Result<()> {
    let path = path.as_ref();
    let csv_err = |e: csv::Error| Error::Row {
        file: file_label(path),
        row: 0,
        message: e.to_string(),
    };
    let mut writer = csv::Writer::from_path(path).map_err(csv_err)?;
    writer.write_record(MUNICIPALITY_HEADER).map_err(csv_err)?;
    for m in set.entries() {
        let mut record = vec![
            m.id.clone(),
            m.name.clone(),
            m.province.clone(),
            m.region.clone(),
            m.population.to_string(),
            m.income.to_string(),
            m.cadastral_value.to_string(),
            m.altitude.to_string(),
            m.climate_zone.to_string(),
            m.footprint_area.to_string(),
        ];
        record.extend(VEHICLE_CATEGORIES.iter().map(|c| m.vehicles(c).to_string()));
        record.push(m.known_annual_demand.map(|d| d.to_string()).unwrap_or_default());
        writer.write_record(&record).map_err(csv_err)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Merges every municipality below `threshold` inhabitants into one virtual
/// entity per province.
///
/// Sums: population, cadastral value, footprint, vehicles, known demand (kept
/// only when every member has one). Population-weighted means: income and
/// altitude. Climate zone: the modal member zone, ties to the lower zone.
pub fn aggregate_small_municipalities(set: &MunicipalitySet, threshold: u64) -> Result<MunicipalitySet> {
    if threshold == 0 {
        return Err(Error::InvalidParameter {
            name: "threshold",
            value: 0.0,
            reason: "must be positive",
        });
    }
    let mut kept = Vec::new();
    let mut groups: BTreeMap<String, Vec<&Municipality>> = BTreeMap::new();
    for m in set.entries() {
        if m.population < threshold && !m.is_virtual() {
            groups.entry(m.province.clone()).or_default().push(m);
        } else {
            kept.push(m.clone());
        }
    }
    for (province, members) in groups {
        kept.push(merge_province(&province, &members));
    }
    MunicipalitySet::new(kept)
}

fn merge_province(province: &str, members: &[&Municipality]) -> Municipality {
    let population: u64 = members.iter().map(|m| m.population).sum();
    let weighted_mean = |f: fn(&Municipality) -> f64| -> f64 {
        if population > 0 {
            members.iter().map(|m| m.population as f64 * f(m)).sum::<f64>() / population as f64
        } else {
            members.iter().map(|m| f(m)).sum::<f64>() / members.len() as f64
        }
    };

    let mut zone_counts = [0usize; 5];
    for m in members {
        zone_counts[m.climate_zone.index()] += 1;
    }
    // max_by_key keeps the last maximum, so scan from the highest zone down
    let climate_zone = ClimateZone::ALL
        .iter()
        .rev()
        .copied()
        .max_by_key(|z| zone_counts[z.index()])
        .unwrap_or(ClimateZone::I);

    let mut region_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for m in members {
        *region_counts.entry(m.region.as_str()).or_default() += 1;
    }
    let region = region_counts
        .iter()
        .rev()
        .max_by_key(|(_, n)| **n)
        .map(|(r, _)| (*r).to_owned())
        .unwrap_or_default();

    let mut vehicle_counts = BTreeMap::new();
    for m in members {
        for (category, count) in &m.vehicle_counts {
            *vehicle_counts.entry(category.clone()).or_insert(0) += count;
        }
    }

    let known_annual_demand = members.iter().map(|m| m.known_annual_demand).sum::<Option<f64>>();

    Municipality {
        id: format!("{VIRTUAL_ID_PREFIX}{province}"),
        name: format!("{province} (aggregated villages)"),
        province: province.to_owned(),
        region,
        population,
        income: weighted_mean(|m| m.income),
        cadastral_value: members.iter().map(|m| m.cadastral_value).sum(),
        altitude: weighted_mean(|m| m.altitude),
        climate_zone,
        footprint_area: members.iter().map(|m| m.footprint_area).sum(),
        vehicle_counts,
        known_annual_demand,
    }
}

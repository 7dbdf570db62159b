use std::path::Path;

use super::series::{
    expect_header, file_label, load_hourly_series, open_csv, parse_f64, write_hourly_series, HourlySeries, Sign,
};
use super::units::{MWH_PER_TWH, MW_PER_GW};
use crate::error::{Error, Result};

pub const PORTFOLIO_HEADER: [&str; 5] = [
    "technology",
    "installed_gw",
    "manageable_twh",
    "manageable_cap_gw",
    "series_file",
];

/// One centralized generation technology, split into a shiftable energy
/// budget and a fixed hourly production profile.
#[derive(Clone, Debug, PartialEq)]
pub struct Technology {
    pub name: String,
    pub installed_power_mw: f64,
    pub manageable_energy_mwh: f64,
    pub nonmanageable: HourlySeries,
    pub manageable_power_cap_mw: f64,
}

impl Technology {
    pub fn new(
        name: impl Into<String>,
        installed_power_mw: f64,
        manageable_energy_mwh: f64,
        nonmanageable: HourlySeries,
        manageable_power_cap_mw: f64,
    ) -> Result<Self> {
        for (name, value) in [
            ("installed_power", installed_power_mw),
            ("manageable_energy", manageable_energy_mwh),
            ("manageable_power_cap", manageable_power_cap_mw),
        ] {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite and non-negative",
                });
            }
        }
        if let Some((hour, &value)) = nonmanageable.values().iter().enumerate().find(|(_, v)| **v < 0.0) {
            return Err(Error::SignViolation { hour, value });
        }
        Ok(Self {
            name: name.into(),
            installed_power_mw,
            manageable_energy_mwh,
            nonmanageable,
            manageable_power_cap_mw,
        })
    }

    pub fn is_hydro(&self) -> bool {
        self.name.eq_ignore_ascii_case("hydro")
    }

    pub fn annual_energy_mwh(&self) -> f64 {
        self.manageable_energy_mwh + self.nonmanageable.total()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Portfolio {
    pub technologies: Vec<Technology>,
}

impl Portfolio {
    pub fn new(technologies: Vec<Technology>) -> Self {
        Self { technologies }
    }

    pub fn is_empty(&self) -> bool {
        self.technologies.is_empty()
    }

    pub fn manageable_budget_mwh(&self) -> f64 {
        self.technologies.iter().map(|t| t.manageable_energy_mwh).sum()
    }

    pub fn manageable_cap_mw(&self) -> f64 {
        self.technologies.iter().map(|t| t.manageable_power_cap_mw).sum()
    }

    pub fn nonmanageable_series(&self) -> HourlySeries {
        let mut total = HourlySeries::zeros("nonmanageable");
        for t in &self.technologies {
            total.add_assign_scaled(&t.nonmanageable, 1.0);
        }
        total
    }

    pub fn annual_energy_mwh(&self) -> f64 {
        self.technologies.iter().map(Technology::annual_energy_mwh).sum()
    }

    /// Re-splits hydro energy so that `fraction` of it is manageable.
    ///
    /// The fixed remainder follows the shape of the current fixed hydro
    /// series (uniform when that series is all zeros) and the power cap
    /// becomes `fraction × installed power`.
    pub fn with_hydro_manageability(&self, fraction: f64) -> Result<Portfolio> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::InvalidParameter {
                name: "hydro_manageability",
                value: fraction,
                reason: "must lie in [0, 1]",
            });
        }
        let technologies = self
            .technologies
            .iter()
            .map(|t| {
                if !t.is_hydro() {
                    return t.clone();
                }
                let total = t.annual_energy_mwh();
                let fixed_target = (1.0 - fraction) * total;
                let shape_total = t.nonmanageable.total();
                let nonmanageable = if shape_total > 0.0 {
                    t.nonmanageable.scaled(fixed_target / shape_total)
                } else {
                    HourlySeries::constant(
                        fixed_target / t.nonmanageable.values().len() as f64,
                        t.nonmanageable.year_label(),
                    )
                };
                Technology {
                    name: t.name.clone(),
                    installed_power_mw: t.installed_power_mw,
                    manageable_energy_mwh: fraction * total,
                    nonmanageable,
                    manageable_power_cap_mw: fraction * t.installed_power_mw,
                }
            })
            .collect();
        Ok(Portfolio { technologies })
    }
}

/// Loads `portfolio.csv`; each row names a `hour,value_mwh` series file
/// relative to the portfolio file's directory.
pub fn load_portfolio(path: impl AsRef<Path>) -> Result<Portfolio> {
    let path = path.as_ref();
    let file = file_label(path);
    let base = path.parent().unwrap_or(Path::new("."));
    let mut reader = open_csv(path)?;
    expect_header(&mut reader, path, &PORTFOLIO_HEADER)?;
    let mut technologies = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let row = index + 1;
        let record = record.map_err(|e| Error::Row {
            file: file.clone(),
            row,
            message: e.to_string(),
        })?;
        let installed = parse_f64(&file, row, "installed_gw", &record[1])?;
        let manageable = parse_f64(&file, row, "manageable_twh", &record[2])?;
        let cap = parse_f64(&file, row, "manageable_cap_gw", &record[3])?;
        let series = load_hourly_series(base.join(&record[4]), Sign::NonNegative)?;
        let tech = Technology::new(
            &record[0],
            installed * MW_PER_GW,
            manageable * MWH_PER_TWH,
            series,
            cap * MW_PER_GW,
        )
        .map_err(|e| Error::Row {
            file: file.clone(),
            row,
            message: e.to_string(),
        })?;
        technologies.push(tech);
    }
    Ok(Portfolio::new(technologies))
}

/// Writes `portfolio.csv` plus one series file per technology under
/// `series/` next to it.
pub fn write_portfolio(path: impl AsRef<Path>, portfolio: &Portfolio) -> Result<()> {
    let path = path.as_ref();
    let base = path.parent().unwrap_or(Path::new("."));
    let series_dir = base.join("series");
    std::fs::create_dir_all(&series_dir).map_err(|e| Error::io(&series_dir, e))?;
    let mut rows = vec![PORTFOLIO_HEADER.join(",")];
    for t in &portfolio.technologies {
        let slug: String = t
            .name
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() {
                    c.to_ascii_lowercase()
                } else {
                    '_'
                }
            })
            .collect();
        let relative = format!("series/{slug}.csv");
        write_hourly_series(base.join(&relative), &t.nonmanageable)?;
        rows.push(format!(
            "{},{},{},{},{}",
            t.name,
            t.installed_power_mw / MW_PER_GW,
            t.manageable_energy_mwh / MWH_PER_TWH,
            t.manageable_power_cap_mw / MW_PER_GW,
            relative
        ));
    }
    rows.push(String::new());
    std::fs::write(path, rows.join("\n")).map_err(|e| Error::io(path, e))
}

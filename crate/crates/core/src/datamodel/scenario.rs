use std::path::Path;

use serde::{Deserialize, Serialize};

use super::units::MWH_PER_GWH;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StorageSpec {
    pub capacity_mwh: f64,
    /// Applied on charge; discharge is lossless.
    pub round_trip_efficiency: f64,
    pub unit_cost_eur_per_kwh: f64,
    pub lifetime_years: f64,
}

impl StorageSpec {
    pub fn new(
        capacity_mwh: f64,
        round_trip_efficiency: f64,
        unit_cost_eur_per_kwh: f64,
        lifetime_years: f64,
    ) -> Result<Self> {
        if !(capacity_mwh >= 0.0) || !capacity_mwh.is_finite() {
            return Err(Error::InvalidParameter {
                name: "storage capacity",
                value: capacity_mwh,
                reason: "must be finite and non-negative",
            });
        }
        if !(round_trip_efficiency > 0.0 && round_trip_efficiency <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "round_trip_efficiency",
                value: round_trip_efficiency,
                reason: "must lie in (0, 1]",
            });
        }
        Ok(Self {
            capacity_mwh,
            round_trip_efficiency,
            unit_cost_eur_per_kwh,
            lifetime_years,
        })
    }

    /// Li-ion reference: 100 €/kWh, 13.7 years, 95 %.
    pub fn reference(capacity_mwh: f64) -> Self {
        Self {
            capacity_mwh,
            round_trip_efficiency: 0.95,
            unit_cost_eur_per_kwh: 100.0,
            lifetime_years: 13.7,
        }
    }

    pub fn with_capacity(self, capacity_mwh: f64) -> Self {
        Self { capacity_mwh, ..self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub pv_unit_cost_eur_per_wp: f64,
    pub pv_lifetime_years: f64,
    pub storage_unit_cost_eur_per_kwh: f64,
    pub storage_lifetime_years: f64,
    pub wholesale_eur_per_mwh: f64,
}

impl CostModel {
    pub fn new(
        pv_unit_cost_eur_per_wp: f64,
        pv_lifetime_years: f64,
        storage_unit_cost_eur_per_kwh: f64,
        storage_lifetime_years: f64,
        wholesale_eur_per_mwh: f64,
    ) -> Result<Self> {
        let model = Self {
            pv_unit_cost_eur_per_wp,
            pv_lifetime_years,
            storage_unit_cost_eur_per_kwh,
            storage_lifetime_years,
            wholesale_eur_per_mwh,
        };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("pv_unit_cost", self.pv_unit_cost_eur_per_wp),
            ("pv_lifetime", self.pv_lifetime_years),
            ("storage_unit_cost", self.storage_unit_cost_eur_per_kwh),
            ("storage_lifetime", self.storage_lifetime_years),
            ("wholesale_price", self.wholesale_eur_per_mwh),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be positive",
                });
            }
        }
        Ok(())
    }

    /// 1 €/Wp over 25 years for PV, 100 €/kWh over 13.7 years for storage,
    /// 56.4 €/MWh wholesale reference.
    pub fn reference() -> Self {
        Self {
            pv_unit_cost_eur_per_wp: 1.0,
            pv_lifetime_years: 25.0,
            storage_unit_cost_eur_per_kwh: 100.0,
            storage_lifetime_years: 13.7,
            wholesale_eur_per_mwh: 56.4,
        }
    }
}

impl Default for CostModel {
    fn default() -> Self {
        Self::reference()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Greenfield,
    Brownfield,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepParams {
    pub pv_step_gwp: f64,
    /// Relative tolerance of the storage bisection.
    pub storage_tol: f64,
    /// The PV sweep stops once one step saves less than this much storage per GWp.
    pub stop_threshold_gwh_per_gwp: f64,
    pub capacity_factor: f64,
    pub max_points: usize,
    pub hydro_fractions: Vec<f64>,
    pub storage_grid_gwh: Vec<f64>,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self {
            pv_step_gwp: 1.0,
            storage_tol: 1e-3,
            stop_threshold_gwh_per_gwp: 0.1,
            capacity_factor: 0.17,
            max_points: 2_000,
            hydro_fractions: Vec::new(),
            storage_grid_gwh: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub mode: Mode,
    pub include_ev: bool,
    pub hydro_manageability: f64,
    /// Rooftop PV to deploy; `None` means the full rooftop potential.
    pub pv_gwp: Option<f64>,
    pub storage: StorageSpec,
    pub cost: CostModel,
    /// Portfolio file, relative to the data bundle.
    pub portfolio: Option<String>,
    pub sweep: SweepParams,
}

impl ScenarioConfig {
    pub fn greenfield() -> Self {
        let cost = CostModel::reference();
        Self {
            mode: Mode::Greenfield,
            include_ev: true,
            hydro_manageability: 0.85,
            pv_gwp: None,
            storage: StorageSpec::reference(0.0),
            cost,
            portfolio: None,
            sweep: SweepParams::default(),
        }
    }

    pub fn brownfield() -> Self {
        Self {
            mode: Mode::Brownfield,
            portfolio: Some("portfolio.csv".into()),
            ..Self::greenfield()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.hydro_manageability) {
            return Err(Error::InvalidParameter {
                name: "hydro_manageability",
                value: self.hydro_manageability,
                reason: "must lie in [0, 1]",
            });
        }
        StorageSpec::new(
            self.storage.capacity_mwh,
            self.storage.round_trip_efficiency,
            self.storage.unit_cost_eur_per_kwh,
            self.storage.lifetime_years,
        )?;
        self.cost.validate()?;
        let s = &self.sweep;
        for (name, value) in [
            ("pv_step_gwp", s.pv_step_gwp),
            ("storage_tol", s.storage_tol),
            ("stop_threshold_gwh_per_gwp", s.stop_threshold_gwh_per_gwp),
        ] {
            if !(value > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be positive",
                });
            }
        }
        if !(s.capacity_factor > 0.0 && s.capacity_factor < 1.0) {
            return Err(Error::InvalidParameter {
                name: "capacity_factor",
                value: s.capacity_factor,
                reason: "must lie in (0, 1)",
            });
        }
        if let Some(&f) = s.hydro_fractions.iter().find(|f| !(0.0..=1.0).contains(*f)) {
            return Err(Error::InvalidParameter {
                name: "hydro_fractions",
                value: f,
                reason: "must lie in [0, 1]",
            });
        }
        if let Some(pv) = self.pv_gwp {
            if !(pv >= 0.0) {
                return Err(Error::InvalidParameter {
                    name: "pv_gwp",
                    value: pv,
                    reason: "must be non-negative",
                });
            }
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| Error::Scenario(e.to_string()))?;
        let defaults = StorageSpec::reference(0.0);
        let cost = CostModel {
            pv_unit_cost_eur_per_wp: file.costs.pv_unit_cost_eur_per_wp,
            pv_lifetime_years: file.costs.pv_lifetime_years,
            storage_unit_cost_eur_per_kwh: file.costs.storage_unit_cost_eur_per_kwh,
            storage_lifetime_years: file.costs.storage_lifetime_years,
            wholesale_eur_per_mwh: file.costs.wholesale_eur_per_mwh,
        };
        let config = Self {
            mode: file.scenario.mode,
            include_ev: file.scenario.include_ev,
            hydro_manageability: file.scenario.hydro_manageability,
            pv_gwp: file.scenario.pv_gwp,
            storage: StorageSpec {
                capacity_mwh: file.storage.capacity_gwh * MWH_PER_GWH,
                round_trip_efficiency: file
                    .storage
                    .round_trip_efficiency
                    .unwrap_or(defaults.round_trip_efficiency),
                unit_cost_eur_per_kwh: cost.storage_unit_cost_eur_per_kwh,
                lifetime_years: cost.storage_lifetime_years,
            },
            cost,
            portfolio: file.scenario.portfolio.or(match file.scenario.mode {
                Mode::Brownfield => Some("portfolio.csv".into()),
                Mode::Greenfield => None,
            }),
            sweep: file.sweep,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// Renders the configuration in the scenario-file syntax.
    pub fn to_toml_string(&self) -> String {
        let file = ScenarioFile {
            scenario: ScenarioSection {
                mode: self.mode,
                include_ev: self.include_ev,
                hydro_manageability: self.hydro_manageability,
                pv_gwp: self.pv_gwp,
                portfolio: self.portfolio.clone(),
            },
            storage: StorageSection {
                capacity_gwh: self.storage.capacity_mwh / MWH_PER_GWH,
                round_trip_efficiency: Some(self.storage.round_trip_efficiency),
            },
            costs: CostSection {
                pv_unit_cost_eur_per_wp: self.cost.pv_unit_cost_eur_per_wp,
                pv_lifetime_years: self.cost.pv_lifetime_years,
                storage_unit_cost_eur_per_kwh: self.cost.storage_unit_cost_eur_per_kwh,
                storage_lifetime_years: self.cost.storage_lifetime_years,
                wholesale_eur_per_mwh: self.cost.wholesale_eur_per_mwh,
            },
            sweep: self.sweep.clone(),
        };
        toml::to_string(&file).expect("scenario serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    scenario: ScenarioSection,
    #[serde(default)]
    storage: StorageSection,
    #[serde(default)]
    costs: CostSection,
    #[serde(default)]
    sweep: SweepParams,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioSection {
    mode: Mode,
    #[serde(default = "default_true")]
    include_ev: bool,
    #[serde(default = "default_hydro")]
    hydro_manageability: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pv_gwp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    portfolio: Option<String>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StorageSection {
    #[serde(default)]
    capacity_gwh: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    round_trip_efficiency: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct CostSection {
    pv_unit_cost_eur_per_wp: f64,
    pv_lifetime_years: f64,
    storage_unit_cost_eur_per_kwh: f64,
    storage_lifetime_years: f64,
    wholesale_eur_per_mwh: f64,
}

impl Default for CostSection {
    fn default() -> Self {
        let c = CostModel::reference();
        Self {
            pv_unit_cost_eur_per_wp: c.pv_unit_cost_eur_per_wp,
            pv_lifetime_years: c.pv_lifetime_years,
            storage_unit_cost_eur_per_kwh: c.storage_unit_cost_eur_per_kwh,
            storage_lifetime_years: c.storage_lifetime_years,
            wholesale_eur_per_mwh: c.wholesale_eur_per_mwh,
        }
    }
}

fn default_true() -> bool {
    true
}

fn default_hydro() -> f64 {
    0.85
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_brownfield_file() {
        let cfg = ScenarioConfig::from_toml_str("[scenario]\nmode = \"brownfield\"\n").unwrap();
        assert_eq!(cfg.mode, Mode::Brownfield);
        assert_eq!(cfg.portfolio.as_deref(), Some("portfolio.csv"));
        assert_eq!(cfg.cost, CostModel::reference());
        assert_eq!(cfg.storage.round_trip_efficiency, 0.95);
        assert_eq!(cfg.sweep, SweepParams::default());
    }

    #[test]
    fn unknown_keys_are_errors() {
        let err =
            ScenarioConfig::from_toml_str("[scenario]\nmode = \"greenfield\"\nhydro_managability = 0.4\n").unwrap_err();
        assert!(err.to_string().contains("hydro_managability"), "{err}");
        assert!(ScenarioConfig::from_toml_str("[scenario]\nmode = \"greenfield\"\n[extra]\nx = 1\n").is_err());
    }

    #[test]
    fn out_of_range_values_are_errors() {
        assert!(
            ScenarioConfig::from_toml_str("[scenario]\nmode = \"greenfield\"\nhydro_manageability = 1.5\n").is_err()
        );
        assert!(
            ScenarioConfig::from_toml_str("[scenario]\nmode = \"greenfield\"\n[sweep]\npv_step_gwp = 0\n").is_err()
        );
        assert!(ScenarioConfig::from_toml_str(
            "[scenario]\nmode = \"greenfield\"\n[storage]\nround_trip_efficiency = 0\n"
        )
        .is_err());
    }

    #[test]
    fn toml_round_trip() {
        let mut cfg = ScenarioConfig::brownfield();
        cfg.storage.capacity_mwh = 298_000.0;
        cfg.sweep.hydro_fractions = vec![0.4, 0.85];
        cfg.pv_gwp = Some(75.0);
        let back = ScenarioConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn storage_spec_rejects_bad_efficiency() {
        assert!(StorageSpec::new(1.0, 0.0, 100.0, 10.0).is_err());
        assert!(StorageSpec::new(1.0, 1.01, 100.0, 10.0).is_err());
        assert!(StorageSpec::new(-1.0, 0.9, 100.0, 10.0).is_err());
        assert!(StorageSpec::new(0.0, 1.0, 100.0, 10.0).is_ok());
    }
}

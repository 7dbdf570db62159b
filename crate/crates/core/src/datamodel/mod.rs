//! Domain types shared by every stage of the pipeline, plus CSV ingestion.
//!
//! Internal units are MWh for energy, MW for power, € for money and m² for
//! area. GWh/GWp/TWh only appear at report and configuration boundaries.

mod municipality;
mod portfolio;
mod scenario;
mod series;

pub use municipality::{
    aggregate_small_municipalities, load_municipalities, write_municipalities, ClimateZone, Municipality,
    MunicipalitySet, Provenance, DEFAULT_AGGREGATION_THRESHOLD, MUNICIPALITY_HEADER, VEHICLE_CATEGORIES,
    VIRTUAL_ID_PREFIX,
};
pub use portfolio::{load_portfolio, write_portfolio, Portfolio, Technology, PORTFOLIO_HEADER};
pub use scenario::{CostModel, Mode, ScenarioConfig, StorageSpec, SweepParams};
pub use series::{
    load_hourly_series, month_of_hour, write_hourly_series, HourlySeries, Sign, DAYS_PER_YEAR, HOURS_PER_YEAR,
    MONTH_START_DAY,
};

pub(crate) use series::{expect_header, file_label, open_csv, parse_f64, read_hourly_column, write_hourly_column};

pub mod units {
    pub const MWH_PER_GWH: f64 = 1e3;
    pub const MWH_PER_TWH: f64 = 1e6;
    pub const MW_PER_GW: f64 = 1e3;
    pub const KW_PER_MW: f64 = 1e3;
}

#[cfg(test)]
pub(crate) use municipality::tests::town;

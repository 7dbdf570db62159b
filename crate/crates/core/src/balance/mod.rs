//! Hourly dispatch of a year: production against demand with a battery and a
//! budget of manageable generation, plus period and distribution summaries.

mod periodic;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use periodic::{lorenz_curve, periodic_balance, share_reaching, BalanceStatus, Period, PeriodBalance};

use crate::datamodel::{write_hourly_column, HourlySeries, Sign, StorageSpec};
use crate::error::{Error, Result};

/// demand − production, hour by hour. Negative values are surplus.
pub fn net_demand(demand: &HourlySeries, production: &HourlySeries) -> HourlySeries {
    demand.zip_with(production, |d, p| d - p)
}

#[derive(Clone, Debug)]
pub struct DispatchInputs {
    pub demand: HourlySeries,
    /// Everything that cannot be scheduled: rooftop PV plus non-manageable plants.
    pub nonmanageable_production: HourlySeries,
    pub manageable_budget_mwh: f64,
    pub manageable_power_cap_mw: f64,
    pub storage: StorageSpec,
}

impl DispatchInputs {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("manageable_budget", self.manageable_budget_mwh),
            ("manageable_power_cap", self.manageable_power_cap_mw),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "must be finite and non-negative",
                });
            }
        }
        let sign_check = |s: &HourlySeries| HourlySeries::new(s.values().to_vec(), s.year_label(), Sign::NonNegative);
        sign_check(&self.demand)?;
        sign_check(&self.nonmanageable_production)?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BalanceResult {
    pub total_demand: f64,
    pub total_production: f64,
    pub served: f64,
    pub unserved: f64,
    pub curtailed: f64,
    pub storage_losses: f64,
    pub manageable_used: f64,
    pub direct_supplied: f64,
    pub battery_discharged: f64,
    pub battery_charge_input: f64,
    /// Largest hourly energy drawn into the battery (MWh in one hour, i.e. MW).
    pub peak_charge_mw: f64,
    pub peak_discharge_mw: f64,
    pub soc_start: f64,
    pub soc_end: f64,
    /// State of charge at the end of each hour of the reported year.
    pub soc_trace: HourlySeries,
    pub cyclic: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct Ledger {
    unserved: f64,
    curtailed: f64,
    manageable_used: f64,
    direct_supplied: f64,
    discharged: f64,
    charge_input: f64,
    peak_charge: f64,
    peak_discharge: f64,
}

/// Parameters of the hour loop that do not change during a year.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Plant {
    pub capacity: f64,
    pub efficiency: f64,
    pub budget: f64,
    pub power_cap: f64,
}

/// One year of greedy dispatch from `soc0`. Returns the ledger and final SoC.
fn run_year(
    demand: &[f64],
    production: &[f64],
    plant: Plant,
    soc0: f64,
    mut trace: Option<&mut Vec<f64>>,
) -> (Ledger, f64) {
    let mut l = Ledger::default();
    let mut soc = soc0;
    let mut budget = plant.budget;
    for (&d, &p) in demand.iter().zip(production) {
        let direct = d.min(p);
        l.direct_supplied += direct;
        if p > d {
            let surplus = p - d;
            let room = plant.capacity - soc;
            let input = surplus.min(room / plant.efficiency);
            soc = (soc + input * plant.efficiency).min(plant.capacity);
            l.charge_input += input;
            l.curtailed += surplus - input;
            l.peak_charge = l.peak_charge.max(input);
        } else if d > p {
            let deficit = d - p;
            let discharge = deficit.min(soc);
            soc -= discharge;
            let residual = deficit - discharge;
            let manageable = residual.min(plant.power_cap).min(budget);
            budget -= manageable;
            l.discharged += discharge;
            l.manageable_used += manageable;
            l.unserved += residual - manageable;
            l.peak_discharge = l.peak_discharge.max(discharge);
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(soc);
        }
    }
    (l, soc)
}

/// Unserved energy of the reported (second) year only; used by searches that
/// need nothing else.
pub(crate) fn unserved_after_warm_start(net: &[f64], plant: Plant) -> f64 {
    let year = |soc0: f64| {
        let mut soc = soc0;
        let mut budget = plant.budget;
        let mut unserved = 0.0;
        for &n in net {
            if n < 0.0 {
                let input = (-n).min((plant.capacity - soc) / plant.efficiency);
                soc = (soc + input * plant.efficiency).min(plant.capacity);
            } else if n > 0.0 {
                let discharge = n.min(soc);
                soc -= discharge;
                let residual = n - discharge;
                let manageable = residual.min(plant.power_cap).min(budget);
                budget -= manageable;
                unserved += residual - manageable;
            }
        }
        (unserved, soc)
    };
    let (_, soc) = year(0.0);
    year(soc).0
}

/// Chronological dispatch. The year is run twice from an empty battery and
/// the second pass is reported, so the initial state of charge is the one the
/// year itself leaves behind.
pub fn simulate_balance(inputs: &DispatchInputs) -> BalanceResult {
    let plant = Plant {
        capacity: inputs.storage.capacity_mwh,
        efficiency: inputs.storage.round_trip_efficiency,
        budget: inputs.manageable_budget_mwh,
        power_cap: inputs.manageable_power_cap_mw,
    };
    let demand = inputs.demand.values();
    let production = inputs.nonmanageable_production.values();
    let (_, soc_start) = run_year(demand, production, plant, 0.0, None);
    let mut trace = Vec::with_capacity(demand.len());
    let (l, soc_end) = run_year(demand, production, plant, soc_start, Some(&mut trace));
    let total_demand = inputs.demand.total();
    BalanceResult {
        total_demand,
        total_production: inputs.nonmanageable_production.total(),
        served: total_demand - l.unserved,
        unserved: l.unserved,
        curtailed: l.curtailed,
        storage_losses: l.charge_input * (1.0 - plant.efficiency),
        manageable_used: l.manageable_used,
        direct_supplied: l.direct_supplied,
        battery_discharged: l.discharged,
        battery_charge_input: l.charge_input,
        peak_charge_mw: l.peak_charge,
        peak_discharge_mw: l.peak_discharge,
        soc_start,
        soc_end,
        soc_trace: HourlySeries::new(trace, "soc", Sign::NonNegative).expect("state of charge stays in bounds"),
        cyclic: (soc_start - soc_end).abs() <= 1e-6 * plant.capacity,
    }
}

/// Share of demand that is served.
pub fn coverage(r: &BalanceResult, total_demand: f64) -> Result<f64> {
    if !(total_demand > 0.0) {
        return Err(Error::ZeroEnergy { quantity: "demand" });
    }
    Ok(((total_demand - r.unserved) / total_demand).clamp(0.0, 1.0))
}

/// Scalar part of a [`BalanceResult`], as written to `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalanceSummary {
    pub total_demand_mwh: f64,
    pub total_production_mwh: f64,
    pub served_mwh: f64,
    pub unserved_mwh: f64,
    pub curtailed_mwh: f64,
    pub storage_losses_mwh: f64,
    pub manageable_used_mwh: f64,
    pub direct_supplied_mwh: f64,
    pub battery_discharged_mwh: f64,
    pub battery_charge_input_mwh: f64,
    pub peak_charge_mw: f64,
    pub peak_discharge_mw: f64,
    pub soc_start_mwh: f64,
    pub soc_end_mwh: f64,
    pub cyclic: bool,
    pub coverage: f64,
}

impl BalanceResult {
    pub fn summary(&self) -> BalanceSummary {
        BalanceSummary {
            total_demand_mwh: self.total_demand,
            total_production_mwh: self.total_production,
            served_mwh: self.served,
            unserved_mwh: self.unserved,
            curtailed_mwh: self.curtailed,
            storage_losses_mwh: self.storage_losses,
            manageable_used_mwh: self.manageable_used,
            direct_supplied_mwh: self.direct_supplied,
            battery_discharged_mwh: self.battery_discharged,
            battery_charge_input_mwh: self.battery_charge_input,
            peak_charge_mw: self.peak_charge_mw,
            peak_discharge_mw: self.peak_discharge_mw,
            soc_start_mwh: self.soc_start,
            soc_end_mwh: self.soc_end,
            cyclic: self.cyclic,
            coverage: coverage(self, self.total_demand).unwrap_or(1.0),
        }
    }

    /// Writes `summary.json` and `soc_trace.csv` into `dir`.
    pub fn write_outputs(&self, dir: &Path) -> Result<()> {
        let path = dir.join("summary.json");
        let json = serde_json::to_string_pretty(&self.summary())?;
        fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
        write_hourly_column(&dir.join("soc_trace.csv"), "soc_mwh", self.soc_trace.values())
    }
}

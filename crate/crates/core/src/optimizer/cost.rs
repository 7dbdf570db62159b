use crate::datamodel::units::MWH_PER_TWH;
use crate::datamodel::CostModel;
use crate::error::{Error, Result};

/// Annualized capital cost (€/yr) of a PV fleet and a battery, straight-line
/// depreciation without discounting.
pub fn annual_capital_cost(pv_gwp: f64, storage_gwh: f64, cost: &CostModel) -> f64 {
    let pv = pv_gwp * 1e9 * cost.pv_unit_cost_eur_per_wp / cost.pv_lifetime_years;
    let storage = storage_gwh * 1e6 * cost.storage_unit_cost_eur_per_kwh / cost.storage_lifetime_years;
    pv + storage
}

/// Levelized cost (€/MWh) of the energy delivered by new PV and storage.
pub fn lcoe(pv_gwp: f64, storage_gwh: f64, annual_useful_twh: f64, cost: &CostModel) -> Result<f64> {
    if !(annual_useful_twh > 0.0) {
        return Err(Error::ZeroEnergy {
            quantity: "useful energy",
        });
    }
    Ok(annual_capital_cost(pv_gwp, storage_gwh, cost) / (annual_useful_twh * MWH_PER_TWH))
}

/// Energy-weighted average of the new-system cost and the wholesale price
/// paid for the existing fleet.
pub fn blended_cost(new_twh: f64, new_lcoe: f64, esp_twh: f64, wholesale_eur_per_mwh: f64) -> Result<f64> {
    let total = new_twh + esp_twh;
    if !(total > 0.0) {
        return Err(Error::ZeroEnergy {
            quantity: "total energy",
        });
    }
    Ok((new_twh * new_lcoe + esp_twh * wholesale_eur_per_mwh) / total)
}

/// Hours of rated power the battery can deliver.
pub fn storage_hours(storage_gwh: f64, rated_power_gw: f64) -> Result<f64> {
    if !(rated_power_gw > 0.0) {
        return Err(Error::InvalidParameter {
            name: "rated_power",
            value: rated_power_gw,
            reason: "must be positive",
        });
    }
    Ok(storage_gwh / rated_power_gw)
}

/// PV capacity (GWp) that would cover `gap + losses` at the given capacity factor.
pub fn initial_pv_guess(annual_gap_mwh: f64, loss_allowance_mwh: f64, capacity_factor: f64) -> Result<f64> {
    if !(capacity_factor > 0.0 && capacity_factor < 1.0) {
        return Err(Error::InvalidParameter {
            name: "capacity_factor",
            value: capacity_factor,
            reason: "must lie in (0, 1)",
        });
    }
    let energy = (annual_gap_mwh + loss_allowance_mwh).max(0.0);
    Ok(energy / (crate::datamodel::HOURS_PER_YEAR as f64 * capacity_factor) / crate::datamodel::units::MW_PER_GW)
}

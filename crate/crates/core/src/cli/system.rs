use std::collections::BTreeMap;

use crate::balance::{BalanceStatus, DispatchInputs};
use crate::datamodel::units::{KW_PER_MW, MW_PER_GW};
use crate::datamodel::{load_portfolio, HourlySeries, Mode, Portfolio, ScenarioConfig};
use crate::demand::{
    equivalent_car_fleet, estimate_municipal_demand, ev_demand, hourly_demand, EvConversionTable, RegressionModel,
};
use crate::error::{Error, Result};
use crate::optimizer::PlanningProblem;
use crate::rooftop_pv::{
    classify_rooftops, hourly_pv_production, installable_capacity, interpolate_canonical_days, PvParams, YieldSeries,
};

use super::bundle::Bundle;

/// Annual figures of one (possibly virtual) municipality.
#[derive(Clone, Debug, PartialEq)]
pub struct MunicipalRecord {
    pub id: String,
    pub name: String,
    pub province: String,
    pub region: String,
    pub demand_mwh: f64,
    pub ev_mwh: f64,
    /// Producing rooftop capacity (kWp).
    pub pv_kwp: f64,
    /// Rooftop production at full potential (MWh/yr).
    pub pv_mwh: f64,
}

impl MunicipalRecord {
    pub fn total_demand_mwh(&self) -> f64 {
        self.demand_mwh + self.ev_mwh
    }
}

/// National hourly system assembled from a bundle and a scenario.
#[derive(Clone, Debug)]
pub struct SystemModel {
    pub base_demand: HourlySeries,
    /// Zero when the scenario leaves electric vehicles out.
    pub ev_demand: HourlySeries,
    pub municipal: Vec<MunicipalRecord>,
    pub rooftop_potential_gwp: f64,
    /// National rooftop production at full potential (MWh per hour).
    pub rooftop_production: HourlySeries,
    /// Existing fleet with the scenario's hydro manageability; empty in greenfield mode.
    pub portfolio: Portfolio,
    pub regression: RegressionModel,
}

impl SystemModel {
    pub fn build(bundle: &Bundle, scenario: &ScenarioConfig) -> Result<Self> {
        let set = &bundle.municipalities;
        let estimate = estimate_municipal_demand(set, bundle.regional_totals.as_ref())?;
        let ev_table = EvConversionTable::spanish_default();
        let per_car = ev_table.per_car_annual_mwh();
        let params = PvParams::default();

        let mut yields: BTreeMap<&str, YieldSeries> = BTreeMap::new();
        let mut rooftop_production = HourlySeries::zeros("pv");
        let mut potential_kwp = 0.0;
        let mut fleet = 0.0;
        let mut municipal = Vec::with_capacity(set.len());
        for (m, d) in set.entries().iter().zip(&estimate.municipalities) {
            if !yields.contains_key(m.region.as_str()) {
                let series = interpolate_canonical_days(bundle.yields.region(&m.region)?);
                yields.insert(m.region.as_str(), series);
            }
            let capacity = installable_capacity(&classify_rooftops(m, &bundle.split, &params)?, &params);
            let production = hourly_pv_production(&capacity, &yields[m.region.as_str()], &params)?;
            let cars = if scenario.include_ev {
                equivalent_car_fleet(&m.vehicle_counts, &ev_table)?
            } else {
                0.0
            };
            fleet += cars;
            potential_kwp += capacity.producing_kwp();
            municipal.push(MunicipalRecord {
                id: m.id.clone(),
                name: m.name.clone(),
                province: m.province.clone(),
                region: m.region.clone(),
                demand_mwh: d.annual_mwh,
                ev_mwh: cars * per_car,
                pv_kwp: capacity.producing_kwp(),
                pv_mwh: production.total(),
            });
            rooftop_production.add_assign_scaled(&production, 1.0);
        }
        let base_total: f64 = municipal.iter().map(|r| r.demand_mwh).sum();
        let portfolio = match scenario.mode {
            Mode::Greenfield => Portfolio::default(),
            Mode::Brownfield => {
                let name = scenario
                    .portfolio
                    .as_deref()
                    .ok_or_else(|| Error::Scenario("brownfield mode needs a portfolio file".into()))?;
                load_portfolio(bundle.dir.join(name))?.with_hydro_manageability(scenario.hydro_manageability)?
            }
        };
        Ok(Self {
            base_demand: hourly_demand(base_total, &bundle.load_profile),
            ev_demand: ev_demand(fleet, per_car, &bundle.ev_profile)?,
            municipal,
            rooftop_potential_gwp: potential_kwp / KW_PER_MW / MW_PER_GW,
            rooftop_production,
            portfolio,
            regression: estimate.model,
        })
    }

    pub fn total_demand(&self) -> HourlySeries {
        self.base_demand.add(&self.ev_demand)
    }

    /// Rooftop production per GWp installed (MWh/GWp per hour).
    pub fn pv_shape(&self) -> Result<HourlySeries> {
        if !(self.rooftop_potential_gwp > 0.0) {
            return Err(Error::ZeroEnergy {
                quantity: "rooftop potential",
            });
        }
        Ok(self.rooftop_production.scaled(1.0 / self.rooftop_potential_gwp))
    }

    /// PV capacity the scenario deploys; the full potential unless set.
    pub fn deployed_pv_gwp(&self, scenario: &ScenarioConfig) -> f64 {
        scenario.pv_gwp.unwrap_or(self.rooftop_potential_gwp)
    }

    pub fn deployed_pv_production(&self, scenario: &ScenarioConfig) -> Result<HourlySeries> {
        let gwp = self.deployed_pv_gwp(scenario);
        if gwp == 0.0 {
            return Ok(HourlySeries::zeros("pv"));
        }
        Ok(self.pv_shape()?.scaled(gwp))
    }

    pub fn dispatch_inputs(&self, scenario: &ScenarioConfig) -> Result<DispatchInputs> {
        let inputs = DispatchInputs {
            demand: self.total_demand(),
            nonmanageable_production: self
                .portfolio
                .nonmanageable_series()
                .add(&self.deployed_pv_production(scenario)?),
            manageable_budget_mwh: self.portfolio.manageable_budget_mwh(),
            manageable_power_cap_mw: self.portfolio.manageable_cap_mw(),
            storage: scenario.storage,
        };
        inputs.validate()?;
        Ok(inputs)
    }

    pub fn planning_problem(&self, scenario: &ScenarioConfig) -> Result<PlanningProblem> {
        let problem = PlanningProblem {
            demand: self.total_demand(),
            portfolio: self.portfolio.clone(),
            pv_shape: self.pv_shape()?,
            storage: scenario.storage,
            cost: scenario.cost,
            sweep: scenario.sweep.clone(),
            pv_limit_gwp: Some(self.rooftop_potential_gwp),
        };
        problem.validate()?;
        Ok(problem)
    }

    /// Annual rooftop balance per group key, with PV scaled to the deployed capacity.
    pub fn grouped_balance(
        &self,
        scenario: &ScenarioConfig,
        key: impl Fn(&MunicipalRecord) -> String,
    ) -> Vec<GroupBalance> {
        let scale = if self.rooftop_potential_gwp > 0.0 {
            self.deployed_pv_gwp(scenario) / self.rooftop_potential_gwp
        } else {
            0.0
        };
        let mut groups: BTreeMap<String, (f64, f64)> = BTreeMap::new();
        for r in &self.municipal {
            let g = groups.entry(key(r)).or_insert((0.0, 0.0));
            g.0 += r.total_demand_mwh();
            g.1 += r.pv_mwh * scale;
        }
        groups
            .into_iter()
            .map(|(key, (demand_mwh, production_mwh))| GroupBalance {
                key,
                demand_mwh,
                production_mwh,
                net_mwh: production_mwh - demand_mwh,
                status: BalanceStatus::of(demand_mwh, production_mwh),
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupBalance {
    pub key: String,
    pub demand_mwh: f64,
    pub production_mwh: f64,
    pub net_mwh: f64,
    pub status: BalanceStatus,
}

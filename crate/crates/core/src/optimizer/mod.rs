//! PV/storage planning: the smallest battery that closes the hourly balance
//! for a given PV fleet, the sweep over PV sizes, costs and sensitivities.

mod cost;
mod io;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use cost::{annual_capital_cost, blended_cost, initial_pv_guess, lcoe, storage_hours};
pub use io::{
    read_isoquant_csv, write_coverage_csv, write_isoquant_csv, write_sensitivity_csv, COVERAGE_HEADER, ISOQUANT_HEADER,
    SENSITIVITY_HEADER,
};

use crate::balance::{simulate_balance, unserved_after_warm_start, BalanceResult, DispatchInputs, Plant};
use crate::datamodel::units::{MWH_PER_GWH, MWH_PER_TWH, MW_PER_GW};
use crate::datamodel::{CostModel, HourlySeries, Portfolio, Sign, StorageSpec, SweepParams};
use crate::error::{Error, Result};

/// A point counts as fully served when unserved energy stays below this
/// fraction of annual demand.
pub const FEASIBILITY_TOL: f64 = 1e-6;

/// Dispatchable resources other than the battery size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Flexibility {
    pub efficiency: f64,
    pub budget_mwh: f64,
    pub power_cap_mw: f64,
}

impl Flexibility {
    fn plant(self, capacity: f64) -> Plant {
        Plant {
            capacity,
            efficiency: self.efficiency,
            budget: self.budget_mwh,
            power_cap: self.power_cap_mw,
        }
    }
}

/// Smallest battery (MWh) that serves `net` demand, to relative `tol`.
///
/// Feasibility is monotone in capacity, so bisection applies. The largest
/// capacity that can ever matter is twice the energy the surplus hours could
/// store in one year; if even that leaves demand unserved the shortfall is
/// reported instead.
pub fn min_storage_mwh(net: &[f64], annual_demand_mwh: f64, flex: Flexibility, tol: f64) -> Result<f64> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter {
            name: "storage_tol",
            value: tol,
            reason: "must lie in (0, 1)",
        });
    }
    let limit = FEASIBILITY_TOL * annual_demand_mwh;
    let unserved = |c: f64| unserved_after_warm_start(net, flex.plant(c));
    if unserved(0.0) <= limit {
        return Ok(0.0);
    }
    let ceiling = 2.0 * flex.efficiency * net.iter().filter(|n| **n < 0.0).map(|n| -n).sum::<f64>();
    let gap = unserved(ceiling);
    if gap > limit {
        return Err(Error::Infeasible { gap_mwh: gap });
    }
    let peak = net.iter().cloned().fold(0.0, f64::max);
    let mut lo = 0.0;
    let mut hi = peak.min(ceiling).max(f64::MIN_POSITIVE);
    while unserved(hi) > limit {
        lo = hi;
        hi = (2.0 * hi).min(ceiling);
    }
    while hi - lo > tol * hi {
        let mid = 0.5 * (lo + hi);
        if unserved(mid) <= limit {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Everything needed to evaluate a PV/storage pair on one system.
#[derive(Clone, Debug)]
pub struct PlanningProblem {
    /// Total hourly demand, including electric vehicles when modelled.
    pub demand: HourlySeries,
    /// Existing generation fleet (empty for a rooftop-only system).
    pub portfolio: Portfolio,
    /// Rooftop PV output per GWp installed (MWh/GWp per hour).
    pub pv_shape: HourlySeries,
    pub storage: StorageSpec,
    pub cost: CostModel,
    pub sweep: SweepParams,
    /// Rooftop potential; the sweep never goes beyond it.
    pub pv_limit_gwp: Option<f64>,
}

/// Result of dispatching one PV/storage pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointMetrics {
    pub pv_gwp: f64,
    pub storage_gwh: f64,
    pub served_fraction: f64,
    pub curtailed_twh: f64,
    /// Energy attributed to the new PV and storage.
    pub useful_twh: f64,
    /// Energy attributed to the existing fleet.
    pub esp_twh: f64,
    pub lcoe_eur_mwh: f64,
    pub blended_eur_mwh: f64,
    /// Largest hourly charge or discharge (GW).
    pub rated_power_gw: f64,
}

impl PlanningProblem {
    pub fn validate(&self) -> Result<()> {
        HourlySeries::new(self.pv_shape.values().to_vec(), "pv_shape", Sign::NonNegative)?;
        if !(self.demand.total() > 0.0) {
            return Err(Error::ZeroEnergy { quantity: "demand" });
        }
        let s = &self.sweep;
        for (name, v) in [
            ("pv_step", s.pv_step_gwp),
            ("storage_tol", s.storage_tol),
            ("stop_threshold", s.stop_threshold_gwh_per_gwp),
        ] {
            if !(v > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "must be positive",
                });
            }
        }
        Ok(())
    }

    pub fn flexibility(&self) -> Flexibility {
        Flexibility {
            efficiency: self.storage.round_trip_efficiency,
            budget_mwh: self.portfolio.manageable_budget_mwh(),
            power_cap_mw: self.portfolio.manageable_cap_mw(),
        }
    }

    /// Same problem with hydro re-split to the given manageable share.
    pub fn with_hydro_manageability(&self, fraction: f64) -> Result<Self> {
        Ok(Self {
            portfolio: self.portfolio.with_hydro_manageability(fraction)?,
            ..self.clone()
        })
    }

    /// demand − existing non-manageable output.
    pub fn residual_net(&self) -> Vec<f64> {
        let fixed = self.portfolio.nonmanageable_series();
        self.demand
            .values()
            .iter()
            .zip(fixed.values())
            .map(|(d, f)| d - f)
            .collect()
    }

    /// Annual energy the existing fleet cannot provide (MWh, ≥ 0).
    pub fn annual_gap_mwh(&self) -> f64 {
        (self.demand.total() - self.portfolio.annual_energy_mwh()).max(0.0)
    }

    /// First PV size worth trying: gap plus battery losses on it, at the
    /// configured capacity factor.
    pub fn initial_pv_guess(&self) -> Result<f64> {
        let gap = self.annual_gap_mwh();
        initial_pv_guess(
            gap,
            gap * (1.0 - self.storage.round_trip_efficiency),
            self.sweep.capacity_factor,
        )
    }

    fn net_with_pv(base: &[f64], shape: &[f64], pv_gwp: f64) -> Vec<f64> {
        base.iter().zip(shape).map(|(b, s)| b - pv_gwp * s).collect()
    }

    /// Smallest storage (GWh) that serves all demand with `pv_gwp` installed.
    pub fn min_storage_for_full_coverage(&self, pv_gwp: f64) -> Result<f64> {
        let net = Self::net_with_pv(&self.residual_net(), self.pv_shape.values(), pv_gwp);
        Ok(min_storage_mwh(&net, self.demand.total(), self.flexibility(), self.sweep.storage_tol)? / MWH_PER_GWH)
    }

    pub fn dispatch(&self, pv_gwp: f64, storage_gwh: f64) -> BalanceResult {
        let production = self.portfolio.nonmanageable_series().add(&self.pv_shape.scaled(pv_gwp));
        simulate_balance(&DispatchInputs {
            demand: self.demand.clone(),
            nonmanageable_production: production,
            manageable_budget_mwh: self.portfolio.manageable_budget_mwh(),
            manageable_power_cap_mw: self.portfolio.manageable_cap_mw(),
            storage: self.storage.with_capacity(storage_gwh * MWH_PER_GWH),
        })
    }

    /// Dispatches the pair and prices it.
    ///
    /// Served energy is attributed to the existing fleet first: its fixed
    /// output up to each hour's demand plus whatever manageable energy was
    /// dispatched. The remainder is the useful output of the new system.
    pub fn evaluate(&self, pv_gwp: f64, storage_gwh: f64) -> Result<PointMetrics> {
        let r = self.dispatch(pv_gwp, storage_gwh);
        let fixed = self.portfolio.nonmanageable_series();
        let esp_direct: f64 = self
            .demand
            .values()
            .iter()
            .zip(fixed.values())
            .map(|(d, f)| d.min(*f))
            .sum();
        let esp = esp_direct + r.manageable_used;
        let useful = (r.served - esp).max(0.0);
        let useful_twh = useful / MWH_PER_TWH;
        let esp_twh = esp / MWH_PER_TWH;
        let lcoe_value = if useful == 0.0 && pv_gwp == 0.0 && storage_gwh == 0.0 {
            0.0
        } else {
            lcoe(pv_gwp, storage_gwh, useful_twh, &self.cost)?
        };
        Ok(PointMetrics {
            pv_gwp,
            storage_gwh,
            served_fraction: r.served / r.total_demand,
            curtailed_twh: r.curtailed / MWH_PER_TWH,
            useful_twh,
            esp_twh,
            lcoe_eur_mwh: lcoe_value,
            blended_eur_mwh: blended_cost(useful_twh, lcoe_value, esp_twh, self.cost.wholesale_eur_per_mwh)?,
            rated_power_gw: r.peak_charge_mw.max(r.peak_discharge_mw) / MW_PER_GW,
        })
    }

    /// Served fraction for each storage size at a fixed PV fleet.
    pub fn coverage_vs_storage_curve(&self, pv_gwp: f64, storage_grid_gwh: &[f64]) -> Result<Vec<(f64, f64)>> {
        if storage_grid_gwh.windows(2).any(|w| w[1] < w[0]) || storage_grid_gwh.iter().any(|g| !(*g >= 0.0)) {
            return Err(Error::InvalidParameter {
                name: "storage_grid",
                value: f64::NAN,
                reason: "must be non-negative and ascending",
            });
        }
        let net = Self::net_with_pv(&self.residual_net(), self.pv_shape.values(), pv_gwp);
        let demand = self.demand.total();
        let flex = self.flexibility();
        Ok(storage_grid_gwh
            .par_iter()
            .map(|&g| {
                let unserved = unserved_after_warm_start(&net, flex.plant(g * MWH_PER_GWH));
                (g, ((demand - unserved) / demand).clamp(0.0, 1.0))
            })
            .collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointFlag {
    Ok,
    /// The search returned more storage than a smaller PV fleet needed; the
    /// point carries the running minimum instead.
    MonotoneRepaired,
}

impl PointFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            PointFlag::Ok => "ok",
            PointFlag::MonotoneRepaired => "monotone_repaired",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsoquantPoint {
    #[serde(flatten)]
    pub metrics: PointMetrics,
    pub flag: PointFlag,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// One more PV step saved less storage than the threshold.
    Saturated,
    RooftopLimit,
    MaxPoints,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub points: Vec<IsoquantPoint>,
    pub least_cost_index: usize,
    /// Smallest PV fleet for which a feasible battery was found.
    pub min_pv_asymptote_gwp: f64,
    /// Storage at the end of the sweep, where more PV stops helping.
    pub min_storage_asymptote_gwh: f64,
    pub repaired_points: usize,
    /// Leading PV sizes that no battery could make feasible.
    pub skipped_infeasible: usize,
    pub stop_reason: StopReason,
}

impl SweepResult {
    pub fn least_cost(&self) -> &IsoquantPoint {
        &self.points[self.least_cost_index]
    }
}

/// Walks PV upward from the initial guess in fixed steps, sizing the battery
/// for each step, until extra PV no longer reduces storage meaningfully or
/// the rooftop limit is reached.
///
/// PV sizes are solved in parallel batches; the outcome does not depend on
/// the batch size because the stopping rule is applied in PV order.
pub fn pv_storage_isoquant(problem: &PlanningProblem) -> Result<SweepResult> {
    problem.validate()?;
    let step = problem.sweep.pv_step_gwp;
    let start = problem.initial_pv_guess()?;
    let limit = problem.pv_limit_gwp.unwrap_or(f64::INFINITY);
    let beyond = |pv: f64| pv > limit * (1.0 + 1e-12);
    let max_points = problem.sweep.max_points.max(1);
    let threshold = problem.sweep.stop_threshold_gwh_per_gwp * step;
    let batch = rayon::current_num_threads().max(1) * 2;

    let mut raw: Vec<(f64, f64)> = Vec::new();
    let mut skipped = 0usize;
    let mut last_gap = 0.0;
    let mut index = 0usize;
    let stop_reason = 'outer: loop {
        let pvs: Vec<f64> = (index..index + batch).map(|i| start + i as f64 * step).collect();
        index += batch;
        let solved: Vec<(f64, Result<f64>)> = pvs
            .par_iter()
            .map(|&pv| {
                (
                    pv,
                    if beyond(pv) {
                        Ok(f64::NAN)
                    } else {
                        problem.min_storage_for_full_coverage(pv)
                    },
                )
            })
            .collect();
        for (pv, storage) in solved {
            if beyond(pv) {
                if raw.is_empty() {
                    return Err(Error::NoFeasiblePoint {
                        pv_limit_gwp: limit,
                        gap_mwh: last_gap,
                    });
                }
                break 'outer StopReason::RooftopLimit;
            }
            let storage = match storage {
                Ok(s) => s,
                Err(Error::Infeasible { gap_mwh }) if raw.is_empty() => {
                    skipped += 1;
                    last_gap = gap_mwh;
                    if skipped >= max_points {
                        return Err(Error::NoFeasiblePoint {
                            pv_limit_gwp: pv,
                            gap_mwh,
                        });
                    }
                    continue;
                }
                Err(e) => return Err(e),
            };
            let saved = raw.last().map(|&(_, prev)| prev - storage);
            raw.push((pv, storage));
            if saved.is_some_and(|s| s < threshold) {
                break 'outer StopReason::Saturated;
            }
            if raw.len() >= max_points {
                break 'outer StopReason::MaxPoints;
            }
        }
    };

    let mut running_min = f64::INFINITY;
    let mut repaired = 0usize;
    let staged: Vec<(f64, f64, PointFlag)> = raw
        .into_iter()
        .map(|(pv, s)| {
            if s > running_min {
                repaired += 1;
                (pv, running_min, PointFlag::MonotoneRepaired)
            } else {
                running_min = s;
                (pv, s, PointFlag::Ok)
            }
        })
        .collect();
    let points: Vec<IsoquantPoint> = staged
        .par_iter()
        .map(|&(pv, s, flag)| problem.evaluate(pv, s).map(|metrics| IsoquantPoint { metrics, flag }))
        .collect::<Result<_>>()?;

    for (i, w) in points.windows(2).enumerate() {
        if !(w[1].metrics.pv_gwp > w[0].metrics.pv_gwp) || w[1].metrics.storage_gwh > w[0].metrics.storage_gwh {
            return Err(Error::SweepInvariant {
                index: i + 1,
                message: "points must have increasing PV and non-increasing storage".into(),
            });
        }
    }
    let least_cost_index = points
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.metrics.lcoe_eur_mwh.total_cmp(&b.1.metrics.lcoe_eur_mwh))
        .map(|(i, _)| i)
        .expect("at least one feasible point");
    Ok(SweepResult {
        min_pv_asymptote_gwp: points[0].metrics.pv_gwp,
        min_storage_asymptote_gwh: points[points.len() - 1].metrics.storage_gwh,
        points,
        least_cost_index,
        repaired_points: repaired,
        skipped_infeasible: skipped,
        stop_reason,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub hydro_fraction: f64,
    pub least_cost: PointMetrics,
    pub sweep_points: usize,
    /// `RooftopLimit` means the least cost is only the cheapest point below the PV ceiling.
    pub stop_reason: StopReason,
}

/// Least-cost point of a full sweep for each manageable hydro share.
pub fn hydro_manageability_sweep(problem: &PlanningProblem, fractions: &[f64]) -> Result<Vec<SensitivityRow>> {
    let mut ordered = fractions.to_vec();
    ordered.sort_by(f64::total_cmp);
    ordered
        .par_iter()
        .map(|&f| {
            let sweep = pv_storage_isoquant(&problem.with_hydro_manageability(f)?)?;
            Ok(SensitivityRow {
                hydro_fraction: f,
                least_cost: sweep.least_cost().metrics.clone(),
                sweep_points: sweep.points.len(),
                stop_reason: sweep.stop_reason,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests;

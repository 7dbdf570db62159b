//! Batch commands behind the `gridmix` binary. Each command reads a data
//! directory, writes its outputs into one run directory and seals them with
//! a `manifest.json`.

mod bundle;
mod manifest;
mod system;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;

pub use bundle::{
    Bundle, CANONICAL_YIELDS_FILE, EV_PROFILE_FILE, LOAD_PROFILE_FILE, MUNICIPALITIES_FILE, PORTFOLIO_FILE,
    REGIONAL_TOTALS_FILE, ROOFTOP_SPLIT_FILE,
};
pub use manifest::{sha256_file, RunManifest, MANIFEST_FILE};
pub use system::{GroupBalance, MunicipalRecord, SystemModel};

use crate::balance::{periodic_balance, simulate_balance, BalanceResult, BalanceSummary, Period};
use crate::datamodel::units::MWH_PER_TWH;
use crate::datamodel::ScenarioConfig;
use crate::error::{Error, Result};
use crate::optimizer::{
    hydro_manageability_sweep, pv_storage_isoquant, storage_hours, write_coverage_csv, write_isoquant_csv,
    write_sensitivity_csv, PointMetrics, SensitivityRow, StopReason,
};

pub const ENERGY_REPORT_HEADER: [&str; 5] = ["section", "item", "energy_twh", "total_twh", "share"];
pub const PERIODIC_HEADER: [&str; 6] = [
    "granularity",
    "period",
    "demand_mwh",
    "production_mwh",
    "net_mwh",
    "status",
];

/// Where a scenario command reads from and writes to.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub data_dir: PathBuf,
    /// Greenfield defaults when absent.
    pub scenario: Option<PathBuf>,
    pub out_dir: PathBuf,
}

impl RunOptions {
    fn scenario(&self) -> Result<ScenarioConfig> {
        match &self.scenario {
            Some(path) => ScenarioConfig::load(path),
            None => Ok(ScenarioConfig::greenfield()),
        }
    }

    fn start(&self, command: &str, scenario: &ScenarioConfig, bundle: &Bundle) -> Result<RunManifest> {
        fs::create_dir_all(&self.out_dir).map_err(|e| Error::io(&self.out_dir, e))?;
        let mut manifest = RunManifest::new(command, serde_json::to_value(scenario)?);
        for f in bundle.input_files() {
            manifest.record_input(&f)?;
        }
        if let Some(s) = &self.scenario {
            manifest.record_input(s)?;
        }
        Ok(manifest)
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| Error::Row {
        file: path.display().to_string(),
        row: 0,
        message: e.to_string(),
    })
}

fn write_records(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv_writer(path)?;
    let err = |e: csv::Error| Error::Row {
        file: path.display().to_string(),
        row: 0,
        message: e.to_string(),
    };
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(&row).map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?).map_err(|e| Error::io(path, e))
}

/// Validates a raw data directory and writes the normalized bundle.
pub fn cmd_prepare(data_dir: &Path, out_dir: &Path, aggregation_threshold: u64) -> Result<RunManifest> {
    let started = Instant::now();
    let bundle = Bundle::load(data_dir)?;
    let mut manifest = RunManifest::new(
        "prepare",
        json!({ "aggregation_threshold": aggregation_threshold, "data_dir": data_dir.display().to_string() }),
    );
    for f in bundle.input_files() {
        manifest.record_input(&f)?;
    }
    let bundle = bundle.aggregated(aggregation_threshold)?;
    bundle.write(out_dir)?;
    manifest.seal(out_dir, started)
}

/// One row of the annual energy report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub section: String,
    pub item: String,
    pub energy_twh: Option<f64>,
    pub total_twh: Option<f64>,
    pub share: Option<f64>,
}

fn row(section: &str, item: &str, energy: Option<f64>, total: Option<f64>, share: Option<f64>) -> ReportRow {
    ReportRow {
        section: section.into(),
        item: item.into(),
        energy_twh: energy,
        total_twh: total,
        share,
    }
}

/// Demand, production and balance rows in TWh. Production splits into the
/// energy the dispatch must take hour by hour and the shiftable budget;
/// "used" is the demand actually served, its share is over total production.
pub fn energy_report(
    model: &SystemModel,
    inputs_budget_mwh: f64,
    production_mwh: f64,
    r: &BalanceResult,
) -> Vec<ReportRow> {
    let twh = |mwh: f64| mwh / MWH_PER_TWH;
    let base = model.base_demand.total();
    let ev = model.ev_demand.total();
    let total_production = production_mwh + inputs_budget_mwh;
    let share = |x: f64, of: f64| if of > 0.0 { Some(x / of) } else { None };
    vec![
        row("demand", "current_demand", Some(twh(base)), Some(twh(base + ev)), None),
        row("demand", "ev_demand", Some(twh(ev)), None, None),
        row(
            "production",
            "nonmanageable_energy",
            Some(twh(production_mwh)),
            Some(twh(total_production)),
            None,
        ),
        row(
            "production",
            "manageable_energy",
            Some(twh(inputs_budget_mwh)),
            None,
            None,
        ),
        row("balance", "total_demand", None, Some(twh(r.total_demand)), None),
        row(
            "balance",
            "used_energy",
            None,
            Some(twh(r.served)),
            share(r.served, total_production),
        ),
        row(
            "balance",
            "unserved_demand",
            None,
            Some(-twh(r.unserved)),
            share(r.unserved, r.total_demand),
        ),
        row(
            "balance",
            "curtailed_energy",
            None,
            Some(twh(r.curtailed)),
            share(r.curtailed, production_mwh),
        ),
    ]
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Runs demand estimation, rooftop PV and one year of dispatch.
pub fn cmd_balance(opts: &RunOptions) -> Result<RunManifest> {
    let started = Instant::now();
    let scenario = opts.scenario()?;
    let bundle = Bundle::load(&opts.data_dir)?;
    let manifest = opts.start("balance", &scenario, &bundle)?;
    let model = SystemModel::build(&bundle, &scenario)?;
    let inputs = model.dispatch_inputs(&scenario)?;
    let result = simulate_balance(&inputs);
    let out = &opts.out_dir;
    result.write_outputs(out)?;

    let mut periodic = Vec::new();
    for (name, period) in [
        ("month", Period::Month),
        ("quarter", Period::Quarter),
        ("year", Period::Year),
    ] {
        for b in periodic_balance(&inputs.demand, &inputs.nonmanageable_production, period) {
            periodic.push(vec![
                name.to_owned(),
                b.period,
                b.demand_mwh.to_string(),
                b.production_mwh.to_string(),
                b.net_mwh.to_string(),
                b.status.to_string(),
            ]);
        }
    }
    write_records(&out.join("periodic_balance.csv"), &PERIODIC_HEADER, periodic)?;

    let scale = if model.rooftop_potential_gwp > 0.0 {
        model.deployed_pv_gwp(&scenario) / model.rooftop_potential_gwp
    } else {
        0.0
    };
    write_records(
        &out.join("municipal_balance.csv"),
        &[
            "id",
            "name",
            "province",
            "region",
            "demand_mwh",
            "ev_mwh",
            "pv_kwp",
            "pv_mwh",
            "net_mwh",
            "status",
        ],
        model.municipal.iter().map(|r| {
            let pv = r.pv_mwh * scale;
            vec![
                r.id.clone(),
                r.name.clone(),
                r.province.clone(),
                r.region.clone(),
                r.demand_mwh.to_string(),
                r.ev_mwh.to_string(),
                (r.pv_kwp * scale).to_string(),
                pv.to_string(),
                (pv - r.total_demand_mwh()).to_string(),
                crate::balance::BalanceStatus::of(r.total_demand_mwh(), pv).to_string(),
            ]
        }),
    )?;
    for (file, key) in [
        ("provincial_balance.csv", "province"),
        ("regional_balance.csv", "region"),
    ] {
        let groups = model.grouped_balance(&scenario, |r| {
            if key == "province" {
                r.province.clone()
            } else {
                r.region.clone()
            }
        });
        write_records(
            &out.join(file),
            &[key, "demand_mwh", "pv_mwh", "net_mwh", "status"],
            groups.into_iter().map(|g| {
                vec![
                    g.key,
                    g.demand_mwh.to_string(),
                    g.production_mwh.to_string(),
                    g.net_mwh.to_string(),
                    g.status.to_string(),
                ]
            }),
        )?;
    }

    let report = energy_report(
        &model,
        inputs.manageable_budget_mwh,
        inputs.nonmanageable_production.total(),
        &result,
    );
    write_records(
        &out.join("energy_report.csv"),
        &ENERGY_REPORT_HEADER,
        report.iter().map(|r| {
            vec![
                r.section.clone(),
                r.item.clone(),
                opt(r.energy_twh),
                opt(r.total_twh),
                opt(r.share),
            ]
        }),
    )?;
    write_json(
        &out.join("system.json"),
        &json!({
            "rooftop_potential_gwp": model.rooftop_potential_gwp,
            "deployed_pv_gwp": model.deployed_pv_gwp(&scenario),
            "base_demand_mwh": model.base_demand.total(),
            "ev_demand_mwh": model.ev_demand.total(),
            "regression": model.regression,
        }),
    )?;
    manifest.seal(out, started)
}

/// Contents of `least_cost.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeastCostSummary {
    pub point: PointMetrics,
    pub storage_hours: Option<f64>,
    pub rooftop_potential_gwp: f64,
    pub min_pv_asymptote_gwp: f64,
    pub min_storage_asymptote_gwh: f64,
    pub stop_reason: StopReason,
    pub points: usize,
    pub repaired_points: usize,
    pub skipped_infeasible: usize,
    pub sensitivity: Vec<SensitivityRow>,
}

/// Parses a comma-separated list of fractions such as `0.4,0.55,0.7`.
pub fn parse_fraction_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            let v: f64 = s
                .trim()
                .parse()
                .map_err(|_| Error::Scenario(format!("`{s}` is not a number")))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter {
                    name: "hydro_fractions",
                    value: v,
                    reason: "must lie in [0, 1]",
                });
            }
            Ok(v)
        })
        .collect()
}

/// PV/storage isoquant, least-cost point and hydro-manageability sensitivity.
///
/// Sensitivity fractions come from `hydro_fractions`, then the scenario's
/// sweep list, then the scenario's own manageability.
pub fn cmd_optimize(opts: &RunOptions, hydro_fractions: Option<&[f64]>) -> Result<RunManifest> {
    let started = Instant::now();
    let scenario = opts.scenario()?;
    let bundle = Bundle::load(&opts.data_dir)?;
    let mut manifest = opts.start("optimize", &scenario, &bundle)?;
    let fractions: Vec<f64> = match hydro_fractions {
        Some(f) => f.to_vec(),
        None if !scenario.sweep.hydro_fractions.is_empty() => scenario.sweep.hydro_fractions.clone(),
        None => vec![scenario.hydro_manageability],
    };
    if let serde_json::Value::Object(map) = &mut manifest.parameters {
        map.insert("sensitivity_fractions".into(), json!(fractions));
    }
    let model = SystemModel::build(&bundle, &scenario)?;
    let problem = model.planning_problem(&scenario)?;
    let sweep = pv_storage_isoquant(&problem)?;
    let out = &opts.out_dir;
    write_isoquant_csv(&out.join("isoquant.csv"), &sweep)?;
    let best = sweep.least_cost().metrics.clone();
    let base = problem.with_hydro_manageability(scenario.hydro_manageability)?;
    let rows = hydro_manageability_sweep(&base, &fractions)?;
    for r in rows.iter().filter(|r| r.stop_reason == StopReason::RooftopLimit) {
        log::warn!(
            "hydro fraction {}: sweep reached the rooftop limit, least cost is truncated",
            r.hydro_fraction
        );
    }
    write_sensitivity_csv(&out.join("sensitivity.csv"), &rows)?;
    write_json(
        &out.join("least_cost.json"),
        &LeastCostSummary {
            storage_hours: storage_hours(best.storage_gwh, best.rated_power_gw).ok(),
            point: best.clone(),
            rooftop_potential_gwp: model.rooftop_potential_gwp,
            min_pv_asymptote_gwp: sweep.min_pv_asymptote_gwp,
            min_storage_asymptote_gwh: sweep.min_storage_asymptote_gwh,
            stop_reason: sweep.stop_reason,
            points: sweep.points.len(),
            repaired_points: sweep.repaired_points,
            skipped_infeasible: sweep.skipped_infeasible,
            sensitivity: rows,
        },
    )?;
    if !scenario.sweep.storage_grid_gwh.is_empty() {
        let curve = problem.coverage_vs_storage_curve(best.pv_gwp, &scenario.sweep.storage_grid_gwh)?;
        write_coverage_csv(&out.join("coverage.csv"), &curve)?;
    }
    manifest.seal(out, started)
}

/// Verifies a run directory against its manifest and summarizes it.
pub fn cmd_report(run_dir: &Path) -> Result<String> {
    let manifest = RunManifest::load(run_dir)?;
    let missing = manifest.verify(run_dir)?;
    let mut text = format!(
        "{} run by gridmix {} in {:.2} s\n{} outputs verified\n",
        manifest.command,
        manifest.tool_version,
        manifest.duration_s,
        manifest.outputs.len()
    );
    for input in &missing {
        text.push_str(&format!("input no longer present: {input}\n"));
    }
    let summary_path = run_dir.join("summary.json");
    if summary_path.exists() {
        let s: BalanceSummary =
            serde_json::from_str(&fs::read_to_string(&summary_path).map_err(|e| Error::io(&summary_path, e))?)?;
        text.push_str(&format!(
            "demand {:.3} TWh, served {:.3} TWh, unserved {:.3} TWh, curtailed {:.3} TWh, coverage {:.2}%\n",
            s.total_demand_mwh / MWH_PER_TWH,
            s.served_mwh / MWH_PER_TWH,
            s.unserved_mwh / MWH_PER_TWH,
            s.curtailed_mwh / MWH_PER_TWH,
            100.0 * s.coverage
        ));
    }
    let least_path = run_dir.join("least_cost.json");
    if least_path.exists() {
        let l: LeastCostSummary =
            serde_json::from_str(&fs::read_to_string(&least_path).map_err(|e| Error::io(&least_path, e))?)?;
        text.push_str(&format!(
            "least cost: {:.2} GWp PV, {:.2} GWh storage, LCOE {:.2} EUR/MWh, blended {:.2} EUR/MWh ({} sweep points, {:?})\n",
            l.point.pv_gwp, l.point.storage_gwh, l.point.lcoe_eur_mwh, l.point.blended_eur_mwh, l.points, l.stop_reason
        ));
    }
    Ok(text)
}

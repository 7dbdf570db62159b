use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{IsoquantPoint, PointFlag, PointMetrics, SensitivityRow, SweepResult};
use crate::datamodel::{expect_header, file_label, open_csv, parse_f64};
use crate::error::{Error, Result};

pub const ISOQUANT_HEADER: [&str; 6] = [
    "pv_gwp",
    "storage_gwh",
    "lcoe_eur_mwh",
    "blended_eur_mwh",
    "curtailed_twh",
    "flag",
];
pub const SENSITIVITY_HEADER: [&str; 4] = ["hydro_fraction", "pv_gwp", "storage_gwh", "lcoe_eur_mwh"];
pub const COVERAGE_HEADER: [&str; 2] = ["storage_gwh", "coverage"];

fn write_rows(path: &Path, header: &[&str], rows: impl Iterator<Item = String>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(out, "{}", header.join(",")).map_err(io)?;
    for row in rows {
        writeln!(out, "{row}").map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn write_isoquant_csv(path: &Path, sweep: &SweepResult) -> Result<()> {
    write_rows(
        path,
        &ISOQUANT_HEADER,
        sweep.points.iter().map(|p| {
            let m = &p.metrics;
            format!(
                "{},{},{},{},{},{}",
                m.pv_gwp,
                m.storage_gwh,
                m.lcoe_eur_mwh,
                m.blended_eur_mwh,
                m.curtailed_twh,
                p.flag.as_str()
            )
        }),
    )
}

/// Reads back the columns of `isoquant.csv`; metrics not stored there are zero.
pub fn read_isoquant_csv(path: &Path) -> Result<Vec<IsoquantPoint>> {
    let label = file_label(path);
    let mut reader = open_csv(path)?;
    expect_header(&mut reader, path, &ISOQUANT_HEADER)?;
    let mut points = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::Row {
            file: label.clone(),
            row,
            message: e.to_string(),
        })?;
        let num = |j: usize| parse_f64(&label, row, ISOQUANT_HEADER[j], &record[j]);
        let flag = match &record[5] {
            "ok" => PointFlag::Ok,
            "monotone_repaired" => PointFlag::MonotoneRepaired,
            other => return Err(Error::field(&label, row, "flag", format!("unknown flag `{other}`"))),
        };
        points.push(IsoquantPoint {
            metrics: PointMetrics {
                pv_gwp: num(0)?,
                storage_gwh: num(1)?,
                served_fraction: 1.0,
                curtailed_twh: num(4)?,
                useful_twh: 0.0,
                esp_twh: 0.0,
                lcoe_eur_mwh: num(2)?,
                blended_eur_mwh: num(3)?,
                rated_power_gw: 0.0,
            },
            flag,
        });
    }
    Ok(points)
}

pub fn write_sensitivity_csv(path: &Path, rows: &[SensitivityRow]) -> Result<()> {
    write_rows(
        path,
        &SENSITIVITY_HEADER,
        rows.iter().map(|r| {
            format!(
                "{},{},{},{}",
                r.hydro_fraction, r.least_cost.pv_gwp, r.least_cost.storage_gwh, r.least_cost.lcoe_eur_mwh
            )
        }),
    )
}

pub fn write_coverage_csv(path: &Path, curve: &[(f64, f64)]) -> Result<()> {
    write_rows(path, &COVERAGE_HEADER, curve.iter().map(|(g, c)| format!("{g},{c}")))
}

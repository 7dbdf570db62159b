use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Hours in the modelled year. Leap days are not represented.
pub const HOURS_PER_YEAR: usize = 8760;
pub const DAYS_PER_YEAR: usize = 365;
/// Zero-based day-of-year on which each month starts (non-leap year).
pub const MONTH_START_DAY: [usize; 12] = [0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334];

/// Zero-based month (0 = January) of an hour of the year.
pub fn month_of_hour(hour: usize) -> usize {
    let day = (hour / 24) % DAYS_PER_YEAR;
    MONTH_START_DAY.iter().rposition(|&d| d <= day).unwrap_or(0)
}

/// Sign constraint declared by the consumer of a series.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    NonNegative,
    Signed,
}

/// One year of hourly energy values in MWh.
#[derive(Clone, Debug, PartialEq)]
pub struct HourlySeries {
    values: Vec<f64>,
    year_label: String,
}

impl HourlySeries {
    pub fn new(values: Vec<f64>, year_label: impl Into<String>, sign: Sign) -> Result<Self> {
        if values.len() != HOURS_PER_YEAR {
            return Err(Error::SeriesLength {
                expected: HOURS_PER_YEAR,
                found: values.len(),
            });
        }
        for (hour, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite { hour });
            }
            if sign == Sign::NonNegative && value < 0.0 {
                return Err(Error::SignViolation { hour, value });
            }
        }
        Ok(Self {
            values,
            year_label: year_label.into(),
        })
    }

    pub fn zeros(year_label: impl Into<String>) -> Self {
        Self {
            values: vec![0.0; HOURS_PER_YEAR],
            year_label: year_label.into(),
        }
    }

    pub fn constant(value: f64, year_label: impl Into<String>) -> Self {
        Self {
            values: vec![value; HOURS_PER_YEAR],
            year_label: year_label.into(),
        }
    }

    /// Builds a series from `f(hour)`. Panics on non-finite output.
    pub fn from_fn(year_label: impl Into<String>, f: impl FnMut(usize) -> f64) -> Self {
        let values: Vec<f64> = (0..HOURS_PER_YEAR).map(f).collect();
        assert!(values.iter().all(|v| v.is_finite()), "non-finite series value");
        Self {
            values,
            year_label: year_label.into(),
        }
    }

    /// Pads `window` with zeros up to a full year, starting at hour `offset`.
    pub fn padded(window: &[f64], offset: usize, year_label: impl Into<String>) -> Result<Self> {
        if offset + window.len() > HOURS_PER_YEAR {
            return Err(Error::SeriesLength {
                expected: HOURS_PER_YEAR,
                found: offset + window.len(),
            });
        }
        let mut values = vec![0.0; HOURS_PER_YEAR];
        values[offset..offset + window.len()].copy_from_slice(window);
        Self::new(values, year_label, Sign::Signed)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn year_label(&self) -> &str {
        &self.year_label
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * factor).collect(),
            year_label: self.year_label.clone(),
        }
    }

    pub fn zip_with(&self, other: &HourlySeries, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
            year_label: self.year_label.clone(),
        }
    }

    pub fn add(&self, other: &HourlySeries) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub(crate) fn add_assign_scaled(&mut self, other: &HourlySeries, factor: f64) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += factor * b;
        }
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

pub(crate) fn file_label(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub(crate) fn open_csv(path: &Path) -> Result<csv::Reader<File>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

pub(crate) fn expect_header(reader: &mut csv::Reader<File>, path: &Path, expected: &[&str]) -> Result<()> {
    let label = file_label(path);
    let headers = reader.headers().map_err(|e| Error::Row {
        file: label.clone(),
        row: 0,
        message: e.to_string(),
    })?;
    let found: Vec<&str> = headers.iter().collect();
    if found != expected {
        return Err(Error::Row {
            file: label,
            row: 0,
            message: format!("expected header `{}`, found `{}`", expected.join(","), found.join(",")),
        });
    }
    Ok(())
}

pub(crate) fn parse_f64(file: &str, row: usize, field: &str, raw: &str) -> Result<f64> {
    let value: f64 = raw
        .parse()
        .map_err(|_| Error::field(file, row, field, format!("is not a number: `{raw}`")))?;
    if !value.is_finite() {
        return Err(Error::field(file, row, field, "is not finite"));
    }
    Ok(value)
}

/// Reads a two-column `hour,<value_column>` file with exactly one row per hour.
pub(crate) fn read_hourly_column(path: &Path, value_column: &str) -> Result<Vec<f64>> {
    let label = file_label(path);
    let mut reader = open_csv(path)?;
    expect_header(&mut reader, path, &["hour", value_column])?;
    let mut values = Vec::with_capacity(HOURS_PER_YEAR);
    for (index, record) in reader.records().enumerate() {
        let row = index + 1;
        let record = record.map_err(|e| Error::Row {
            file: label.clone(),
            row,
            message: e.to_string(),
        })?;
        let hour = parse_f64(&label, row, "hour", &record[0])?;
        if hour != index as f64 {
            return Err(Error::field(
                &label,
                row,
                "hour",
                format!("expected {index}, found {}", &record[0]),
            ));
        }
        values.push(parse_f64(&label, row, value_column, &record[1])?);
    }
    if values.len() != HOURS_PER_YEAR {
        return Err(Error::SeriesLength {
            expected: HOURS_PER_YEAR,
            found: values.len(),
        });
    }
    Ok(values)
}

/// Loads a `series.csv` file (`hour,value_mwh`).
pub fn load_hourly_series(path: impl AsRef<Path>, sign: Sign) -> Result<HourlySeries> {
    let path = path.as_ref();
    let values = read_hourly_column(path, "value_mwh")?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    HourlySeries::new(values, label, sign)
}

pub fn write_hourly_series(path: impl AsRef<Path>, series: &HourlySeries) -> Result<()> {
    write_hourly_column(path.as_ref(), "value_mwh", series.values())
}

pub(crate) fn write_hourly_column(path: &Path, value_column: &str, values: &[f64]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(out, "hour,{value_column}").map_err(io)?;
    for (hour, value) in values.iter().enumerate() {
        writeln!(out, "{hour},{value}").map_err(io)?;
    }
    out.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_rows(dir: &Path, rows: impl Iterator<Item = String>) -> std::path::PathBuf {
        let path = dir.join("series.csv");
        let mut body = String::from("hour,value_mwh\n");
        for row in rows {
            body.push_str(&row);
            body.push('\n');
        }
        std::fs::write(&path, body).unwrap();
        path
    }

    #[test]
    fn loads_constant_series() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_rows(dir.path(), (0..HOURS_PER_YEAR).map(|h| format!("{h},1.0")));
        let series = load_hourly_series(&path, Sign::NonNegative).unwrap();
        assert_eq!(series.total(), 8760.0);
    }

    #[test]
    fn rejects_short_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_rows(dir.path(), (0..HOURS_PER_YEAR - 1).map(|h| format!("{h},1.0")));
        let err = load_hourly_series(&path, Sign::NonNegative).unwrap_err();
        assert!(matches!(err, Error::SeriesLength { found: 8759, .. }), "{err}");
    }

    #[test]
    fn rejects_negative_value_only_when_non_negative() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_rows(
            dir.path(),
            (0..HOURS_PER_YEAR).map(|h| {
                if h == 17 {
                    format!("{h},-2.0")
                } else {
                    format!("{h},1.0")
                }
            }),
        );
        let err = load_hourly_series(&path, Sign::NonNegative).unwrap_err();
        assert!(matches!(err, Error::SignViolation { hour: 17, .. }), "{err}");
        assert!(load_hourly_series(&path, Sign::Signed).is_ok());
    }

    #[test]
    fn round_trips_through_csv() {
        let dir = tempfile::tempdir().unwrap();
        let series = HourlySeries::from_fn("x", |h| (h as f64 * 0.37).sin() / 3.0);
        let path = dir.path().join("s.csv");
        write_hourly_series(&path, &series).unwrap();
        let back = load_hourly_series(&path, Sign::Signed).unwrap();
        assert_eq!(back.values(), series.values());
    }

    #[test]
    fn constructor_rejects_wrong_length() {
        assert!(HourlySeries::new(vec![0.0; 24], "x", Sign::Signed).is_err());
        assert!(HourlySeries::padded(&[1.0; 48], HOURS_PER_YEAR - 10, "x").is_err());
    }
}

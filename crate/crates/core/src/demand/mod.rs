//! Annual municipal demand estimation, hourly profiling and EV fleet demand.

mod ev;
mod regression;

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

pub use ev::{equivalent_car_fleet, ev_demand, EvCategory, EvConversionTable};
pub use regression::{
    design_row, fit_demand_regression, predict_annual_demand, Prediction, RegressionModel, REGRESSION_COLUMNS,
};

use crate::datamodel::{
    expect_header, file_label, open_csv, parse_f64, read_hourly_column, HourlySeries, MunicipalitySet, Sign,
    HOURS_PER_YEAR,
};
use crate::error::{Error, Result};

/// Hourly weights summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadProfile {
    weights: Vec<f64>,
}

const NORMALIZATION_TOL: f64 = 1e-9;
/// Files whose weights sum within this distance of one are renormalized on load.
const LOAD_RENORMALIZE_TOL: f64 = 0.01;

impl LoadProfile {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        Self::check_shape(&weights)?;
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::ProfileNotNormalized { sum });
        }
        Ok(Self { weights })
    }

    /// Rescales arbitrary non-negative weights to sum to one.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        Self::check_shape(&weights)?;
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) {
            return Err(Error::ProfileNotNormalized { sum });
        }
        Ok(Self {
            weights: weights.into_iter().map(|w| w / sum).collect(),
        })
    }

    pub fn uniform() -> Self {
        Self {
            weights: vec![1.0 / HOURS_PER_YEAR as f64; HOURS_PER_YEAR],
        }
    }

    pub fn delta(hour: usize) -> Self {
        let mut weights = vec![0.0; HOURS_PER_YEAR];
        weights[hour] = 1.0;
        Self { weights }
    }

    fn check_shape(weights: &[f64]) -> Result<()> {
        if weights.len() != HOURS_PER_YEAR {
            return Err(Error::SeriesLength {
                expected: HOURS_PER_YEAR,
                found: weights.len(),
            });
        }
        for (hour, &value) in weights.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite { hour });
            }
            if value < 0.0 {
                return Err(Error::SignViolation { hour, value });
            }
        }
        Ok(())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Loads a `hour,weight` profile; sums within 1 % of one are renormalized.
pub fn load_profile(path: impl AsRef<Path>) -> Result<LoadProfile> {
    let weights = read_hourly_column(path.as_ref(), "weight")?;
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > LOAD_RENORMALIZE_TOL {
        return Err(Error::ProfileNotNormalized { sum });
    }
    LoadProfile::normalized(weights)
}

pub fn write_profile(path: impl AsRef<Path>, profile: &LoadProfile) -> Result<()> {
    crate::datamodel::write_hourly_column(path.as_ref(), "weight", profile.weights())
}

/// Spreads an annual energy over the year following `profile`.
///
/// # Panics
/// If `annual_mwh` is negative or not finite.
pub fn hourly_demand(annual_mwh: f64, profile: &LoadProfile) -> HourlySeries {
    assert!(
        annual_mwh >= 0.0 && annual_mwh.is_finite(),
        "annual demand must be non-negative"
    );
    HourlySeries::new(
        profile.weights().iter().map(|w| annual_mwh * w).collect(),
        "demand",
        Sign::NonNegative,
    )
    .expect("profile-shaped series is valid")
}

/// Scales each municipality's prediction so that its region sums to the
/// regional total.
pub fn scale_to_regional_totals(
    predictions: &BTreeMap<String, f64>,
    set: &MunicipalitySet,
    regional_totals: &BTreeMap<String, f64>,
) -> Result<BTreeMap<String, f64>> {
    let region_of: BTreeMap<&str, &str> = set
        .entries()
        .iter()
        .map(|m| (m.id.as_str(), m.region.as_str()))
        .collect();
    let mut predicted_sum: BTreeMap<&str, f64> = BTreeMap::new();
    for (id, &mwh) in predictions {
        let region = region_of
            .get(id.as_str())
            .ok_or_else(|| Error::MissingRegionTotal(format!("<unknown municipality {id}>")))?;
        *predicted_sum.entry(region).or_default() += mwh;
    }
    let mut factors: BTreeMap<&str, f64> = BTreeMap::new();
    for (region, &sum) in &predicted_sum {
        let total = *regional_totals
            .get(*region)
            .ok_or_else(|| Error::MissingRegionTotal((*region).to_owned()))?;
        let factor = if sum > 0.0 {
            total / sum
        } else if total == 0.0 {
            0.0
        } else {
            return Err(Error::ZeroRegionalPrediction {
                region: (*region).to_owned(),
                total,
            });
        };
        factors.insert(region, factor);
    }
    Ok(predictions
        .iter()
        .map(|(id, &mwh)| (id.clone(), mwh * factors[region_of[id.as_str()]]))
        .collect())
}

/// Loads `regional_totals.csv` (`region,annual_mwh`).
pub fn load_regional_totals(path: impl AsRef<Path>) -> Result<BTreeMap<String, f64>> {
    let path = path.as_ref();
    let file = file_label(path);
    let mut reader = open_csv(path)?;
    expect_header(&mut reader, path, &["region", "annual_mwh"])?;
    let mut totals = BTreeMap::new();
    for (index, record) in reader.records().enumerate() {
        let row = index + 1;
        let record = record.map_err(|e| Error::Row {
            file: file.clone(),
            row,
            message: e.to_string(),
        })?;
        let value = parse_f64(&file, row, "annual_mwh", &record[1])?;
        if value < 0.0 {
            return Err(Error::field(&file, row, "annual_mwh", "must be non-negative"));
        }
        if totals.insert(record[0].to_owned(), value).is_some() {
            return Err(Error::field(
                &file,
                row,
                "region",
                format!("duplicate region `{}`", &record[0]),
            ));
        }
    }
    Ok(totals)
}

pub fn write_regional_totals(path: impl AsRef<Path>, totals: &BTreeMap<String, f64>) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::from("region,annual_mwh\n");
    for (region, mwh) in totals {
        text.push_str(&format!("{region},{mwh}\n"));
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DemandSource {
    Known,
    Predicted,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MunicipalDemand {
    pub id: String,
    pub annual_mwh: f64,
    pub source: DemandSource,
    pub extrapolated: bool,
}

#[derive(Clone, Debug)]
pub struct DemandEstimate {
    pub model: RegressionModel,
    pub municipalities: Vec<MunicipalDemand>,
}

/// Fits on every municipality with a measured demand, predicts the rest,
/// then scales to regional totals when those are given.
pub fn estimate_municipal_demand(
    set: &MunicipalitySet,
    regional_totals: Option<&BTreeMap<String, f64>>,
) -> Result<DemandEstimate> {
    let training = MunicipalitySet::new(
        set.entries()
            .iter()
            .filter(|m| m.known_annual_demand.is_some())
            .cloned()
            .collect(),
    )?;
    let model = fit_demand_regression(&training)?;
    let mut municipalities: Vec<MunicipalDemand> = set
        .entries()
        .iter()
        .map(|m| match m.known_annual_demand {
            Some(mwh) => MunicipalDemand {
                id: m.id.clone(),
                annual_mwh: mwh,
                source: DemandSource::Known,
                extrapolated: false,
            },
            None => {
                let p = predict_annual_demand(&model, m);
                MunicipalDemand {
                    id: m.id.clone(),
                    annual_mwh: p.mwh,
                    source: DemandSource::Predicted,
                    extrapolated: p.extrapolated,
                }
            }
        })
        .collect();
    let extrapolated = municipalities.iter().filter(|d| d.extrapolated).count();
    if extrapolated > 0 {
        log::warn!("{extrapolated} municipalities had negative predicted demand, clamped to zero");
    }
    if let Some(totals) = regional_totals {
        let raw: BTreeMap<String, f64> = municipalities.iter().map(|d| (d.id.clone(), d.annual_mwh)).collect();
        let scaled = scale_to_regional_totals(&raw, set, totals)?;
        for d in &mut municipalities {
            d.annual_mwh = scaled[&d.id];
        }
    }
    Ok(DemandEstimate { model, municipalities })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::{town, ClimateZone};
    use proptest::prelude::*;

    fn regional_set() -> MunicipalitySet {
        let mut a = town("a", "P", 5_000, ClimateZone::III);
        let mut b = town("b", "P", 2_000, ClimateZone::III);
        let mut c = town("c", "Q", 9_000, ClimateZone::II);
        a.region = "North".into();
        b.region = "North".into();
        c.region = "South".into();
        MunicipalitySet::new(vec![a, b, c]).unwrap()
    }

    #[test]
    fn proportional_scaling() {
        let preds = BTreeMap::from([("a".to_owned(), 60.0), ("b".to_owned(), 30.0), ("c".to_owned(), 10.0)]);
        let totals = BTreeMap::from([("North".to_owned(), 100.0), ("South".to_owned(), 10.0)]);
        let scaled = scale_to_regional_totals(&preds, &regional_set(), &totals).unwrap();
        assert!((scaled["a"] - 200.0 / 3.0).abs() < 1e-12);
        assert!((scaled["b"] - 100.0 / 3.0).abs() < 1e-12);
        assert_eq!(scaled["c"], 10.0);
    }

    #[test]
    fn scaling_errors() {
        let set = regional_set();
        let preds = BTreeMap::from([("a".to_owned(), 0.0), ("b".to_owned(), 0.0), ("c".to_owned(), 1.0)]);
        let totals = BTreeMap::from([("North".to_owned(), 5.0), ("South".to_owned(), 1.0)]);
        assert!(matches!(
            scale_to_regional_totals(&preds, &set, &totals),
            Err(Error::ZeroRegionalPrediction { .. })
        ));
        let preds = BTreeMap::from([("a".to_owned(), 1.0), ("b".to_owned(), 1.0), ("c".to_owned(), 1.0)]);
        let totals = BTreeMap::from([("North".to_owned(), 5.0)]);
        assert!(matches!(
            scale_to_regional_totals(&preds, &set, &totals),
            Err(Error::MissingRegionTotal(r)) if r == "South"
        ));
    }

    #[test]
    fn hourly_demand_examples() {
        let uniform = hourly_demand(8_760.0, &LoadProfile::uniform());
        assert!(uniform.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert_eq!(hourly_demand(0.0, &LoadProfile::uniform()).total(), 0.0);
        let delta = hourly_demand(100.0, &LoadProfile::delta(0));
        assert_eq!(delta.values()[0], 100.0);
        assert_eq!(delta.total(), 100.0);
    }

    #[test]
    fn profile_validation() {
        assert!(LoadProfile::new(vec![0.5 / 8760.0; HOURS_PER_YEAR]).is_err());
        assert!(LoadProfile::normalized(vec![0.0; HOURS_PER_YEAR]).is_err());
        let mut w = vec![1.0; HOURS_PER_YEAR];
        w[3] = -1.0;
        assert!(LoadProfile::normalized(w).is_err());
    }

    #[test]
    fn profile_file_renormalization() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("load_profile.csv");
        let write = |scale: f64| {
            let mut body = String::from("hour,weight\n");
            for h in 0..HOURS_PER_YEAR {
                body.push_str(&format!("{h},{}\n", scale / HOURS_PER_YEAR as f64));
            }
            std::fs::write(&path, body).unwrap();
        };
        write(1.005);
        let p = load_profile(&path).unwrap();
        assert!((p.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        write(1.02);
        assert!(matches!(load_profile(&path), Err(Error::ProfileNotNormalized { .. })));
    }

    #[test]
    fn estimate_uses_known_and_scales() {
        let mut entries: Vec<_> = (0..30u64)
            .map(|i| {
                let mut m = town(
                    &format!("t{i}"),
                    "P",
                    1_000 + 400 * i,
                    ClimateZone::ALL[(i % 5) as usize],
                );
                m.region = if i % 2 == 0 { "A".into() } else { "B".into() };
                m.altitude = (i * 37 % 13) as f64;
                m.income = 8_000.0 + (i * 91 % 17) as f64 * 100.0;
                m.cadastral_value = 1e8 + (i * 53 % 19) as f64 * 1e6;
                m.known_annual_demand = Some(2.0 * m.population as f64 + 0.01 * m.income);
                m
            })
            .collect();
        entries[3].known_annual_demand = None;
        entries[4].known_annual_demand = None;
        let set = MunicipalitySet::new(entries).unwrap();
        let totals = BTreeMap::from([("A".to_owned(), 1e6), ("B".to_owned(), 2e6)]);
        let est = estimate_municipal_demand(&set, Some(&totals)).unwrap();
        assert_eq!(est.municipalities[3].source, DemandSource::Predicted);
        for region in ["A", "B"] {
            let sum: f64 = est
                .municipalities
                .iter()
                .zip(set.entries())
                .filter(|(_, m)| m.region == region)
                .map(|(d, _)| d.annual_mwh)
                .sum();
            assert!((sum - totals[region]).abs() <= 1e-6 * totals[region]);
        }
    }

    proptest! {
        #[test]
        fn hourly_demand_preserves_annual(
            annual in 0.0f64..1e7,
            seed_weights in proptest::collection::vec(0.0f64..10.0, 24),
        ) {
            let weights: Vec<f64> = (0..HOURS_PER_YEAR).map(|h| seed_weights[h % 24] + (h % 7) as f64 * 0.1).collect();
            let profile = LoadProfile::normalized(weights).unwrap();
            let series = hourly_demand(annual, &profile);
            prop_assert!((series.total() - annual).abs() <= 1e-9 * annual.max(1.0));
        }

        #[test]
        fn scaling_hits_totals(preds in proptest::collection::vec(0.01f64..1e6, 3), t1 in 1.0f64..1e8, t2 in 1.0f64..1e8) {
            let p = BTreeMap::from([("a".to_owned(), preds[0]), ("b".to_owned(), preds[1]), ("c".to_owned(), preds[2])]);
            let totals = BTreeMap::from([("North".to_owned(), t1), ("South".to_owned(), t2)]);
            let s = scale_to_regional_totals(&p, &regional_set(), &totals).unwrap();
            prop_assert!((s["a"] + s["b"] - t1).abs() <= 1e-6 * t1);
            prop_assert!((s["c"] - t2).abs() <= 1e-6 * t2);
        }
    }
}

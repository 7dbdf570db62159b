use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::datamodel::{ClimateZone, Municipality, MunicipalitySet};
use crate::error::{Error, Result};

/// Zone I is the reference category; zones II..V get indicator columns.
pub const REGRESSION_COLUMNS: [&str; 9] = [
    "intercept",
    "population",
    "income",
    "cadastral_value",
    "altitude",
    "zone_II",
    "zone_III",
    "zone_IV",
    "zone_V",
];

/// A column whose orthogonal residual falls below this fraction of its own
/// norm is treated as a linear combination of the preceding ones.
const COLLINEARITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionModel {
    pub coefficients: Vec<f64>,
    pub r_squared: f64,
    pub training_size: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub mwh: f64,
    /// The linear prediction was negative and has been clamped to zero.
    pub extrapolated: bool,
}

pub fn design_row(m: &Municipality) -> [f64; 9] {
    let mut row = [0.0; 9];
    row[0] = 1.0;
    row[1] = m.population as f64;
    row[2] = m.income;
    row[3] = m.cadastral_value;
    row[4] = m.altitude;
    if m.climate_zone != ClimateZone::I {
        row[4 + m.climate_zone.index()] = 1.0;
    }
    row
}

/// Ordinary least squares of known annual demand on the municipal attributes.
///
/// Columns are rescaled to unit max-norm before a Householder QR, so census
/// magnitudes (€1e9 cadastral values next to 0/1 indicators) stay well
/// conditioned.
pub fn fit_demand_regression(training: &MunicipalitySet) -> Result<RegressionModel> {
    let p = REGRESSION_COLUMNS.len();
    let n = training.len();
    if n < p + 1 {
        return Err(Error::InsufficientTraining { rows: n, needed: p + 1 });
    }
    let mut y = DVector::zeros(n);
    let mut x = DMatrix::zeros(n, p);
    for (i, m) in training.entries().iter().enumerate() {
        y[i] = m.known_annual_demand.ok_or_else(|| {
            Error::field(
                "<training>",
                i + 1,
                "annual_demand_mwh",
                format!("missing for `{}`", m.id),
            )
        })?;
        for (j, v) in design_row(m).into_iter().enumerate() {
            x[(i, j)] = v;
        }
    }

    let scales: Vec<f64> = (0..p)
        .map(|j| x.column(j).iter().fold(0.0_f64, |a, v| a.max(v.abs())))
        .collect();
    let zero_columns: Vec<String> = scales
        .iter()
        .zip(REGRESSION_COLUMNS)
        .filter(|(s, _)| **s == 0.0)
        .map(|(_, name)| name.to_owned())
        .collect();
    if !zero_columns.is_empty() {
        return Err(Error::Singular { columns: zero_columns });
    }
    for (j, s) in scales.iter().enumerate() {
        x.column_mut(j).unscale_mut(*s);
    }

    let norms: Vec<f64> = (0..p).map(|j| x.column(j).norm()).collect();
    let qr = x.clone().qr();
    let r = qr.r();
    let dependent: Vec<String> = (0..p)
        .filter(|&j| r[(j, j)].abs() <= COLLINEARITY_TOL * norms[j])
        .map(|j| REGRESSION_COLUMNS[j].to_owned())
        .collect();
    if !dependent.is_empty() {
        return Err(Error::Singular { columns: dependent });
    }
    let qty = qr.q().transpose() * &y;
    let scaled = r.solve_upper_triangular(&qty).ok_or_else(|| Error::Singular {
        columns: vec!["<triangular solve>".into()],
    })?;
    let coefficients: Vec<f64> = scaled.iter().zip(&scales).map(|(b, s)| b / s).collect();

    let fitted = &x * &scaled;
    let mean = y.mean();
    let sse: f64 = y.iter().zip(fitted.iter()).map(|(a, b)| (a - b).powi(2)).sum();
    let sst: f64 = y.iter().map(|a| (a - mean).powi(2)).sum();
    let scale = y.iter().map(|a| a * a).sum::<f64>().max(f64::MIN_POSITIVE);
    let r_squared = if sst <= 1e-24 * scale {
        // constant response: perfect iff the residuals vanish too
        if sse <= 1e-18 * scale {
            1.0
        } else {
            0.0
        }
    } else {
        (1.0 - sse / sst).clamp(0.0, 1.0)
    };

    Ok(RegressionModel {
        coefficients,
        r_squared,
        training_size: n,
    })
}

impl RegressionModel {
    pub fn predict_raw(&self, m: &Municipality) -> f64 {
        design_row(m).iter().zip(&self.coefficients).map(|(x, b)| x * b).sum()
    }
}

/// Linear prediction, clamped at zero with an extrapolation flag.
pub fn predict_annual_demand(model: &RegressionModel, m: &Municipality) -> Prediction {
    let raw = model.predict_raw(m);
    if raw < 0.0 {
        Prediction {
            mwh: 0.0,
            extrapolated: true,
        }
    } else {
        Prediction {
            mwh: raw,
            extrapolated: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::town;

    fn exact_fixture(coefs: &[f64; 9]) -> MunicipalitySet {
        let zones = ClimateZone::ALL;
        let entries = (0..40u64)
            .map(|i| {
                let mut m = town(&format!("m{i}"), "P", 1_000 + 977 * i * i, zones[(i % 5) as usize]);
                m.income = 9_000.0 + 313.0 * ((i * 7) % 11) as f64;
                m.cadastral_value = 2e7 * (1 + (i * 13) % 17) as f64;
                m.altitude = 15.0 * ((i * 5) % 23) as f64;
                let y: f64 = design_row(&m).iter().zip(coefs).map(|(x, b)| x * b).sum();
                m.known_annual_demand = Some(y);
                m
            })
            .collect();
        MunicipalitySet::new(entries).unwrap()
    }

    const GEN: [f64; 9] = [1_500.0, 3.2, 0.05, 2e-6, -0.4, 120.0, 260.0, 410.0, 530.0];

    #[test]
    fn recovers_generating_coefficients() {
        let model = fit_demand_regression(&exact_fixture(&GEN)).unwrap();
        for (fit, truth) in model.coefficients.iter().zip(GEN) {
            assert!((fit - truth).abs() < 1e-6, "{fit} vs {truth}");
        }
        assert!((model.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(model.training_size, 40);
    }

    #[test]
    fn exact_fit_predicts_training_rows() {
        let set = exact_fixture(&GEN);
        let model = fit_demand_regression(&set).unwrap();
        for m in set.entries() {
            let p = predict_annual_demand(&model, m);
            let known = m.known_annual_demand.unwrap();
            assert!((p.mwh - known).abs() < 1e-6 * known.max(1.0));
            assert!(!p.extrapolated);
        }
    }

    #[test]
    fn constant_response() {
        let set = exact_fixture(&[750.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let model = fit_demand_regression(&set).unwrap();
        assert!((model.coefficients[0] - 750.0).abs() < 1e-6);
        for b in &model.coefficients[1..] {
            assert!(b.abs() < 1e-6);
        }
        assert_eq!(model.r_squared, 1.0);
    }

    #[test]
    fn collinear_inputs_name_columns() {
        let mut set = exact_fixture(&GEN).entries().to_vec();
        for m in &mut set {
            m.altitude = m.income * 2.0;
        }
        let err = fit_demand_regression(&MunicipalitySet::new(set).unwrap()).unwrap_err();
        match err {
            Error::Singular { columns } => assert_eq!(columns, vec!["altitude".to_owned()]),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn missing_zone_is_singular() {
        let mut set = exact_fixture(&GEN).entries().to_vec();
        for m in &mut set {
            if m.climate_zone == ClimateZone::IV {
                m.climate_zone = ClimateZone::III;
            }
        }
        let err = fit_demand_regression(&MunicipalitySet::new(set).unwrap()).unwrap_err();
        assert!(
            matches!(err, Error::Singular { ref columns } if columns == &["zone_IV"]),
            "{err}"
        );
    }

    #[test]
    fn too_few_rows() {
        let set = MunicipalitySet::new(exact_fixture(&GEN).entries()[..9].to_vec()).unwrap();
        assert!(matches!(
            fit_demand_regression(&set),
            Err(Error::InsufficientTraining { rows: 9, needed: 10 })
        ));
    }

    #[test]
    fn zero_vector_and_clamp() {
        let model = RegressionModel {
            coefficients: vec![42.0, 1.0, 0.0, 0.0, -10.0, 0.0, 0.0, 0.0, 0.0],
            r_squared: 1.0,
            training_size: 10,
        };
        let mut m = town("z", "P", 0, ClimateZone::I);
        m.income = 0.0;
        m.cadastral_value = 0.0;
        m.altitude = 0.0;
        assert_eq!(predict_annual_demand(&model, &m).mwh, 42.0);
        m.altitude = 1_000.0;
        let p = predict_annual_demand(&model, &m);
        assert_eq!(p.mwh, 0.0);
        assert!(p.extrapolated);
    }
}

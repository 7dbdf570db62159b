use std::collections::BTreeMap;

use super::{hourly_demand, LoadProfile};
use crate::datamodel::HourlySeries;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvCategory {
    pub annual_distance_km: f64,
    pub specific_consumption_wh_per_km: f64,
    /// Number of reference cars with the same annual consumption.
    pub equivalence_factor: f64,
}

impl EvCategory {
    pub fn annual_consumption_mwh(&self) -> f64 {
        self.annual_distance_km * self.specific_consumption_wh_per_km * 1e-6
    }
}

/// Converts vehicle stocks of any category into equivalent cars.
#[derive(Clone, Debug, PartialEq)]
pub struct EvConversionTable {
    categories: BTreeMap<String, EvCategory>,
    reference: String,
}

/// Tabulated factors must agree with the distance × consumption ratio within
/// 1 % or within the rounding of a two-decimal table entry.
const FACTOR_TOL: f64 = 0.01;
const FACTOR_ROUNDING: f64 = 0.005;

impl EvConversionTable {
    pub fn new(categories: BTreeMap<String, EvCategory>, reference: impl Into<String>) -> Result<Self> {
        let reference = reference.into();
        let car = categories
            .get(&reference)
            .ok_or_else(|| Error::UnknownVehicleCategory(reference.clone()))?
            .annual_consumption_mwh();
        if !(car > 0.0) {
            return Err(Error::InvalidParameter {
                name: "reference consumption",
                value: car,
                reason: "must be positive",
            });
        }
        for c in categories.values() {
            let implied = c.annual_consumption_mwh() / car;
            if (c.equivalence_factor - implied).abs() > (FACTOR_TOL * implied).max(FACTOR_ROUNDING) {
                return Err(Error::InvalidParameter {
                    name: "equivalence_factor",
                    value: c.equivalence_factor,
                    reason: "inconsistent with distance × consumption",
                });
            }
        }
        Ok(Self { categories, reference })
    }

    /// Light-duty fleet conversion (cars, vans, buses, motorbikes, motorcycles).
    pub fn spanish_default() -> Self {
        let entry = |km, wh, factor| EvCategory {
            annual_distance_km: km,
            specific_consumption_wh_per_km: wh,
            equivalence_factor: factor,
        };
        let categories = BTreeMap::from([
            ("cars".to_owned(), entry(12_500.0, 163.0, 1.00)),
            ("vans".to_owned(), entry(19_500.0, 235.0, 2.25)),
            ("buses".to_owned(), entry(55_000.0, 1_269.0, 34.24)),
            ("motorbikes".to_owned(), entry(7_700.0, 68.0, 0.26)),
            ("motorcycles".to_owned(), entry(11_000.0, 32.0, 0.17)),
        ]);
        Self::new(categories, "cars").expect("built-in table is consistent")
    }

    pub fn get(&self, category: &str) -> Option<&EvCategory> {
        self.categories.get(category)
    }

    /// Annual consumption of one reference car (MWh).
    pub fn per_car_annual_mwh(&self) -> f64 {
        self.categories[&self.reference].annual_consumption_mwh()
    }
}

/// Σ count × equivalence factor.
pub fn equivalent_car_fleet(counts: &BTreeMap<String, u64>, table: &EvConversionTable) -> Result<f64> {
    counts.iter().try_fold(0.0, |acc, (category, &count)| {
        let c = table
            .get(category)
            .ok_or_else(|| Error::UnknownVehicleCategory(category.clone()))?;
        Ok(acc + count as f64 * c.equivalence_factor)
    })
}

/// Hourly charging demand of an equivalent car fleet.
pub fn ev_demand(
    equivalent_cars: f64,
    per_car_annual_mwh: f64,
    charging_profile: &LoadProfile,
) -> Result<HourlySeries> {
    if !(per_car_annual_mwh > 0.0) {
        return Err(Error::InvalidParameter {
            name: "per_car_annual",
            value: per_car_annual_mwh,
            reason: "must be positive",
        });
    }
    if !(equivalent_cars >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "equivalent_cars",
            value: equivalent_cars,
            reason: "must be non-negative",
        });
    }
    Ok(hourly_demand(equivalent_cars * per_car_annual_mwh, charging_profile))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn counts(pairs: &[(&str, u64)]) -> BTreeMap<String, u64> {
        pairs.iter().map(|(k, v)| ((*k).to_owned(), *v)).collect()
    }

    #[test]
    fn one_bus() {
        let t = EvConversionTable::spanish_default();
        assert_eq!(equivalent_car_fleet(&counts(&[("buses", 1)]), &t).unwrap(), 34.24);
    }

    #[test]
    fn reference_car_energy() {
        assert!((EvConversionTable::spanish_default().per_car_annual_mwh() - 2.0375).abs() < 1e-12);
    }

    #[test]
    fn empty_and_unknown() {
        let t = EvConversionTable::spanish_default();
        assert_eq!(equivalent_car_fleet(&BTreeMap::new(), &t).unwrap(), 0.0);
        assert!(matches!(
            equivalent_car_fleet(&counts(&[("trucks", 3)]), &t),
            Err(Error::UnknownVehicleCategory(c)) if c == "trucks"
        ));
    }

    #[test]
    fn inconsistent_factor_rejected() {
        let mut cats = BTreeMap::new();
        cats.insert(
            "cars".to_owned(),
            EvCategory {
                annual_distance_km: 10.0,
                specific_consumption_wh_per_km: 100.0,
                equivalence_factor: 1.0,
            },
        );
        cats.insert(
            "vans".to_owned(),
            EvCategory {
                annual_distance_km: 20.0,
                specific_consumption_wh_per_km: 100.0,
                equivalence_factor: 2.5,
            },
        );
        assert!(EvConversionTable::new(cats, "cars").is_err());
    }

    #[test]
    fn ev_demand_examples() {
        let p = LoadProfile::uniform();
        assert_eq!(ev_demand(0.0, 2.0375, &p).unwrap().total(), 0.0);
        let one = ev_demand(1.0, 2.0375, &p).unwrap();
        assert!(one.values().iter().all(|v| (v - 2.0375 / 8760.0).abs() < 1e-15));
        assert!(ev_demand(1.0, 0.0, &p).is_err());
    }

    proptest! {
        #[test]
        fn fleet_is_linear(a in proptest::collection::vec(0u64..1_000_000, 5), b in proptest::collection::vec(0u64..1_000_000, 5)) {
            let t = EvConversionTable::spanish_default();
            let cats = crate::datamodel::VEHICLE_CATEGORIES;
            let ca: BTreeMap<String, u64> = cats.iter().zip(&a).map(|(c, n)| ((*c).to_owned(), *n)).collect();
            let cb: BTreeMap<String, u64> = cats.iter().zip(&b).map(|(c, n)| ((*c).to_owned(), *n)).collect();
            let cab: BTreeMap<String, u64> = cats.iter().zip(a.iter().zip(&b)).map(|(c, (x, y))| ((*c).to_owned(), x + y)).collect();
            let lhs = equivalent_car_fleet(&cab, &t).unwrap();
            let rhs = equivalent_car_fleet(&ca, &t).unwrap() + equivalent_car_fleet(&cb, &t).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.max(1.0));
        }
    }
}

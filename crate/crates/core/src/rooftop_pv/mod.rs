//! Rooftop PV potential: usable roof area by orientation, installable peak
//! power, and hourly production from twelve canonical days per month.

mod split;
mod yields;

use std::collections::BTreeMap;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

pub use split::{load_rooftop_split, write_rooftop_split, PopulationBand, RooftopSplitTable, ROOFTOP_SPLIT_HEADER};
pub use yields::{
    interpolate_canonical_days, interpolate_days, load_canonical_yields, write_canonical_yields, CanonicalDays,
    CanonicalYieldTable, RegionYields, CANONICAL_DAY_OF_MONTH, CANONICAL_YIELDS_HEADER,
};

use crate::datamodel::units::KW_PER_MW;
use crate::datamodel::{HourlySeries, Municipality, MunicipalitySet, Sign};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Flat,
    South,
    East,
    West,
    North,
}

impl Orientation {
    pub const ALL: [Orientation; 5] = [
        Orientation::Flat,
        Orientation::South,
        Orientation::East,
        Orientation::West,
        Orientation::North,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::Flat => "flat",
            Orientation::South => "south",
            Orientation::East => "east",
            Orientation::West => "west",
            Orientation::North => "north",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Orientation::ALL
            .into_iter()
            .find(|o| o.as_str().eq_ignore_ascii_case(s.trim()))
    }
}

/// One value per roof surface class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ByOrientation<T> {
    pub flat: T,
    pub south: T,
    pub east: T,
    pub west: T,
    pub north: T,
}

impl<T> Index<Orientation> for ByOrientation<T> {
    type Output = T;
    fn index(&self, o: Orientation) -> &T {
        match o {
            Orientation::Flat => &self.flat,
            Orientation::South => &self.south,
            Orientation::East => &self.east,
            Orientation::West => &self.west,
            Orientation::North => &self.north,
        }
    }
}

impl<T> IndexMut<Orientation> for ByOrientation<T> {
    fn index_mut(&mut self, o: Orientation) -> &mut T {
        match o {
            Orientation::Flat => &mut self.flat,
            Orientation::South => &mut self.south,
            Orientation::East => &mut self.east,
            Orientation::West => &mut self.west,
            Orientation::North => &mut self.north,
        }
    }
}

impl ByOrientation<f64> {
    pub fn total(&self) -> f64 {
        Orientation::ALL.iter().map(|&o| self[o]).sum()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            flat: f(self.flat),
            south: f(self.south),
            east: f(self.east),
            west: f(self.west),
            north: f(self.north),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PvParams {
    pub panel_density_m2_per_kwp: f64,
    pub shadow_loss: f64,
    pub utilization_factor: f64,
    pub exclude_north: bool,
}

impl Default for PvParams {
    fn default() -> Self {
        Self {
            panel_density_m2_per_kwp: 5.8,
            shadow_loss: 0.10,
            utilization_factor: 0.68,
            exclude_north: true,
        }
    }
}

impl PvParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.panel_density_m2_per_kwp > 0.0) {
            return Err(Error::InvalidParameter {
                name: "panel_density",
                value: self.panel_density_m2_per_kwp,
                reason: "must be positive",
            });
        }
        for (name, v) in [
            ("shadow_loss", self.shadow_loss),
            ("utilization_factor", self.utilization_factor),
        ] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "must lie in [0, 1)",
                });
            }
        }
        Ok(())
    }
}

/// Usable roof area (m²) per surface class.
pub type RooftopInventory = ByOrientation<f64>;

/// Splits a municipality's footprint into usable flat and pitched roof area,
/// with pitched area shared equally by the four orientations.
pub fn classify_rooftops(m: &Municipality, table: &RooftopSplitTable, p: &PvParams) -> Result<RooftopInventory> {
    let band = PopulationBand::of(m);
    let (flat_fraction, pitched_fraction) = table.get(m.climate_zone, band)?;
    let usable = m.footprint_area * p.utilization_factor;
    let pitched_each = usable * pitched_fraction / 4.0;
    Ok(ByOrientation {
        flat: usable * flat_fraction,
        south: pitched_each,
        east: pitched_each,
        west: pitched_each,
        north: pitched_each,
    })
}

/// Peak power (kWp) per surface class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InstalledCapacity {
    pub kwp: ByOrientation<f64>,
    /// North-facing capacity is reported but never produces.
    pub exclude_north: bool,
}

impl InstalledCapacity {
    pub fn producing_classes(&self) -> impl Iterator<Item = (Orientation, f64)> + '_ {
        Orientation::ALL
            .into_iter()
            .filter(|o| !(self.exclude_north && *o == Orientation::North))
            .map(|o| (o, self.kwp[o]))
    }

    /// Capacity that takes part in production (kWp).
    pub fn producing_kwp(&self) -> f64 {
        self.producing_classes().map(|(_, k)| k).sum()
    }
}

pub fn installable_capacity(inv: &RooftopInventory, p: &PvParams) -> InstalledCapacity {
    InstalledCapacity {
        kwp: inv.map(|area| area / p.panel_density_m2_per_kwp),
        exclude_north: p.exclude_north,
    }
}

/// Per-kWp yield series (kWh/kWp per hour) by orientation.
pub type YieldSeries = BTreeMap<Orientation, HourlySeries>;

/// Hourly production (MWh) after shadow losses.
pub fn hourly_pv_production(capacity: &InstalledCapacity, yields: &YieldSeries, p: &PvParams) -> Result<HourlySeries> {
    let mut total = HourlySeries::zeros("pv");
    for (orientation, kwp) in capacity.producing_classes() {
        if kwp == 0.0 {
            continue;
        }
        let series = yields
            .get(&orientation)
            .ok_or_else(|| Error::YieldTable(format!("no yield series for orientation `{}`", orientation.as_str())))?;
        total.add_assign_scaled(series, kwp * (1.0 - p.shadow_loss) / KW_PER_MW);
    }
    HourlySeries::new(total.into_values(), "pv", Sign::NonNegative)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregationLevel {
    Municipality,
    Province,
    Region,
    National,
}

pub const NATIONAL_KEY: &str = "national";

/// Element-wise sums of municipal series per group.
pub fn aggregate_production(
    series: impl IntoIterator<Item = (String, HourlySeries)>,
    set: &MunicipalitySet,
    level: AggregationLevel,
) -> Result<BTreeMap<String, HourlySeries>> {
    let lookup: BTreeMap<&str, &Municipality> = set.entries().iter().map(|m| (m.id.as_str(), m)).collect();
    let mut groups: BTreeMap<String, HourlySeries> = BTreeMap::new();
    for (id, s) in series {
        let m = lookup
            .get(id.as_str())
            .ok_or_else(|| Error::Scenario(format!("series for unknown municipality `{id}`")))?;
        let key = match level {
            AggregationLevel::Municipality => m.id.clone(),
            AggregationLevel::Province => m.province.clone(),
            AggregationLevel::Region => m.region.clone(),
            AggregationLevel::National => NATIONAL_KEY.to_owned(),
        };
        match groups.get_mut(&key) {
            Some(acc) => acc.add_assign_scaled(&s, 1.0),
            None => {
                groups.insert(key, s);
            }
        }
    }
    Ok(groups)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::{town, ClimateZone, HOURS_PER_YEAR};
    use proptest::prelude::*;

    #[test]
    fn large_zone_v_city() {
        let mut m = town("c", "P", 250_000, ClimateZone::V);
        m.footprint_area = 1_000.0;
        let inv = classify_rooftops(&m, &RooftopSplitTable::spanish_default(), &PvParams::default()).unwrap();
        assert!((inv.flat - 476.0).abs() < 1e-9);
        for o in [
            Orientation::South,
            Orientation::East,
            Orientation::West,
            Orientation::North,
        ] {
            assert!((inv[o] - 51.0).abs() < 1e-9);
        }
        let cap = installable_capacity(&inv, &PvParams::default());
        assert!((cap.kwp.flat - 82.068_965_517).abs() < 1e-6);
        assert!((cap.producing_kwp() - (476.0 + 153.0) / 5.8).abs() < 1e-9);
    }

    #[test]
    fn zero_footprint() {
        let mut m = town("c", "P", 5_000, ClimateZone::II);
        m.footprint_area = 0.0;
        let inv = classify_rooftops(&m, &RooftopSplitTable::spanish_default(), &PvParams::default()).unwrap();
        assert_eq!(inv.total(), 0.0);
        assert_eq!(installable_capacity(&inv, &PvParams::default()).kwp.total(), 0.0);
    }

    #[test]
    fn national_area_proportions() {
        let usable_km2 = 1_354.0;
        let flat_share = 475.0 / 1_355.0;
        let p = PvParams::default();
        let mut table = RooftopSplitTable::spanish_default();
        table.set(ClimateZone::III, PopulationBand::Large, flat_share, 1.0 - flat_share);
        let mut m = town("all", "P", 1_000_000, ClimateZone::III);
        m.footprint_area = usable_km2 * 1e6 / p.utilization_factor;
        let inv = classify_rooftops(&m, &table, &p).unwrap();
        let km2 = inv.map(|a| a / 1e6);
        assert!((km2.total() - 1_354.0).abs() < 1e-6);
        assert!((km2.flat - 474.65).abs() < 0.5);
        assert!((km2.south - 219.84).abs() < 0.5);
        assert!((km2.north - km2.south).abs() < 1e-9);
        assert!((km2.east + km2.west - 439.67).abs() < 0.5);
        // about 1,134 km² without north roofs, i.e. roughly 195.5 GWp at 5.8 m²/kWp
        assert!((km2.total() - km2.north - 1_134.0).abs() < 0.5);
        let gwp = installable_capacity(&inv, &p).producing_kwp() / 1e6;
        assert!((gwp - 195.5).abs() < 0.1, "{gwp}");
    }

    #[test]
    fn production_arithmetic() {
        let cap = InstalledCapacity {
            kwp: ByOrientation {
                south: 1_000.0,
                ..Default::default()
            },
            exclude_north: true,
        };
        let mut values = vec![0.0; HOURS_PER_YEAR];
        values[12] = 1.5;
        let yields = YieldSeries::from([(
            Orientation::South,
            HourlySeries::new(values, "y", Sign::NonNegative).unwrap(),
        )]);
        let out = hourly_pv_production(&cap, &yields, &PvParams::default()).unwrap();
        assert!((out.values()[12] - 1.35).abs() < 1e-12);
        assert_eq!(out.total(), out.values()[12]);
        let none = hourly_pv_production(&InstalledCapacity::default(), &yields, &PvParams::default()).unwrap();
        assert_eq!(none.total(), 0.0);
    }

    #[test]
    fn north_excluded_from_production() {
        let cap = InstalledCapacity {
            kwp: ByOrientation {
                north: 500.0,
                ..Default::default()
            },
            exclude_north: true,
        };
        let out = hourly_pv_production(&cap, &YieldSeries::new(), &PvParams::default()).unwrap();
        assert_eq!(out.total(), 0.0);
        assert_eq!(cap.kwp.total(), 500.0);
        let with_north = InstalledCapacity {
            exclude_north: false,
            ..cap
        };
        assert!(hourly_pv_production(&with_north, &YieldSeries::new(), &PvParams::default()).is_err());
    }

    fn two_towns() -> MunicipalitySet {
        let mut b = town("b", "P", 2_000, ClimateZone::III);
        b.region = "R2".into();
        MunicipalitySet::new(vec![
            town("a", "P", 1_000, ClimateZone::III),
            b,
            town("c", "Q", 3_000, ClimateZone::I),
        ])
        .unwrap()
    }

    #[test]
    fn aggregation_levels() {
        let set = two_towns();
        let s = |k: f64| HourlySeries::from_fn("s", move |h| k * (h % 24) as f64);
        let items = || {
            vec![
                ("a".to_owned(), s(1.0)),
                ("b".to_owned(), s(2.0)),
                ("c".to_owned(), s(4.0)),
            ]
        };
        let by_muni = aggregate_production(items(), &set, AggregationLevel::Municipality).unwrap();
        assert_eq!(by_muni["b"], s(2.0));
        let by_prov = aggregate_production(items(), &set, AggregationLevel::Province).unwrap();
        assert_eq!(by_prov["P"].values(), s(3.0).values());
        let by_region = aggregate_production(items(), &set, AggregationLevel::Region).unwrap();
        assert_eq!(by_region.len(), 2);
        let national = aggregate_production(items(), &set, AggregationLevel::National).unwrap();
        assert_eq!(national[NATIONAL_KEY].values(), s(7.0).values());
        assert!(aggregate_production(vec![("zz".to_owned(), s(1.0))], &set, AggregationLevel::National).is_err());
    }

    proptest! {
        #[test]
        fn production_is_homogeneous(caps in proptest::collection::vec(0.0f64..1e5, 4), k in 0.1f64..10.0) {
            let yields: YieldSeries = [Orientation::Flat, Orientation::South, Orientation::East, Orientation::West]
                .into_iter()
                .enumerate()
                .map(|(i, o)| (o, HourlySeries::from_fn("y", move |h| ((h + 3 * i) % 24) as f64 * 0.05)))
                .collect();
            let cap = InstalledCapacity {
                kwp: ByOrientation { flat: caps[0], south: caps[1], east: caps[2], west: caps[3], north: 0.0 },
                exclude_north: true,
            };
            let doubled = InstalledCapacity { kwp: cap.kwp.map(|c| c * k), ..cap };
            let p = PvParams::default();
            let a = hourly_pv_production(&cap, &yields, &p).unwrap();
            let b = hourly_pv_production(&doubled, &yields, &p).unwrap();
            for (x, y) in a.values().iter().zip(b.values()) {
                prop_assert!((x * k - y).abs() <= 1e-9 * y.abs().max(1e-12));
            }
        }

        #[test]
        fn aggregation_order_independent(ks in proptest::collection::vec(0.0f64..1e3, 3)) {
            let set = two_towns();
            let s = |k: f64| HourlySeries::from_fn("s", move |h| k * ((h * 7) % 13) as f64);
            let ids = ["a", "b", "c"];
            let fwd: Vec<_> = ids.iter().zip(&ks).map(|(i, k)| ((*i).to_owned(), s(*k))).collect();
            let rev: Vec<_> = fwd.iter().cloned().rev().collect();
            let x = aggregate_production(fwd, &set, AggregationLevel::National).unwrap();
            let y = aggregate_production(rev, &set, AggregationLevel::National).unwrap();
            for (a, b) in x[NATIONAL_KEY].values().iter().zip(y[NATIONAL_KEY].values()) {
                prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
            }
        }
    }
}

//! Seeded synthetic datasets with the shape of the Spanish inputs.
//!
//! Everything here is deterministic in the seed. Irradiance comes from a
//! clear-sky model (Kasten-Young air mass, Meinel beam attenuation) scaled by
//! monthly clearness factors, so yields are computed rather than fitted.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::datamodel::units::{MWH_PER_TWH, MW_PER_GW};
use crate::datamodel::{
    write_municipalities, write_portfolio, ClimateZone, HourlySeries, Municipality, MunicipalitySet, Portfolio,
    Technology, DAYS_PER_YEAR, HOURS_PER_YEAR, MONTH_START_DAY, VEHICLE_CATEGORIES,
};
use crate::demand::{design_row, write_profile, write_regional_totals, LoadProfile};
use crate::error::{Error, Result};
use crate::rooftop_pv::{
    interpolate_days, write_canonical_yields, write_rooftop_split, CanonicalDays, CanonicalYieldTable, Orientation,
    RegionYields, RooftopSplitTable, CANONICAL_DAY_OF_MONTH,
};

/// Coefficients (MWh/yr) of the linear model generating known demand, in
/// the column order of [`crate::demand::REGRESSION_COLUMNS`].
pub const TRUTH_COEFFICIENTS: [f64; 9] = [200.0, 3.0, 0.05, 2e-5, -0.5, 150.0, 300.0, 450.0, 600.0];

/// Building footprint per inhabitant, m².
const FOOTPRINT_PER_CAPITA: f64 = 42.0;
const VEHICLES_PER_CAPITA: [f64; 5] = [0.47, 0.047, 0.0012, 0.07, 0.02];

pub struct RegionSpec {
    pub name: &'static str,
    pub latitude_deg: f64,
    pub zones: [ClimateZone; 2],
    /// Ratio of actual to clear-sky irradiation, January first.
    pub clearness: [f64; 12],
}

pub const REGIONS: [RegionSpec; 5] = [
    RegionSpec {
        name: "Andalucia",
        latitude_deg: 37.4,
        zones: [ClimateZone::V, ClimateZone::IV],
        clearness: [0.78, 0.80, 0.82, 0.84, 0.88, 0.93, 0.95, 0.94, 0.88, 0.82, 0.78, 0.76],
    },
    RegionSpec {
        name: "Madrid",
        latitude_deg: 40.4,
        zones: [ClimateZone::III, ClimateZone::IV],
        clearness: [0.72, 0.76, 0.80, 0.80, 0.84, 0.90, 0.94, 0.93, 0.86, 0.78, 0.72, 0.70],
    },
    RegionSpec {
        name: "Cataluna",
        latitude_deg: 41.4,
        zones: [ClimateZone::III, ClimateZone::II],
        clearness: [0.74, 0.75, 0.76, 0.76, 0.79, 0.83, 0.86, 0.84, 0.79, 0.75, 0.72, 0.72],
    },
    RegionSpec {
        name: "Galicia",
        latitude_deg: 42.9,
        zones: [ClimateZone::I, ClimateZone::II],
        clearness: [0.56, 0.60, 0.66, 0.68, 0.72, 0.78, 0.82, 0.81, 0.76, 0.66, 0.58, 0.54],
    },
    RegionSpec {
        name: "Valencia",
        latitude_deg: 39.5,
        zones: [ClimateZone::IV, ClimateZone::III],
        clearness: [0.76, 0.78, 0.80, 0.81, 0.84, 0.88, 0.91, 0.89, 0.84, 0.79, 0.76, 0.74],
    },
];

/// Inverter, wiring and temperature losses.
const PERFORMANCE_RATIO: f64 = 0.80;
const GROUND_ALBEDO: f64 = 0.2;
/// Clock time minus solar time, hours (Central European time at Iberian longitudes).
const CLOCK_OFFSET_H: f64 = 1.5;
const PITCHED_TILT_DEG: f64 = 30.0;

/// (tilt, azimuth from north clockwise) of a surface class, degrees.
fn surface(orientation: Orientation, latitude_deg: f64) -> (f64, f64) {
    match orientation {
        Orientation::Flat => (latitude_deg - 10.0, 180.0),
        Orientation::South => (PITCHED_TILT_DEG, 180.0),
        Orientation::East => (PITCHED_TILT_DEG, 90.0),
        Orientation::West => (PITCHED_TILT_DEG, 270.0),
        Orientation::North => (PITCHED_TILT_DEG, 0.0),
    }
}

/// Clear-sky plane-of-array irradiance, W/m², at a given day of year
/// (1-based) and solar time.
pub fn clear_sky_poa(latitude_deg: f64, day: usize, solar_hour: f64, tilt_deg: f64, azimuth_deg: f64) -> f64 {
    let phi = latitude_deg.to_radians();
    let delta = (23.45 * (2.0 * PI * (284.0 + day as f64) / 365.0).sin()).to_radians();
    let omega = (15.0 * (solar_hour - 12.0)).to_radians();
    let up = phi.sin() * delta.sin() + phi.cos() * delta.cos() * omega.cos();
    if up <= 0.0 {
        return 0.0;
    }
    let east = -delta.cos() * omega.sin();
    let north = phi.cos() * delta.sin() - phi.sin() * delta.cos() * omega.cos();
    let zenith_deg = up.acos().to_degrees();
    let air_mass = 1.0 / (up + 0.50572 * (96.07995 - zenith_deg).powf(-1.6364));
    let dni = 1353.0 * 0.7_f64.powf(air_mass.powf(0.678));
    let dhi = 0.1 * dni;
    let ghi = dni * up + dhi;
    let (beta, gamma) = (tilt_deg.to_radians(), azimuth_deg.to_radians());
    let cos_incidence = beta.sin() * gamma.sin() * east + beta.sin() * gamma.cos() * north + beta.cos() * up;
    dni * cos_incidence.max(0.0) + dhi * (1.0 + beta.cos()) / 2.0 + ghi * GROUND_ALBEDO * (1.0 - beta.cos()) / 2.0
}

/// Canonical days (kWh/kWp) for every surface class of a region.
pub fn region_yields(region: &RegionSpec) -> RegionYields {
    Orientation::ALL
        .iter()
        .map(|&o| {
            let (tilt, azimuth) = surface(o, region.latitude_deg);
            let mut days: CanonicalDays = [[0.0; 24]; 12];
            for (month, day) in days.iter_mut().enumerate() {
                let doy = MONTH_START_DAY[month] + CANONICAL_DAY_OF_MONTH;
                for (hour, slot) in day.iter_mut().enumerate() {
                    let solar = hour as f64 + 0.5 - CLOCK_OFFSET_H;
                    let poa = clear_sky_poa(region.latitude_deg, doy, solar, tilt, azimuth);
                    *slot = poa / 1000.0 * PERFORMANCE_RATIO * region.clearness[month];
                }
            }
            (o, days)
        })
        .collect()
}

pub fn canonical_yield_table() -> CanonicalYieldTable {
    CanonicalYieldTable {
        regions: REGIONS.iter().map(|r| (r.name.to_owned(), region_yields(r))).collect(),
    }
}

/// Residential-plus-services shape: winter and summer seasonal peaks, a
/// midday and an evening daily peak, lighter weekends.
pub fn demand_profile() -> LoadProfile {
    let weights = (0..HOURS_PER_YEAR)
        .map(|h| {
            let day = (h / 24) as f64;
            let hod = (h % 24) as f64 + 0.5;
            let seasonal =
                1.0 + 0.12 * (2.0 * PI * (day - 15.0) / 365.0).cos() + 0.06 * (4.0 * PI * (day - 200.0) / 365.0).cos();
            let daily =
                0.7 + 0.25 * (-((hod - 13.0) / 3.0).powi(2)).exp() + 0.35 * (-((hod - 20.5) / 2.5).powi(2)).exp();
            let weekend = if (h / 24) % 7 >= 5 { 0.9 } else { 1.0 };
            seasonal * daily * weekend
        })
        .collect();
    LoadProfile::normalized(weights).expect("positive synthetic weights")
}

/// Overnight charging peaking around 2 am.
pub fn ev_profile() -> LoadProfile {
    let weights = (0..HOURS_PER_YEAR)
        .map(|h| {
            let hod = ((h % 24) as f64 + 0.5 + 12.0) % 24.0 - 12.0;
            0.15 + (-((hod - 2.0) / 2.5).powi(2)).exp()
        })
        .collect();
    LoadProfile::normalized(weights).expect("positive synthetic weights")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixtureSpec {
    pub seed: u64,
    pub municipalities: usize,
    /// Share of real municipalities whose annual demand is recorded.
    pub known_share: f64,
    /// Relative amplitude of uniform noise on recorded demand.
    pub noise: f64,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        Self {
            seed: 7,
            municipalities: 120,
            known_share: 0.6,
            noise: 0.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FixtureDataset {
    pub municipalities: MunicipalitySet,
    pub load_profile: LoadProfile,
    pub ev_profile: LoadProfile,
    pub canonical_yields: CanonicalYieldTable,
    pub rooftop_split: RooftopSplitTable,
    /// Noise-free model demand per region, MWh/yr.
    pub regional_totals: BTreeMap<String, f64>,
    pub portfolio: Portfolio,
}

fn truth_demand(m: &Municipality) -> f64 {
    design_row(m).iter().zip(TRUTH_COEFFICIENTS).map(|(x, b)| x * b).sum()
}

fn municipality(i: usize, rng: &mut ChaCha8Rng) -> Municipality {
    let region = &REGIONS[i % REGIONS.len()];
    let zone = region.zones[(i / REGIONS.len()) % 2];
    let province = format!("{}-{}", region.name, (i / REGIONS.len()) % 2 + 1);
    // log-uniform between 200 and 1e6 inhabitants
    let population = (200.0 * 5_000.0_f64.powf(rng.random::<f64>())).round() as u64;
    let pop = population as f64;
    let vehicle_counts = VEHICLE_CATEGORIES
        .iter()
        .zip(VEHICLES_PER_CAPITA)
        .map(|(c, rate)| {
            (
                (*c).to_owned(),
                (pop * rate * rng.random_range(0.8..1.2)).round() as u64,
            )
        })
        .collect();
    Municipality {
        id: format!("M{i:05}"),
        name: format!("Town {i}"),
        province,
        region: region.name.to_owned(),
        population,
        income: rng.random_range(9_000.0..16_000.0),
        cadastral_value: pop * rng.random_range(28_000.0..52_000.0),
        altitude: rng.random_range(0.0..1_200.0),
        climate_zone: zone,
        footprint_area: pop * FOOTPRINT_PER_CAPITA * rng.random_range(0.8..1.2),
        vehicle_counts,
        known_annual_demand: None,
    }
}

/// Table-3-like mix rescaled so that its annual energy bears the same ratio
/// to `demand_mwh` as the Spanish fleet to 234.9 TWh.
pub fn scaled_portfolio(demand_mwh: f64, seed: u64) -> Result<Portfolio> {
    let k = demand_mwh / (234.9 * MWH_PER_TWH);
    let shape = |label: &str, f: &dyn Fn(usize) -> f64, twh: f64| {
        let s = HourlySeries::from_fn(label, f);
        s.scaled(k * twh * MWH_PER_TWH / s.total())
    };
    let madrid = region_yields(&REGIONS[1]);
    let solar = interpolate_days(&madrid[&Orientation::Flat], "solar");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_3117);
    let mut state = 0.0_f64;
    let wind: Vec<f64> = (0..HOURS_PER_YEAR)
        .map(|h| {
            state = 0.97 * state + rng.random_range(-0.25..0.25);
            let seasonal = 1.0 + 0.25 * (2.0 * PI * (h / 24) as f64 / DAYS_PER_YEAR as f64).cos();
            seasonal / (1.0 + (-2.0 * state).exp())
        })
        .collect();
    let gw = |v: f64| k * v * MW_PER_GW;
    let hydro_installed = gw(20.7);
    Ok(Portfolio::new(vec![
        Technology::new("cogeneration", gw(5.7), 0.0, shape("cogeneration", &|_| 1.0, 19.9), 0.0)?,
        Technology::new(
            "biomass",
            gw(0.2),
            k * 0.7 * MWH_PER_TWH,
            HourlySeries::zeros("biomass"),
            gw(0.2),
        )?,
        Technology::new("wind", gw(43.7), 0.0, shape("wind", &|h| wind[h], 80.7), 0.0)?,
        Technology::new("pv", gw(47.2), 0.0, shape("pv", &|h| solar.values()[h], 66.5), 0.0)?,
        Technology::new(
            "thermosolar",
            gw(3.9),
            0.0,
            shape("thermosolar", &|h| solar.values()[h], 3.9),
            0.0,
        )?,
        Technology::new(
            "hydro",
            hydro_installed,
            k * 27.2 * MWH_PER_TWH,
            shape(
                "hydro",
                &|h| 1.0 + 0.5 * (2.0 * PI * ((h / 24) as f64 - 100.0) / 365.0).cos(),
                4.8,
            ),
            0.85 * hydro_installed,
        )?,
    ]))
}

impl FixtureDataset {
    pub fn generate(spec: FixtureSpec) -> Result<Self> {
        if spec.municipalities < 2 * REGIONS.len() {
            return Err(Error::InvalidParameter {
                name: "municipalities",
                value: spec.municipalities as f64,
                reason: "needs at least two per region",
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut entries: Vec<Municipality> = (0..spec.municipalities).map(|i| municipality(i, &mut rng)).collect();
        let mut regional_totals = BTreeMap::new();
        for m in &mut entries {
            let truth = truth_demand(m);
            *regional_totals.entry(m.region.clone()).or_insert(0.0) += truth;
            // the first ten cover every zone, so the design always has full rank
            let index: usize = m.id[1..].parse().expect("generated id");
            if index < 10 || rng.random::<f64>() < spec.known_share {
                let jitter = 1.0 + spec.noise * rng.random_range(-1.0..1.0);
                m.known_annual_demand = Some((truth * jitter).max(0.0));
            }
        }
        let total: f64 = regional_totals.values().sum();
        Ok(Self {
            municipalities: MunicipalitySet::new(entries)?,
            load_profile: demand_profile(),
            ev_profile: ev_profile(),
            canonical_yields: canonical_yield_table(),
            rooftop_split: RooftopSplitTable::spanish_default(),
            regional_totals,
            portfolio: scaled_portfolio(total, spec.seed)?,
        })
    }

    /// Writes the dataset in the on-disk layout the CLI reads.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_municipalities(dir.join("municipalities.csv"), &self.municipalities)?;
        write_profile(dir.join("load_profile.csv"), &self.load_profile)?;
        write_profile(dir.join("ev_profile.csv"), &self.ev_profile)?;
        write_canonical_yields(&dir.join("canonical_yields.csv"), &self.canonical_yields)?;
        write_rooftop_split(&dir.join("rooftop_split.csv"), &self.rooftop_split)?;
        write_regional_totals(dir.join("regional_totals.csv"), &self.regional_totals)?;
        write_portfolio(dir.join("portfolio.csv"), &self.portfolio)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rooftop_pv::interpolate_canonical_days;

    fn annual(region: &RegionSpec, o: Orientation) -> f64 {
        interpolate_canonical_days(&region_yields(region))[&o].total()
    }

    #[test]
    fn noon_geometry() {
        // equinox noon at the equator: sun at zenith, beam plus diffuse on a horizontal plane
        let poa = clear_sky_poa(0.0, 80, 12.0, 0.0, 180.0);
        let dni = 1353.0 * 0.7_f64.powf(1.0_f64.powf(0.678));
        assert!((poa - 1.1 * dni).abs() < 5.0, "{poa}");
        assert_eq!(clear_sky_poa(40.0, 172, 0.0, 30.0, 180.0), 0.0);
    }

    #[test]
    fn yields_are_plausible() {
        for r in &REGIONS {
            let flat = annual(r, Orientation::Flat);
            let north = annual(r, Orientation::North);
            assert!(flat > north && north > 0.0, "{}", r.name);
            assert!((900.0..2_000.0).contains(&flat), "{} {flat}", r.name);
            let days = &region_yields(r)[&Orientation::South];
            assert!(days.iter().all(|d| d[0] == 0.0 && d[23] == 0.0));
        }
        let east = annual(&REGIONS[1], Orientation::East);
        let west = annual(&REGIONS[1], Orientation::West);
        assert!((east - west).abs() < 0.02 * east);
    }

    #[test]
    fn mixed_roof_yield_near_national_average() {
        // national roof mix: flat 475, south/east/west 220 km² each
        let mean: f64 = REGIONS
            .iter()
            .map(|r| {
                let y = interpolate_canonical_days(&region_yields(r));
                let pitched: f64 = [Orientation::South, Orientation::East, Orientation::West]
                    .iter()
                    .map(|o| 220.0 * y[o].total())
                    .sum();
                (475.0 * y[&Orientation::Flat].total() + pitched) / 1_135.0
            })
            .sum::<f64>()
            / REGIONS.len() as f64;
        assert!((mean - 1_500.0).abs() <= 150.0, "{mean}");
    }

    #[test]
    fn generation_is_seeded() {
        let a = FixtureDataset::generate(FixtureSpec::default()).unwrap();
        let b = FixtureDataset::generate(FixtureSpec::default()).unwrap();
        assert_eq!(a.municipalities, b.municipalities);
        assert_eq!(a.portfolio, b.portfolio);
        let c = FixtureDataset::generate(FixtureSpec {
            seed: 8,
            ..FixtureSpec::default()
        })
        .unwrap();
        assert_ne!(a.municipalities, c.municipalities);
    }

    #[test]
    fn portfolio_proportions() {
        let d = FixtureDataset::generate(FixtureSpec::default()).unwrap();
        let demand: f64 = d.regional_totals.values().sum();
        let p = &d.portfolio;
        let ratio = p.annual_energy_mwh() / demand;
        // per-row energies; the table total row counts cogeneration differently
        let rows = 19.9 + 0.7 + 80.7 + 66.5 + 3.9 + 4.8 + 27.2;
        assert!((ratio - rows / 234.9).abs() < 1e-9, "{ratio}");
        assert!((p.manageable_budget_mwh() / demand - 27.9 / 234.9).abs() < 1e-9);
    }

    #[test]
    fn rejects_tiny_sets() {
        let spec = FixtureSpec {
            municipalities: 3,
            ..FixtureSpec::default()
        };
        assert!(FixtureDataset::generate(spec).is_err());
    }
}

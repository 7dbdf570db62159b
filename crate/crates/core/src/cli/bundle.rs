use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use crate::datamodel::{
    aggregate_small_municipalities, load_municipalities, load_portfolio, write_municipalities, write_portfolio,
    MunicipalitySet, Portfolio, Provenance,
};
use crate::demand::{load_profile, load_regional_totals, write_profile, write_regional_totals, LoadProfile};
use crate::error::{Error, Result};
use crate::rooftop_pv::{
    load_canonical_yields, load_rooftop_split, write_canonical_yields, write_rooftop_split, CanonicalYieldTable,
    PopulationBand, RooftopSplitTable,
};

pub const MUNICIPALITIES_FILE: &str = "municipalities.csv";
pub const LOAD_PROFILE_FILE: &str = "load_profile.csv";
pub const EV_PROFILE_FILE: &str = "ev_profile.csv";
pub const CANONICAL_YIELDS_FILE: &str = "canonical_yields.csv";
pub const ROOFTOP_SPLIT_FILE: &str = "rooftop_split.csv";
pub const REGIONAL_TOTALS_FILE: &str = "regional_totals.csv";
pub const PORTFOLIO_FILE: &str = "portfolio.csv";

/// All inputs of a study, as read from one data directory.
#[derive(Clone, Debug)]
pub struct Bundle {
    pub dir: PathBuf,
    pub municipalities: MunicipalitySet,
    pub load_profile: LoadProfile,
    pub ev_profile: LoadProfile,
    pub yields: CanonicalYieldTable,
    pub split: RooftopSplitTable,
    pub regional_totals: Option<BTreeMap<String, f64>>,
    pub portfolio: Option<Portfolio>,
}

fn optional<T>(path: &Path, load: impl FnOnce(&Path) -> Result<T>) -> Result<Option<T>> {
    if path.exists() {
        load(path).map(Some)
    } else {
        Ok(None)
    }
}

impl Bundle {
    /// Loads the required files and, when present, `regional_totals.csv`
    /// and `portfolio.csv`.
    pub fn load(dir: &Path) -> Result<Self> {
        let bundle = Self {
            dir: dir.to_path_buf(),
            municipalities: load_municipalities(dir.join(MUNICIPALITIES_FILE))?,
            load_profile: load_profile(dir.join(LOAD_PROFILE_FILE))?,
            ev_profile: load_profile(dir.join(EV_PROFILE_FILE))?,
            yields: load_canonical_yields(&dir.join(CANONICAL_YIELDS_FILE))?,
            split: load_rooftop_split(&dir.join(ROOFTOP_SPLIT_FILE))?,
            regional_totals: optional(&dir.join(REGIONAL_TOTALS_FILE), |p| load_regional_totals(p))?,
            portfolio: optional(&dir.join(PORTFOLIO_FILE), |p| load_portfolio(p))?,
        };
        bundle.validate()?;
        Ok(bundle)
    }

    /// Cross-file checks: every region has yields (and a total, when totals
    /// are given) and every (zone, band) in use has a split entry.
    pub fn validate(&self) -> Result<()> {
        let regions: BTreeSet<&str> = self
            .municipalities
            .entries()
            .iter()
            .map(|m| m.region.as_str())
            .collect();
        for region in &regions {
            self.yields.region(region)?;
            if let Some(totals) = &self.regional_totals {
                if !totals.contains_key(*region) {
                    return Err(Error::MissingRegionTotal((*region).to_owned()));
                }
            }
        }
        for m in self.municipalities.entries() {
            self.split.get(m.climate_zone, PopulationBand::of(m))?;
        }
        Ok(())
    }

    /// Files that were read, for the manifest.
    pub fn input_files(&self) -> Vec<PathBuf> {
        [
            MUNICIPALITIES_FILE,
            LOAD_PROFILE_FILE,
            EV_PROFILE_FILE,
            CANONICAL_YIELDS_FILE,
            ROOFTOP_SPLIT_FILE,
            REGIONAL_TOTALS_FILE,
            PORTFOLIO_FILE,
        ]
        .iter()
        .map(|f| self.dir.join(f))
        .filter(|p| p.exists())
        .collect()
    }

    /// Replaces sub-threshold villages by one virtual entity per province;
    /// sets that are already aggregated are left alone.
    pub fn aggregated(mut self, threshold: u64) -> Result<Self> {
        if self.municipalities.provenance() == Provenance::Raw {
            let before = self.municipalities.len();
            self.municipalities = aggregate_small_municipalities(&self.municipalities, threshold)?;
            log::info!("aggregation: {before} -> {} entities", self.municipalities.len());
        }
        Ok(self)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_municipalities(dir.join(MUNICIPALITIES_FILE), &self.municipalities)?;
        write_profile(dir.join(LOAD_PROFILE_FILE), &self.load_profile)?;
        write_profile(dir.join(EV_PROFILE_FILE), &self.ev_profile)?;
        write_canonical_yields(&dir.join(CANONICAL_YIELDS_FILE), &self.yields)?;
        write_rooftop_split(&dir.join(ROOFTOP_SPLIT_FILE), &self.split)?;
        if let Some(totals) = &self.regional_totals {
            write_regional_totals(dir.join(REGIONAL_TOTALS_FILE), totals)?;
        }
        if let Some(p) = &self.portfolio {
            write_portfolio(dir.join(PORTFOLIO_FILE), p)?;
        }
        Ok(())
    }
}

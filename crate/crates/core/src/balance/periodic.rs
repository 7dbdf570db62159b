use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::datamodel::{month_of_hour, HourlySeries};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Period {
    Month,
    Quarter,
    Year,
}

impl Period {
    fn index(self, hour: usize) -> usize {
        match self {
            Period::Month => month_of_hour(hour),
            Period::Quarter => month_of_hour(hour) / 3,
            Period::Year => 0,
        }
    }

    fn count(self) -> usize {
        match self {
            Period::Month => 12,
            Period::Quarter => 4,
            Period::Year => 1,
        }
    }

    fn label(self, index: usize) -> String {
        const MONTHS: [&str; 12] = [
            "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec",
        ];
        match self {
            Period::Month => MONTHS[index].to_owned(),
            Period::Quarter => format!("Q{}", index + 1),
            Period::Year => "year".to_owned(),
        }
    }
}

impl std::str::FromStr for Period {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "month" => Ok(Period::Month),
            "quarter" => Ok(Period::Quarter),
            "year" => Ok(Period::Year),
            other => Err(format!("unknown period `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BalanceStatus {
    Surplus,
    Deficit,
    Balanced,
}

impl BalanceStatus {
    /// Nets within 1e-9 of the larger magnitude count as balanced.
    pub fn of(demand_mwh: f64, production_mwh: f64) -> Self {
        let net = production_mwh - demand_mwh;
        if net.abs() <= 1e-9 * demand_mwh.max(production_mwh).max(1.0) {
            BalanceStatus::Balanced
        } else if net > 0.0 {
            BalanceStatus::Surplus
        } else {
            BalanceStatus::Deficit
        }
    }
}

impl fmt::Display for BalanceStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BalanceStatus::Surplus => "surplus",
            BalanceStatus::Deficit => "deficit",
            BalanceStatus::Balanced => "balanced",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodBalance {
    pub period: String,
    pub demand_mwh: f64,
    pub production_mwh: f64,
    /// production − demand.
    pub net_mwh: f64,
    pub status: BalanceStatus,
}

/// Net production per calendar period.
pub fn periodic_balance(demand: &HourlySeries, production: &HourlySeries, period: Period) -> Vec<PeriodBalance> {
    let mut sums = vec![(0.0, 0.0); period.count()];
    for (h, (d, p)) in demand.values().iter().zip(production.values()).enumerate() {
        let s = &mut sums[period.index(h)];
        s.0 += d;
        s.1 += p;
    }
    sums.into_iter()
        .enumerate()
        .map(|(i, (d, p))| PeriodBalance {
            period: period.label(i),
            demand_mwh: d,
            production_mwh: p,
            net_mwh: p - d,
            status: BalanceStatus::of(d, p),
        })
        .collect()
}

/// Cumulative (entity share, demand share) points, largest consumers first,
/// from (0, 0) to (1, 1).
pub fn lorenz_curve(demands: &BTreeMap<String, f64>) -> Result<Vec<(f64, f64)>> {
    let total: f64 = demands.values().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroEnergy {
            quantity: "municipal demand",
        });
    }
    let mut sorted: Vec<f64> = demands.values().copied().collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let n = sorted.len() as f64;
    let mut curve = Vec::with_capacity(sorted.len() + 1);
    curve.push((0.0, 0.0));
    let mut acc = 0.0;
    for (i, v) in sorted.iter().enumerate() {
        acc += v;
        curve.push(((i + 1) as f64 / n, acc / total));
    }
    if let Some(last) = curve.last_mut() {
        *last = (1.0, 1.0);
    }
    Ok(curve)
}

/// Smallest entity share whose demand share reaches `target`.
pub fn share_reaching(curve: &[(f64, f64)], target: f64) -> f64 {
    curve
        .iter()
        .find(|(_, y)| *y >= target - 1e-12)
        .map(|(x, _)| *x)
        .unwrap_or(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_series_balanced() {
        let d = HourlySeries::constant(2.0, "d");
        for p in [Period::Month, Period::Quarter, Period::Year] {
            let out = periodic_balance(&d, &d, p);
            assert!(out
                .iter()
                .all(|b| b.status == BalanceStatus::Balanced && b.net_mwh == 0.0));
        }
        assert_eq!(periodic_balance(&d, &d, Period::Month).len(), 12);
    }

    #[test]
    fn double_production_surplus() {
        let d = HourlySeries::from_fn("d", |h| 1.0 + (h % 7) as f64);
        let p = d.scaled(2.0);
        for b in periodic_balance(&d, &p, Period::Quarter) {
            assert_eq!(b.status, BalanceStatus::Surplus);
            assert!((b.net_mwh - b.demand_mwh).abs() < 1e-9);
        }
        let jan = &periodic_balance(&d, &p, Period::Month)[0];
        assert_eq!(jan.period, "Jan");
        let direct: f64 = d.values()[..31 * 24].iter().sum();
        assert!((jan.demand_mwh - direct).abs() < 1e-9);
    }

    #[test]
    fn lorenz_examples() {
        let equal: BTreeMap<String, f64> = (0..4).map(|i| (format!("m{i}"), 5.0)).collect();
        let c = lorenz_curve(&equal).unwrap();
        assert_eq!(c.len(), 5);
        for (x, y) in &c {
            assert!((x - y).abs() < 1e-12);
        }
        let mut one = BTreeMap::new();
        for i in 0..10 {
            one.insert(format!("m{i}"), if i == 3 { 7.0 } else { 0.0 });
        }
        let c = lorenz_curve(&one).unwrap();
        assert_eq!(c[1], (0.1, 1.0));
        assert_eq!(share_reaching(&c, 0.8), 0.1);
        assert!(lorenz_curve(&BTreeMap::from([("a".to_owned(), 0.0)])).is_err());
    }
}

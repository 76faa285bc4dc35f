use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use super::coverage::Period;
use super::index::{index_series, IndexPoint, IndexSeries};
use crate::error::{Error, Result};
use crate::ingest::{GeocodedListing, Listing};

/// Calendar quarter, `1..=4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Quarter {
    pub year: i32,
    pub quarter: u8,
}

impl Quarter {
    pub fn new(year: i32, quarter: u8) -> Result<Self> {
        if !(1..=4).contains(&quarter) {
            return Err(Error::InvalidArgument(format!("quarter {quarter} not in 1..=4")));
        }
        Ok(Quarter { year, quarter })
    }

    pub fn of(date: NaiveDate) -> Self {
        Quarter {
            year: date.year(),
            quarter: (date.month0() / 3 + 1) as u8,
        }
    }

    pub fn next(self) -> Self {
        if self.quarter == 4 {
            Quarter {
                year: self.year + 1,
                quarter: 1,
            }
        } else {
            Quarter {
                year: self.year,
                quarter: self.quarter + 1,
            }
        }
    }

    /// Every quarter from `self` through `last`, inclusive.
    pub fn through(self, last: Quarter) -> Vec<Quarter> {
        let mut out = Vec::new();
        let mut q = self;
        while q <= last {
            out.push(q);
            q = q.next();
        }
        out
    }
}

impl fmt::Display for Quarter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}Q{}", self.year, self.quarter)
    }
}

impl FromStr for Quarter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("expected a quarter like 2014Q2, got `{s}`"));
        let (y, q) = s.trim().split_once(['Q', 'q']).ok_or_else(bad)?;
        Quarter::new(y.parse().map_err(|_| bad())?, q.parse().map_err(|_| bad())?)
    }
}

/// Median, averaging the two central order statistics for even `n`.
/// Returns `None` for an empty input.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    })
}

/// Median monthly rent per area for listings with `bedrooms` (any when
/// `None`) in `period`. Areas without listings are omitted.
pub fn median_rent_by_area(
    records: &[GeocodedListing],
    bedrooms: Option<u32>,
    period: Period,
) -> BTreeMap<String, f64> {
    let mut by_area: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in records {
        if bedrooms.is_some_and(|b| b != r.listing.bedrooms) || !period.contains(r) {
            continue;
        }
        if let Some(rent) = r.listing.rent {
            by_area.entry(&r.centroid.area_code).or_default().push(rent);
        }
    }
    by_area
        .into_iter()
        .filter_map(|(area, rents)| median(&rents).map(|m| (area.to_string(), m)))
        .collect()
}

/// Bedroom strata 1, 2, 3 and 4+. Studios join the one-bedroom stratum.
pub fn bedroom_stratum(bedrooms: u32) -> u32 {
    bedrooms.clamp(1, 4)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RentIndex {
    /// Stratified median-log index with base-quarter stratum weights.
    pub adjusted: IndexSeries,
    /// Median of all listings, no composition adjustment.
    pub unadjusted: IndexSeries,
    pub base_weights: BTreeMap<u32, f64>,
}

/// Quarterly rent index. Within each quarter the median log rent of each
/// bedroom stratum is taken; strata are combined with fixed weights equal
/// to their shares of the base quarter. Quarters lacking some strata are
/// compared on the strata they share with the base, reweighted. Quarters
/// with no usable listings are omitted.
pub fn rent_index<'a, I>(records: I, quarters: &[Quarter], base: Quarter) -> Result<RentIndex>
where
    I: IntoIterator<Item = &'a Listing>,
{
    let mut cells: BTreeMap<(Quarter, u32), Vec<f64>> = BTreeMap::new();
    let mut all: BTreeMap<Quarter, Vec<f64>> = BTreeMap::new();
    for l in records {
        let (Some(start), Some(rent)) = (l.start_date, l.rent) else {
            continue;
        };
        if !(rent > 0.0) {
            continue;
        }
        let q = Quarter::of(start);
        if q != base && !quarters.contains(&q) {
            continue;
        }
        cells
            .entry((q, bedroom_stratum(l.bedrooms)))
            .or_default()
            .push(rent.ln());
        all.entry(q).or_default().push(rent);
    }

    let base_total = all.get(&base).map_or(0, Vec::len);
    if base_total == 0 {
        return Err(Error::MissingBase(format!("{base} has no listings")));
    }
    let stratum_median = |q: Quarter, s: u32| cells.get(&(q, s)).and_then(|v| median(v));
    let base_weights: BTreeMap<u32, f64> = (1..=4)
        .filter_map(|s| {
            cells
                .get(&(base, s))
                .map(|v| (s, v.len() as f64 / base_total as f64))
        })
        .collect();

    let mut adjusted = Vec::new();
    let mut ordered: Vec<Quarter> = quarters.to_vec();
    if !ordered.contains(&base) {
        ordered.push(base);
    }
    ordered.sort();
    ordered.dedup();
    for &q in &ordered {
        let (mut num, mut den) = (0.0, 0.0);
        for (&s, &w) in &base_weights {
            if let (Some(mq), Some(mb)) = (stratum_median(q, s), stratum_median(base, s)) {
                num += w * (mq - mb);
                den += w;
            }
        }
        if den > 0.0 {
            let index = if q == base { 100.0 } else { 100.0 * (num / den).exp() };
            let level: f64 = base_weights
                .iter()
                .filter_map(|(&s, &w)| stratum_median(q, s).map(|m| w * m))
                .sum();
            adjusted.push(IndexPoint {
                period: q.to_string(),
                raw: level.exp(),
                index,
            });
        }
    }

    let medians: BTreeMap<Quarter, f64> = ordered
        .iter()
        .filter_map(|q| all.get(q).and_then(|v| median(v)).map(|m| (*q, m)))
        .collect();
    let unadjusted = index_series(&medians, &base)?;

    Ok(RentIndex {
        adjusted: IndexSeries {
            base: base.to_string(),
            points: adjusted,
        },
        unadjusted,
        base_weights,
    })
}

use std::collections::BTreeMap;
use std::fmt::Display;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::round1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexPoint {
    pub period: String,
    pub raw: f64,
    /// `100 · raw / raw_base`, unrounded.
    pub index: f64,
}

impl IndexPoint {
    /// Index to one decimal place, as reported.
    pub fn reported(&self) -> f64 {
        round1(self.index)
    }
}

/// A series indexed to 100 at its base period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexSeries {
    pub base: String,
    pub points: Vec<IndexPoint>,
}

impl IndexSeries {
    pub fn get(&self, period: &str) -> Option<&IndexPoint> {
        self.points.iter().find(|p| p.period == period)
    }

    pub fn reported(&self) -> Vec<f64> {
        self.points.iter().map(IndexPoint::reported).collect()
    }
}

/// Indexes `values` to 100 at `base`.
pub fn index_series<K: Ord + Display>(values: &BTreeMap<K, f64>, base: &K) -> Result<IndexSeries> {
    let base_value = *values
        .get(base)
        .ok_or_else(|| Error::MissingBase(base.to_string()))?;
    if !(base_value != 0.0 && base_value.is_finite()) {
        return Err(Error::MissingBase(format!("{base} (zero total)")));
    }
    let points = values
        .iter()
        .map(|(k, &v)| IndexPoint {
            period: k.to_string(),
            raw: v,
            index: if k == base { 100.0 } else { 100.0 * v / base_value },
        })
        .collect();
    Ok(IndexSeries {
        base: base.to_string(),
        points,
    })
}

/// Yearly listing totals indexed to `base_year`.
pub fn listings_index(totals: &BTreeMap<i32, f64>, base_year: i32) -> Result<IndexSeries> {
    index_series(totals, &base_year)
}

/// Flow as a whole-number percentage of stock.
pub fn turnover_rate(stock: f64, flow: f64) -> Result<u32> {
    if !(stock > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "turnover needs positive stock, got {stock}"
        )));
    }
    if flow < 0.0 {
        return Err(Error::InvalidArgument(format!("negative flow {flow}")));
    }
    Ok((100.0 * flow / stock).round() as u32)
}

use std::collections::{BTreeMap, BTreeSet};

use chrono::Datelike;
use serde::{Deserialize, Serialize};

use super::rents::Quarter;
use crate::error::{Error, Result};
use crate::ingest::GeocodedListing;

/// Which listings to count. Listings are assigned to periods by start date.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Period {
    All,
    Year(i32),
    Quarter(Quarter),
}

impl Period {
    pub fn contains(&self, record: &GeocodedListing) -> bool {
        let Some(start) = record.listing.start_date else {
            return matches!(self, Period::All);
        };
        match self {
            Period::All => true,
            Period::Year(y) => start.year() == *y,
            Period::Quarter(q) => Quarter::of(start) == *q,
        }
    }
}

/// Listings per area within `period`. Every area in `areas` appears in the
/// result, with zero when it has no listings.
pub fn count_by_area(
    records: &[GeocodedListing],
    period: Period,
    areas: &BTreeSet<String>,
) -> BTreeMap<String, usize> {
    let mut counts: BTreeMap<String, usize> = areas.iter().map(|a| (a.clone(), 0)).collect();
    for r in records.iter().filter(|r| period.contains(r)) {
        *counts.entry(r.centroid.area_code.clone()).or_default() += 1;
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub r: f64,
    pub r_squared: f64,
    /// Number of paired areas.
    pub n: usize,
}

/// Pearson correlation over the areas present in both maps.
pub fn correlate(counts: &BTreeMap<String, f64>, reference: &BTreeMap<String, f64>) -> Result<Correlation> {
    let pairs: Vec<(f64, f64)> = counts
        .iter()
        .filter_map(|(k, &x)| reference.get(k).map(|&y| (x, y)))
        .collect();
    if pairs.len() < 3 {
        return Err(Error::UndefinedCorrelation(format!(
            "need at least 3 paired areas, found {}",
            pairs.len()
        )));
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in &pairs {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("zero variance".into()));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    Ok(Correlation {
        r,
        r_squared: r * r,
        n: pairs.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageRatios {
    /// `None` where the reference flow is zero or absent.
    pub per_area: BTreeMap<String, Option<f64>>,
    /// Σ listings / Σ flow over areas with a defined ratio.
    pub national: f64,
}

/// Listings relative to reference flow, per area and overall.
pub fn coverage_ratio(counts: &BTreeMap<String, f64>, flow: &BTreeMap<String, f64>) -> Result<CoverageRatios> {
    let mut per_area = BTreeMap::new();
    let (mut listings, mut movers) = (0.0, 0.0);
    for (area, &count) in counts {
        match flow.get(area) {
            Some(&f) if f > 0.0 => {
                per_area.insert(area.clone(), Some(count / f));
                listings += count;
                movers += f;
            }
            _ => {
                per_area.insert(area.clone(), None);
            }
        }
    }
    if movers <= 0.0 {
        return Err(Error::InvalidArgument(
            "national reference flow is zero".into(),
        ));
    }
    Ok(CoverageRatios {
        per_area,
        national: listings / movers,
    })
}

/// One point of a listings-vs-reference scatter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub x: f64,
    pub y: f64,
    pub area_code: String,
    pub year: i32,
}

/// Pairs reference values (x) with listing counts (y) for each area.
pub fn scatter_points(
    counts: &BTreeMap<String, usize>,
    reference: &BTreeMap<String, f64>,
    year: i32,
) -> Vec<ScatterPoint> {
    counts
        .iter()
        .filter_map(|(area, &c)| {
            reference.get(area).map(|&x| ScatterPoint {
                x,
                y: c as f64,
                area_code: area.clone(),
                year,
            })
        })
        .collect()
}

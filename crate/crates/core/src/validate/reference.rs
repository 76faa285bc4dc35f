use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaReference {
    /// Households renting privately.
    pub stock: f64,
    /// Households that moved in during the prior year.
    pub flow: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NationalReference {
    pub stock_thousands: f64,
    pub flow_thousands: f64,
    /// Optional listings total supplied alongside the survey figures.
    #[serde(default)]
    pub listings_thousands: Option<f64>,
}

/// Area-level and national reference measures of stock and flow.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSeries {
    pub areas: BTreeMap<String, AreaReference>,
    pub national: BTreeMap<i32, NationalReference>,
}

#[derive(Deserialize)]
struct AreaRow {
    area_code: String,
    stock: f64,
    flow: f64,
}

#[derive(Deserialize)]
struct NationalRow {
    year: i32,
    stock_thousands: f64,
    flow_thousands: f64,
    #[serde(default)]
    listings_thousands: Option<f64>,
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn row_error(path: &Path, row: usize, message: impl std::fmt::Display) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message: format!("row {row}: {message}"),
    }
}

impl ReferenceSeries {
    /// Reads `area_code,stock,flow`.
    pub fn load_areas(path: &Path) -> Result<BTreeMap<String, AreaReference>> {
        let mut out = BTreeMap::new();
        for (i, row) in reader(path)?.deserialize::<AreaRow>().enumerate() {
            let row = row.map_err(|e| row_error(path, i + 1, e))?;
            let r = AreaReference {
                stock: row.stock,
                flow: row.flow,
            };
            check_pair(r.stock, r.flow).map_err(|m| row_error(path, i + 1, m))?;
            out.insert(row.area_code, r);
        }
        Ok(out)
    }

    /// Reads `year,stock_thousands,flow_thousands[,listings_thousands]`.
    pub fn load_national(path: &Path) -> Result<BTreeMap<i32, NationalReference>> {
        let mut out = BTreeMap::new();
        for (i, row) in reader(path)?.deserialize::<NationalRow>().enumerate() {
            let row = row.map_err(|e| row_error(path, i + 1, e))?;
            check_pair(row.stock_thousands, row.flow_thousands)
                .map_err(|m| row_error(path, i + 1, m))?;
            out.insert(
                row.year,
                NationalReference {
                    stock_thousands: row.stock_thousands,
                    flow_thousands: row.flow_thousands,
                    listings_thousands: row.listings_thousands,
                },
            );
        }
        Ok(out)
    }

    pub fn stock_by_area(&self) -> BTreeMap<String, f64> {
        self.areas.iter().map(|(k, v)| (k.clone(), v.stock)).collect()
    }

    pub fn flow_by_area(&self) -> BTreeMap<String, f64> {
        self.areas.iter().map(|(k, v)| (k.clone(), v.flow)).collect()
    }
}

fn check_pair(stock: f64, flow: f64) -> std::result::Result<(), String> {
    if !(stock >= 0.0 && flow >= 0.0) {
        return Err(format!("negative or missing count (stock {stock}, flow {flow})"));
    }
    if flow > stock {
        return Err(format!("flow {flow} exceeds stock {stock}"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn loads_both_levels() {
        let mut a = tempfile::NamedTempFile::new().unwrap();
        write!(a, "area_code,stock,flow\nS1,1000,300\nS2,500,120\n").unwrap();
        let areas = ReferenceSeries::load_areas(a.path()).unwrap();
        assert_eq!(areas["S2"].flow, 120.0);

        let mut n = tempfile::NamedTempFile::new().unwrap();
        write!(n, "year,stock_thousands,flow_thousands\n2012,4426,1265\n").unwrap();
        let national = ReferenceSeries::load_national(n.path()).unwrap();
        assert_eq!(national[&2012].listings_thousands, None);
    }

    #[test]
    fn flow_above_stock_rejected() {
        let mut a = tempfile::NamedTempFile::new().unwrap();
        write!(a, "area_code,stock,flow\nS1,100,300\n").unwrap();
        assert!(ReferenceSeries::load_areas(a.path()).is_err());
    }
}

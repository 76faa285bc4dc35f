use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::path::Path;

use serde::Deserialize;

use super::listing::{normalize_postcode, Centroid};
use crate::error::{Error, Result};

/// Great Britain bounding box, degrees.
pub const LATITUDE_RANGE: (f64, f64) = (49.0, 61.0);
pub const LONGITUDE_RANGE: (f64, f64) = (-9.0, 2.0);

/// Postcode → centroid lookup.
#[derive(Debug, Clone, Default)]
pub struct PostcodeIndex {
    entries: HashMap<String, Centroid>,
}

#[derive(Deserialize)]
struct IndexRow {
    postcode: String,
    latitude: f64,
    longitude: f64,
    area_code: String,
    deprivation: f64,
}

impl PostcodeIndex {
    /// Builds an index, rejecting entries outside the GB bounding box or
    /// with deprivation outside `[0, 1]`.
    pub fn from_entries<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, Centroid)>,
    {
        let mut index = PostcodeIndex::default();
        for (postcode, c) in entries {
            check_centroid(&postcode, &c).map_err(Error::InvalidArgument)?;
            index.entries.insert(normalize_postcode(&postcode), c);
        }
        Ok(index)
    }

    /// Reads `postcode,latitude,longitude,area_code,deprivation`.
    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(file);
        let mut index = PostcodeIndex::default();
        for (i, row) in reader.deserialize::<IndexRow>().enumerate() {
            let fail = |message: String| Error::Format {
                path: path.to_path_buf(),
                message: format!("row {}: {message}", i + 1),
            };
            let row = row.map_err(|e| fail(e.to_string()))?;
            let centroid = Centroid {
                latitude: row.latitude,
                longitude: row.longitude,
                area_code: row.area_code,
                deprivation: row.deprivation,
            };
            check_centroid(&row.postcode, &centroid).map_err(fail)?;
            index
                .entries
                .insert(normalize_postcode(&row.postcode), centroid);
        }
        Ok(index)
    }

    pub fn get(&self, postcode: &str) -> Option<&Centroid> {
        self.entries.get(postcode)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Every area code in the index, sorted.
    pub fn areas(&self) -> BTreeSet<String> {
        self.entries.values().map(|c| c.area_code.clone()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Centroid)> {
        self.entries.iter()
    }
}

fn check_centroid(postcode: &str, c: &Centroid) -> std::result::Result<(), String> {
    let in_range = |v: f64, (lo, hi): (f64, f64)| v.is_finite() && v >= lo && v <= hi;
    if !in_range(c.latitude, LATITUDE_RANGE) || !in_range(c.longitude, LONGITUDE_RANGE) {
        return Err(format!(
            "{postcode}: centroid ({}, {}) outside Great Britain",
            c.latitude, c.longitude
        ));
    }
    if !in_range(c.deprivation, (0.0, 1.0)) {
        return Err(format!(
            "{postcode}: deprivation {} not a proportion",
            c.deprivation
        ));
    }
    Ok(())
}

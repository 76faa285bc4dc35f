use std::fs::File;
use std::io::Write;
use std::path::Path;

use super::listing::{normalize_postcode, Centroid, GeocodedListing, Listing};
use super::parse::{parse_listings, ListingFormat, LISTING_COLUMNS};
use crate::error::{Error, Result};

/// Listing columns followed by the geocoded attributes.
pub const CLEAN_COLUMNS: [&str; 11] = [
    "listing_id",
    "start_date",
    "end_date",
    "postcode",
    "rent",
    "bedrooms",
    "property_type",
    "latitude",
    "longitude",
    "area_code",
    "deprivation",
];

fn listing_fields(l: &Listing) -> [String; 7] {
    let date = |d: Option<chrono::NaiveDate>| d.map(|d| d.format("%Y-%m-%d").to_string()).unwrap_or_default();
    [
        l.listing_id.clone(),
        date(l.start_date),
        date(l.end_date),
        l.postcode.clone(),
        // shortest round-trip representation keeps rents bit-exact
        l.rent.map(|r| r.to_string()).unwrap_or_default(),
        l.bedrooms.to_string(),
        l.property_type.to_string(),
    ]
}

fn create(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn finish(path: &Path, w: csv::Writer<File>) -> Result<()> {
    let mut file = w
        .into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?;
    file.flush().map_err(|e| Error::io(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Writes listings in the raw input schema.
pub fn write_listings(path: &Path, records: &[Listing]) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(LISTING_COLUMNS).map_err(|e| csv_err(path, e))?;
    for l in records {
        w.write_record(listing_fields(l)).map_err(|e| csv_err(path, e))?;
    }
    finish(path, w)
}

/// Writes cleaned, geocoded listings. The file is also a valid raw listings
/// file (extra columns are ignored on input).
pub fn write_clean_listings(path: &Path, records: &[GeocodedListing]) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(CLEAN_COLUMNS).map_err(|e| csv_err(path, e))?;
    for r in records {
        let c = &r.centroid;
        let mut fields = listing_fields(&r.listing).to_vec();
        fields.extend([
            c.latitude.to_string(),
            c.longitude.to_string(),
            c.area_code.clone(),
            c.deprivation.to_string(),
        ]);
        w.write_record(&fields).map_err(|e| csv_err(path, e))?;
    }
    finish(path, w)
}

/// Reads a file produced by [`write_clean_listings`]. Any malformed row is
/// an error here: the file is expected to be pipeline output.
pub fn read_clean_listings(path: &Path) -> Result<Vec<GeocodedListing>> {
    let parsed = parse_listings(path, ListingFormat::Delimited)?;
    if let Some(bad) = parsed.malformed.first() {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: format!("row {}: {}", bad.row, bad.reason),
        });
    }
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Format {
            path: path.to_path_buf(),
            message: format!("missing column `{name}`; not a cleaned listings file"),
        })
    };
    let (lat, lon, area, dep) = (col("latitude")?, col("longitude")?, col("area_code")?, col("deprivation")?);
    let mut out = Vec::with_capacity(parsed.records.len());
    for (i, (record, listing)) in reader.records().zip(parsed.records).enumerate() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let num = |pos: usize| -> Result<f64> {
            record
                .get(pos)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Error::Format {
                    path: path.to_path_buf(),
                    message: format!("row {}: bad geocode field `{}`", i + 1, &headers[pos]),
                })
        };
        out.push(GeocodedListing {
            centroid: Centroid {
                latitude: num(lat)?,
                longitude: num(lon)?,
                area_code: record.get(area).unwrap_or_default().to_owned(),
                deprivation: num(dep)?,
            },
            listing: Listing {
                postcode: normalize_postcode(&listing.postcode),
                ..listing
            },
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::PropertyType;
    use chrono::NaiveDate;

    #[test]
    fn clean_file_round_trip() {
        let rec = GeocodedListing {
            listing: Listing {
                listing_id: "x1".into(),
                start_date: NaiveDate::from_ymd_opt(2015, 7, 2),
                end_date: NaiveDate::from_ymd_opt(2015, 8, 1),
                postcode: "G12 8QQ".into(),
                rent: Some(std::f64::consts::PI * 200.0),
                bedrooms: 2,
                property_type: PropertyType::SemiDetached,
            },
            centroid: Centroid {
                latitude: 55.87,
                longitude: -4.29,
                area_code: "S12000046".into(),
                deprivation: 0.125,
            },
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("clean.csv");
        write_clean_listings(&path, std::slice::from_ref(&rec)).unwrap();
        let back = read_clean_listings(&path).unwrap();
        assert_eq!(back, vec![rec]);
    }
}

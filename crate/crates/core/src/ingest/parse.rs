use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::listing::{normalize_postcode, Listing, PropertyType};
use crate::error::{Error, Result};

pub const LISTING_COLUMNS: [&str; 7] = [
    "listing_id",
    "start_date",
    "end_date",
    "postcode",
    "rent",
    "bedrooms",
    "property_type",
];

const WEEKS_PER_MONTH: f64 = 52.0 / 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ListingFormat {
    Delimited,
    JsonLines,
}

impl ListingFormat {
    /// `.jsonl` / `.ndjson` files are JSON lines, anything else delimited.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl" | "ndjson") => ListingFormat::JsonLines,
            _ => ListingFormat::Delimited,
        }
    }
}

/// A row the parser could not turn into a [`Listing`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MalformedRow {
    /// 1-based data row number (the header is not counted).
    pub row: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedListings {
    pub records: Vec<Listing>,
    pub malformed: Vec<MalformedRow>,
}

/// Reads a listings file without validating it. Row-level problems are
/// collected in `malformed`; only an unreadable file or a missing header
/// column is fatal.
pub fn parse_listings(path: &Path, format: ListingFormat) -> Result<ParsedListings> {
    match format {
        ListingFormat::Delimited => parse_delimited(path),
        ListingFormat::JsonLines => parse_json_lines(path),
    }
}

fn parse_delimited(path: &Path) -> Result<ParsedListings> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut out = ParsedListings::default();
    let headers = match reader.headers() {
        Ok(h) => h.clone(),
        Err(e) => return Err(format_error(path, e.to_string())),
    };
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Ok(out);
    }
    let columns: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h, i)).collect();
    let index = |name: &str| columns.get(name).copied();
    let mut positions = Vec::with_capacity(LISTING_COLUMNS.len());
    for name in LISTING_COLUMNS {
        positions.push(index(name).ok_or_else(|| {
            format_error(path, format!("missing column `{name}` in header"))
        })?);
    }
    let period = index("rent_period");

    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                out.malformed.push(MalformedRow {
                    row,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let field = |pos: usize| record.get(pos).map(str::to_owned);
        if positions.iter().any(|&p| p >= record.len()) {
            out.malformed.push(MalformedRow {
                row,
                reason: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
            continue;
        }
        let raw = RawFields {
            values: positions.iter().map(|&p| field(p)).collect(),
            rent_period: period.and_then(field),
        };
        match raw.into_listing() {
            Ok(l) => out.records.push(l),
            Err(reason) => out.malformed.push(MalformedRow { row, reason }),
        }
    }
    Ok(out)
}

fn parse_json_lines(path: &Path) -> Result<ParsedListings> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = ParsedListings::default();
    let mut row = 0;
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        row += 1;
        let object: serde_json::Map<String, serde_json::Value> = match serde_json::from_str(&line)
        {
            Ok(o) => o,
            Err(e) => {
                out.malformed.push(MalformedRow {
                    row,
                    reason: format!("invalid JSON object: {e}"),
                });
                continue;
            }
        };
        let get = |name: &str| match object.get(name) {
            None | Some(serde_json::Value::Null) => None,
            Some(serde_json::Value::String(s)) => Some(s.trim().to_owned()),
            Some(other) => Some(other.to_string()),
        };
        let missing: Vec<&str> = LISTING_COLUMNS
            .iter()
            .copied()
            .filter(|c| !object.contains_key(*c))
            .collect();
        if !missing.is_empty() {
            out.malformed.push(MalformedRow {
                row,
                reason: format!("missing fields {}", missing.join(", ")),
            });
            continue;
        }
        let raw = RawFields {
            values: LISTING_COLUMNS.iter().map(|c| get(c)).collect(),
            rent_period: get("rent_period"),
        };
        match raw.into_listing() {
            Ok(l) => out.records.push(l),
            Err(reason) => out.malformed.push(MalformedRow { row, reason }),
        }
    }
    Ok(out)
}

fn format_error(path: &Path, message: String) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message,
    }
}

/// Field values in [`LISTING_COLUMNS`] order; `None` and `""` both mean
/// missing.
struct RawFields {
    values: Vec<Option<String>>,
    rent_period: Option<String>,
}

impl RawFields {
    fn get(&self, i: usize) -> Option<&str> {
        self.values[i].as_deref().filter(|s| !s.is_empty())
    }

    fn into_listing(self) -> std::result::Result<Listing, String> {
        let date = |i: usize| -> std::result::Result<Option<NaiveDate>, String> {
            self.get(i)
                .map(|s| {
                    NaiveDate::parse_from_str(s, "%Y-%m-%d")
                        .map_err(|_| format!("{}: invalid date `{s}`", LISTING_COLUMNS[i]))
                })
                .transpose()
        };
        let start_date = date(1)?;
        let end_date = date(2)?;
        let mut rent = self
            .get(4)
            .map(|s| match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(format!("rent: not a number `{s}`")),
            })
            .transpose()?;
        match self.rent_period.as_deref().map(|s| s.trim().to_ascii_lowercase()) {
            None => {}
            Some(p) if matches!(p.as_str(), "" | "pcm" | "month" | "monthly") => {}
            Some(p) if matches!(p.as_str(), "pw" | "week" | "weekly") => {
                rent = rent.map(|r| r * WEEKS_PER_MONTH);
            }
            Some(p) => return Err(format!("rent_period: unknown period `{p}`")),
        }
        let bedrooms = match self.get(5) {
            Some(s) => s
                .parse::<u32>()
                .map_err(|_| format!("bedrooms: not a count `{s}`"))?,
            None => return Err("bedrooms: missing".into()),
        };
        let property_type = self
            .get(6)
            .map(|s| s.parse().unwrap_or(PropertyType::Other))
            .unwrap_or(PropertyType::Other);
        Ok(Listing {
            listing_id: self.get(0).unwrap_or_default().to_owned(),
            start_date,
            end_date,
            postcode: normalize_postcode(self.get(3).unwrap_or_default()),
            rent,
            bedrooms,
            property_type,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(content: &str, suffix: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(suffix).tempfile().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    const HEADER: &str = "listing_id,start_date,end_date,postcode,rent,bedrooms,property_type\n";

    #[test]
    fn three_good_rows() {
        let f = write(
            &format!(
                "{HEADER}a,2014-03-01,2014-03-20,g12 8qq,650,2,flat\n\
                 b,2014-04-01,,G1 1AA,700,1,terraced\n\
                 c,,,G2 2BB,,3,\n"
            ),
            ".csv",
        );
        let parsed = parse_listings(f.path(), ListingFormat::Delimited).unwrap();
        assert_eq!(parsed.records.len(), 3);
        assert!(parsed.malformed.is_empty());
        assert_eq!(parsed.records[0].postcode, "G12 8QQ");
        assert_eq!(parsed.records[1].end_date, None);
        assert_eq!(parsed.records[2].rent, None);
        assert_eq!(parsed.records[2].property_type, PropertyType::Other);
    }

    #[test]
    fn non_numeric_rent_is_flagged() {
        let f = write(
            &format!("{HEADER}a,2014-03-01,2014-03-20,G12 8QQ,650,2,flat\nb,2014-03-01,2014-03-20,G12 8QQ,lots,2,flat\n"),
            ".csv",
        );
        let parsed = parse_listings(f.path(), ListingFormat::Delimited).unwrap();
        assert_eq!(parsed.records.len(), 1);
        assert_eq!(parsed.malformed.len(), 1);
        assert_eq!(parsed.malformed[0].row, 2);
        assert!(parsed.malformed[0].reason.contains("rent"));
    }

    #[test]
    fn empty_file() {
        let f = write("", ".csv");
        let parsed = parse_listings(f.path(), ListingFormat::Delimited).unwrap();
        assert!(parsed.records.is_empty());
        assert!(parsed.malformed.is_empty());
        let f = write("", ".jsonl");
        let parsed = parse_listings(f.path(), ListingFormat::JsonLines).unwrap();
        assert!(parsed.records.is_empty());
    }

    #[test]
    fn missing_file_is_fatal() {
        let err = parse_listings(Path::new("/nonexistent/listings.csv"), ListingFormat::Delimited)
            .unwrap_err();
        assert!(err.to_string().contains("/nonexistent/listings.csv"));
    }

    #[test]
    fn missing_header_column_is_fatal() {
        let f = write("listing_id,start_date\na,2014-01-01\n", ".csv");
        assert!(parse_listings(f.path(), ListingFormat::Delimited).is_err());
    }

    #[test]
    fn weekly_rents_are_converted() {
        let f = write(
            "listing_id,start_date,end_date,postcode,rent,bedrooms,property_type,rent_period\n\
             a,2014-03-01,2014-03-20,G12 8QQ,150,2,flat,pw\n\
             b,2014-03-01,2014-03-20,G12 8QQ,650,2,flat,pcm\n",
            ".csv",
        );
        let parsed = parse_listings(f.path(), ListingFormat::Delimited).unwrap();
        assert!((parsed.records[0].rent.unwrap() - 650.0).abs() < 1e-9);
        assert_eq!(parsed.records[1].rent, Some(650.0));
    }

    #[test]
    fn json_lines_variant() {
        let f = write(
            r#"{"listing_id":"a","start_date":"2014-03-01","end_date":"2014-03-20","postcode":"G12 8QQ","rent":650,"bedrooms":2,"property_type":"flat"}
{"listing_id":"b","start_date":null,"end_date":"2014-03-20","postcode":"G12 8QQ","rent":"x","bedrooms":2,"property_type":"flat"}
not json
"#,
            ".jsonl",
        );
        assert_eq!(ListingFormat::from_path(f.path()), ListingFormat::JsonLines);
        let parsed = parse_listings(f.path(), ListingFormat::JsonLines).unwrap();
        assert_eq!(parsed.records.len(), 1);
        assert_eq!(parsed.records[0].rent, Some(650.0));
        assert_eq!(
            parsed.malformed.iter().map(|m| m.row).collect::<Vec<_>>(),
            vec![2, 3]
        );
    }
}

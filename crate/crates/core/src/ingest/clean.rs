use std::collections::HashSet;
use std::path::Path;

use chrono::{Datelike, NaiveDate};

use super::listing::{is_valid_postcode, GeocodedListing, Listing};
use super::parse::{parse_listings, ListingFormat, MalformedRow};
use super::postcode::PostcodeIndex;
use super::report::{CleanReport, Exclusion};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Valid,
    MissingDates,
    Invalid,
}

#[derive(Hash, PartialEq, Eq)]
struct DedupKey<'a> {
    start: Option<NaiveDate>,
    end: Option<NaiveDate>,
    postcode: &'a str,
    rent: Option<u64>,
}

impl<'a> DedupKey<'a> {
    fn of(l: &'a Listing) -> Self {
        DedupKey {
            start: l.start_date,
            end: l.end_date,
            postcode: &l.postcode,
            // +0.0 and -0.0 compare equal as rents
            rent: l.rent.map(|r| (r + 0.0).to_bits()),
        }
    }
}

/// Splits off records repeating an earlier record's
/// (start_date, end_date, postcode, rent). The first occurrence in input
/// order is kept.
fn split_duplicates(records: Vec<Listing>) -> (Vec<Listing>, Vec<Listing>) {
    let mut kept = Vec::with_capacity(records.len());
    let mut dropped = Vec::new();
    {
        let mut seen: HashSet<DedupKey<'_>> = HashSet::with_capacity(records.len());
        let mut is_dup = Vec::with_capacity(records.len());
        for r in &records {
            is_dup.push(!seen.insert(DedupKey::of(r)));
        }
        drop(seen);
        for (r, dup) in records.into_iter().zip(is_dup) {
            if dup {
                dropped.push(r);
            } else {
                kept.push(r);
            }
        }
    }
    (kept, dropped)
}

/// Removes duplicate records, returning the survivors and the number removed.
pub fn deduplicate(records: Vec<Listing>) -> (Vec<Listing>, usize) {
    let (kept, dropped) = split_duplicates(records);
    (kept, dropped.len())
}

/// Date, rent and postcode checks. Missing dates take precedence over other
/// defects.
pub fn validate_record(record: &Listing) -> Classification {
    let (Some(start), Some(end)) = (record.start_date, record.end_date) else {
        return Classification::MissingDates;
    };
    let rent_ok = record.rent.is_some_and(|r| r > 0.0 && r.is_finite());
    if start > end || !rent_ok || !is_valid_postcode(&record.postcode) {
        return Classification::Invalid;
    }
    Classification::Valid
}

/// Attaches centroids; records whose postcode is not in the index are
/// dropped and counted.
pub fn geocode(records: Vec<Listing>, index: &PostcodeIndex) -> Result<(Vec<GeocodedListing>, usize)> {
    let (hits, misses) = split_geocoded(records, index)?;
    Ok((hits, misses.len()))
}

fn split_geocoded(
    records: Vec<Listing>,
    index: &PostcodeIndex,
) -> Result<(Vec<GeocodedListing>, Vec<Listing>)> {
    if index.is_empty() {
        return Err(Error::Config("postcode index is empty".into()));
    }
    let mut hits = Vec::with_capacity(records.len());
    let mut misses = Vec::new();
    for listing in records {
        match index.get(&listing.postcode) {
            Some(c) => hits.push(GeocodedListing {
                centroid: c.clone(),
                listing,
            }),
            None => misses.push(listing),
        }
    }
    Ok((hits, misses))
}

fn start_year(l: &Listing) -> Option<i32> {
    l.start_date.map(|d| d.year())
}

/// Runs dedup → date/value validation → geocoding over parsed records.
/// Every input record lands in exactly one report category.
pub fn clean_records(
    records: Vec<Listing>,
    index: &PostcodeIndex,
) -> Result<(Vec<GeocodedListing>, CleanReport)> {
    if index.is_empty() {
        return Err(Error::Config("postcode index is empty".into()));
    }
    let mut report = CleanReport::default();
    let (unique, duplicates) = split_duplicates(records);
    for d in &duplicates {
        report.record_exclusion(Exclusion::Duplicated, start_year(d));
    }
    let mut valid = Vec::with_capacity(unique.len());
    for r in unique {
        match validate_record(&r) {
            Classification::Valid => valid.push(r),
            Classification::MissingDates => {
                report.record_exclusion(Exclusion::MissingDates, start_year(&r))
            }
            Classification::Invalid => report.record_exclusion(Exclusion::Invalid, start_year(&r)),
        }
    }
    let (geocoded, misses) = split_geocoded(valid, index)?;
    for m in &misses {
        report.record_exclusion(Exclusion::Invalid, start_year(m));
    }
    for _ in &geocoded {
        report.record_included();
    }
    Ok((geocoded, report))
}

#[derive(Debug, Clone)]
pub struct CleanOutput {
    pub records: Vec<GeocodedListing>,
    pub report: CleanReport,
    pub malformed: Vec<MalformedRow>,
}

/// Parses a listings file and cleans it against `index`.
pub fn clean_pipeline(path: &Path, format: ListingFormat, index: &PostcodeIndex) -> Result<CleanOutput> {
    let parsed = parse_listings(path, format)?;
    let (records, mut report) = clean_records(parsed.records, index)?;
    report.malformed = parsed.malformed.len();
    Ok(CleanOutput {
        records,
        report,
        malformed: parsed.malformed,
    })
}

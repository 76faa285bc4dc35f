//! Listing ingestion: parsing raw advert files, deduplication, validity
//! checks and postcode geocoding, with an audit of every exclusion.

mod clean;
mod listing;
mod output;
mod parse;
mod postcode;
mod report;

pub use clean::{
    clean_pipeline, clean_records, deduplicate, geocode, validate_record, Classification,
    CleanOutput,
};
pub use listing::{
    is_valid_postcode, normalize_postcode, Centroid, GeocodedListing, Listing, PropertyType,
};
pub use output::{read_clean_listings, write_clean_listings, write_listings, CLEAN_COLUMNS};
pub use parse::{parse_listings, ListingFormat, MalformedRow, ParsedListings, LISTING_COLUMNS};
pub use postcode::{PostcodeIndex, LATITUDE_RANGE, LONGITUDE_RANGE};
pub use report::{round1, CleanReport, Exclusion, Percentages, YearCounts};

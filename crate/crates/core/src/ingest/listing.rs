use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use chrono::NaiveDate;
use regex::Regex;
use serde::{Deserialize, Serialize};

/// One rental advert. Rent is per calendar month.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Listing {
    pub listing_id: String,
    pub start_date: Option<NaiveDate>,
    pub end_date: Option<NaiveDate>,
    /// Normalized; see [`normalize_postcode`].
    pub postcode: String,
    pub rent: Option<f64>,
    pub bedrooms: u32,
    pub property_type: PropertyType,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropertyType {
    Flat,
    Terraced,
    SemiDetached,
    Detached,
    Other,
}

impl PropertyType {
    pub fn as_str(self) -> &'static str {
        match self {
            PropertyType::Flat => "flat",
            PropertyType::Terraced => "terraced",
            PropertyType::SemiDetached => "semi_detached",
            PropertyType::Detached => "detached",
            PropertyType::Other => "other",
        }
    }
}

impl fmt::Display for PropertyType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PropertyType {
    type Err = String;

    /// Unrecognised labels map to `Other`; only the empty string is an error.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        Ok(match key.as_str() {
            "" => return Err("empty property type".into()),
            "flat" | "flats" | "apartment" | "maisonette" => PropertyType::Flat,
            "terraced" | "terrace" | "terraced_house" | "end_terrace" => PropertyType::Terraced,
            "semi_detached" | "semi" | "semi_detached_house" => PropertyType::SemiDetached,
            "detached" | "detached_house" => PropertyType::Detached,
            _ => PropertyType::Other,
        })
    }
}

/// Geocoded attributes attached from the postcode index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Centroid {
    pub latitude: f64,
    pub longitude: f64,
    pub area_code: String,
    pub deprivation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeocodedListing {
    #[serde(flatten)]
    pub listing: Listing,
    #[serde(flatten)]
    pub centroid: Centroid,
}

static POSTCODE_SHAPE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^[A-Z]{1,2}[0-9][0-9A-Z]? [0-9][A-Z]{2}$").unwrap());

/// Uppercases and collapses internal whitespace to a single space. A code
/// written without a space gets one before the three-character inward part.
pub fn normalize_postcode(raw: &str) -> String {
    let upper = raw.to_ascii_uppercase();
    let parts: Vec<&str> = upper.split_whitespace().collect();
    let joined = parts.join(" ");
    if parts.len() == 1 && (5..=7).contains(&joined.len()) && joined.is_ascii() {
        let split = joined.len() - 3;
        return format!("{} {}", &joined[..split], &joined[split..]);
    }
    joined
}

/// UK postcode shape `A(A)N(N|A) NAA` on an already normalized code.
pub fn is_valid_postcode(postcode: &str) -> bool {
    POSTCODE_SHAPE.is_match(postcode)
}

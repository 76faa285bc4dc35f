use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use super::Covariate;
use crate::error::{Error, Result};
use crate::ingest::{GeocodedListing, PropertyType};

/// Mean Earth radius used for great-circle distances.
pub const EARTH_RADIUS_MILES: f64 = 3958.761;

/// One advert prepared for modelling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRow {
    /// Natural log of the monthly rent.
    pub logprice: f64,
    pub beds: u32,
    pub deprivation: f64,
    /// Calendar year plus the elapsed fraction of that year.
    pub year: f64,
    /// Day of year, 1-based.
    pub doy: u32,
    pub longitude: f64,
    pub latitude: f64,
    pub property_type: PropertyType,
}

impl ModelRow {
    pub fn covariate(&self, c: Covariate) -> f64 {
        match c {
            Covariate::Beds => self.beds as f64,
            Covariate::Deprivation => self.deprivation,
            Covariate::Year => self.year,
            Covariate::Doy => self.doy as f64,
            Covariate::Longitude => self.longitude,
            Covariate::Latitude => self.latitude,
        }
    }
}

/// Decimal year and day of year for a date.
pub fn decimal_year(date: NaiveDate) -> (f64, u32) {
    let doy = date.ordinal();
    let days = if date.leap_year() { 366.0 } else { 365.0 };
    (date.year() as f64 + (doy - 1) as f64 / days, doy)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivedRows {
    pub rows: Vec<ModelRow>,
    /// Records dropped for a missing start date or a non-positive rent.
    pub excluded: usize,
}

pub fn derive_rows(records: &[GeocodedListing]) -> DerivedRows {
    let mut rows = Vec::with_capacity(records.len());
    let mut excluded = 0;
    for r in records {
        let (Some(start), Some(rent)) = (r.listing.start_date, r.listing.rent) else {
            excluded += 1;
            continue;
        };
        if !(rent > 0.0 && rent.is_finite()) {
            excluded += 1;
            continue;
        }
        let (year, doy) = decimal_year(start);
        rows.push(ModelRow {
            logprice: rent.ln(),
            beds: r.listing.bedrooms,
            deprivation: r.centroid.deprivation,
            year,
            doy,
            longitude: r.centroid.longitude,
            latitude: r.centroid.latitude,
            property_type: r.listing.property_type,
        });
    }
    DerivedRows { rows, excluded }
}

/// Great-circle distance in miles by the haversine formula.
pub fn haversine_miles(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_MILES * a.sqrt().min(1.0).asin()
}

/// Keeps rows within `radius` miles of `center` (latitude, longitude) and,
/// when given, of one property type.
pub fn spatial_filter(
    rows: &[ModelRow],
    center: (f64, f64),
    radius: f64,
    property_type: Option<PropertyType>,
) -> Result<Vec<ModelRow>> {
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    Ok(rows
        .iter()
        .filter(|r| property_type.is_none_or(|t| r.property_type == t))
        .filter(|r| haversine_miles(center.0, center.1, r.latitude, r.longitude) <= radius)
        .cloned()
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{Centroid, Listing};

    fn geocoded(date: &str, rent: f64) -> GeocodedListing {
        let d = NaiveDate::parse_from_str(date, "%Y-%m-%d").unwrap();
        GeocodedListing {
            listing: Listing {
                listing_id: "x".into(),
                start_date: Some(d),
                end_date: Some(d),
                postcode: "G1 1AA".into(),
                rent: Some(rent),
                bedrooms: 2,
                property_type: PropertyType::Flat,
            },
            centroid: Centroid {
                latitude: 55.86,
                longitude: -4.25,
                area_code: "S1".into(),
                deprivation: 0.3,
            },
        }
    }

    #[test]
    fn log_rent_and_calendar() {
        let d = derive_rows(&[geocoded("2014-01-01", 1000.0), geocoded("2015-07-02", 650.0)]);
        assert_eq!(d.excluded, 0);
        assert!((d.rows[0].logprice - 6.907_755_278_982_137).abs() < 1e-12);
        assert_eq!((d.rows[0].doy, d.rows[0].year), (1, 2014.0));
        // Jan has 31 days, Feb 28, ... 1 July is day 182 in 2015
        let days_before_july: u32 = [31, 28, 31, 30, 31, 30].iter().sum();
        assert_eq!(d.rows[1].doy, days_before_july + 2);
        assert!((d.rows[1].year - (2015.0 + 182.0 / 365.0)).abs() < 1e-12);
    }

    #[test]
    fn leap_year_fraction() {
        let (y, doy) = decimal_year(NaiveDate::from_ymd_opt(2016, 12, 31).unwrap());
        assert_eq!(doy, 366);
        assert!((y - (2016.0 + 365.0 / 366.0)).abs() < 1e-12);
    }

    #[test]
    fn bad_rents_excluded() {
        let mut g = geocoded("2014-03-01", 0.0);
        let d = derive_rows(&[g.clone(), geocoded("2014-03-01", 500.0)]);
        assert_eq!((d.rows.len(), d.excluded), (1, 1));
        g.listing.start_date = None;
        g.listing.rent = Some(400.0);
        assert_eq!(derive_rows(&[g]).excluded, 1);
    }

    /// Chord-length route: 3-D unit vectors, then arc = 2 asin(chord / 2).
    fn chord_oracle(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
        let v = |lat: f64, lon: f64| {
            let (p, l) = (lat.to_radians(), lon.to_radians());
            [p.cos() * l.cos(), p.cos() * l.sin(), p.sin()]
        };
        let (a, b) = (v(lat1, lon1), v(lat2, lon2));
        let chord = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
        EARTH_RADIUS_MILES * 2.0 * (chord / 2.0).asin()
    }

    #[test]
    fn haversine_matches_chord_oracle() {
        for (a, b, c, d) in [
            (55.8642, -4.2518, 55.8745, -4.2930),
            (55.8642, -4.2518, 55.9533, -3.1883),
            (51.5074, -0.1278, 55.8642, -4.2518),
        ] {
            let h = haversine_miles(a, b, c, d);
            assert!((h - chord_oracle(a, b, c, d)).abs() < 1e-6, "{h}");
        }
        // Glasgow to Edinburgh is a little over 40 miles
        let ge = haversine_miles(55.8642, -4.2518, 55.9533, -3.1883);
        assert!((41.0..43.0).contains(&ge), "{ge}");
    }

    #[test]
    fn radius_and_type_filter() {
        let center = (55.8642, -4.2518);
        let mut rows = derive_rows(&[geocoded("2014-03-01", 500.0)]).rows;
        rows[0].latitude = center.0;
        rows[0].longitude = center.1;
        let mut far = rows[0].clone();
        // 11 miles due north
        far.latitude += (11.0 / EARTH_RADIUS_MILES).to_degrees();
        let mut house = rows[0].clone();
        house.property_type = PropertyType::Detached;
        rows.extend([far, house]);

        let kept = spatial_filter(&rows, center, 10.0, Some(PropertyType::Flat)).unwrap();
        assert_eq!(kept.len(), 1);
        assert_eq!(spatial_filter(&rows, center, 1e-9, None).unwrap().len(), 2);
        assert_eq!(spatial_filter(&rows, center, 11.5, None).unwrap().len(), 3);
        assert!(spatial_filter(&rows, center, 0.0, None).is_err());
    }
}

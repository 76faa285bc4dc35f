use std::f64::consts::PI;

use chrono::{Duration, NaiveDate};
use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::rows::{decimal_year, haversine_miles, EARTH_RADIUS_MILES};
use super::ModelRow;
use crate::error::{Error, Result};
use crate::ingest::{Centroid, GeocodedListing, Listing, PropertyType};

/// Glasgow city centre (latitude, longitude).
pub const CITY_CENTRE: (f64, f64) = (55.8642, -4.2518);
/// Kelvingrove, the middle of the west end premium in the synthetic truth.
pub const WEST_END: (f64, f64) = (55.8686, -4.2906);

/// Closed-form component functions of a synthetic log-rent surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub intercept: f64,
    /// Per bedroom.
    pub beds_slope: f64,
    pub deprivation_linear: f64,
    pub deprivation_quadratic: f64,
    /// Per year.
    pub year_slope: f64,
    /// Amplitude of a one-cycle-per-year sine in day of year.
    pub season_amplitude: f64,
    /// Height of a Gaussian bump centred on [`WEST_END`].
    pub west_end_premium: f64,
    pub west_end_scale_miles: f64,
    /// Change per mile of distance from [`CITY_CENTRE`].
    pub distance_slope: f64,
    /// Coefficient on `(beds − 3)(year − 2014.5)`.
    pub beds_year: f64,
}

impl Truth {
    /// Smooth effects of a size typical of city rents: about 0.25 per
    /// bedroom, 4% a year, a gentle fall with deprivation, a faint season
    /// and a west end premium. No interactions.
    pub fn rent_like() -> Self {
        Truth {
            intercept: 6.5,
            beds_slope: 0.25,
            deprivation_linear: -0.45,
            deprivation_quadratic: 0.15,
            year_slope: 0.04,
            season_amplitude: 0.02,
            west_end_premium: 0.35,
            west_end_scale_miles: 1.5,
            distance_slope: -0.015,
            beds_year: 0.0,
        }
    }

    pub fn constant(intercept: f64) -> Self {
        Truth {
            intercept,
            beds_slope: 0.0,
            deprivation_linear: 0.0,
            deprivation_quadratic: 0.0,
            year_slope: 0.0,
            season_amplitude: 0.0,
            west_end_premium: 0.0,
            west_end_scale_miles: 1.0,
            distance_slope: 0.0,
            beds_year: 0.0,
        }
    }

    /// Linear in beds, deprivation and year only: inside the unpenalized
    /// space of every second-order p-spline.
    pub fn linear() -> Self {
        Truth {
            beds_slope: 0.25,
            deprivation_linear: -0.4,
            year_slope: 0.04,
            ..Truth::constant(6.5)
        }
    }

    /// Value of the named component at `row`; `None` for names without a
    /// component.
    pub fn component(&self, term: &str, row: &ModelRow) -> Option<f64> {
        let v = match term {
            "beds" => self.beds_slope * row.beds as f64,
            "deprivation" => {
                let a = row.deprivation;
                self.deprivation_linear * a + self.deprivation_quadratic * a * a
            }
            "year" => self.year_slope * (row.year - 2012.0),
            "doy" => self.season_amplitude * (2.0 * PI * (row.doy as f64 - 1.0) / 365.0).sin(),
            "location" => {
                let w = haversine_miles(WEST_END.0, WEST_END.1, row.latitude, row.longitude);
                let c = haversine_miles(CITY_CENTRE.0, CITY_CENTRE.1, row.latitude, row.longitude);
                let s = self.west_end_scale_miles;
                self.west_end_premium * (-(w * w) / (2.0 * s * s)).exp() + self.distance_slope * c
            }
            "beds:year" => self.beds_year * (row.beds as f64 - 3.0) * (row.year - 2014.5),
            _ => return None,
        };
        Some(v)
    }

    pub const COMPONENTS: [&'static str; 6] =
        ["beds", "deprivation", "year", "doy", "location", "beds:year"];

    /// Noise-free log rent.
    pub fn signal(&self, row: &ModelRow) -> f64 {
        self.intercept
            + Self::COMPONENTS
                .iter()
                .map(|c| self.component(c, row).unwrap_or(0.0))
                .sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub n: usize,
    /// Noise standard deviation on the log scale.
    pub sigma: f64,
    pub seed: u64,
    pub postcodes: usize,
    /// Postcodes fall uniformly in a disc of this radius around the centre.
    pub radius_miles: f64,
    pub first_date: NaiveDate,
    pub last_date: NaiveDate,
    /// Probabilities of 1 to 5 bedrooms.
    pub bedroom_weights: [f64; 5],
}

impl SimulationConfig {
    pub fn new(n: usize, sigma: f64, seed: u64) -> Self {
        SimulationConfig {
            n,
            sigma,
            seed,
            postcodes: 1000,
            radius_miles: 9.0,
            first_date: NaiveDate::from_ymd_opt(2012, 1, 1).expect("date"),
            last_date: NaiveDate::from_ymd_opt(2016, 12, 31).expect("date"),
            bedroom_weights: [0.2, 0.35, 0.25, 0.12, 0.08],
        }
    }
}

/// Postcode with its centroid, as it would appear in a postcode index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticPostcode {
    pub postcode: String,
    #[serde(flatten)]
    pub centroid: Centroid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Synthetic {
    pub rows: Vec<ModelRow>,
    /// The same adverts in the cleaned-listings form, rent `exp(logprice)`.
    pub listings: Vec<GeocodedListing>,
    pub postcodes: Vec<SyntheticPostcode>,
    /// Noise-free log rent per row.
    pub signal: Vec<f64>,
    pub truth: Truth,
}

/// Letters allowed in the inward code of a postcode.
const INWARD: &[u8] = b"ABDEFGHJLNPQRSTUWXYZ";

fn postcode_label(i: usize) -> String {
    let per_district = 10 * INWARD.len() * INWARD.len();
    let district = 1 + i / per_district;
    let rem = i % per_district;
    let sector = rem / (INWARD.len() * INWARD.len());
    let unit = rem % (INWARD.len() * INWARD.len());
    format!(
        "G{district} {sector}{}{}",
        INWARD[unit / INWARD.len()] as char,
        INWARD[unit % INWARD.len()] as char
    )
}

/// Adverts drawn around [`CITY_CENTRE`] with log rent from `truth` plus
/// Gaussian noise. Postcodes are uniform on a disc with independent uniform
/// deprivation; each advert picks a postcode uniformly, a bedroom count from
/// the configured weights and a start date uniformly between the configured
/// dates.
pub fn simulate_synthetic(config: &SimulationConfig, truth: &Truth) -> Result<Synthetic> {
    let max_postcodes = 99 * 10 * INWARD.len() * INWARD.len();
    if config.postcodes == 0 || config.postcodes > max_postcodes {
        return Err(Error::InvalidArgument(format!(
            "postcode count must be in 1..={max_postcodes}"
        )));
    }
    if !(config.sigma >= 0.0) || !(config.radius_miles > 0.0) {
        return Err(Error::InvalidArgument("sigma must be >= 0 and radius > 0".into()));
    }
    let span = (config.last_date - config.first_date).num_days();
    if span < 0 {
        return Err(Error::InvalidArgument("last date precedes first date".into()));
    }
    let beds_dist = WeightedIndex::new(config.bedroom_weights)
        .map_err(|e| Error::InvalidArgument(format!("bedroom weights: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let (lat0, lon0) = CITY_CENTRE;
    let postcodes: Vec<SyntheticPostcode> = (0..config.postcodes)
        .map(|i| {
            let r = config.radius_miles * rng.random::<f64>().sqrt();
            let theta = 2.0 * PI * rng.random::<f64>();
            let arc = r / EARTH_RADIUS_MILES;
            let latitude = lat0 + (arc * theta.cos()).to_degrees();
            let longitude = lon0 + (arc * theta.sin() / lat0.to_radians().cos()).to_degrees();
            SyntheticPostcode {
                postcode: postcode_label(i),
                centroid: Centroid {
                    latitude,
                    longitude,
                    area_code: format!("S01{:06}", i / 25),
                    deprivation: rng.random::<f64>(),
                },
            }
        })
        .collect();

    let mut rows = Vec::with_capacity(config.n);
    let mut listings = Vec::with_capacity(config.n);
    let mut signal = Vec::with_capacity(config.n);
    for i in 0..config.n {
        let pc = &postcodes[rng.random_range(0..postcodes.len())];
        let beds = 1 + beds_dist.sample(&mut rng) as u32;
        let start = config.first_date + Duration::days(rng.random_range(0..=span));
        let end = start + Duration::days(rng.random_range(14..=120));
        let z: f64 = StandardNormal.sample(&mut rng);
        let (year, doy) = decimal_year(start);
        let mut row = ModelRow {
            logprice: 0.0,
            beds,
            deprivation: pc.centroid.deprivation,
            year,
            doy,
            longitude: pc.centroid.longitude,
            latitude: pc.centroid.latitude,
            property_type: PropertyType::Flat,
        };
        let mu = truth.signal(&row);
        row.logprice = mu + config.sigma * z;
        listings.push(GeocodedListing {
            listing: Listing {
                listing_id: format!("SIM{i:07}"),
                start_date: Some(start),
                end_date: Some(end),
                postcode: pc.postcode.clone(),
                rent: Some(row.logprice.exp()),
                bedrooms: beds,
                property_type: PropertyType::Flat,
            },
            centroid: pc.centroid.clone(),
        });
        signal.push(mu);
        rows.push(row);
    }
    Ok(Synthetic {
        rows,
        listings,
        postcodes,
        signal,
        truth: truth.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gam::derive_rows;
    use crate::ingest::is_valid_postcode;

    #[test]
    fn noiseless_constant() {
        let s = simulate_synthetic(&SimulationConfig::new(200, 0.0, 3), &Truth::constant(6.5)).unwrap();
        assert!(s.rows.iter().all(|r| r.logprice == 6.5));
    }

    #[test]
    fn deterministic_per_seed() {
        let c = SimulationConfig::new(300, 0.1, 11);
        let a = simulate_synthetic(&c, &Truth::rent_like()).unwrap();
        let b = simulate_synthetic(&c, &Truth::rent_like()).unwrap();
        assert_eq!(a, b);
        let other = simulate_synthetic(&SimulationConfig::new(300, 0.1, 12), &Truth::rent_like()).unwrap();
        assert_ne!(a.rows, other.rows);
    }

    #[test]
    fn listings_rederive_to_rows() {
        let s = simulate_synthetic(&SimulationConfig::new(250, 0.1, 5), &Truth::rent_like()).unwrap();
        let d = derive_rows(&s.listings);
        assert_eq!(d.excluded, 0);
        for (a, b) in d.rows.iter().zip(&s.rows) {
            assert!((a.logprice - b.logprice).abs() < 1e-12);
            assert_eq!((a.year, a.doy, a.beds), (b.year, b.doy, b.beds));
        }
    }

    #[test]
    fn covariates_in_documented_ranges() {
        let c = SimulationConfig::new(2000, 0.1, 9);
        let s = simulate_synthetic(&c, &Truth::rent_like()).unwrap();
        for r in &s.rows {
            assert!((1..=5).contains(&r.beds));
            assert!((0.0..1.0).contains(&r.deprivation));
            assert!((2012.0..2017.0).contains(&r.year));
            let d = haversine_miles(CITY_CENTRE.0, CITY_CENTRE.1, r.latitude, r.longitude);
            assert!(d <= 9.0 + 1e-3, "{d}");
        }
        assert!(s.postcodes.iter().all(|p| is_valid_postcode(&p.postcode)));
        let labels: std::collections::BTreeSet<_> = s.postcodes.iter().map(|p| &p.postcode).collect();
        assert_eq!(labels.len(), s.postcodes.len());
    }

    #[test]
    fn truth_components() {
        let t = Truth::rent_like();
        let mut r = simulate_synthetic(&SimulationConfig::new(1, 0.0, 1), &t).unwrap().rows[0].clone();
        r.beds = 3;
        r.year = 2014.0;
        assert!((t.component("beds", &r).unwrap() - 0.75).abs() < 1e-15);
        assert!((t.component("year", &r).unwrap() - 0.08).abs() < 1e-15);
        assert!(t.component("nope", &r).is_none());
        r.latitude = WEST_END.0;
        r.longitude = WEST_END.1;
        let at_west_end = t.component("location", &r).unwrap();
        assert!(at_west_end > 0.3);
    }
}

use chrono::{Duration, NaiveDate};
use proptest::prelude::*;

use rentgam::ingest::{
    clean_pipeline, clean_records, read_clean_listings, write_clean_listings, write_listings,
    Centroid, ListingFormat, Listing, PostcodeIndex, PropertyType,
};

fn index(n: usize) -> PostcodeIndex {
    PostcodeIndex::from_entries((0..n).map(|i| {
        (
            format!("G{} {}AB", 1 + i / 10, i % 10),
            Centroid {
                latitude: 55.8 + 0.001 * i as f64,
                longitude: -4.3 + 0.001 * i as f64,
                area_code: format!("S{:03}", i % 7),
                deprivation: (i % 10) as f64 / 10.0,
            },
        )
    }))
    .unwrap()
}

fn listing(i: usize, postcodes: usize) -> Listing {
    let start = NaiveDate::from_ymd_opt(2010, 1, 1).unwrap() + Duration::days((i % 2500) as i64);
    Listing {
        listing_id: format!("L{i}"),
        start_date: Some(start),
        end_date: Some(start + Duration::days(30)),
        postcode: format!("G{} {}AB", 1 + (i % postcodes) / 10, (i % postcodes) % 10),
        // the id feeds the rent so every base record is distinct
        rent: Some(400.0 + i as f64 * 0.01),
        bedrooms: 1 + (i % 4) as u32,
        property_type: PropertyType::Flat,
    }
}

/// One tenth of the published category counts, built record by record and
/// pushed through parse → clean from a file.
#[test]
fn table1_counts_replayed_through_the_pipeline() {
    let (dup, missing, invalid, included) = (14_883, 170_101, 302, 196_736);
    let postcodes = 50;
    let mut records: Vec<Listing> = (0..included).map(|i| listing(i, postcodes)).collect();
    for i in 0..missing {
        let mut l = listing(included + i, postcodes);
        l.start_date = None;
        records.push(l);
    }
    for i in 0..invalid {
        let mut l = listing(included + missing + i, postcodes);
        if i % 2 == 0 {
            // well-formed but absent from the index
            l.postcode = "ZZ9 9ZZ".into();
        } else {
            l.end_date = l.start_date.map(|d| d - Duration::days(1));
        }
        records.push(l);
    }
    for i in 0..dup {
        let mut copy = records[i * 13 % included].clone();
        copy.listing_id = format!("D{i}");
        records.push(copy);
    }

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("listings.csv");
    write_listings(&path, &records).unwrap();
    let out = clean_pipeline(&path, ListingFormat::Delimited, &index(postcodes)).unwrap();
    let r = &out.report;
    assert_eq!(
        (r.duplicated, r.missing_dates, r.invalid, r.included),
        (dup, missing, invalid, included)
    );
    let p = r.percentages();
    assert_eq!(
        [p.duplicated, p.missing_dates, p.invalid, p.total_excluded, p.included],
        [3.9, 44.5, 0.1, 48.5, 51.5]
    );
    assert!(out.malformed.is_empty());
}

#[test]
fn cleaning_is_idempotent() {
    let postcodes = 20;
    let mut records: Vec<Listing> = (0..500).map(|i| listing(i, postcodes)).collect();
    let copies: Vec<Listing> = (0..50).map(|i| records[i * 3].clone()).collect();
    records.extend(copies);
    records[7].start_date = None;
    records[9].postcode = "AB1 2CD".into();
    let idx = index(postcodes);
    let (first, _) = clean_records(records, &idx).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let clean = dir.path().join("clean.csv");
    write_clean_listings(&clean, &first).unwrap();
    let raw = dir.path().join("again.csv");
    let listings: Vec<Listing> = read_clean_listings(&clean).unwrap().into_iter().map(|g| g.listing).collect();
    write_listings(&raw, &listings).unwrap();
    let second = clean_pipeline(&raw, ListingFormat::Delimited, &idx).unwrap();
    assert_eq!(second.records, first);
    assert_eq!(second.report.excluded(), 0);
}

fn arb_listing() -> impl Strategy<Value = Listing> {
    (0usize..40, proptest::option::weighted(0.8, 0i64..60), 0usize..6, 0u32..5, -1i64..40).prop_map(
        |(i, start, pc, beds, len)| {
            let base = NaiveDate::from_ymd_opt(2014, 1, 1).unwrap();
            let start = start.map(|d| base + Duration::days(d));
            Listing {
                listing_id: format!("P{i}"),
                start_date: start,
                end_date: start.map(|s| s + Duration::days(len)),
                postcode: if pc == 5 { "ZZ1 1ZZ".into() } else { format!("G1 {pc}AB") },
                rent: Some(300.0 + (i % 7) as f64 * 50.0),
                bedrooms: beds,
                property_type: PropertyType::Flat,
            }
        },
    )
}

proptest! {
    #[test]
    fn categories_partition_the_input(records in prop::collection::vec(arb_listing(), 0..80)) {
        let n = records.len();
        let (kept, report) = clean_records(records, &index(5)).unwrap();
        prop_assert_eq!(report.total, n);
        prop_assert_eq!(report.duplicated + report.missing_dates + report.invalid + report.included, n);
        prop_assert_eq!(kept.len(), report.included);
    }

    #[test]
    fn counts_do_not_depend_on_input_order(
        records in prop::collection::vec(arb_listing(), 1..60),
        rotate in 0usize..60,
    ) {
        let idx = index(5);
        let mut shuffled = records.clone();
        shuffled.reverse();
        let k = rotate % shuffled.len();
        shuffled.rotate_left(k);
        let (a, ra) = clean_records(records, &idx).unwrap();
        let (b, rb) = clean_records(shuffled, &idx).unwrap();
        prop_assert_eq!(
            (ra.duplicated, ra.missing_dates, ra.invalid, ra.included),
            (rb.duplicated, rb.missing_dates, rb.invalid, rb.included)
        );
        // same surviving keys, whichever copy was first
        let key = |g: &rentgam::ingest::GeocodedListing| {
            (g.listing.start_date, g.listing.end_date, g.listing.postcode.clone(), g.listing.rent.map(f64::to_bits))
        };
        let mut ka: Vec<_> = a.iter().map(key).collect();
        let mut kb: Vec<_> = b.iter().map(key).collect();
        ka.sort();
        kb.sort();
        prop_assert_eq!(ka, kb);
    }
}

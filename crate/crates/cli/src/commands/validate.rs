use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use chrono::Datelike;
use rentgam::ingest::{read_clean_listings, GeocodedListing};
use rentgam::validate::{
    correlate, count_by_area, coverage_ratio, listings_index, median_rent_by_area, rent_index,
    turnover_rate, Correlation, Period, Quarter, ReferenceSeries,
};
use serde_json::{json, Value};

use crate::config::{exists, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{emit, ensure_dir, num, write_csv, write_json};

fn correlation_json(c: rentgam::Result<Correlation>) -> Value {
    match c {
        Ok(c) => json!(c),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn shared_areas(records: &[GeocodedListing], reference: &ReferenceSeries) -> CliResult<usize> {
    let listed: BTreeSet<&str> = records.iter().map(|r| r.centroid.area_code.as_str()).collect();
    let shared = reference
        .areas
        .keys()
        .filter(|a| listed.contains(a.as_str()))
        .count();
    if shared == 0 {
        let first = |it: &mut dyn Iterator<Item = &str>| it.next().unwrap_or("none").to_string();
        return Err(CliError::Input(format!(
            "no area codes shared between listings ({} areas, e.g. {}) and reference ({} areas, e.g. {})",
            listed.len(),
            first(&mut listed.iter().copied()),
            reference.areas.len(),
            first(&mut reference.areas.keys().map(String::as_str)),
        )));
    }
    Ok(shared)
}

pub fn run(cfg: &RunConfig) -> CliResult<()> {
    exists("clean listings", &cfg.clean)?;
    let areas_path = cfg.require("reference_areas", &cfg.reference_areas)?;
    let mut inputs: Vec<(&str, &Path)> = vec![("clean", &cfg.clean), ("reference_areas", areas_path)];
    if cfg.reference_national.is_some() {
        inputs.push(("reference_national", cfg.require("reference_national", &cfg.reference_national)?));
    }
    let hash = cfg.hash(&inputs)?;

    let records = read_clean_listings(&cfg.clean)?;
    let reference = ReferenceSeries {
        areas: ReferenceSeries::load_areas(areas_path)?,
        national: match &cfg.reference_national {
            Some(p) => ReferenceSeries::load_national(p)?,
            None => BTreeMap::new(),
        },
    };
    let shared = shared_areas(&records, &reference)?;
    let areas: BTreeSet<String> = reference.areas.keys().cloned().collect();
    let (stock, flow) = (reference.stock_by_area(), reference.flow_by_area());

    let years: BTreeSet<i32> = records
        .iter()
        .filter_map(|r| r.listing.start_date.map(|d| d.year()))
        .collect();
    let first_year = *years
        .first()
        .ok_or_else(|| CliError::Input("no dated listings to validate".into()))?;

    // per-year scatter and correlations
    let mut scatter = Vec::new();
    let mut correlations = BTreeMap::new();
    let mut yearly_counts = BTreeMap::new();
    for &y in &years {
        let counts = count_by_area(&records, Period::Year(y), &areas);
        let counts_f: BTreeMap<String, f64> =
            counts.iter().map(|(k, &v)| (k.clone(), v as f64)).collect();
        for (area, &c) in &counts {
            scatter.push(vec![
                y.to_string(),
                area.clone(),
                num(stock[area]),
                num(flow[area]),
                c.to_string(),
            ]);
        }
        correlations.insert(
            y.to_string(),
            json!({
                "stock": correlation_json(correlate(&counts_f, &stock)),
                "flow": correlation_json(correlate(&counts_f, &flow)),
            }),
        );
        yearly_counts.insert(y, counts_f);
    }

    let coverage_year = cfg.coverage_year.unwrap_or(first_year);
    let empty = BTreeMap::new();
    let coverage_counts = yearly_counts.get(&coverage_year).unwrap_or(&empty);
    let coverage = coverage_ratio(coverage_counts, &flow)?;

    // listings index: supplied national totals when complete, else counts
    let supplied: Option<BTreeMap<i32, f64>> = (!reference.national.is_empty())
        .then(|| {
            reference
                .national
                .iter()
                .map(|(&y, r)| r.listings_thousands.map(|l| (y, l)))
                .collect()
        })
        .flatten();
    let (totals, source) = match supplied {
        Some(t) => (t, "reference"),
        None => (
            yearly_counts.iter().map(|(&y, c)| (y, c.values().sum())).collect(),
            "listings",
        ),
    };
    let base_year = cfg.base_year.unwrap_or(first_year);
    let index = listings_index(&totals, base_year)?;
    let mut turnover = BTreeMap::new();
    for (&y, r) in &reference.national {
        turnover.insert(y, turnover_rate(r.stock_thousands, r.flow_thousands)?);
    }

    let medians = median_rent_by_area(&records, Some(cfg.rent_bedrooms), Period::Year(coverage_year));

    let dated: Vec<Quarter> = records
        .iter()
        .filter_map(|r| r.listing.start_date.map(Quarter::of))
        .collect();
    let q_first = cfg.quarter_range.0.or_else(|| dated.iter().min().copied());
    let q_last = cfg.quarter_range.1.or_else(|| dated.iter().max().copied());
    let (Some(q_first), Some(q_last)) = (q_first, q_last) else {
        return Err(CliError::Input("no dated listings for the rent index".into()));
    };
    let quarters = q_first.through(q_last);
    let base_quarter = cfg.base_quarter.unwrap_or(q_first);
    let rents = rent_index(records.iter().map(|r| &r.listing), &quarters, base_quarter)?;

    ensure_dir(&cfg.out)?;
    write_csv(
        &cfg.out.join("scatter.csv"),
        &["year", "area_code", "stock", "flow", "listings"],
        scatter,
    )?;
    write_csv(
        &cfg.out.join("coverage.csv"),
        &["area_code", "listings", "flow", "ratio"],
        coverage.per_area.iter().map(|(a, r)| {
            vec![
                a.clone(),
                num(coverage_counts.get(a).copied().unwrap_or(0.0)),
                flow.get(a).map(|f| num(*f)).unwrap_or_default(),
                r.map(num).unwrap_or_default(),
            ]
        }),
    )?;
    write_csv(
        &cfg.out.join("listings_index.csv"),
        &["year", "total", "index", "reported", "turnover_percent"],
        index.points.iter().map(|p| {
            let year: i32 = p.period.parse().unwrap_or_default();
            vec![
                p.period.clone(),
                num(p.raw),
                num(p.index),
                format!("{:.1}", p.reported()),
                turnover.get(&year).map(u32::to_string).unwrap_or_default(),
            ]
        }),
    )?;
    write_csv(
        &cfg.out.join("rent_medians.csv"),
        &["area_code", "median_rent"],
        medians.iter().map(|(a, m)| vec![a.clone(), num(*m)]),
    )?;
    write_csv(
        &cfg.out.join("rent_index.csv"),
        &["quarter", "adjusted", "unadjusted"],
        rents.unadjusted.points.iter().map(|p| {
            vec![
                p.period.clone(),
                rents.adjusted.get(&p.period).map(|a| num(a.index)).unwrap_or_default(),
                num(p.index),
            ]
        }),
    )?;

    let doc = json!({
        "config_hash": hash,
        "areas": { "reference": areas.len(), "shared_with_listings": shared },
        "correlations": correlations,
        "coverage": { "year": coverage_year, "national_ratio": coverage.national },
        "listings_index": { "source": source, "series": index },
        "turnover_percent": turnover,
        "rent_medians": { "year": coverage_year, "bedrooms": cfg.rent_bedrooms, "areas": medians.len() },
        "rent_index": rents,
    });
    write_json(&cfg.out.join("validation.json"), &doc)?;

    let mut t = String::new();
    let _ = writeln!(t, "areas: {} in reference, {shared} with listings", areas.len());
    let _ = writeln!(t, "{:<8}{:>12}{:>12}", "year", "r2 stock", "r2 flow");
    for (y, c) in &correlations {
        let r2 = |v: &Value| v["r_squared"].as_f64().map_or("n/a".to_string(), |x| format!("{x:.3}"));
        let _ = writeln!(t, "{y:<8}{:>12}{:>12}", r2(&c["stock"]), r2(&c["flow"]));
    }
    let _ = writeln!(t, "coverage ratio {coverage_year}: {:.3}", coverage.national);
    let _ = writeln!(t, "listings index ({source} totals, base {base_year}):");
    for p in &index.points {
        let _ = writeln!(t, "  {}  {:>10}  {:>6.1}", p.period, num(p.raw), p.reported());
    }
    let _ = writeln!(t, "rent index (base {base_quarter}), {} quarters", rents.adjusted.points.len());
    let _ = writeln!(t, "config sha256 {hash}");
    emit(cfg.format, &t, &doc);
    Ok(())
}

use rentgam::ingest::{clean_pipeline, write_clean_listings, ListingFormat, PostcodeIndex};
use serde_json::json;

use crate::config::RunConfig;
use crate::error::CliResult;
use crate::output::{emit, ensure_dir, ensure_parent, write_csv, write_json};

pub fn run(cfg: &RunConfig) -> CliResult<()> {
    let listings = cfg.require("listings", &cfg.listings)?;
    let postcodes = cfg.require("postcodes", &cfg.postcodes)?;
    let hash = cfg.hash(&[("listings", listings), ("postcodes", postcodes)])?;

    let index = PostcodeIndex::load(postcodes)?;
    let out = clean_pipeline(listings, ListingFormat::from_path(listings), &index)?;

    ensure_dir(&cfg.out)?;
    ensure_parent(&cfg.clean)?;
    write_clean_listings(&cfg.clean, &out.records)?;
    write_csv(
        &cfg.out.join("malformed.csv"),
        &["row", "reason"],
        out.malformed.iter().map(|m| vec![m.row.to_string(), m.reason.clone()]),
    )?;
    let doc = json!({
        "config_hash": hash,
        "report": out.report.to_json(),
    });
    write_json(&cfg.out.join("clean_report.json"), &doc)?;

    let table = format!("{}config sha256 {hash}\n", out.report.to_table());
    emit(cfg.format, &table, &doc);
    Ok(())
}

use rentgam::gam::{simulate_synthetic, SimulationConfig, Truth};
use rentgam::ingest::{write_listings, Listing};
use serde_json::json;

use crate::config::RunConfig;
use crate::error::CliResult;
use crate::output::{emit, ensure_dir, num, write_csv, write_json};

/// Writes a synthetic listings file, its postcode index and the truth.
pub fn run(cfg: &RunConfig) -> CliResult<()> {
    let hash = cfg.hash(&[])?;
    let mut sim_cfg = SimulationConfig::new(cfg.sim_n, cfg.sim_sigma, cfg.seed);
    sim_cfg.postcodes = cfg.sim_postcodes;
    let truth = match cfg.sim_truth.as_str() {
        "linear" => Truth::linear(),
        _ => Truth::rent_like(),
    };
    let sim = simulate_synthetic(&sim_cfg, &truth)?;

    ensure_dir(&cfg.out)?;
    let listings: Vec<Listing> = sim.listings.iter().map(|g| g.listing.clone()).collect();
    write_listings(&cfg.out.join("listings.csv"), &listings)?;
    write_csv(
        &cfg.out.join("postcodes.csv"),
        &["postcode", "latitude", "longitude", "area_code", "deprivation"],
        sim.postcodes.iter().map(|p| {
            vec![
                p.postcode.clone(),
                num(p.centroid.latitude),
                num(p.centroid.longitude),
                p.centroid.area_code.clone(),
                num(p.centroid.deprivation),
            ]
        }),
    )?;
    let doc = json!({
        "config_hash": hash,
        "simulation": sim_cfg,
        "truth": truth,
    });
    write_json(&cfg.out.join("truth.json"), &doc)?;

    let table = format!(
        "simulated {} listings over {} postcodes (sigma {}, seed {})\n\
         wrote listings.csv, postcodes.csv, truth.json to {}\n\
         config sha256 {hash}\n",
        cfg.sim_n,
        cfg.sim_postcodes,
        cfg.sim_sigma,
        cfg.seed,
        cfg.out.display()
    );
    emit(cfg.format, &table, &doc);
    Ok(())
}

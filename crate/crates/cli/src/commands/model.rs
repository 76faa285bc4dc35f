use std::fmt::Write as _;
use std::path::Path;

use rentgam::gam::{
    bootstrap_term_test, build_design, derive_rows, effect_surface, fit_pls, grids_for,
    per_unit_multiplier, predict, select_smoothness, spatial_filter, Covariate, FittedModel,
    ModelRow, ModelSpec, ModelSummary, SurfaceGrid, Truth,
};
use rentgam::ingest::read_clean_listings;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{exists, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{emit, ensure_dir, read_json, write_json, write_matrix};

#[derive(Debug, Serialize)]
struct RowCounts {
    listings: usize,
    /// No start date or no positive rent.
    unusable: usize,
    /// Outside the radius or of another property type.
    filtered_out: usize,
    rows: usize,
}

fn model_rows(cfg: &RunConfig) -> CliResult<(Vec<ModelRow>, RowCounts)> {
    exists("clean listings", &cfg.clean)?;
    let records = read_clean_listings(&cfg.clean)?;
    let derived = derive_rows(&records);
    let rows = spatial_filter(&derived.rows, cfg.centre, cfg.radius_miles, cfg.property_type)?;
    if rows.is_empty() {
        return Err(CliError::Input(format!(
            "no listings within {} miles of ({}, {}) after filtering",
            cfg.radius_miles, cfg.centre.0, cfg.centre.1
        )));
    }
    let counts = RowCounts {
        listings: records.len(),
        unusable: derived.excluded,
        filtered_out: derived.rows.len() - rows.len(),
        rows: rows.len(),
    };
    Ok((rows, counts))
}

fn model_spec(cfg: &RunConfig) -> CliResult<ModelSpec> {
    let full = ModelSpec::rent_model_with(&cfg.sizes);
    let Some(names) = &cfg.terms else {
        return Ok(full);
    };
    for n in names {
        full.term(n)?;
    }
    let spec = ModelSpec {
        terms: full
            .terms
            .into_iter()
            .filter(|t| names.contains(&t.name))
            .collect(),
    };
    spec.validate()?;
    Ok(spec)
}

fn logprices(rows: &[ModelRow]) -> Vec<f64> {
    rows.iter().map(|r| r.logprice).collect()
}

fn centered(v: &[f64]) -> Vec<f64> {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| x - mean).collect()
}

fn rmse(a: &[f64], b: &[f64]) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt()
}

/// Centered RMSE of each main effect against the known truth.
fn recovery(model: &FittedModel, rows: &[ModelRow], truth: &Truth) -> CliResult<Value> {
    let mut terms = serde_json::Map::new();
    for t in model.spec.main_effects() {
        let Some(target) = rows
            .iter()
            .map(|r| truth.component(&t.name, r))
            .collect::<Option<Vec<f64>>>()
        else {
            continue;
        };
        let fitted = effect_surface(model, &t.name, SurfaceGrid::Observed(rows))?.effect;
        terms.insert(t.name.clone(), json!(rmse(&centered(&fitted), &centered(&target))));
    }
    let signal: Vec<f64> = rows.iter().map(|r| truth.signal(r)).collect();
    let overall = rmse(&predict(model, rows)?, &signal);
    Ok(json!({ "term_rmse": terms, "signal_rmse": overall }))
}

pub fn fit(cfg: &RunConfig) -> CliResult<()> {
    if let Some(m) = &cfg.dump_matrix {
        if !["design", "penalty", "covariance"].contains(&m.as_str()) {
            return Err(CliError::Input(format!(
                "unknown matrix `{m}` (design, penalty or covariance)"
            )));
        }
    }
    let mut inputs: Vec<(&str, &Path)> = vec![("clean", &cfg.clean)];
    exists("clean listings", &cfg.clean)?;
    if cfg.truth.is_some() {
        inputs.push(("truth", cfg.require("truth", &cfg.truth)?));
    }
    let hash = cfg.hash(&inputs)?;
    let truth: Option<Truth> = match &cfg.truth {
        Some(p) => {
            let doc: Value = read_json(p)?;
            Some(serde_json::from_value(doc["truth"].clone()).map_err(|e| {
                CliError::Input(format!("{}: no truth record: {e}", p.display()))
            })?)
        }
        None => None,
    };

    let (rows, counts) = model_rows(cfg)?;
    let spec = model_spec(cfg)?;
    let design = build_design(&rows, &spec)?;
    let y = logprices(&rows);
    let sel = select_smoothness(&design, &y, &grids_for(&design, &cfg.lambda_grid), cfg.execution)?;
    let model = &sel.model;

    ensure_dir(&cfg.out)?;
    match cfg.dump_matrix.as_deref() {
        Some("design") => write_matrix(&cfg.out.join("design.csv"), &design.x)?,
        Some("penalty") => write_matrix(&cfg.out.join("penalty.csv"), &design.penalty(&sel.lambdas)?)?,
        Some("covariance") => write_matrix(&cfg.out.join("covariance.csv"), &model.covariance)?,
        _ => {}
    }
    let recovered = match &truth {
        Some(t) => Some(recovery(model, &rows, t)?),
        None => None,
    };
    let doc = json!({
        "config_hash": hash,
        "rows": counts,
        "selection": {
            "criterion": "bic",
            "grid": cfg.lambda_grid,
            "score": sel.score,
            "sweeps": sel.sweeps,
            "evaluations": sel.evaluations,
        },
        "model": model.summary(),
        "recovery": recovered,
    });
    write_json(&cfg.model, &doc)?;

    let mut t = String::new();
    let _ = writeln!(t, "{:<20}{:>8}  lambda", "term", "edf");
    let lambdas = model.lambda_map();
    for term in &model.terms {
        let name = &term.basis.name;
        let lambda = term
            .basis
            .covariates()
            .iter()
            .filter_map(|c| spec_param(&model.spec, *c))
            .filter_map(|p| lambdas.get(&p))
            .map(|l| format!("{l:.3e}"))
            .collect::<Vec<_>>()
            .join(",");
        let _ = writeln!(t, "{name:<20}{:>8.2}  {lambda}", term.edf);
    }
    let _ = writeln!(
        t,
        "n {}  k {:.2}  sigma {:.4}  BIC {:.2}  ({} sweeps, {} fits)",
        model.n,
        model.edf,
        model.sigma2.sqrt(),
        model.bic,
        sel.sweeps,
        sel.evaluations
    );
    if let Some(r) = &recovered {
        let _ = write!(t, "recovery RMSE:");
        for (k, v) in r["term_rmse"].as_object().into_iter().flatten() {
            let _ = write!(t, " {k} {:.4}", v.as_f64().unwrap_or(f64::NAN));
        }
        let _ = writeln!(t);
    }
    let _ = writeln!(t, "config sha256 {hash}");
    emit(cfg.format, &t, &doc);
    Ok(())
}

/// Name of the smoothing parameter governing covariate `c`.
fn spec_param(spec: &ModelSpec, c: Covariate) -> Option<String> {
    spec.main_effects().find(|t| t.uses(c)).map(|t| t.name.clone())
}

struct Loaded {
    summary: ModelSummary,
    model_hash: Value,
    rows: Vec<ModelRow>,
}

fn load_model(cfg: &RunConfig) -> CliResult<Loaded> {
    exists("model", &cfg.model)?;
    let doc: Value = read_json(&cfg.model)?;
    let summary: ModelSummary = serde_json::from_value(doc["model"].clone())
        .map_err(|e| CliError::Input(format!("{}: {e}", cfg.model.display())))?;
    let (rows, _) = model_rows(cfg)?;
    if rows.len() != summary.n {
        return Err(CliError::Input(format!(
            "model was fitted to {} rows but the data and filters give {}",
            summary.n,
            rows.len()
        )));
    }
    Ok(Loaded {
        summary,
        model_hash: doc["config_hash"].clone(),
        rows,
    })
}

/// Refits at the stored smoothing parameters and checks the coefficients
/// agree with the stored ones.
fn refit(loaded: &Loaded, cfg: &RunConfig) -> CliResult<FittedModel> {
    let s = &loaded.summary;
    let design = build_design(&loaded.rows, &s.spec)?;
    let model = fit_pls(&design, &logprices(&loaded.rows), &design.lambdas_from(&s.lambdas)?, cfg.execution)?;
    let scale = 1.0 + s.intercept.abs();
    let mut gap = (model.intercept() - s.intercept).abs();
    for (name, stored) in &s.coefficients {
        let now = model.term_coefficients(name)?;
        for (a, b) in now.iter().zip(stored) {
            gap = gap.max((a - b).abs());
        }
    }
    if gap > 1e-8 * scale {
        return Err(CliError::Input(format!(
            "{} does not match the data: refitted coefficients differ by {gap:e}",
            cfg.model.display()
        )));
    }
    Ok(model)
}

fn axis(c: Covariate, range: (f64, f64), m: usize) -> Vec<f64> {
    let (lo, hi) = range;
    if c == Covariate::Beds && hi - lo >= 1.0 {
        return (lo.ceil() as i64..=hi.floor() as i64).map(|b| b as f64).collect();
    }
    (0..m)
        .map(|i| if i == m - 1 { hi } else { lo + (hi - lo) * i as f64 / (m - 1) as f64 })
        .collect()
}

/// Crossed grid over the axes, last axis varying fastest.
fn crossed(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let total: usize = axes.iter().map(Vec::len).product();
    let mut columns = vec![Vec::with_capacity(total); axes.len()];
    for flat in 0..total {
        let mut rem = flat;
        for k in (0..axes.len()).rev() {
            columns[k].push(axes[k][rem % axes[k].len()]);
            rem /= axes[k].len();
        }
    }
    columns
}

pub fn surfaces(cfg: &RunConfig) -> CliResult<()> {
    exists("model", &cfg.model)?;
    let hash = cfg.hash(&[("clean", &cfg.clean), ("model", &cfg.model)])?;
    let loaded = load_model(cfg)?;
    let model = refit(&loaded, cfg)?;

    ensure_dir(&cfg.out)?;
    let mut entries = Vec::new();
    let mut t = String::new();
    let _ = writeln!(t, "{:<20}{:>8}{:>12}{:>12}  file", "term", "points", "max |f|", "signif.");
    for term in &model.terms {
        let axes: Vec<Vec<f64>> = term
            .basis
            .margins
            .iter()
            .map(|m| {
                let range = cfg.grid_ranges.get(&m.covariate).copied().unwrap_or(m.knots.domain());
                axis(m.covariate, range, cfg.grid_points)
            })
            .collect();
        let name = &term.basis.name;
        let surface = effect_surface(&model, name, SurfaceGrid::Columns(crossed(&axes)))?;
        let file = format!("surface_{}.csv", name.replace(':', "_"));
        surface.write(&cfg.out.join(&file))?;
        let max_abs = surface.effect.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        let share = surface.significant.iter().filter(|&&s| s).count() as f64 / surface.len() as f64;
        let _ = writeln!(t, "{name:<20}{:>8}{max_abs:>12.4}{share:>12.3}  {file}", surface.len());
        entries.push(json!({
            "term": name,
            "file": file,
            "points": surface.len(),
            "max_abs_effect": max_abs,
            "significant_share": share,
        }));
    }
    let beds = model
        .terms
        .iter()
        .find(|t| !t.basis.interaction && t.basis.covariates() == [Covariate::Beds])
        .map(|t| {
            let (lo, hi) = t.basis.margins[0].knots.domain();
            per_unit_multiplier(&model, &t.basis.name, lo, hi)
        })
        .transpose()?;
    if let Some(b) = beds {
        let _ = writeln!(t, "price multiplier per bedroom {b:.3}");
    }
    let doc = json!({
        "config_hash": hash,
        "model_config_hash": loaded.model_hash,
        "surfaces": entries,
        "bedroom_multiplier": beds,
    });
    write_json(&cfg.out.join("surfaces.json"), &doc)?;
    let _ = writeln!(t, "config sha256 {hash}");
    emit(cfg.format, &t, &doc);
    Ok(())
}

pub fn bootstrap(cfg: &RunConfig) -> CliResult<()> {
    exists("model", &cfg.model)?;
    let hash = cfg.hash(&[("clean", &cfg.clean), ("model", &cfg.model)])?;
    let loaded = load_model(cfg)?;
    let spec = &loaded.summary.spec;
    let terms: Vec<String> = match &cfg.bootstrap_terms {
        Some(t) => t.clone(),
        None => spec.terms.iter().filter(|t| t.interaction).map(|t| t.name.clone()).collect(),
    };
    if terms.is_empty() {
        return Err(CliError::Input("no terms to test; set bootstrap_terms".into()));
    }

    let mut tests = Vec::new();
    let mut t = String::new();
    let _ = writeln!(t, "{:<20}{:>14}{:>10}{:>8}{:>10}", "term", "W_obs", "p", "B", "discarded");
    for name in &terms {
        let test = bootstrap_term_test(
            spec,
            &loaded.rows,
            name,
            &loaded.summary.lambdas,
            cfg.replicates,
            cfg.seed,
            cfg.execution,
        )?;
        let _ = writeln!(
            t,
            "{name:<20}{:>14.3}{:>10.4}{:>8}{:>10}",
            test.observed, test.p_value, test.replicates, test.discarded
        );
        tests.push(test);
    }
    let doc = json!({
        "config_hash": hash,
        "model_config_hash": loaded.model_hash,
        "tests": tests,
    });
    ensure_dir(&cfg.out)?;
    write_json(&cfg.out.join("bootstrap.json"), &doc)?;
    let _ = writeln!(t, "config sha256 {hash}");
    emit(cfg.format, &t, &doc);
    Ok(())
}

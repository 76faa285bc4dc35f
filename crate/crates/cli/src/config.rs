use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rentgam::gam::{default_grid, BasisSizes, Covariate, CITY_CENTRE};
use rentgam::ingest::PropertyType;
use rentgam::validate::Quarter;
use rentgam::Execution;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Keys holding file paths. Relative paths in a config file are taken
/// relative to that file.
const PATH_KEYS: [&str; 8] = [
    "listings",
    "postcodes",
    "reference_areas",
    "reference_national",
    "clean",
    "model",
    "truth",
    "out",
];

const VALUE_KEYS: [&str; 28] = [
    "centre_lat",
    "centre_lon",
    "radius_miles",
    "property_type",
    "beds_segments",
    "univariate_segments",
    "location_segments",
    "interaction_segments",
    "location_interaction_segments",
    "terms",
    "lambda_grid",
    "replicates",
    "seed",
    "bootstrap_terms",
    "grid_points",
    "base_year",
    "base_quarter",
    "coverage_year",
    "rent_bedrooms",
    "sim_n",
    "sim_sigma",
    "sim_postcodes",
    "sim_truth",
    "parallel",
    "format",
    "dump_matrix",
    "quarter_first",
    "quarter_last",
];

fn known(key: &str) -> bool {
    PATH_KEYS.contains(&key) || VALUE_KEYS.contains(&key) || grid_covariate(key).is_some()
}

/// `grid_<covariate>` overrides the axis range of surface grids.
fn grid_covariate(key: &str) -> Option<Covariate> {
    key.strip_prefix("grid_").and_then(|c| c.parse().ok())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Table,
    Json,
}

/// Raw settings before interpretation: config file entries overlaid by
/// command-line flags.
#[derive(Debug, Default, Clone)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    /// Reads `key = value` lines. `#` starts a comment.
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let mut s = Settings::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Input(format!("{}:{}: expected key = value", path.display(), i + 1))
            })?;
            let (k, v) = (k.trim(), v.trim());
            if s.values.contains_key(k) {
                return Err(CliError::Input(format!(
                    "{}:{}: `{k}` set twice",
                    path.display(),
                    i + 1
                )));
            }
            let v = if PATH_KEYS.contains(&k) && !v.is_empty() {
                base.join(v).to_string_lossy().into_owned()
            } else {
                v.to_string()
            };
            s.set(k, v).map_err(|e| match e {
                CliError::Input(m) => CliError::Input(format!("{}:{}: {m}", path.display(), i + 1)),
                other => other,
            })?;
        }
        Ok(s)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> CliResult<()> {
        if !known(key) {
            return Err(CliError::Input(format!("unknown configuration key `{key}`")));
        }
        self.values.insert(key.to_string(), value.into());
        Ok(())
    }

    /// Parses a `KEY=VALUE` override.
    pub fn set_pair(&mut self, pair: &str) -> CliResult<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("expected KEY=VALUE, got `{pair}`")))?;
        self.set(k.trim(), v.trim())
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str).filter(|v| !v.is_empty())
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|e| CliError::Input(format!("bad value `{v}` for `{key}`: {e}")))
            })
            .transpose()
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> CliResult<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|x| {
                        x.trim().parse().map_err(|e| {
                            CliError::Input(format!("bad entry `{x}` in `{key}`: {e}"))
                        })
                    })
                    .collect()
            })
            .transpose()
    }
}

/// Fully interpreted run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub listings: Option<PathBuf>,
    pub postcodes: Option<PathBuf>,
    pub reference_areas: Option<PathBuf>,
    pub reference_national: Option<PathBuf>,
    pub clean: PathBuf,
    pub model: PathBuf,
    pub truth: Option<PathBuf>,
    pub out: PathBuf,
    pub centre: (f64, f64),
    pub radius_miles: f64,
    pub property_type: Option<PropertyType>,
    pub sizes: BasisSizes,
    /// Term names to keep from the rent model; all when `None`.
    pub terms: Option<Vec<String>>,
    pub lambda_grid: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub bootstrap_terms: Option<Vec<String>>,
    pub grid_points: usize,
    pub grid_ranges: BTreeMap<Covariate, (f64, f64)>,
    pub base_year: Option<i32>,
    pub base_quarter: Option<Quarter>,
    pub quarter_range: (Option<Quarter>, Option<Quarter>),
    pub coverage_year: Option<i32>,
    pub rent_bedrooms: u32,
    pub sim_n: usize,
    pub sim_sigma: f64,
    pub sim_postcodes: usize,
    /// `rent_like` or `linear`.
    pub sim_truth: String,
    pub execution: Execution,
    pub format: Format,
    pub dump_matrix: Option<String>,
    /// Canonical text of every setting that can change results.
    canonical: String,
}

impl RunConfig {
    pub fn from_settings(s: &Settings) -> CliResult<Self> {
        let path = |k: &str| s.get(k).map(PathBuf::from);
        let out = path("out").unwrap_or_else(|| PathBuf::from("out"));
        let property_type = match s.get("property_type") {
            None => Some(PropertyType::Flat),
            Some("any") => None,
            Some(t) => Some(t.parse().map_err(CliError::Input)?),
        };
        let d = BasisSizes::default();
        let sizes = BasisSizes {
            beds: s.parse("beds_segments")?.unwrap_or(d.beds),
            univariate: s.parse("univariate_segments")?.unwrap_or(d.univariate),
            location: s.parse("location_segments")?.unwrap_or(d.location),
            interaction: s.parse("interaction_segments")?.unwrap_or(d.interaction),
            location_interaction: s
                .parse("location_interaction_segments")?
                .unwrap_or(d.location_interaction),
        };
        let mut grid_ranges = BTreeMap::new();
        for (k, v) in &s.values {
            if let Some(c) = grid_covariate(k) {
                let range = v
                    .split_once(':')
                    .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)))
                    .ok_or_else(|| CliError::Input(format!("`{k}` expects lo:hi, got `{v}`")))?;
                grid_ranges.insert(c, range);
            }
        }
        let format = match s.get("format") {
            None | Some("table") => Format::Table,
            Some("json") => Format::Json,
            Some(f) => return Err(CliError::Input(format!("unknown format `{f}`"))),
        };
        let parallel: bool = s.parse("parallel")?.unwrap_or(true);

        let cfg = RunConfig {
            listings: path("listings"),
            postcodes: path("postcodes"),
            reference_areas: path("reference_areas"),
            reference_national: path("reference_national"),
            clean: path("clean").unwrap_or_else(|| out.join("clean_listings.csv")),
            model: path("model").unwrap_or_else(|| out.join("model.json")),
            truth: path("truth"),
            centre: (
                s.parse("centre_lat")?.unwrap_or(CITY_CENTRE.0),
                s.parse("centre_lon")?.unwrap_or(CITY_CENTRE.1),
            ),
            radius_miles: s.parse("radius_miles")?.unwrap_or(10.0),
            property_type,
            sizes,
            terms: s.list("terms")?,
            lambda_grid: s.list("lambda_grid")?.unwrap_or_else(default_grid),
            replicates: s.parse("replicates")?.unwrap_or(99),
            seed: s.parse("seed")?.unwrap_or(1),
            bootstrap_terms: s.list("bootstrap_terms")?,
            grid_points: s.parse("grid_points")?.unwrap_or(25),
            grid_ranges,
            base_year: s.parse("base_year")?,
            base_quarter: s.parse("base_quarter")?,
            quarter_range: (s.parse("quarter_first")?, s.parse("quarter_last")?),
            coverage_year: s.parse("coverage_year")?,
            rent_bedrooms: s.parse("rent_bedrooms")?.unwrap_or(2),
            sim_n: s.parse("sim_n")?.unwrap_or(5000),
            sim_sigma: s.parse("sim_sigma")?.unwrap_or(0.1),
            sim_postcodes: s.parse("sim_postcodes")?.unwrap_or(1000),
            sim_truth: s.get("sim_truth").unwrap_or("rent_like").to_string(),
            execution: if parallel { Execution::Parallel } else { Execution::Sequential },
            format,
            dump_matrix: s.get("dump_matrix").map(str::to_string),
            out,
            canonical: String::new(),
        };
        cfg.check()?;
        Ok(RunConfig {
            canonical: cfg.canonical_text(),
            ..cfg
        })
    }

    fn check(&self) -> CliResult<()> {
        if !(self.radius_miles > 0.0) {
            return Err(CliError::Input(format!(
                "radius_miles must be positive, got {}",
                self.radius_miles
            )));
        }
        if self.lambda_grid.is_empty() || self.lambda_grid.iter().any(|l| !(*l > 0.0)) {
            return Err(CliError::Input("lambda_grid must hold positive values".into()));
        }
        if self.grid_points < 2 {
            return Err(CliError::Input("grid_points must be at least 2".into()));
        }
        if !["rent_like", "linear"].contains(&self.sim_truth.as_str()) {
            return Err(CliError::Input(format!(
                "sim_truth must be rent_like or linear, got `{}`",
                self.sim_truth
            )));
        }
        if !(self.sim_sigma >= 0.0) {
            return Err(CliError::Input("sim_sigma must be non-negative".into()));
        }
        Ok(())
    }

    /// Settings that affect results, one per line in a fixed order. Paths,
    /// the output directory and the display format are left out; inputs are
    /// identified by content in [`RunConfig::hash`].
    fn canonical_text(&self) -> String {
        let mut s = String::new();
        let b = self.sizes;
        let _ = writeln!(s, "centre={},{}", self.centre.0, self.centre.1);
        let _ = writeln!(s, "radius_miles={}", self.radius_miles);
        let _ = writeln!(
            s,
            "property_type={}",
            self.property_type.map_or("any", |t| t.as_str())
        );
        let _ = writeln!(
            s,
            "segments={},{},{},{},{}",
            b.beds, b.univariate, b.location, b.interaction, b.location_interaction
        );
        let _ = writeln!(s, "terms={:?}", self.terms);
        let _ = writeln!(s, "lambda_grid={:?}", self.lambda_grid);
        let _ = writeln!(s, "replicates={}", self.replicates);
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "bootstrap_terms={:?}", self.bootstrap_terms);
        let _ = writeln!(s, "grid_points={}", self.grid_points);
        for (c, (lo, hi)) in &self.grid_ranges {
            let _ = writeln!(s, "grid_{c}={lo}:{hi}");
        }
        let _ = writeln!(s, "base_year={:?}", self.base_year);
        let _ = writeln!(s, "base_quarter={:?}", self.base_quarter.map(|q| q.to_string()));
        let _ = writeln!(
            s,
            "quarters={:?},{:?}",
            self.quarter_range.0.map(|q| q.to_string()),
            self.quarter_range.1.map(|q| q.to_string())
        );
        let _ = writeln!(s, "coverage_year={:?}", self.coverage_year);
        let _ = writeln!(s, "rent_bedrooms={}", self.rent_bedrooms);
        let _ = writeln!(
            s,
            "sim={},{},{},{}",
            self.sim_n, self.sim_sigma, self.sim_postcodes, self.sim_truth
        );
        s
    }

    /// SHA-256 over the canonical settings and the contents of `inputs`.
    pub fn hash(&self, inputs: &[(&str, &Path)]) -> CliResult<String> {
        let mut h = Sha256::new();
        h.update(self.canonical.as_bytes());
        for (key, path) in inputs {
            let bytes = std::fs::read(path)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
            h.update(format!("{key}=").as_bytes());
            h.update(Sha256::digest(&bytes));
            h.update(b"\n");
        }
        Ok(hex(&h.finalize()))
    }

    /// A required input path, checked to exist.
    pub fn require<'a>(&self, key: &str, path: &'a Option<PathBuf>) -> CliResult<&'a Path> {
        let p = path
            .as_deref()
            .ok_or_else(|| CliError::Input(format!("`{key}` is not set")))?;
        exists(key, p)?;
        Ok(p)
    }
}

pub fn exists(key: &str, path: &Path) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Input(format!("{key} file not found: {}", path.display())))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(2 * bytes.len()), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(
            &path,
            "# comment\nlistings = data/l.csv\nseed = 4  # trailing\nradius_miles=5\n\n",
        )
        .unwrap();
        let mut s = Settings::from_file(&path).unwrap();
        s.set("seed", "9").unwrap();
        let c = RunConfig::from_settings(&s).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.radius_miles, 5.0);
        assert_eq!(c.listings.unwrap(), dir.path().join("data/l.csv"));
        assert_eq!(c.clean, PathBuf::from("out/clean_listings.csv"));
        assert_eq!(c.property_type, Some(PropertyType::Flat));
    }

    #[test]
    fn rejects_bad_settings() {
        let mut s = Settings::default();
        assert!(s.set("nonsense", "1").is_err());
        assert!(s.set_pair("seed").is_err());
        s.set("radius_miles", "0").unwrap();
        assert!(RunConfig::from_settings(&s).is_err());
        let mut s = Settings::default();
        s.set("grid_year", "2012-2014").unwrap();
        assert!(RunConfig::from_settings(&s).is_err());
    }

    #[test]
    fn hash_ignores_presentation_only() {
        let mut a = Settings::default();
        a.set("format", "json").unwrap();
        a.set("out", "elsewhere").unwrap();
        let b = Settings::default();
        let ha = RunConfig::from_settings(&a).unwrap().hash(&[]).unwrap();
        let hb = RunConfig::from_settings(&b).unwrap().hash(&[]).unwrap();
        assert_eq!(ha, hb);
        let mut c = Settings::default();
        c.set("seed", "2").unwrap();
        assert_ne!(RunConfig::from_settings(&c).unwrap().hash(&[]).unwrap(), hb);
        assert_eq!(ha.len(), 64);
    }
}

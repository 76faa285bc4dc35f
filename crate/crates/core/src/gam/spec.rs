use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::splines::{DEFAULT_DEGREE, DEFAULT_PENALTY_ORDER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Covariate {
    Beds,
    Deprivation,
    Year,
    Doy,
    Longitude,
    Latitude,
}

impl Covariate {
    pub const ALL: [Covariate; 6] = [
        Covariate::Beds,
        Covariate::Deprivation,
        Covariate::Year,
        Covariate::Doy,
        Covariate::Longitude,
        Covariate::Latitude,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Covariate::Beds => "beds",
            Covariate::Deprivation => "deprivation",
            Covariate::Year => "year",
            Covariate::Doy => "doy",
            Covariate::Longitude => "longitude",
            Covariate::Latitude => "latitude",
        }
    }
}

impl fmt::Display for Covariate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Covariate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Covariate::ALL
            .into_iter()
            .find(|c| c.as_str() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown covariate `{s}`")))
    }
}

/// Basis configuration for one variable of a term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginSpec {
    pub covariate: Covariate,
    pub segments: usize,
    pub degree: usize,
    /// Difference penalty order.
    pub order: usize,
}

impl MarginSpec {
    pub fn new(covariate: Covariate, segments: usize) -> Self {
        MarginSpec {
            covariate,
            segments,
            degree: DEFAULT_DEGREE,
            order: DEFAULT_PENALTY_ORDER,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    pub name: String,
    pub margins: Vec<MarginSpec>,
    pub interaction: bool,
    /// Fixed smoothing parameter for a main effect; `None` means select it.
    /// Interactions always inherit from their main effects.
    #[serde(default)]
    pub lambda: Option<f64>,
}

impl TermSpec {
    pub fn main(name: &str, margins: Vec<MarginSpec>) -> Self {
        TermSpec {
            name: name.into(),
            margins,
            interaction: false,
            lambda: None,
        }
    }

    pub fn interaction(name: &str, margins: Vec<MarginSpec>) -> Self {
        TermSpec {
            name: name.into(),
            margins,
            interaction: true,
            lambda: None,
        }
    }

    pub fn covariates(&self) -> Vec<Covariate> {
        self.margins.iter().map(|m| m.covariate).collect()
    }

    pub fn uses(&self, c: Covariate) -> bool {
        self.margins.iter().any(|m| m.covariate == c)
    }
}

/// Ordered list of smooth terms; the intercept is implicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub terms: Vec<TermSpec>,
}

impl ModelSpec {
    /// Intercept-only model.
    pub fn intercept_only() -> Self {
        ModelSpec { terms: Vec::new() }
    }

    /// Main effects of beds, deprivation, year, day of year and location,
    /// with year interactions for beds, deprivation and location.
    pub fn rent_model() -> Self {
        Self::rent_model_with(&BasisSizes::default())
    }

    pub fn rent_model_with(sizes: &BasisSizes) -> Self {
        use Covariate::*;
        let m = MarginSpec::new;
        let i = sizes.interaction;
        let li = sizes.location_interaction;
        ModelSpec {
            terms: vec![
                TermSpec::main("beds", vec![m(Beds, sizes.beds)]),
                TermSpec::main("deprivation", vec![m(Deprivation, sizes.univariate)]),
                TermSpec::main("year", vec![m(Year, sizes.univariate)]),
                TermSpec::main("doy", vec![m(Doy, sizes.univariate)]),
                TermSpec::main(
                    "location",
                    vec![m(Longitude, sizes.location), m(Latitude, sizes.location)],
                ),
                TermSpec::interaction("beds:year", vec![m(Beds, i), m(Year, i)]),
                TermSpec::interaction("deprivation:year", vec![m(Deprivation, i), m(Year, i)]),
                TermSpec::interaction(
                    "location:year",
                    vec![m(Longitude, li), m(Latitude, li), m(Year, li)],
                ),
            ],
        }
    }

    pub fn term(&self, name: &str) -> Result<&TermSpec> {
        self.terms
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| Error::UnknownTerm(name.into()))
    }

    pub fn main_effects(&self) -> impl Iterator<Item = &TermSpec> {
        self.terms.iter().filter(|t| !t.interaction)
    }

    /// Index of the main effect containing `c` among the main effects.
    pub fn main_effect_of(&self, c: Covariate) -> Option<usize> {
        self.main_effects().position(|t| t.uses(c))
    }

    pub fn validate(&self) -> Result<()> {
        let mut names = BTreeSet::new();
        let mut claimed = BTreeSet::new();
        for t in &self.terms {
            if !names.insert(t.name.as_str()) {
                return Err(Error::Config(format!("duplicate term `{}`", t.name)));
            }
            if t.margins.is_empty() {
                return Err(Error::Config(format!("term `{}` has no variables", t.name)));
            }
            let own: BTreeSet<_> = t.covariates().into_iter().collect();
            if own.len() != t.margins.len() {
                return Err(Error::Config(format!("term `{}` repeats a variable", t.name)));
            }
            for m in &t.margins {
                if m.segments == 0 || m.degree == 0 || m.order == 0 {
                    return Err(Error::Config(format!(
                        "term `{}`: segments, degree and penalty order must be positive",
                        t.name
                    )));
                }
                if m.order >= m.segments + m.degree {
                    return Err(Error::Config(format!(
                        "term `{}`: penalty order {} too high for {} basis functions",
                        t.name,
                        m.order,
                        m.segments + m.degree
                    )));
                }
            }
            if !t.interaction {
                if let Some(l) = t.lambda {
                    if !(l >= 0.0 && l.is_finite()) {
                        return Err(Error::Config(format!(
                            "term `{}`: smoothing parameter must be finite and nonnegative",
                            t.name
                        )));
                    }
                }
                for c in own {
                    if !claimed.insert(c) {
                        return Err(Error::Config(format!(
                            "{c} appears in more than one main effect"
                        )));
                    }
                }
            }
        }
        for t in self.terms.iter().filter(|t| t.interaction) {
            if t.margins.len() < 2 {
                return Err(Error::Config(format!(
                    "interaction `{}` needs at least two variables",
                    t.name
                )));
            }
            if t.lambda.is_some() {
                return Err(Error::Config(format!(
                    "interaction `{}` inherits its smoothing; remove the fixed value",
                    t.name
                )));
            }
            for c in t.covariates() {
                if c == Covariate::Doy {
                    return Err(Error::Config(format!(
                        "interaction `{}` uses doy, which is confounded with decimal year",
                        t.name
                    )));
                }
                if !claimed.contains(&c) {
                    return Err(Error::Config(format!(
                        "interaction `{}` uses {c}, which has no main effect",
                        t.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// The model with `name` removed. Removing a main effect also removes
    /// every interaction that involves its variables.
    pub fn without(&self, name: &str) -> Result<ModelSpec> {
        let target = self.term(name)?;
        let dropped: Vec<Covariate> = if target.interaction {
            Vec::new()
        } else {
            target.covariates()
        };
        Ok(ModelSpec {
            terms: self
                .terms
                .iter()
                .filter(|t| t.name != name)
                .filter(|t| !(t.interaction && dropped.iter().any(|&c| t.uses(c))))
                .cloned()
                .collect(),
        })
    }
}

/// Segment counts for the default rent model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisSizes {
    pub beds: usize,
    pub univariate: usize,
    /// Per direction of the location surface.
    pub location: usize,
    /// Per margin of the two-way interactions.
    pub interaction: usize,
    /// Per margin of the location by year interaction.
    pub location_interaction: usize,
}

impl Default for BasisSizes {
    fn default() -> Self {
        BasisSizes {
            beds: 10,
            univariate: 10,
            location: 8,
            interaction: 5,
            location_interaction: 5,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Covariate::*;

    #[test]
    fn rent_model_is_valid() {
        let s = ModelSpec::rent_model();
        s.validate().unwrap();
        assert_eq!(s.main_effects().count(), 5);
        assert_eq!(s.main_effect_of(Latitude), Some(4));
        assert_eq!(s.main_effect_of(Year), Some(2));
    }

    #[test]
    fn doy_interactions_rejected() {
        let mut s = ModelSpec::rent_model();
        s.terms.push(TermSpec::interaction(
            "doy:year",
            vec![MarginSpec::new(Doy, 4), MarginSpec::new(Year, 4)],
        ));
        assert!(s.validate().unwrap_err().to_string().contains("doy"));
    }

    #[test]
    fn interactions_need_main_effects() {
        let s = ModelSpec {
            terms: vec![
                TermSpec::main("beds", vec![MarginSpec::new(Beds, 4)]),
                TermSpec::interaction(
                    "beds:year",
                    vec![MarginSpec::new(Beds, 4), MarginSpec::new(Year, 4)],
                ),
            ],
        };
        assert!(s.validate().unwrap_err().to_string().contains("year"));
    }

    #[test]
    fn removal_rules() {
        let s = ModelSpec::rent_model();
        let no_by = s.without("beds:year").unwrap();
        assert_eq!(no_by.terms.len(), 7);
        let no_year = s.without("year").unwrap();
        let names: Vec<&str> = no_year.terms.iter().map(|t| t.name.as_str()).collect();
        assert_eq!(names, vec!["beds", "deprivation", "doy", "location"]);
        let no_loc = s.without("location").unwrap();
        assert!(no_loc.term("location:year").is_err());
        assert!(matches!(s.without("nope"), Err(Error::UnknownTerm(_))));
    }

    #[test]
    fn covariate_names_round_trip() {
        for c in Covariate::ALL {
            assert_eq!(c.as_str().parse::<Covariate>().unwrap(), c);
        }
    }
}

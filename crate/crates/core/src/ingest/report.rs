use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

/// Why a record left the pipeline. Each record gets exactly one reason, the
/// one from the first stage that rejected it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exclusion {
    Duplicated,
    MissingDates,
    Invalid,
}

/// Exclusion counts for one calendar year of `start_date`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearCounts {
    pub duplicated: usize,
    pub missing_dates: usize,
    pub invalid: usize,
}

/// Partition of the parsed input into exclusion categories.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CleanReport {
    pub total: usize,
    pub duplicated: usize,
    pub missing_dates: usize,
    pub invalid: usize,
    pub included: usize,
    /// Rows the parser rejected; reported alongside but not part of `total`.
    pub malformed: usize,
    /// Keyed by start year; `None` when the start date is absent.
    #[serde(with = "year_map")]
    pub by_year: BTreeMap<Option<i32>, YearCounts>,
}

/// Percentages of the original total, to one decimal place.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Percentages {
    pub duplicated: f64,
    pub missing_dates: f64,
    pub invalid: f64,
    pub total_excluded: f64,
    pub included: f64,
}

/// Rounds to one decimal place, halves away from zero.
pub fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

impl CleanReport {
    /// A report from category totals alone, with no per-year breakdown.
    pub fn from_counts(duplicated: usize, missing_dates: usize, invalid: usize, included: usize) -> Self {
        CleanReport {
            total: duplicated + missing_dates + invalid + included,
            duplicated,
            missing_dates,
            invalid,
            included,
            ..Default::default()
        }
    }

    pub fn record_exclusion(&mut self, reason: Exclusion, year: Option<i32>) {
        self.total += 1;
        let y = self.by_year.entry(year).or_default();
        match reason {
            Exclusion::Duplicated => {
                self.duplicated += 1;
                y.duplicated += 1;
            }
            Exclusion::MissingDates => {
                self.missing_dates += 1;
                y.missing_dates += 1;
            }
            Exclusion::Invalid => {
                self.invalid += 1;
                y.invalid += 1;
            }
        }
    }

    pub fn record_included(&mut self) {
        self.total += 1;
        self.included += 1;
    }

    pub fn excluded(&self) -> usize {
        self.duplicated + self.missing_dates + self.invalid
    }

    /// Combines reports from disjoint chunks.
    pub fn merge(&mut self, other: &CleanReport) {
        self.total += other.total;
        self.duplicated += other.duplicated;
        self.missing_dates += other.missing_dates;
        self.invalid += other.invalid;
        self.included += other.included;
        self.malformed += other.malformed;
        for (year, c) in &other.by_year {
            let y = self.by_year.entry(*year).or_default();
            y.duplicated += c.duplicated;
            y.missing_dates += c.missing_dates;
            y.invalid += c.invalid;
        }
    }

    pub fn percent(&self, count: usize) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        round1(100.0 * count as f64 / self.total as f64)
    }

    pub fn percentages(&self) -> Percentages {
        Percentages {
            duplicated: self.percent(self.duplicated),
            missing_dates: self.percent(self.missing_dates),
            invalid: self.percent(self.invalid),
            total_excluded: self.percent(self.excluded()),
            included: self.percent(self.included),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v["percentages"] = serde_json::to_value(self.percentages()).expect("percentages serialize");
        v
    }

    /// Plain-text table: reasons with counts and percentages, then the
    /// per-year breakdown.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let rows = [
            ("Duplicated", self.duplicated),
            ("Missing dates", self.missing_dates),
            ("Invalid", self.invalid),
        ];
        let _ = writeln!(s, "{:<16}{:>16}{:>10}", "Reason", "Number excluded", "Percent");
        let rule = "-".repeat(42);
        let _ = writeln!(s, "{rule}");
        let line = |s: &mut String, label: &str, n: usize| {
            let _ = writeln!(
                s,
                "{label:<16}{:>16}{:>9.1}%",
                thousands(n),
                self.percent(n)
            );
        };
        for (label, n) in rows {
            line(&mut s, label, n);
        }
        let _ = writeln!(s, "{rule}");
        line(&mut s, "Total excluded", self.excluded());
        line(&mut s, "Included", self.included);
        let _ = writeln!(s, "{rule}");
        if self.malformed > 0 {
            let _ = writeln!(s, "Malformed rows (not parsed): {}", thousands(self.malformed));
        }
        if !self.by_year.is_empty() {
            let _ = writeln!(s);
            let _ = write!(s, "{:<16}", "Year");
            for year in self.by_year.keys() {
                let label = year.map_or_else(|| "Missing".to_string(), |y| y.to_string());
                let _ = write!(s, "{label:>10}");
            }
            let _ = writeln!(s);
            let pick: [(&str, YearField); 3] = [
                ("Duplicated", |c| c.duplicated),
                ("Missing dates", |c| c.missing_dates),
                ("Invalid", |c| c.invalid),
            ];
            for (label, get) in pick {
                let _ = write!(s, "{label:<16}");
                for c in self.by_year.values() {
                    let _ = write!(s, "{:>10}", get(c));
                }
                let _ = writeln!(s);
            }
        }
        s
    }
}

type YearField = fn(&YearCounts) -> usize;

fn thousands(n: usize) -> String {
    let digits = n.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

mod year_map {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::YearCounts;

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<Option<i32>, YearCounts>,
        ser: S,
    ) -> Result<S::Ok, S::Error> {
        let as_strings: BTreeMap<String, YearCounts> = map
            .iter()
            .map(|(k, v)| (k.map_or_else(|| "missing".into(), |y| y.to_string()), *v))
            .collect();
        as_strings.serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        de: D,
    ) -> Result<BTreeMap<Option<i32>, YearCounts>, D::Error> {
        let raw = BTreeMap::<String, YearCounts>::deserialize(de)?;
        raw.into_iter()
            .map(|(k, v)| {
                if k == "missing" {
                    Ok((None, v))
                } else {
                    k.parse::<i32>()
                        .map(|y| (Some(y), v))
                        .map_err(serde::de::Error::custom)
                }
            })
            .collect()
    }
}

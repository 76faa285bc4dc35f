use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{Covariate, FittedModel, ModelRow};
use crate::error::{Error, Result};

/// Fitted log price for each row: intercept plus every term.
pub fn predict(model: &FittedModel, rows: &[ModelRow]) -> Result<Vec<f64>> {
    let mut out = DVector::from_element(rows.len(), model.intercept());
    for t in &model.terms {
        let b = t.basis.evaluate(&t.basis.columns(rows), &t.z)?;
        out += b * model.coefficients.rows(t.start, t.width);
    }
    Ok(out.iter().copied().collect())
}

/// Where to evaluate a term.
#[derive(Debug, Clone)]
pub enum SurfaceGrid<'a> {
    /// At the covariate values of these rows.
    Observed(&'a [ModelRow]),
    /// `m` equally spaced values per variable across the fitted domain,
    /// crossed over all of the term's variables (last varies fastest).
    Regular(usize),
    /// Explicit values, one column per variable.
    Columns(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectSurface {
    pub term: String,
    pub covariates: Vec<Covariate>,
    /// One column of evaluation points per variable.
    pub columns: Vec<Vec<f64>>,
    pub effect: Vec<f64>,
    /// Pointwise standard errors.
    pub se: Vec<f64>,
    /// `|effect| > 2 se`.
    pub significant: Vec<bool>,
}

impl EffectSurface {
    pub fn len(&self) -> usize {
        self.effect.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effect.is_empty()
    }

    /// Delimited text with header `var1[,var2...],effect,se,significant`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let to_err = |e: csv::Error| Error::Numerical(format!("writing surface: {e}"));
        let mut header: Vec<String> = self.covariates.iter().map(|c| c.to_string()).collect();
        header.extend(["effect", "se", "significant"].map(String::from));
        w.write_record(&header).map_err(to_err)?;
        for i in 0..self.len() {
            let mut rec: Vec<String> = self.columns.iter().map(|c| c[i].to_string()).collect();
            rec.push(self.effect[i].to_string());
            rec.push(self.se[i].to_string());
            rec.push(self.significant[i].to_string());
            w.write_record(&rec).map_err(to_err)?;
        }
        w.flush().map_err(|e| Error::Numerical(format!("writing surface: {e}")))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

fn regular_columns(model: &FittedModel, term: &str, m: usize) -> Result<Vec<Vec<f64>>> {
    if m < 2 {
        return Err(Error::InvalidArgument("a regular grid needs at least 2 points".into()));
    }
    let t = model.term(term)?;
    let axes: Vec<Vec<f64>> = t
        .basis
        .margins
        .iter()
        .map(|mg| {
            let (lo, hi) = mg.knots.domain();
            (0..m)
                .map(|i| if i == m - 1 { hi } else { lo + (hi - lo) * i as f64 / (m - 1) as f64 })
                .collect()
        })
        .collect();
    let total = m.pow(axes.len() as u32);
    let mut columns = vec![Vec::with_capacity(total); axes.len()];
    for flat in 0..total {
        let mut rem = flat;
        for k in (0..axes.len()).rev() {
            columns[k].push(axes[k][rem % m]);
            rem /= m;
        }
    }
    Ok(columns)
}

/// A term's effect and pointwise standard errors on a grid.
pub fn effect_surface(model: &FittedModel, term: &str, grid: SurfaceGrid<'_>) -> Result<EffectSurface> {
    let t = model.term(term)?;
    let columns = match grid {
        SurfaceGrid::Observed(rows) => t.basis.columns(rows),
        SurfaceGrid::Regular(m) => regular_columns(model, term, m)?,
        SurfaceGrid::Columns(c) => c,
    };
    let g: DMatrix<f64> = t.basis.evaluate(&columns, &t.z)?;
    let theta = model.coefficients.rows(t.start, t.width);
    let v = model.covariance.view((t.start, t.start), (t.width, t.width));
    let effect = &g * theta;
    let gv = &g * v;
    let se: Vec<f64> = (0..g.nrows())
        .map(|i| gv.row(i).dot(&g.row(i)).max(0.0).sqrt())
        .collect();
    let significant = effect.iter().zip(&se).map(|(e, s)| e.abs() > 2.0 * s).collect();
    Ok(EffectSurface {
        term: term.into(),
        covariates: t.basis.covariates(),
        columns,
        effect: effect.iter().copied().collect(),
        se,
        significant,
    })
}

/// Multiplicative change in price per unit step of a single-variable term
/// between `lo` and `hi`: `exp((f(hi) − f(lo)) / (hi − lo))`.
pub fn per_unit_multiplier(model: &FittedModel, term: &str, lo: f64, hi: f64) -> Result<f64> {
    if !(hi > lo) {
        return Err(Error::InvalidArgument(format!("need lo < hi, got {lo}, {hi}")));
    }
    let s = effect_surface(model, term, SurfaceGrid::Columns(vec![vec![lo, hi]]))?;
    Ok(((s.effect[1] - s.effect[0]) / (hi - lo)).exp())
}

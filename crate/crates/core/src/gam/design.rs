use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{Covariate, ModelRow, ModelSpec, TermSpec};
use crate::error::{Error, Result};
use crate::splines::{
    bspline_basis, difference_penalty, interaction_constraint_transform, make_knots,
    sum_to_zero_complement, tensor_basis, tensor_penalty, ConstraintTransform, KnotVector,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Margin {
    pub covariate: Covariate,
    pub knots: KnotVector,
    pub order: usize,
}

/// How a term's raw coefficients are constrained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// The effect sums to zero over the training rows; holds the raw basis
    /// column sums that define the constraint.
    ObservationSums(Vec<f64>),
    /// Every 1-D slice of the coefficient array sums to zero.
    SliceSums,
}

/// Everything needed to evaluate one term's constrained basis at new
/// covariate values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermBasis {
    pub name: String,
    pub interaction: bool,
    pub margins: Vec<Margin>,
    pub constraint: Constraint,
}

impl TermBasis {
    pub fn covariates(&self) -> Vec<Covariate> {
        self.margins.iter().map(|m| m.covariate).collect()
    }

    pub fn raw_dims(&self) -> Vec<usize> {
        self.margins.iter().map(|m| m.knots.dim()).collect()
    }

    /// Tensor B-spline basis; `columns[k]` holds the values of margin `k`.
    pub fn raw_basis(&self, columns: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        if columns.len() != self.margins.len() {
            return Err(Error::InvalidArgument(format!(
                "term `{}` takes {} variables, got {}",
                self.name,
                self.margins.len(),
                columns.len()
            )));
        }
        let marginal = self
            .margins
            .iter()
            .zip(columns)
            .map(|(m, x)| bspline_basis(x, &m.knots))
            .collect::<Result<Vec<_>>>()?;
        Ok(tensor_basis(&marginal)?.values)
    }

    pub fn transform(&self) -> Result<ConstraintTransform> {
        match &self.constraint {
            Constraint::ObservationSums(sums) => {
                let c = DVector::from_column_slice(sums);
                let z = sum_to_zero_complement(&c)
                    .map_err(|_| Error::RankDeficient(self.name.clone()))?;
                Ok(ConstraintTransform {
                    z,
                    constraint: DMatrix::from_row_slice(1, sums.len(), sums),
                    description: "sum to zero over observations".into(),
                })
            }
            Constraint::SliceSums => interaction_constraint_transform(&self.raw_dims()),
        }
    }

    /// Raw-coefficient penalties, one per margin, lifted to the tensor size.
    pub fn raw_penalties(&self) -> Result<Vec<DMatrix<f64>>> {
        let dims = self.raw_dims();
        let marginal = self
            .margins
            .iter()
            .map(|m| difference_penalty(m.knots.dim(), m.order))
            .collect::<Result<Vec<_>>>()?;
        Ok(tensor_penalty(&marginal, &dims)?
            .into_iter()
            .map(|p| p.matrix)
            .collect())
    }

    /// Constrained basis at the given covariate values.
    pub fn evaluate(&self, columns: &[Vec<f64>], z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        Ok(self.raw_basis(columns)? * z)
    }

    /// Pulls this term's covariate columns out of `rows`.
    pub fn columns(&self, rows: &[ModelRow]) -> Vec<Vec<f64>> {
        covariate_columns(rows, &self.covariates())
    }
}

pub(crate) fn covariate_columns(rows: &[ModelRow], covariates: &[Covariate]) -> Vec<Vec<f64>> {
    covariates
        .iter()
        .map(|&c| rows.iter().map(|r| r.covariate(c)).collect())
        .collect()
}

#[derive(Debug, Clone)]
pub struct DesignTerm {
    pub basis: TermBasis,
    /// First column of the block in the design matrix.
    pub start: usize,
    pub width: usize,
    pub transform: ConstraintTransform,
    /// Penalties in the constrained parameterization, `Zᵀ P Z`.
    pub penalties: Vec<DMatrix<f64>>,
    /// Smoothing parameter index for each penalty.
    pub params: Vec<usize>,
}

/// Design matrix with an intercept in column 0 followed by one column
/// block per term.
#[derive(Debug, Clone)]
pub struct Design {
    pub x: DMatrix<f64>,
    pub terms: Vec<DesignTerm>,
    /// One smoothing parameter per main effect, named after it.
    pub params: Vec<String>,
    pub spec: ModelSpec,
}

impl Design {
    pub fn nrows(&self) -> usize {
        self.x.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.x.ncols()
    }

    pub fn term(&self, name: &str) -> Result<&DesignTerm> {
        self.terms
            .iter()
            .find(|t| t.basis.name == name)
            .ok_or_else(|| Error::UnknownTerm(name.into()))
    }

    /// `S_λ`, the weighted sum of every penalty embedded at its block.
    pub fn penalty(&self, lambdas: &[f64]) -> Result<DMatrix<f64>> {
        if lambdas.len() != self.params.len() {
            return Err(Error::InvalidArgument(format!(
                "{} smoothing parameters for {} main effects",
                lambdas.len(),
                self.params.len()
            )));
        }
        let p = self.ncols();
        let mut s = DMatrix::zeros(p, p);
        for t in &self.terms {
            for (pen, &k) in t.penalties.iter().zip(&t.params) {
                let mut view = s.view_mut((t.start, t.start), (t.width, t.width));
                view += pen * lambdas[k];
            }
        }
        Ok(s)
    }

    /// Fixed smoothing parameters from the spec, `None` where selected.
    /// Smoothing parameters in `params` order, looked up by name.
    pub fn lambdas_from(&self, lambdas: &BTreeMap<String, f64>) -> Result<Vec<f64>> {
        self.params
            .iter()
            .map(|p| {
                lambdas.get(p).copied().ok_or_else(|| {
                    Error::Config(format!("no smoothing parameter supplied for `{p}`"))
                })
            })
            .collect()
    }

    pub fn fixed_lambdas(&self) -> Vec<Option<f64>> {
        self.spec.main_effects().map(|t| t.lambda).collect()
    }
}

/// Observed range of a covariate.
pub fn domain_of(rows: &[ModelRow], c: Covariate) -> (f64, f64) {
    rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
        let v = r.covariate(c);
        (lo.min(v), hi.max(v))
    })
}

fn term_basis(rows: &[ModelRow], t: &TermSpec) -> Result<(TermBasis, DMatrix<f64>)> {
    let margins = t
        .margins
        .iter()
        .map(|m| {
            let (lo, hi) = domain_of(rows, m.covariate);
            let knots = make_knots(lo, hi, m.segments, m.degree).map_err(|e| {
                Error::InvalidArgument(format!("term `{}`, {}: {e}", t.name, m.covariate))
            })?;
            Ok(Margin {
                covariate: m.covariate,
                knots,
                order: m.order,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut basis = TermBasis {
        name: t.name.clone(),
        interaction: t.interaction,
        margins,
        constraint: Constraint::SliceSums,
    };
    let raw = basis.raw_basis(&basis.columns(rows))?;
    if !t.interaction {
        basis.constraint = Constraint::ObservationSums(raw.row_sum().iter().copied().collect());
    }
    Ok((basis, raw))
}

/// Smallest to largest eigenvalue ratio below which a block counts as
/// unidentified.
const RANK_TOL: f64 = 1e-10;

/// Assembles the constrained design for `spec` on `rows`.
pub fn build_design(rows: &[ModelRow], spec: &ModelSpec) -> Result<Design> {
    spec.validate()?;
    if rows.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 rows to fit, got {}",
            rows.len()
        )));
    }
    let n = rows.len();
    let mut blocks = Vec::with_capacity(spec.terms.len());
    let mut start = 1;
    for t in &spec.terms {
        let (basis, raw) = term_basis(rows, t)?;
        let transform = basis.transform()?;
        let values = raw * &transform.z;
        let penalties: Vec<DMatrix<f64>> = basis
            .raw_penalties()?
            .iter()
            .map(|p| transform.z.tr_mul(p) * &transform.z)
            .collect();
        let params = if t.interaction {
            t.covariates()
                .iter()
                .map(|&c| spec.main_effect_of(c).expect("validated"))
                .collect()
        } else {
            let own = spec.main_effects().position(|m| m.name == t.name).expect("main");
            vec![own; penalties.len()]
        };
        check_identified(&t.name, &values, &penalties)?;
        let width = values.ncols();
        blocks.push((
            DesignTerm {
                basis,
                start,
                width,
                transform,
                penalties,
                params,
            },
            values,
        ));
        start += width;
    }

    let mut x = DMatrix::zeros(n, start);
    x.column_mut(0).fill(1.0);
    for (t, values) in &blocks {
        x.view_mut((0, t.start), (n, t.width)).copy_from(values);
    }
    Ok(Design {
        x,
        terms: blocks.into_iter().map(|(t, _)| t).collect(),
        params: spec.main_effects().map(|t| t.name.clone()).collect(),
        spec: spec.clone(),
    })
}

/// A block is identified when data and penalty together pin down every
/// coefficient direction.
fn check_identified(name: &str, values: &DMatrix<f64>, penalties: &[DMatrix<f64>]) -> Result<()> {
    let scaled = |m: DMatrix<f64>| {
        let s = m.diagonal().amax();
        if s > 0.0 {
            m / s
        } else {
            m
        }
    };
    let mut m = scaled(values.tr_mul(values));
    for p in penalties {
        m += scaled(p.clone());
    }
    let eig = m.symmetric_eigen().eigenvalues;
    let (lo, hi) = (eig.min(), eig.max());
    if !(hi > 0.0) || lo < RANK_TOL * hi {
        return Err(Error::RankDeficient(name.into()));
    }
    Ok(())
}

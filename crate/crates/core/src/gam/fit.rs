use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{Design, ModelSpec, TermBasis};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{cross_product, cross_vector, Cholesky};

/// `n log(rss / n) + k log(n)`.
pub fn bic(rss: f64, n: usize, k: f64) -> Result<f64> {
    if rss == 0.0 {
        return Err(Error::Numerical(
            "zero residual sum of squares: the fit interpolates".into(),
        ));
    }
    if !(rss > 0.0) || n == 0 || !(k >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bic needs rss > 0, n >= 1, k >= 0 (got {rss}, {n}, {k})"
        )));
    }
    let n = n as f64;
    Ok(n * (rss / n).ln() + k * n.ln())
}

/// Residual sums of squares below this fraction of `‖y‖²` are treated as
/// exact fits when scoring models, so roundoff cannot drive the criterion.
pub const RSS_FLOOR: f64 = 1e-20;

#[derive(Debug, Clone)]
pub struct FittedTerm {
    pub basis: TermBasis,
    pub start: usize,
    pub width: usize,
    /// Constraint transform: raw coefficients are `z · θ`.
    pub z: DMatrix<f64>,
    /// Smoothing parameter on each penalty of the term.
    pub lambdas: Vec<f64>,
    pub edf: f64,
}

#[derive(Debug, Clone)]
pub struct FittedModel {
    pub spec: ModelSpec,
    pub terms: Vec<FittedTerm>,
    /// Main-effect names, one per smoothing parameter.
    pub params: Vec<String>,
    pub lambdas: Vec<f64>,
    /// Intercept first, then each term's constrained coefficients.
    pub coefficients: DVector<f64>,
    pub fitted: DVector<f64>,
    pub rss: f64,
    pub n: usize,
    /// Effective degrees of freedom, `trace(A⁻¹ XᵀX)` with `A = XᵀX + S_λ`.
    pub edf: f64,
    pub sigma2: f64,
    pub bic: f64,
    /// `σ̂² A⁻¹`.
    pub covariance: DMatrix<f64>,
    pub(crate) factor: Cholesky,
    pub(crate) a_inverse: DMatrix<f64>,
    pub(crate) rss_floor: f64,
}

impl FittedModel {
    pub fn intercept(&self) -> f64 {
        self.coefficients[0]
    }

    pub fn term(&self, name: &str) -> Result<&FittedTerm> {
        self.terms
            .iter()
            .find(|t| t.basis.name == name)
            .ok_or_else(|| Error::UnknownTerm(name.into()))
    }

    /// Constrained coefficients `θ` of one term.
    pub fn term_coefficients(&self, name: &str) -> Result<DVector<f64>> {
        let t = self.term(name)?;
        Ok(self.coefficients.rows(t.start, t.width).into_owned())
    }

    /// Raw tensor B-spline coefficients `z θ` of one term.
    pub fn raw_coefficients(&self, name: &str) -> Result<DVector<f64>> {
        Ok(&self.term(name)?.z * self.term_coefficients(name)?)
    }

    pub fn term_covariance(&self, name: &str) -> Result<DMatrix<f64>> {
        let t = self.term(name)?;
        Ok(self
            .covariance
            .view((t.start, t.start), (t.width, t.width))
            .into_owned())
    }

    /// Smoothing parameters keyed by main-effect name.
    pub fn lambda_map(&self) -> BTreeMap<String, f64> {
        self.params.iter().cloned().zip(self.lambdas.iter().copied()).collect()
    }

    /// BIC recomputed from the stored RSS, n and k.
    pub fn recomputed_bic(&self) -> Result<f64> {
        bic(self.rss.max(self.rss_floor), self.n, self.edf)
    }

    pub fn summary(&self) -> ModelSummary {
        ModelSummary {
            spec: self.spec.clone(),
            lambdas: self.lambda_map(),
            edf: self.terms.iter().map(|t| (t.basis.name.clone(), t.edf)).collect(),
            rss: self.rss,
            n: self.n,
            k: self.edf,
            sigma2: self.sigma2,
            bic: self.bic,
            intercept: self.intercept(),
            coefficients: self
                .terms
                .iter()
                .map(|t| {
                    let c = self.coefficients.rows(t.start, t.width);
                    (t.basis.name.clone(), c.iter().copied().collect())
                })
                .collect(),
            terms: self.terms.iter().map(|t| t.basis.clone()).collect(),
        }
    }
}

/// Serializable record of a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub spec: ModelSpec,
    pub lambdas: BTreeMap<String, f64>,
    pub edf: BTreeMap<String, f64>,
    pub rss: f64,
    pub n: usize,
    pub k: f64,
    pub sigma2: f64,
    pub bic: f64,
    pub intercept: f64,
    pub coefficients: BTreeMap<String, Vec<f64>>,
    pub terms: Vec<TermBasis>,
}

/// `XᵀX` and `Xᵀy` for one design and response, shared by every fit that
/// only changes the smoothing parameters.
#[derive(Debug, Clone)]
pub struct PenalizedSystem<'a> {
    pub design: &'a Design,
    pub y: DVector<f64>,
    pub gram: DMatrix<f64>,
    pub xty: DVector<f64>,
}

impl<'a> PenalizedSystem<'a> {
    pub fn new(design: &'a Design, y: &[f64], exec: Execution) -> Result<Self> {
        if y.len() != design.nrows() {
            return Err(Error::InvalidArgument(format!(
                "{} responses for {} design rows",
                y.len(),
                design.nrows()
            )));
        }
        if let Some(v) = y.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite response {v}")));
        }
        let y = DVector::from_column_slice(y);
        Ok(PenalizedSystem {
            design,
            gram: cross_product(&design.x, exec),
            xty: cross_vector(&design.x, &y, exec),
            y,
        })
    }

    pub fn fit(&self, lambdas: &[f64]) -> Result<FittedModel> {
        let d = self.design;
        if let Some(l) = lambdas.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
            return Err(Error::InvalidArgument(format!("smoothing parameter {l}")));
        }
        let a = &self.gram + d.penalty(lambdas)?;
        let factor = Cholesky::with_ridge_retry(&a)?;
        let beta = factor.solve(&self.xty);
        let fitted = &d.x * &beta;
        let rss = (&self.y - &fitted).norm_squared();
        let a_inverse = factor.inverse();

        // diag(A⁻¹ XᵀX) gives the per-coefficient influence
        let p = d.ncols();
        let influence: Vec<f64> = (0..p)
            .map(|i| a_inverse.row(i).dot(&self.gram.column(i).transpose()))
            .collect();
        let edf: f64 = influence.iter().sum();
        let n = d.nrows();
        if !(edf < n as f64) {
            return Err(Error::Numerical(format!(
                "no residual degrees of freedom (n = {n}, k = {edf:.3})"
            )));
        }
        let sigma2 = rss / (n as f64 - edf);
        let rss_floor = RSS_FLOOR * self.y.norm_squared().max(f64::MIN_POSITIVE);
        let bic_value = bic(rss.max(rss_floor), n, edf)?;

        let terms = d
            .terms
            .iter()
            .map(|t| FittedTerm {
                basis: t.basis.clone(),
                start: t.start,
                width: t.width,
                z: t.transform.z.clone(),
                lambdas: t.params.iter().map(|&k| lambdas[k]).collect(),
                edf: influence[t.start..t.start + t.width].iter().sum(),
            })
            .collect();
        Ok(FittedModel {
            spec: d.spec.clone(),
            terms,
            params: d.params.clone(),
            lambdas: lambdas.to_vec(),
            coefficients: beta,
            fitted,
            rss,
            n,
            edf,
            sigma2,
            bic: bic_value,
            covariance: &a_inverse * sigma2,
            factor,
            a_inverse,
            rss_floor,
        })
    }
}

/// Penalized least squares fit at fixed smoothing parameters, one per main
/// effect in spec order.
pub fn fit_pls(design: &Design, y: &[f64], lambdas: &[f64], exec: Execution) -> Result<FittedModel> {
    PenalizedSystem::new(design, y, exec)?.fit(lambdas)
}

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{build_design, fit_pls, ModelRow, ModelSpec};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::symmetric_pinv;

/// Smallest replicate count accepted; gives p-value resolution of 0.05.
pub const MIN_REPLICATES: usize = 19;
/// Relative eigenvalue cutoff for the generalized inverse of a covariance block.
const PINV_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapTest {
    pub term: String,
    pub replicates: usize,
    pub seed: u64,
    pub lambdas: BTreeMap<String, f64>,
    /// Wald statistic of the fit to the observed data.
    pub observed: f64,
    /// Statistics of the retained replicates, in replicate order.
    pub statistics: Vec<f64>,
    /// Replicates dropped for a non-finite statistic.
    pub discarded: usize,
    pub p_value: f64,
}

/// `(1 + #{W_b ≥ W_obs}) / (B + 1)`.
pub fn bootstrap_p_value(observed: f64, statistics: &[f64]) -> f64 {
    let exceed = statistics.iter().filter(|&&w| w >= observed).count();
    (1 + exceed) as f64 / (statistics.len() + 1) as f64
}

/// `θᵀ V⁻ θ` with `V⁻` the generalized inverse.
pub fn wald_statistic(theta: &DVector<f64>, covariance: &DMatrix<f64>) -> f64 {
    (theta.transpose() * symmetric_pinv(covariance, PINV_TOL) * theta)[(0, 0)]
}

/// Independent standard-normal stream for replicate `b`.
pub(crate) fn replicate_rng(seed: u64, b: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(b as u64);
    rng
}

/// Parametric bootstrap test of one term. The reduced model (without the
/// term) is fitted and simulated from; the full model is refitted to each
/// simulated response at the fixed `lambdas`, and the term's Wald statistic
/// compared with the observed one.
pub fn bootstrap_term_test(
    spec: &ModelSpec,
    rows: &[ModelRow],
    term: &str,
    lambdas: &BTreeMap<String, f64>,
    replicates: usize,
    seed: u64,
    exec: Execution,
) -> Result<BootstrapTest> {
    if replicates < MIN_REPLICATES {
        return Err(Error::InvalidArgument(format!(
            "bootstrap needs at least {MIN_REPLICATES} replicates, got {replicates}"
        )));
    }
    spec.term(term)?;
    let y: Vec<f64> = rows.iter().map(|r| r.logprice).collect();

    let full_design = build_design(rows, spec)?;
    let full = fit_pls(&full_design, &y, &full_design.lambdas_from(lambdas)?, exec)?;
    let t = full.term(term)?;
    let (start, width) = (t.start, t.width);
    let observed = wald_statistic(
        &full.coefficients.rows(start, width).into_owned(),
        &full.covariance.view((start, start), (width, width)).into_owned(),
    );

    let reduced_spec = spec.without(term)?;
    let reduced_design = build_design(rows, &reduced_spec)?;
    let reduced = fit_pls(
        &reduced_design,
        &y,
        &reduced_design.lambdas_from(lambdas)?,
        exec,
    )?;
    let noise_sd = reduced.sigma2.sqrt();

    // V = σ̂² A⁻¹, so V⁻ = A_blk⁻ / σ̂² and only σ̂² varies by replicate
    let a_block = full.a_inverse.view((start, start), (width, width)).into_owned();
    let a_block_pinv = symmetric_pinv(&a_block, PINV_TOL);
    let x = &full_design.x;
    let n = rows.len() as f64;
    let dof = n - full.edf;

    let stats: Vec<Option<f64>> = exec.map_indexed(replicates, |b| {
        let mut rng = replicate_rng(seed, b);
        let y_star = DVector::from_iterator(
            rows.len(),
            reduced.fitted.iter().map(|mu| {
                let z: f64 = StandardNormal.sample(&mut rng);
                mu + noise_sd * z
            }),
        );
        let beta = full.factor.solve(&x.tr_mul(&y_star));
        let rss = (&y_star - x * &beta).norm_squared();
        let sigma2 = rss / dof;
        let theta = beta.rows(start, width);
        let w = (theta.transpose() * &a_block_pinv * theta)[(0, 0)] / sigma2;
        w.is_finite().then_some(w)
    });

    let statistics: Vec<f64> = stats.iter().flatten().copied().collect();
    let discarded = replicates - statistics.len();
    if discarded * 10 > replicates {
        return Err(Error::Numerical(format!(
            "{discarded} of {replicates} bootstrap replicates gave non-finite statistics"
        )));
    }
    Ok(BootstrapTest {
        term: term.into(),
        replicates,
        seed,
        lambdas: lambdas.clone(),
        p_value: bootstrap_p_value(observed, &statistics),
        observed,
        statistics,
        discarded,
    })
}

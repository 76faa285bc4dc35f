use std::collections::HashMap;

use super::{Design, FittedModel, PenalizedSystem};
use crate::error::{Error, Result};
use crate::exec::Execution;

pub const MAX_SWEEPS: usize = 10;

/// 13 values log-spaced from 1e-3 to 1e6.
pub fn default_grid() -> Vec<f64> {
    (0..13).map(|i| 10f64.powf(-3.0 + 0.75 * i as f64)).collect()
}

/// One grid per smoothing parameter: `grid` where the spec leaves the value
/// to be selected, the fixed value otherwise.
pub fn grids_for(design: &Design, grid: &[f64]) -> Vec<Vec<f64>> {
    design
        .fixed_lambdas()
        .into_iter()
        .map(|fixed| fixed.map_or_else(|| grid.to_vec(), |l| vec![l]))
        .collect()
}

#[derive(Debug, Clone)]
pub struct Selection {
    pub lambdas: Vec<f64>,
    /// Criterion value at the selected parameters.
    pub score: f64,
    pub sweeps: usize,
    /// Distinct parameter combinations fitted.
    pub evaluations: usize,
    pub model: FittedModel,
}

/// Coordinate descent on BIC over the main-effect smoothing parameters.
/// Interactions follow their main effects through the design.
pub fn select_smoothness(
    design: &Design,
    y: &[f64],
    grids: &[Vec<f64>],
    exec: Execution,
) -> Result<Selection> {
    select_by(design, y, grids, exec, |m| m.bic)
}

/// Coordinate descent minimizing an arbitrary criterion of the fit. Each
/// sweep visits the parameters in order and moves one at a time to its best
/// grid value; sweeps stop when nothing changes or after [`MAX_SWEEPS`].
pub fn select_by<F>(
    design: &Design,
    y: &[f64],
    grids: &[Vec<f64>],
    exec: Execution,
    criterion: F,
) -> Result<Selection>
where
    F: Fn(&FittedModel) -> f64 + Sync,
{
    if grids.len() != design.params.len() {
        return Err(Error::InvalidArgument(format!(
            "{} grids for {} smoothing parameters",
            grids.len(),
            design.params.len()
        )));
    }
    if let Some(k) = grids.iter().position(|g| g.is_empty()) {
        return Err(Error::InvalidArgument(format!(
            "empty grid for `{}`",
            design.params[k]
        )));
    }
    let system = PenalizedSystem::new(design, y, exec)?;
    let lambdas_at = |idx: &[usize]| -> Vec<f64> {
        idx.iter().zip(grids).map(|(&i, g)| g[i]).collect()
    };
    let score = |idx: &Vec<usize>| -> f64 {
        match system.fit(&lambdas_at(idx)) {
            Ok(m) => {
                let s = criterion(&m);
                if s.is_finite() {
                    s
                } else {
                    f64::INFINITY
                }
            }
            Err(_) => f64::INFINITY,
        }
    };

    let mut idx: Vec<usize> = grids.iter().map(|g| (g.len() - 1) / 2).collect();
    let mut memo: HashMap<Vec<usize>, f64> = HashMap::new();
    let mut sweeps = 0;
    loop {
        sweeps += 1;
        let mut changed = false;
        for (j, grid) in grids.iter().enumerate() {
            let candidates: Vec<Vec<usize>> = (0..grid.len())
                .map(|g| {
                    let mut c = idx.clone();
                    c[j] = g;
                    c
                })
                .collect();
            let todo: Vec<Vec<usize>> = candidates
                .iter()
                .filter(|c| !memo.contains_key(*c))
                .cloned()
                .collect();
            let scores = exec.map(&todo, score);
            memo.extend(todo.into_iter().zip(scores));

            let mut best = idx[j];
            let mut best_score = memo[&candidates[best]];
            for (g, c) in candidates.iter().enumerate() {
                if memo[c] < best_score {
                    best = g;
                    best_score = memo[c];
                }
            }
            if !best_score.is_finite() {
                return Err(Error::Numerical(format!(
                    "criterion is not finite anywhere on the grid for `{}`",
                    design.params[j]
                )));
            }
            if best != idx[j] {
                idx[j] = best;
                changed = true;
            }
        }
        if !changed || sweeps == MAX_SWEEPS {
            break;
        }
    }

    let lambdas = lambdas_at(&idx);
    let model = system.fit(&lambdas)?;
    Ok(Selection {
        score: memo[&idx],
        lambdas,
        sweeps,
        evaluations: memo.len(),
        model,
    })
}

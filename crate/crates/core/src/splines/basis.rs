use nalgebra::DMatrix;

use super::KnotVector;
use crate::error::{Error, Result};

/// Basis functions evaluated at a set of observations, one row each.
#[derive(Debug, Clone)]
pub struct BasisMatrix {
    pub values: DMatrix<f64>,
    /// Knots of each margin; a single entry for univariate bases.
    pub margins: Vec<KnotVector>,
}

impl BasisMatrix {
    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }
}

/// Evaluates the `degree + 1` nonzero B-splines at `x`.
///
/// Returns the index of the first nonzero basis function and writes the
/// values into `out`, which must hold `degree + 1` entries.
pub fn bspline_row(knots: &KnotVector, x: f64, out: &mut [f64]) -> Result<usize> {
    let (min, max) = knots.domain();
    if !knots.contains(x) {
        return Err(Error::OutOfDomain { value: x, min, max });
    }
    let p = knots.degree();
    let t = knots.knots();
    let last = p + knots.segments() - 1;
    let mut span = (p + ((x - min) / knots.spacing()).floor() as usize).min(last);
    // guard against rounding in the floor above
    while span > p && x < t[span] {
        span -= 1;
    }
    while span < last && x >= t[span + 1] {
        span += 1;
    }

    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    out[0] = 1.0;
    for j in 1..=p {
        left[j] = x - t[span + 1 - j];
        right[j] = t[span + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            let temp = out[r] / (right[r + 1] + left[j - r]);
            out[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        out[j] = saved;
    }
    Ok(span - p)
}

/// Evaluates the full B-spline basis at every `x`. Values outside the knot
/// domain are rejected.
pub fn bspline_basis(x: &[f64], knots: &KnotVector) -> Result<BasisMatrix> {
    let p = knots.degree();
    let mut values = DMatrix::zeros(x.len(), knots.dim());
    let mut row = vec![0.0; p + 1];
    for (i, &xi) in x.iter().enumerate() {
        let first = bspline_row(knots, xi, &mut row)?;
        for (r, v) in row.iter().enumerate() {
            values[(i, first + r)] = *v;
        }
    }
    Ok(BasisMatrix {
        values,
        margins: vec![knots.clone()],
    })
}

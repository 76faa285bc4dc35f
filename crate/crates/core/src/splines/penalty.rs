use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Symmetric positive semi-definite coefficient penalty.
#[derive(Debug, Clone)]
pub struct PenaltyMatrix {
    pub matrix: DMatrix<f64>,
    /// Difference order of the underlying univariate penalty.
    pub order: usize,
}

impl PenaltyMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `cᵀ P c`.
    pub fn quadratic_form(&self, c: &[f64]) -> f64 {
        let v = nalgebra::DVector::from_column_slice(c);
        (v.transpose() * &self.matrix * &v)[(0, 0)]
    }
}

/// The `(dim - order) × dim` matrix of `order`-th differences.
pub fn difference_matrix(dim: usize, order: usize) -> Result<DMatrix<f64>> {
    if order == 0 || dim <= order {
        return Err(Error::InvalidArgument(format!(
            "difference order {order} needs more than {order} coefficients, got {dim}"
        )));
    }
    let mut d = DMatrix::<f64>::identity(dim, dim);
    for _ in 0..order {
        let r = d.nrows();
        d = d.rows(1, r - 1) - d.rows(0, r - 1);
    }
    Ok(d)
}

/// `Dᵀ D` for the order-`order` difference operator.
pub fn difference_penalty(dim: usize, order: usize) -> Result<PenaltyMatrix> {
    let d = difference_matrix(dim, order)?;
    Ok(PenaltyMatrix {
        matrix: d.tr_mul(&d),
        order,
    })
}

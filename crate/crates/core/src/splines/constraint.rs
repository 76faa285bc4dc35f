use nalgebra::{DMatrix, DVector};

use super::BasisMatrix;
use crate::error::{Error, Result};

/// Reparameterization `β = Z θ` onto the null space of a linear constraint
/// `C β = 0`. Columns of `Z` are orthonormal.
#[derive(Debug, Clone)]
pub struct ConstraintTransform {
    pub z: DMatrix<f64>,
    pub constraint: DMatrix<f64>,
    pub description: String,
}

impl ConstraintTransform {
    pub fn free_dim(&self) -> usize {
        self.z.ncols()
    }

    pub fn raw_dim(&self) -> usize {
        self.z.nrows()
    }

    /// `‖C Z‖∞`, zero up to rounding for a valid transform.
    pub fn residual(&self) -> f64 {
        if self.constraint.nrows() == 0 {
            return 0.0;
        }
        (&self.constraint * &self.z).amax()
    }
}

/// Orthonormal basis (`p × (p-1)`) of the complement of a nonzero vector,
/// taken from the trailing columns of a Householder reflection.
pub fn sum_to_zero_complement(c: &DVector<f64>) -> Result<DMatrix<f64>> {
    let p = c.len();
    let norm = c.norm();
    if p < 2 {
        return Err(Error::InvalidArgument(
            "cannot constrain a single-column basis".into(),
        ));
    }
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::InvalidArgument("constraint row is zero".into()));
    }
    let mut v = c / norm;
    // reflect onto -sign(u0) e1 to avoid cancellation
    v[0] += if v[0] >= 0.0 { 1.0 } else { -1.0 };
    let vv = v.dot(&v);
    let mut z = DMatrix::zeros(p, p - 1);
    for j in 1..p {
        for i in 0..p {
            let delta = if i == j { 1.0 } else { 0.0 };
            z[(i, j - 1)] = delta - 2.0 * v[i] * v[j] / vv;
        }
    }
    Ok(z)
}

/// Constrains a basis so the fitted effect sums to zero over the rows it was
/// evaluated on. Returns the constrained basis `B Z` and the transform.
pub fn sum_to_zero_transform(basis: &BasisMatrix) -> Result<(BasisMatrix, ConstraintTransform)> {
    if basis.ncols() < 2 {
        return Err(Error::InvalidArgument(
            "cannot constrain a single-column basis".into(),
        ));
    }
    let sums = basis.values.row_sum().transpose();
    let z = sum_to_zero_complement(&sums)?;
    let constrained = BasisMatrix {
        values: &basis.values * &z,
        margins: basis.margins.clone(),
    };
    let transform = ConstraintTransform {
        z,
        constraint: DMatrix::from_row_slice(1, sums.len(), sums.as_slice()),
        description: "sum to zero over observations".into(),
    };
    Ok((constrained, transform))
}

/// Coefficient-level constraint for a tensor interaction: every 1-D slice of
/// the coefficient array sums to zero. The null space factorizes as the
/// Kronecker product of per-margin sum-to-zero complements.
pub fn interaction_constraint_transform(dims: &[usize]) -> Result<ConstraintTransform> {
    if dims.len() < 2 {
        return Err(Error::InvalidArgument(
            "an interaction needs at least two margins".into(),
        ));
    }
    if let Some(d) = dims.iter().find(|&&d| d < 2) {
        return Err(Error::InvalidArgument(format!(
            "interaction margin of dimension {d} cannot be constrained"
        )));
    }
    let mut z = DMatrix::<f64>::identity(1, 1);
    for &d in dims {
        let zk = sum_to_zero_complement(&DVector::from_element(d, 1.0))?;
        z = z.kronecker(&zk);
    }
    Ok(ConstraintTransform {
        z,
        constraint: slice_sum_constraints(dims),
        description: format!("slice sums zero across margins {dims:?}"),
    })
}

/// Stacks one row per (direction, multi-index over the other directions),
/// summing coefficients along that direction.
fn slice_sum_constraints(dims: &[usize]) -> DMatrix<f64> {
    let total: usize = dims.iter().product();
    let rows: usize = dims.iter().map(|d| total / d).sum();
    let mut c = DMatrix::zeros(rows, total);
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let mut row = 0;
    for (k, &dk) in dims.iter().enumerate() {
        // enumerate flat indices whose k-th coordinate is zero
        for flat in 0..total {
            if !(flat / strides[k]).is_multiple_of(dk) {
                continue;
            }
            for step in 0..dk {
                c[(row, flat + step * strides[k])] = 1.0;
            }
            row += 1;
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::splines::{bspline_basis, make_knots};

    #[test]
    fn observation_sums_vanish() {
        let k = make_knots(0.0, 1.0, 4, 3).unwrap();
        let xs: Vec<f64> = (0..50).map(|i| (i as f64 * 0.377) % 1.0).collect();
        let b = bspline_basis(&xs, &k).unwrap();
        let (cb, t) = sum_to_zero_transform(&b).unwrap();
        assert_eq!(cb.ncols(), 6);
        let theta = DVector::from_fn(6, |i, _| (i as f64 + 1.0).powi(2));
        let fitted = &cb.values * theta;
        assert!(fitted.sum().abs() < 1e-8 * 50.0);
        assert!(t.residual() < 1e-10);
        assert!((t.z.tr_mul(&t.z) - DMatrix::identity(6, 6)).amax() < 1e-12);
    }

    #[test]
    fn single_column_rejected() {
        let b = BasisMatrix {
            values: DMatrix::from_element(4, 1, 1.0),
            margins: vec![],
        };
        assert!(sum_to_zero_transform(&b).is_err());
    }

    #[test]
    fn zero_constraint_rejected() {
        let b = BasisMatrix {
            values: DMatrix::zeros(4, 3),
            margins: vec![],
        };
        assert!(sum_to_zero_transform(&b).is_err());
    }

    #[test]
    fn interaction_free_dimension() {
        let t = interaction_constraint_transform(&[3, 4]).unwrap();
        assert_eq!(t.free_dim(), 6);
        assert_eq!(t.constraint.nrows(), 4 + 3);
        assert!(t.residual() < 1e-10);
        assert!((t.z.tr_mul(&t.z) - DMatrix::identity(6, 6)).amax() < 1e-12);
    }

    #[test]
    fn two_by_two_pattern() {
        let t = interaction_constraint_transform(&[2, 2]).unwrap();
        assert_eq!(t.free_dim(), 1);
        let col: Vec<f64> = t.z.column(0).iter().copied().collect();
        let sign = col[0].signum();
        let want = [0.5, -0.5, -0.5, 0.5];
        for (g, w) in col.iter().zip(want) {
            assert!((g * sign - w).abs() < 1e-14);
        }
    }

    #[test]
    fn three_way_slices_sum_to_zero() {
        let dims = [3, 4, 2];
        let t = interaction_constraint_transform(&dims).unwrap();
        assert_eq!(t.free_dim(), 2 * 3);
        let theta = DVector::from_fn(6, |i, _| (i as f64 * 1.7).sin());
        let beta = &t.z * theta;
        let at = |i: usize, j: usize, k: usize| beta[(i * 4 + j) * 2 + k];
        for j in 0..4 {
            for k in 0..2 {
                assert!((0..3).map(|i| at(i, j, k)).sum::<f64>().abs() < 1e-10);
            }
        }
        for i in 0..3 {
            for k in 0..2 {
                assert!((0..4).map(|j| at(i, j, k)).sum::<f64>().abs() < 1e-10);
            }
            for j in 0..4 {
                assert!((0..2).map(|k| at(i, j, k)).sum::<f64>().abs() < 1e-10);
            }
        }
    }

    #[test]
    fn degenerate_margins() {
        assert!(interaction_constraint_transform(&[1, 4]).is_err());
        assert!(interaction_constraint_transform(&[4]).is_err());
    }
}

use nalgebra::DMatrix;

use super::{BasisMatrix, PenaltyMatrix};
use crate::error::{Error, Result};

/// Row-wise Kronecker product of marginal bases.
pub fn tensor_basis(marginals: &[BasisMatrix]) -> Result<BasisMatrix> {
    let first = marginals
        .first()
        .ok_or_else(|| Error::InvalidArgument("tensor basis needs at least one margin".into()))?;
    let n = first.nrows();
    if let Some(bad) = marginals.iter().find(|m| m.nrows() != n) {
        return Err(Error::InvalidArgument(format!(
            "marginal bases have mismatched row counts ({n} vs {})",
            bad.nrows()
        )));
    }
    let mut values = first.values.clone();
    for next in &marginals[1..] {
        let (da, db) = (values.ncols(), next.ncols());
        let mut out = DMatrix::zeros(n, da * db);
        for a in 0..da {
            for b in 0..db {
                let mut col = out.column_mut(a * db + b);
                for i in 0..n {
                    col[i] = values[(i, a)] * next.values[(i, b)];
                }
            }
        }
        values = out;
    }
    Ok(BasisMatrix {
        values,
        margins: marginals.iter().flat_map(|m| m.margins.clone()).collect(),
    })
}

/// One penalty per margin, each lifted to the tensor dimension:
/// `I ⊗ … ⊗ P_k ⊗ … ⊗ I`.
pub fn tensor_penalty(penalties: &[PenaltyMatrix], dims: &[usize]) -> Result<Vec<PenaltyMatrix>> {
    if penalties.len() != dims.len() {
        return Err(Error::InvalidArgument(format!(
            "{} penalties for {} margins",
            penalties.len(),
            dims.len()
        )));
    }
    for (k, (p, &d)) in penalties.iter().zip(dims).enumerate() {
        if p.dim() != d {
            return Err(Error::InvalidArgument(format!(
                "penalty {k} is {0}x{0} but margin dimension is {d}",
                p.dim()
            )));
        }
    }
    let lifted = (0..dims.len())
        .map(|k| {
            let mut m = DMatrix::<f64>::identity(1, 1);
            for (j, &d) in dims.iter().enumerate() {
                let factor = if j == k {
                    penalties[j].matrix.clone()
                } else {
                    DMatrix::identity(d, d)
                };
                m = m.kronecker(&factor);
            }
            PenaltyMatrix {
                matrix: m,
                order: penalties[k].order,
            }
        })
        .collect();
    Ok(lifted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::splines::{bspline_basis, difference_penalty, make_knots};

    fn basis(xs: &[f64], segments: usize) -> BasisMatrix {
        let k = make_knots(0.0, 1.0, segments, 3).unwrap();
        bspline_basis(xs, &k).unwrap()
    }

    fn grid(n: usize, phase: f64) -> Vec<f64> {
        (0..n).map(|i| (i as f64 * 0.618 + phase) % 1.0).collect()
    }

    #[test]
    fn dimensions_multiply() {
        let xs = grid(15, 0.1);
        let t = tensor_basis(&[basis(&xs, 2), basis(&xs, 4)]).unwrap();
        assert_eq!(t.ncols(), 35);
        for r in 0..15 {
            assert!((t.values.row(r).sum() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn three_way_matches_triple_loop() {
        let n = 10;
        let (a, b, c) = (basis(&grid(n, 0.1), 1), basis(&grid(n, 0.3), 2), basis(&grid(n, 0.7), 1));
        let t = tensor_basis(&[a.clone(), b.clone(), c.clone()]).unwrap();
        let (da, db, dc) = (a.ncols(), b.ncols(), c.ncols());
        for i in 0..n {
            for x in 0..da {
                for y in 0..db {
                    for z in 0..dc {
                        let want = a.values[(i, x)] * b.values[(i, y)] * c.values[(i, z)];
                        let got = t.values[(i, (x * db + y) * dc + z)];
                        assert!((want - got).abs() <= 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn mismatched_rows() {
        assert!(tensor_basis(&[basis(&grid(5, 0.0), 2), basis(&grid(6, 0.0), 2)]).is_err());
    }

    #[test]
    fn lifted_penalty_sizes_and_null_space() {
        let p3 = difference_penalty(3, 2).unwrap();
        let p4 = difference_penalty(4, 2).unwrap();
        let lifted = tensor_penalty(&[p3, p4], &[3, 4]).unwrap();
        assert!(lifted.iter().all(|p| p.dim() == 12));
        // coefficients a[i][j] = j*j vary only along direction 1 (quadratically)
        let c: Vec<f64> = (0..12).map(|idx| ((idx % 4) * (idx % 4)) as f64).collect();
        assert!(lifted[0].quadratic_form(&c).abs() < 1e-12);
        assert!(lifted[1].quadratic_form(&c) > 1.0);
    }

    #[test]
    fn two_way_equals_slice_sum() {
        let (d1, d2) = (5, 6);
        let p1 = difference_penalty(d1, 2).unwrap();
        let p2 = difference_penalty(d2, 2).unwrap();
        let lifted = tensor_penalty(&[p1.clone(), p2.clone()], &[d1, d2]).unwrap();
        let c: Vec<f64> = (0..d1 * d2).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        let mut along_first = 0.0;
        for j in 0..d2 {
            let slice: Vec<f64> = (0..d1).map(|i| c[i * d2 + j]).collect();
            along_first += p1.quadratic_form(&slice);
        }
        let mut along_second = 0.0;
        for i in 0..d1 {
            along_second += p2.quadratic_form(&c[i * d2..(i + 1) * d2]);
        }
        assert!((lifted[0].quadratic_form(&c) - along_first).abs() < 1e-12 * along_first.max(1.0));
        assert!((lifted[1].quadratic_form(&c) - along_second).abs() < 1e-12 * along_second.max(1.0));
    }

    #[test]
    fn penalty_dimension_mismatch() {
        let p = difference_penalty(4, 2).unwrap();
        assert!(tensor_penalty(&[p.clone(), p], &[4, 5]).is_err());
    }
}

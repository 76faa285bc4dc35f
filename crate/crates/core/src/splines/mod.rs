//! P-spline building blocks: equally spaced B-spline bases, difference
//! penalties, tensor products and identifiability constraints.
//!
//! Tensor-product column ordering is row-major over the margins: for margins
//! of dimensions `(d1, d2, ..., dm)` the column for multi-index
//! `(j1, ..., jm)` is `((j1 * d2 + j2) * d3 + j3) ...`, i.e. the last margin
//! varies fastest. Penalties and constraint transforms use the same order,
//! so `P1 ⊗ I` penalizes along the first margin.

mod basis;
mod constraint;
mod knots;
mod penalty;
mod tensor;

pub use basis::{bspline_basis, bspline_row, BasisMatrix};
pub use constraint::{
    interaction_constraint_transform, sum_to_zero_complement, sum_to_zero_transform,
    ConstraintTransform,
};
pub use knots::{make_knots, KnotVector};
pub use penalty::{difference_matrix, difference_penalty, PenaltyMatrix};
pub use tensor::{tensor_basis, tensor_penalty};

/// Cubic splines throughout.
pub const DEFAULT_DEGREE: usize = 3;
/// Second-order differences: linear trends are unpenalized.
pub const DEFAULT_PENALTY_ORDER: usize = 2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Equally spaced knots covering `[min, max]` with `segments` intervals,
/// extended by `degree` knots of the same spacing on each side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotVector {
    knots: Vec<f64>,
    degree: usize,
    segments: usize,
    min: f64,
    max: f64,
}

/// Builds the standard p-spline knot sequence for `[min, max]`.
pub fn make_knots(min: f64, max: f64, segments: usize, degree: usize) -> Result<KnotVector> {
    if !(min.is_finite() && max.is_finite()) || max <= min {
        return Err(Error::InvalidArgument(format!(
            "degenerate spline domain [{min}, {max}]"
        )));
    }
    if segments == 0 || degree == 0 {
        return Err(Error::InvalidArgument(
            "segments and degree must both be at least 1".into(),
        ));
    }
    let h = (max - min) / segments as f64;
    let total = segments + 1 + 2 * degree;
    let knots = (0..total)
        .map(|i| {
            let offset = i as isize - degree as isize;
            // pin the domain ends exactly so boundary checks are exact
            if offset == 0 {
                min
            } else if offset == segments as isize {
                max
            } else {
                min + offset as f64 * h
            }
        })
        .collect();
    Ok(KnotVector {
        knots,
        degree,
        segments,
        min,
        max,
    })
}

impl KnotVector {
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn segments(&self) -> usize {
        self.segments
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.min, self.max)
    }

    /// Number of basis functions, `segments + degree`.
    pub fn dim(&self) -> usize {
        self.segments + self.degree
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / self.segments as f64
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.min && x <= self.max
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_on_unit_interval() {
        let k = make_knots(0.0, 1.0, 4, 3).unwrap();
        assert_eq!(k.dim(), 7);
        assert_eq!(k.knots().len(), 11);
        assert_eq!(k.knots()[3], 0.0);
        assert_eq!(k.knots()[7], 1.0);
        assert!((k.knots()[0] + 0.75).abs() < 1e-15);
        let gaps: Vec<f64> = k.knots().windows(2).map(|w| w[1] - w[0]).collect();
        assert!(gaps.iter().all(|g| (g - 0.25).abs() < 1e-12));
    }

    #[test]
    fn minimal_linear() {
        let k = make_knots(0.0, 10.0, 1, 1).unwrap();
        assert_eq!(k.dim(), 2);
    }

    #[test]
    fn degenerate_domain() {
        assert!(make_knots(2.0, 2.0, 4, 3).is_err());
        assert!(make_knots(3.0, 2.0, 4, 3).is_err());
        assert!(make_knots(0.0, 1.0, 0, 3).is_err());
    }
}

//! Validation of listing coverage and rents against reference statistics.

mod coverage;
mod index;
mod reference;
mod rents;

pub use coverage::{
    correlate, count_by_area, coverage_ratio, scatter_points, Correlation, CoverageRatios,
    Period, ScatterPoint,
};
pub use index::{index_series, listings_index, turnover_rate, IndexPoint, IndexSeries};
pub use reference::{AreaReference, NationalReference, ReferenceSeries};
pub use rents::{bedroom_stratum, median, median_rent_by_area, rent_index, Quarter, RentIndex};

//! Penalized additive model of log rent: p-spline main effects and
//! tensor-product interactions, fitted by penalized least squares with
//! smoothing chosen by BIC.

mod bootstrap;
mod design;
mod fit;
mod rows;
mod select;
mod simulate;
mod spec;
mod surface;

pub use bootstrap::{bootstrap_p_value, bootstrap_term_test, wald_statistic, BootstrapTest, MIN_REPLICATES};
pub use design::{build_design, domain_of, Constraint, Design, DesignTerm, Margin, TermBasis};
pub use fit::{bic, fit_pls, FittedModel, FittedTerm, ModelSummary, PenalizedSystem, RSS_FLOOR};
pub use rows::{
    decimal_year, derive_rows, haversine_miles, spatial_filter, DerivedRows, ModelRow,
    EARTH_RADIUS_MILES,
};
pub use select::{default_grid, grids_for, select_by, select_smoothness, Selection, MAX_SWEEPS};
pub use simulate::{
    simulate_synthetic, SimulationConfig, Synthetic, SyntheticPostcode, Truth, CITY_CENTRE,
    WEST_END,
};
pub use spec::{BasisSizes, Covariate, MarginSpec, ModelSpec, TermSpec};
pub use surface::{effect_surface, per_unit_multiplier, predict, EffectSurface, SurfaceGrid};

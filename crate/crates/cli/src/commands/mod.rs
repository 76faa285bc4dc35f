mod clean;
mod model;
mod simulate;
mod validate;

pub use clean::run as clean;
pub use model::{bootstrap, fit, surfaces};
pub use simulate::run as simulate;
pub use validate::run as validate;

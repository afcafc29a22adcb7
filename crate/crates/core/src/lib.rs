//! Helium-ion dose engineering for NbTiN films and detectors: the defect
//! model of sheet resistance and Tc, parameter estimation, transport-data
//! reduction, detector metrics and dose planning.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod data;
pub mod detector;
pub mod error;
pub mod estimation;
pub mod io;
pub mod model;
pub mod numeric;
pub mod oracle;
pub mod planner;
pub mod transport;

pub use error::{Error, Result};
pub use model::{FilmSpec, Fluence, ModelParams};

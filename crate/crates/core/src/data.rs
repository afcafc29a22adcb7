//! Calibration files shipped with the crate.

/// Resistance-model and scaling-law constants for 8, 10 and 12 nm NbTiN.
pub const PUBLISHED_PARAMS_TOML: &str = include_str!("../data/published_params.toml");

/// Simulated optical absorption of the 8, 10 and 12 nm detectors at 780 nm.
pub const ABSORPTION_CSV: &str = include_str!("../data/absorption.csv");

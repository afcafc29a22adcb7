//! Physical constants (CODATA 2018 exact or recommended values) and the
//! fixed conventions shared by several modules.

/// Boltzmann constant, J/K (exact).
pub const K_B: f64 = 1.380649e-23;

/// Elementary charge, C (exact).
pub const E_CHARGE: f64 = 1.602176634e-19;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054571817e-34;

/// Vacuum permeability, N/A^2.
pub const MU_0: f64 = 1.25663706212e-6;

/// Weak-coupling BCS ratio Δ(0) / (k_B Tc).
pub const BCS_GAP_RATIO: f64 = 1.764;

/// Native NbTiN oxide thickness, nm.
pub const NATIVE_OXIDE_NM: f64 = 1.3;

/// Highest fluence at which the default calibration was measured, ions/nm^2.
pub const CALIBRATED_MAX_FLUENCE: f64 = 2600.0;

/// Forward predictions beyond this multiple of the calibrated range carry
/// an extrapolation warning.
pub const EXTRAPOLATION_FACTOR: f64 = 1.25;

/// 1 ion/nm^2 expressed in ions/cm^2.
pub const IONS_PER_CM2_PER_NM2: f64 = 1e14;

/// Default readout load resistance, ohm.
pub const DEFAULT_LOAD_OHM: f64 = 50.0;

pub const NM: f64 = 1e-9;
pub const UM: f64 = 1e-6;
pub const UA: f64 = 1e-6;

//! Independent checks of the closed-form occupancy law: a stochastic
//! lattice simulation and direct ODE integration.

pub mod lattice;
pub mod ode;

pub use lattice::{irradiate, simulate_ensemble, EnsembleConfig, EnsemblePoint, LatticeFilm, LatticeSpec, TrajectoryPoint};
pub use ode::{integrate_rk4_adaptive, ode_residual_check};

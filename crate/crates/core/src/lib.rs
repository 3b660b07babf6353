//! Numerical laboratory for Trojan Y Chromosome population-control models.
//!
//! The crate simulates the three- and four-species systems and their
//! reaction–diffusion forms, detects intervals where a population turns
//! negative and finite-time blow-up, and maps the critical initial supermale
//! levels and introduction rates that separate those behaviours.
//!
//! Everything numerical is generic over [`Real`]; the aliases below fix the
//! scalar to `f64`, which is what the command-line front end uses.

pub mod error;
pub mod models;
pub mod num;
pub mod ode;
pub mod pde;
pub mod analysis;

pub use error::{Error, Result};
pub use num::Real;

pub type State = models::StateVector<f64>;
pub type Model = models::ModelSpec<f64>;
pub type Scaled = models::DimensionlessParams<f64>;
pub type Physical = models::DimensionalParams<f64>;
pub type Config = ode::IntegratorConfig<f64>;
pub type Events = ode::EventLog<f64>;

//! Numerical laboratory for nonlinear Schrödinger solitons, soliton trains and
//! kink–soliton trains.

pub mod config;
pub mod error;
pub mod evolution;
pub mod experiment;
pub mod grid;
pub mod io;
pub mod metrics;
pub mod nonlinearity;
pub mod numerics;
pub mod perturbation;
pub mod profiles;
pub mod spectral;
pub mod trains;

pub use error::{NlsError, Result};

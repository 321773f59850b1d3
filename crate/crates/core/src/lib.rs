//! Femtosecond pulse propagation in nonlinear optical fiber with linearized
//! quantum noise.
//!
//! The classical field obeys the generalized nonlinear Schrödinger equation
//! (Kerr, delayed Raman response, optional self-steepening, dispersion to
//! fifth order) and is integrated with a symmetrized split-step scheme. Small
//! quantum fluctuations ride on that solution: the [`quantum`] module builds
//! the Bogoliubov transfer `δa_out = μ·δa_in + ν·δa_in†`, injects Raman
//! reservoir noise, and evaluates photon-number variances either forward or
//! by back-propagating the measurement. [`measurement`] turns those into
//! Fano factors, knife-edge filter sweeps and intrapulse correlation maps.

pub mod error;
pub mod fft;
pub mod fiber;
pub mod grid;
pub mod measurement;
pub mod model;
pub mod propagate;
pub mod quantum;
pub mod raman;
pub mod scenario;
pub mod spectral;
pub mod units;

pub use error::{Error, Result};
pub use fiber::{make_mf_spec, FiberSpec, MfConfig};
pub use grid::{sech_pulse, Envelope, Grid};
pub use propagate::{propagate, SolverOptions, StepScheme};
pub use raman::{RamanKernel, RamanModel};

//! Parametric fit models and a damped least-squares solver.

pub mod models;
pub mod peaks;
pub mod solver;

pub use models::{biexp_argmax, ArrheniusForm, FitModel, Lorentzian, Model, K_B_MEV_PER_K};
pub use peaks::{extract_peak_centers, Peak};
pub use solver::{fit, fit_with, FitOptions, FitResult, FitStatus};

//! Pseudospectral solvers for weakly nonlinear capillary-gravity waves with
//! odd viscosity on the periodic torus.
//!
//! * [`spectral`]: Fourier grid, multipliers, dealiased products.
//! * [`models`]: right-hand sides of the bidirectional and unidirectional models.
//! * [`timestepper`]: adaptive Dormand–Prince integration.
//! * [`ck_series`]: power-series construction with its majorant ledger.
//! * [`diagnostics`]: norms, energies and identity residuals.
//! * [`runner`]: configs, runs, sweeps and plots behind the `oddwave` binary.

pub mod ck_series;
pub mod diagnostics;
pub mod error;
pub mod models;
pub mod runner;
pub mod spectral;
pub mod timestepper;

pub use error::{Error, Result};
pub use models::{ModelKind, ModelParams, WaveState};
pub use spectral::{FourierGrid, Mode, ModeKind, SpectralField};
pub use timestepper::StepControl;

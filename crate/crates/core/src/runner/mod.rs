//! Run configuration, orchestration, sweeps, persistence and plots.

pub mod compare;
pub mod config;
pub mod plot;
pub mod run;
pub mod selftest;
pub mod sweep;

pub use compare::{ck_compare, CkComparison};
pub use config::{load_config, parse_config, RunConfig};
pub use plot::emit_plots;
pub use run::{run_simulation, RunManifest, Termination};
pub use sweep::{run_sweep, SweepAxis, SweepIndex, SweepOptions};

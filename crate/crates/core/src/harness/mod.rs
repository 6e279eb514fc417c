//! Configuration, runs, decay fits and verification reports.

pub mod config;
pub mod estimates;
pub mod fit;
pub mod report;
pub mod run;
pub mod verify;

pub use config::{DensityProfile, GridConfig, InitConfig, RunConfig};
pub use fit::{fit_decay, plateau, DecayReport};
pub use report::{Check, Report};
pub use run::{run, RunOutput, Summary};
pub use verify::verify;

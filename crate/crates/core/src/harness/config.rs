//! Run configuration, read from and written to JSON.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::grid::Grid;
use crate::solver::SolverConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub dim: usize,
    pub n: usize,
    pub period: f64,
}

impl Default for GridConfig {
    fn default() -> GridConfig {
        GridConfig { dim: 2, n: 512, period: 64.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityProfile {
    /// `amplitude exp(-|x - c|^2 / width^2)`.
    Bump,
    /// Heat kernel at unit time for the configured viscosity; `bump_width` is ignored.
    HeatKernel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitConfig {
    pub profile: DensityProfile,
    pub bump_amplitude: f64,
    pub bump_width: f64,
    /// Hybrid norm of each perturbation component; zero gives `h2 = u2 = 0`.
    pub eps: f64,
    pub seed: u64,
}

impl Default for InitConfig {
    fn default() -> InitConfig {
        InitConfig { profile: DensityProfile::Bump, bump_amplitude: 0.5, bump_width: 1.0, eps: 1e-3, seed: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub solver: SolverConfig,
    pub init: InitConfig,
    /// Time between recorded snapshots; rounded to a whole number of steps.
    pub snapshot_every: f64,
    /// Time between binary field dumps; none when absent.
    pub dump_every: Option<f64>,
    pub out: Option<PathBuf>,
    pub suite: Option<String>,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            grid: GridConfig::default(),
            solver: SolverConfig::default(),
            init: InitConfig::default(),
            snapshot_every: 0.1,
            dump_every: None,
            out: None,
            suite: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig> {
        let c: RunConfig = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        RunConfig::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        if !(self.snapshot_every > 0.0) {
            return Err(Error::Config(format!("snapshot_every = {} must be positive", self.snapshot_every)));
        }
        if let Some(d) = self.dump_every {
            if !(d > 0.0) {
                return Err(Error::Config(format!("dump_every = {d} must be positive")));
            }
        }
        if !(self.init.eps >= 0.0) || !(self.init.bump_width > 0.0) || !(self.init.bump_amplitude > -1.0) {
            return Err(Error::Config("need eps >= 0, bump_width > 0 and bump_amplitude > -1".into()));
        }
        Ok(())
    }

    pub fn build_grid(&self) -> Result<Grid> {
        let g = &self.grid;
        Grid::with_dealias(g.dim, g.n, &vec![g.period; g.dim], self.solver.dealias)
    }

    /// Steps between snapshots.
    pub fn steps_per_snapshot(&self) -> usize {
        ((self.snapshot_every / self.solver.dt).round() as usize).max(1)
    }
}

use thiserror::Error;

use crate::solver::SimState;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("size mismatch: expected {expected} samples, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("component mismatch: expected {expected}, found {found}")]
    ComponentMismatch { expected: usize, found: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("block range {l_min}..={l_max} is not resolvable: {reason}")]
    BlockRange { l_min: i32, l_max: i32, reason: String },
    #[error("block {l} outside filter range {l_min}..={l_max}")]
    BlockOutOfRange { l: i32, l_min: i32, l_max: i32 },
    #[error("invalid norm index: {0}")]
    InvalidSpec(String),
    #[error("density floor violated: min {min:.3e} below floor {floor:.3e}")]
    DensityFloor { min: f64, floor: f64 },
    #[error("pointwise bound violated: sup |u| = {found:.3e} exceeds {limit:.3e}")]
    AmplitudeBound { found: f64, limit: f64 },
    #[error("snapshot times must be strictly increasing")]
    UnorderedSnapshots,
    #[error("empty history")]
    EmptyHistory,
    #[error("time window: {0}")]
    Window(String),
    #[error("CFL number {cfl:.3} exceeds cap {cap:.3}")]
    Cfl { cfl: f64, cap: f64 },
    #[error("non-finite state at t = {t:.6}")]
    Blowup { t: f64, last_valid: Box<SimState> },
    #[error("scaling factor {0} is not compatible with the grid")]
    IncompatibleScaling(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

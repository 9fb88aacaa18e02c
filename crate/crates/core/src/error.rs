use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid ring width {width}: at least 3 cells are required")]
    InvalidWidth { width: usize },

    #[error("width {width} must be odd to center a single-cell input")]
    EvenWidth { width: usize },

    #[error("burn-in {burn_in} must be smaller than the number of steps {steps}")]
    InvalidBurnIn { burn_in: usize, steps: usize },

    #[error("step count must be at least 1")]
    ZeroSteps,

    #[error("history lengths must be at least 1 (got k={k}, l={l})")]
    InvalidHistory { k: usize, l: usize },

    #[error("series lengths differ: target has {target}, source has {source_len}")]
    LengthMismatch { target: usize, source_len: usize },

    #[error("series of length {len} is too short; at least {needed} samples are required")]
    SeriesTooShort { len: usize, needed: usize },

    #[error("black-cell count {n_black} is outside [0, {width}]")]
    BlackCountOutOfRange { n_black: usize, width: usize },

    #[error("width {width} is not divisible by supercell size {supercell}")]
    NotDivisible { width: usize, supercell: usize },

    #[error("supercell size {0} is outside the supported range 1..=4")]
    InvalidSupercell(usize),

    #[error("projection table {table:#x} does not fit supercell size {supercell}")]
    InvalidProjection { supercell: usize, table: u32 },

    #[error("projection is constant; coarse neighborhoods are not all realizable")]
    NonSurjectiveProjection,

    #[error("no Wolfram label for rule {0}")]
    MissingLabel(u8),

    #[error("classification does not cover rule {0}")]
    MissingClass(u8),

    #[error("no configurations supplied")]
    Empty,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

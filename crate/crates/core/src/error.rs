use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid bump profile: need 0 < inner < outer <= 1, got inner={inner}, outer={outer}")]
    InvalidProfile { inner: f64, outer: f64 },

    #[error("invalid band [{lo}, {hi}]: need 0 <= lo < hi <= 1")]
    InvalidBand { lo: f64, hi: f64 },

    #[error("disk radius {radius} must lie in (0, 1/2)")]
    DiskTooLarge { radius: f64 },

    #[error("grid must have at least 8 points per axis, got {0}")]
    InvalidGrid(usize),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("path vertex ({x}, {y}) lies outside the unit disk chart")]
    PathOutsideDisk { x: f64, y: f64 },

    #[error("map is not supported in the disk: boundary point moved by {displacement:e}")]
    NotDiskSupported { displacement: f64 },

    #[error("no rational flux with denominator <= {q_max} is reachable within c0 bound {c0_bound}")]
    TargetUnreachable { q_max: u32, c0_bound: f64 },

    #[error("preimage disks stay overlapping after {shrinks} radius halvings (final radius {radius})")]
    DisjointnessFailed { shrinks: u32, radius: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

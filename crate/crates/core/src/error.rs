use thiserror::Error;

use crate::model::Sector;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("phonon cutoff n_max must be at least 1 (got {0})")]
    InvalidTruncation(usize),

    #[error("sector {sector:?} requires zero detuning (eps = {eps})")]
    SectorUnavailable { sector: Sector, eps: f64 },

    #[error("matrix is not symmetric: |H[{row}][{col}] - H[{col}][{row}]| = {deviation:e}")]
    NotSymmetric { row: usize, col: usize, deviation: f64 },

    #[error("eigensolver did not converge on sub-block {block} (dimension {dim})")]
    NonConvergence { block: usize, dim: usize },

    #[error("ground energy not converged below cap n_max = {cap} (last change {last_change:e})")]
    TruncationCeiling { cap: usize, last_change: f64 },

    #[error("state vector is not normalized: |norm - 1| = {0:e}")]
    NotNormalized(f64),

    #[error("state of length {len} is incompatible with n_max = {n_max}")]
    DimensionMismatch { len: usize, n_max: usize },

    #[error("energy {energy} lies within {distance:e} of a pole at recursion index m = {m}")]
    PoleProximity { energy: f64, m: usize, distance: f64 },

    #[error("zero coupling: the displaced-oscillator recursion is degenerate, use diagonalization")]
    ZeroCoupling,

    #[error("zero detuning: the triplet G-function is degenerate, use the resonant sector solver")]
    ResonantRedirect,

    #[error("overlap seeds underflowed at energy {0}")]
    SeedUnderflow(f64),

    #[error("series did not converge within M = {cap} terms at energy {energy} (tail {tail:e})")]
    NonConvergentSeries { energy: f64, cap: usize, tail: f64 },

    #[error("not a density matrix: {0}")]
    NotAState(String),

    #[error("sweep failed at g = {g}: {source}")]
    Sweep {
        g: f64,
        #[source]
        source: Box<Error>,
    },
}

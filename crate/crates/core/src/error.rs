//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("marked set is empty")]
    EmptyMarkedSet,
    #[error("marked index {index} out of range for dimension {dim}")]
    MarkedIndexOutOfRange { index: usize, dim: usize },
    #[error("marked set must be a strict subset: got {marked} of {dim} indices")]
    MarkedSetFull { marked: usize, dim: usize },
    #[error("dimension {dim} too small (need at least {min})")]
    DimTooSmall { dim: usize, min: usize },
    #[error("matrix is not Hermitian: max elementwise deviation {max_dev:.3e} exceeds {tol:.1e}")]
    NotHermitian { max_dev: f64, tol: f64 },
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("vector length {len} does not match dimension {dim}")]
    DimensionMismatch { len: usize, dim: usize },
    #[error("eigenpair vectors are not orthonormal: max Gram deviation {max_dev:.3e}")]
    NotOrthonormal { max_dev: f64 },
    #[error("spectrum is identically zero")]
    ZeroSpectrum,
    #[error("smallest eigenvalue must be negative, got {value}")]
    GroundNotNegative { value: f64 },
    #[error("ground energy E_F = {e_f} must be negative (negate both operators first)")]
    FinalGroundNotNegative { e_f: f64 },
    #[error("interpolation value {value} outside [0, 1]")]
    InterpolationOutOfRange { value: f64 },
    #[error("E_F = {e_f} outside [-1, 0)")]
    InvalidFinalGround { e_f: f64 },
    #[error("schedule is not differentiable: {reason}")]
    NotDifferentiable { reason: String },
    #[error("schedule table invalid: {reason}")]
    BadScheduleTable { reason: String },
    #[error("initial Hamiltonian must be rank one (-|psi><psi|), found rank {rank}")]
    RankOneRequired { rank: usize },
    #[error("psi_I lies in Range(H_F) (delta_3 = 1); reduced basis vector e_(m+1) undefined")]
    PsiInFinalRange,
    #[error("final spectral gap g_F = {g_f} below the supported floor {floor}")]
    GapTooSmall { g_f: f64, floor: f64 },
    #[error("counting plan built for N = {plan_n}, g_F = {plan_gf} does not match instance (N = {inst_n}, g_F = {inst_gf})")]
    PlanMismatch { plan_n: usize, plan_gf: f64, inst_n: usize, inst_gf: f64 },
    #[error("E = {e} within {dist:.3e} of the spectrum of H_I; resolvent pole")]
    ResolventPole { e: f64, dist: f64 },
    #[error("E = {e} outside the decomposition strip [E_I - g_I/2, E_I + g_I/2]")]
    OutsideStrip { e: f64 },
    #[error("compressed resolvent K-hat(E_I) is not positive definite (min eigenvalue {min_eig:.3e})")]
    NotPositiveDefinite { min_eig: f64 },
    #[error("bound inapplicable: {reason}")]
    BoundInapplicable { reason: String },
    #[error("grid must have at least {min} points, got {got}")]
    GridTooCoarse { got: usize, min: usize },
    #[error("linear algebra backend failure: {0}")]
    Linalg(String),
    #[error("eigensolver did not converge: {reason}")]
    NoConvergence { reason: String },
    #[error("invalid specification: {reason}")]
    BadSpec { reason: String },
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}

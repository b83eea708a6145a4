//! Numerical laboratory for Hamiltonian-based quantum search with low-rank
//! final Hamiltonians.
//!
//! The library builds search instances `(H_I, H_F)` with `Rank(H_F) = m ≪ N`,
//! evolves them under the scaled Schrödinger equation
//! `i ψ̇_τ(s) = τ H(s) ψ_τ(s)` with `H(s) = (1-f(s)) H_I + f(s) H_F` for a
//! pluggable schedule `f`, and verifies the closed-form runtime and gap bounds
//! that hold in this regime:
//!
//! * [`operators`] — Hermitian operators, spectral data, instance assembly and
//!   the overlap parameters δ₁…δ₄, δ.
//! * [`schedules`] — interpolation functions f(s) (linear, double-step,
//!   smooth bump, tables) and their robustness profile (J, κ).
//! * [`evolution`] — exact and norm-preserving propagators in the full space
//!   and in the (m+1)-dimensional invariant subspace, plus the survival
//!   amplitude ⟨ψ_I| e^{it(H_F - E_F)} |ψ_I⟩.
//! * [`counting`] — Poisson-weighted estimation of ‖P_F ψ_I‖² from survival
//!   amplitudes at integer times.
//! * [`spectral`] — gap profiles g(s) by dense eigensolves and the Krein
//!   resolvent certificate for the gap upper bound.
//! * [`bounds`] — runtime lower/upper/robust bounds and the experiment
//!   harnesses that verify them against actual evolutions.
//! * [`io`] — JSON descriptions of instances and schedules.

extern crate blas_src as _;

pub mod bounds;
pub mod counting;
pub mod error;
pub mod evolution;
pub mod io;
pub mod linalg;
pub mod numeric;
pub mod operators;
pub mod schedules;
pub mod spectral;

pub use error::Error;
pub type Result<T> = std::result::Result<T, Error>;

/// Success threshold γ for the probabilistic search criterion
/// ‖P_F ψ_τ(1)‖ ≥ γ.
pub const GAMMA: f64 = 0.2;

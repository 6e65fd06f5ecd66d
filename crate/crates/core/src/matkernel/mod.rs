//! Dense complex matrix kernel.
//!
//! Everything here is a pure function of its inputs. Routines that are
//! compatible with block structure (exponential, logarithm, spectra, minimum
//! Hermitian eigenvalue) first split the matrix into its exact-zero connected
//! components and work block by block; see [`blocks`].

pub mod blocks;
pub mod eigen;
pub mod expm;
pub mod logm;
pub mod matrix;
pub mod psd;
pub mod reshuffle;
pub mod schur;

use thiserror::Error;

pub use eigen::{eig_decompose, eigenvalues, BlockSchur, EigenSystem, SpectralEntry, DEFAULT_DEGENERACY_TOL};
pub use expm::{mat_exp, EXP_NORM_CAP};
pub use logm::{mat_log_eigen, mat_log_principal, near_nonpositive_axis};
pub use matrix::{ComplexMatrix, C64};
pub use psd::{min_eigenvalue_of_hermitian, min_hermitian_eigenvalue, psd_check, PsdVerdict};
pub use reshuffle::{compress_off_omega, flip_op, gamma_reshuffle, omega, sqrt_dim};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatError {
    #[error("eigenvalues {a} and {b} are not separated (degenerate spectrum)")]
    DegenerateSpectrum { a: C64, b: C64 },
    #[error("matrix is not diagonalizable to working accuracy (residual {residual:e})")]
    NonDiagonalizable { residual: f64 },
    #[error("matrix norm {norm} exceeds the exponential cap {cap}")]
    Overflow { norm: f64, cap: f64 },
    #[error("logarithm undefined: eigenvalue {eigenvalue} on or near the closed negative real axis")]
    LogUndefined { eigenvalue: C64 },
    #[error("dimension {dim} is not the square of an integer")]
    NotSquareOfSquare { dim: usize },
    #[error("matrix is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("singular linear system")]
    Singular,
    #[error("QR iteration did not converge")]
    NoConvergence,
}

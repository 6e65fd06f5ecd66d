//! Quantum decision engine: branch families, Lindblad conditions, branch
//! search, generator decomposition and multi-snapshot fitting.

pub mod conditions;
pub mod decide;
pub mod decompose;
pub mod family;
pub mod sampler;
pub mod search;
pub mod series;

pub use conditions::{check_conditions, LindbladConditions};
pub use decide::{decide_markovian, decide_markovian_with, DecideError, SearchOptions, DEFAULT_BRANCH_BOUND};
pub use decompose::{decompose_lindblad, LindbladDecomposition};
pub use family::{build_branch_family, BranchFamily, FamilyError, PairInfo};
pub use sampler::{lindblad_from_parts, sample_lindblad, sample_lindblad_parts, traceless_basis};
pub use search::BranchBox;
pub use series::{fit_generator_series, SeriesError};

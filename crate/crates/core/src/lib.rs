//! Decide whether dynamical snapshots admit a time-independent master-equation
//! generator, extract it when it exists, and encode exactly-one 3SAT instances
//! into snapshots whose Markovianity is equivalent to satisfiability.

pub mod branch;
pub mod channel;
pub mod cli;
pub mod embed;
pub mod matkernel;
pub mod reduction;
pub mod report;

pub use report::{GeneratorReport, Verdict};

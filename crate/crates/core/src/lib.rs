//! Solvers for the multi-mode on-site workshop availability cost problem.

pub mod baselines;
pub mod bench;
pub mod error;
pub mod ersa;
pub mod exact;
pub mod instance;
pub mod operators;
pub mod schedule;
pub mod solve;

pub use error::{HorizonExhausted, InstanceError, SolveError};
pub use instance::{Instance, ModeSpec, Workshop};
pub use schedule::{check_feasible, Chromosome, DecodedSchedule};
pub use solve::{solve, Algorithm, Budget, SolveResult, SolverConfig};

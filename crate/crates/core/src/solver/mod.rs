//! Discrete Dirichlet problem: energy, first variation, weak residual and a
//! descent solver.

mod descent;
mod energy;
pub mod oracle;
mod problem;

pub use descent::{InitialGuess, Method, SolveOptions, SolveReport, ARMIJO_C1, BACKTRACK};
pub use energy::{ConvexityProbe, ConvexitySample};
pub use problem::{DataFn, NonlocalProblem, ProblemSpec, DEFAULT_TRUNCATION_FACTOR};

//! Benchmark registry, run driver, and CSV export for the mesh-free
//! PINN solver.

pub mod export;
pub mod registry;
pub mod run;

pub use registry::{find, registry, Method, ProblemSpec};
pub use run::{run, LossMode, Options, RunResult};

//! Pipeline orchestration, artifact writing and the benchmark harness behind
//! the `choral` command.

pub mod bench;
pub mod commands;
pub mod pipeline;

pub use commands::{EXIT_ERROR, EXIT_INFEASIBLE, EXIT_OK};

//! JSON interchange, the seeded property suite and the `grassop` command line.

pub mod io;
pub mod suite;

pub use io::{deserialize_operator, serialize_operator, IoError, OperatorDoc, PathDoc};
pub use suite::{run_suite, SuiteConfig, SuiteReport};

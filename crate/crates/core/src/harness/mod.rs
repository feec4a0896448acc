//! Instance generation, brute-force oracles, verification suites and file IO.

pub mod generate;
pub mod io;
pub mod oracle;
pub mod suites;

pub use generate::{derive_seed, generate_instance, GeneratedInstance, GeneratorSpec, Regime};
pub use io::ProblemFile;
pub use suites::{run_suite, run_suite_with, SuiteOptions, VerifyReport, SUITES};

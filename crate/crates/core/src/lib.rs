//! Linear genetic programming engine with closed-form search-space bounds
//! and exhaustive small-space oracles.

pub mod bounds;
pub mod error;
pub mod evolution;
pub mod experiments;
pub mod iset;
pub mod oracle;
pub mod problems;
pub mod program;
pub mod stats;

pub use error::{Error, Result};
pub use iset::{InstructionSet, Variant};
pub use problems::{load_csv, rse, Benchmark, Dataset, Fitness};
pub use program::{
    detect_introns, execute, execute_trace, init_registers, Func, Instruction, Operand, Program,
    RegisterConfig, Semantics, Wrap,
};
pub use evolution::{evolve, freemut_add, freemut_remove, EvolutionConfig, RunResult, RunTrace};

//! Exit-time tails and pairwise decorrelation for finite reversible Markov
//! chains, with the example chains and a dynamical percolation simulator.

pub mod bounds;
pub mod chain;
pub mod dynperc;
pub mod ensemble;
pub mod error;
pub mod fit;
pub mod replica;
pub mod report;
pub mod sparse;
pub mod spectral;
pub mod stats;
pub mod textio;
pub mod verify;
pub mod walks;

pub use chain::{ConductanceGraph, EventSet, GeneratorChain, Kernel, MarkovOperator, ReversibleChain, Tolerances};
pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

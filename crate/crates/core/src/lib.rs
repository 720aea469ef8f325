//! Static and dynamic reentrancy detection for a Solidity subset.

pub mod analyzer;
pub mod frontend;
pub mod orchestrator;
pub mod sim;
pub mod synth;
pub mod types;

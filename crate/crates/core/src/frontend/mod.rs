//! Parsing, pretty-printing and ABI extraction for the Solidity subset.
//!
//! The subset covers contracts with state variables (scalars and
//! `mapping(address => T)`), constructors in both spellings, a fallback,
//! `require`, `if`/`else`, `=`/`+=`/`-=` assignments, events, internal calls,
//! the `transfer`/`send`/`call.value` built-ins and the `msg`, `tx`, `block`
//! and `address(this).balance` globals. Anything else is rejected with an
//! [`FrontendError::UnsupportedConstruct`] naming the construct.

pub mod abi;
pub mod ast;
pub mod effects;
mod lexer;
mod parser;
pub mod printer;
pub mod version;

pub use abi::{
    contract_abi, extract_abi, AbiEntry, AbiEntryType, AbiParam, AbiSpec, StateMutability,
};
pub use ast::*;
pub use parser::parse;
pub use printer::render;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FrontendError {
    #[error("{line}:{column}: expected {expected}, found {found}")]
    Parse {
        line: u32,
        column: u32,
        expected: String,
        found: String,
    },
    #[error("{position}: unsupported construct: {construct}")]
    UnsupportedConstruct { construct: String, position: Span },
    #[error("{position}: unsupported compiler version `{pragma}` (supported: >=0.4.22 <0.6.0)")]
    UnsupportedVersion { pragma: String, position: Span },
    #[error("{position}: duplicate definition of `{name}`")]
    DuplicateDefinition { name: String, position: Span },
    #[error("unknown contract `{0}`")]
    UnknownContract(String),
}

//! Deterministic single-node chain simulator.
//!
//! Blocks are mined instantly: every transaction, including deployments,
//! runs in the current block and then advances the block number by one.
//! Gas is metered with a small fixed table (see [`gas`]) but costs no ether,
//! so the sum of all balances never changes after genesis.

mod exec;
pub mod gas;
pub mod genesis;
pub mod script;
pub mod trace;
mod value;
pub mod world;

pub use exec::{deploy, send_transaction, ExecutionResult, Transaction, MAX_CALL_DEPTH};
pub use gas::GasModel;
pub use genesis::{genesis, GenesisConfig};
pub use trace::{export as export_trace, ExecStatus, RevertReason, TraceEvent};
pub use value::Value;
pub use world::{Account, ChainParams, Snapshot, StorageKey, WorldState};

use crate::types::{Address, Wei};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("account {account} holds {balance} wei, needs {required}")]
    InsufficientFunds {
        account: Address,
        balance: Wei,
        required: Wei,
    },
    #[error("unknown account {0}")]
    UnknownAccount(Address),
    #[error("unknown contract `{0}`")]
    UnknownContract(String),
    #[error("gas limit {requested} exceeds the chain limit {limit}")]
    GasLimitExceeded { requested: u64, limit: u64 },
    #[error("duplicate genesis allocation for {0}")]
    DuplicateAllocAddress(Address),
    #[error("derived contract address {0} is already in use")]
    AddressCollision(Address),
    #[error("snapshot released out of order")]
    StaleToken,
    #[error("genesis: {0}")]
    Genesis(String),
}

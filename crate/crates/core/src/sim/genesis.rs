//! Genesis configuration in the geth `genesis.json` layout.
//!
//! The reader is lenient about syntax (trailing commas, comments) and about
//! content: unknown fields are logged and skipped. Integers may be JSON
//! numbers, decimal strings or `0x`-hex strings.

use serde_json::{Map, Value as Json};

use super::gas::GasModel;
use super::world::{ChainParams, WorldState, DEFAULT_GAS_LIMIT};
use super::SimError;
use crate::types::{parse_u256, Address, Wei};

const KNOWN_TOP: &[&str] = &[
    "config",
    "alloc",
    "difficulty",
    "gasLimit",
    "nonce",
    "coinbase",
    "timestamp",
    "extraData",
    "mixHash",
    "parentHash",
];
const KNOWN_CONFIG: &[&str] = &[
    "chainID",
    "chainId",
    "homesteadBlock",
    "eip150Block",
    "eip155Block",
    "eip158Block",
    "byzantiumBlock",
    "constantinopleBlock",
    "petersburgBlock",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenesisConfig {
    pub chain_id: u64,
    /// Informational only; blocks are produced instantly.
    pub difficulty: Wei,
    /// Per-transaction gas cap.
    pub gas_limit: u64,
    pub alloc: Vec<(Address, Wei)>,
}

impl Default for GenesisConfig {
    fn default() -> Self {
        GenesisConfig {
            chain_id: 1,
            difficulty: Wei::zero(),
            gas_limit: DEFAULT_GAS_LIMIT,
            alloc: Vec::new(),
        }
    }
}

fn bad(msg: impl Into<String>) -> SimError {
    SimError::Genesis(msg.into())
}

fn integer(field: &str, value: &Json) -> Result<Wei, SimError> {
    match value {
        Json::Number(n) => n
            .as_u64()
            .map(Wei::from)
            .ok_or_else(|| bad(format!("`{field}` must be a non-negative integer"))),
        Json::String(s) => {
            parse_u256(s).ok_or_else(|| bad(format!("`{field}`: cannot parse `{s}` as an integer")))
        }
        _ => Err(bad(format!("`{field}` must be a number or string"))),
    }
}

fn small(field: &str, value: &Json) -> Result<u64, SimError> {
    let v = integer(field, value)?;
    u64::try_from(v).map_err(|_| bad(format!("`{field}` does not fit in 64 bits")))
}

fn warn_unknown(section: &str, map: &Map<String, Json>, known: &[&str]) {
    for key in map.keys().filter(|k| !known.contains(&k.as_str())) {
        log::warn!("genesis: ignoring unknown field `{section}{key}`");
    }
}

impl GenesisConfig {
    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let root: Json = json5::from_str(text).map_err(|e| bad(e.to_string()))?;
        let Json::Object(root) = root else {
            return Err(bad("top level must be an object"));
        };
        warn_unknown("", &root, KNOWN_TOP);

        let mut config = GenesisConfig::default();
        if let Some(section) = root.get("config") {
            let Json::Object(section) = section else {
                return Err(bad("`config` must be an object"));
            };
            warn_unknown("config.", section, KNOWN_CONFIG);
            if let Some(id) = section.get("chainID").or_else(|| section.get("chainId")) {
                config.chain_id = small("config.chainID", id)?;
            }
        }
        if let Some(d) = root.get("difficulty") {
            config.difficulty = integer("difficulty", d)?;
        }
        if let Some(g) = root.get("gasLimit") {
            config.gas_limit = small("gasLimit", g)?;
        }
        if let Some(alloc) = root.get("alloc") {
            let Json::Object(alloc) = alloc else {
                return Err(bad("`alloc` must be an object"));
            };
            for (addr, entry) in alloc {
                let address: Address = addr.parse().map_err(|e| bad(format!("alloc: {e}")))?;
                let balance = match entry.get("balance") {
                    Some(b) => integer(&format!("alloc.{addr}.balance"), b)?,
                    None => Wei::zero(),
                };
                config.alloc.push((address, balance));
            }
        }
        Ok(config)
    }
}

/// Builds the initial world: one account per allocation, block 0.
pub fn genesis(config: &GenesisConfig) -> Result<WorldState, SimError> {
    if config.gas_limit == 0 {
        return Err(bad("`gasLimit` must be positive"));
    }
    let mut world = WorldState::new(ChainParams {
        chain_id: config.chain_id,
        gas_limit: config.gas_limit,
        gas_model: GasModel::default(),
    });
    for (address, balance) in &config.alloc {
        world.create_account(*address, *balance)?;
    }
    Ok(world)
}

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

/// How `transfer` and `send` forward gas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GasModel {
    /// The callee receives exactly the 2300 stipend.
    #[default]
    Faithful,
    /// The callee receives all remaining gas, like a bare `call.value`.
    Paper,
}

impl fmt::Display for GasModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GasModel::Faithful => "faithful",
            GasModel::Paper => "paper",
        })
    }
}

impl FromStr for GasModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "faithful" => Ok(GasModel::Faithful),
            "paper" => Ok(GasModel::Paper),
            other => Err(format!(
                "unknown gas model `{other}` (expected faithful or paper)"
            )),
        }
    }
}

pub const STATEMENT: u64 = 10;
pub const CALL_BASE: u64 = 700;
pub const STORAGE_WRITE: u64 = 5000;
pub const STORAGE_READ: u64 = 200;
pub const VALUE_SURCHARGE: u64 = 9000;
pub const STIPEND: u64 = 2300;
/// Held back by the caller when forwarding "all remaining" gas.
pub const CALL_RETENTION: u64 = 2300;

/// Cost charged to the caller for issuing a message call.
pub fn call_cost(value_nonzero: bool) -> u64 {
    if value_nonzero {
        CALL_BASE + VALUE_SURCHARGE
    } else {
        CALL_BASE
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stipend_is_below_one_storage_write() {
        assert!(STIPEND < STORAGE_WRITE);
        assert!(STIPEND < STATEMENT + STORAGE_WRITE);
    }

    #[test]
    fn model_parses_from_text() {
        assert_eq!("paper".parse::<GasModel>(), Ok(GasModel::Paper));
        assert_eq!("faithful".parse::<GasModel>(), Ok(GasModel::Faithful));
        assert!("evm".parse::<GasModel>().is_err());
    }
}

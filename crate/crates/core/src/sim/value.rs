use std::fmt;

use serde::Serialize;

use crate::frontend::{Literal, SolType};
use crate::types::{Address, U256};

/// A runtime value of the subset.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(untagged)]
pub enum Value {
    Uint(#[serde(with = "crate::types::wei_decimal")] U256),
    Bool(bool),
    Address(Address),
    Str(String),
    /// Result of a call that returns nothing.
    Unit,
}

impl Value {
    pub fn default_for(ty: &SolType) -> Value {
        match ty {
            SolType::Uint256 => Value::Uint(U256::zero()),
            SolType::Bool => Value::Bool(false),
            SolType::Address | SolType::AddressPayable | SolType::Named(_) => {
                Value::Address(Address::ZERO)
            }
            SolType::Mapping(inner) => Value::default_for(inner),
        }
    }

    /// Converts `self` to a value of type `ty`, if the types are compatible.
    pub fn coerce(self, ty: &SolType) -> Option<Value> {
        match (ty, self) {
            (SolType::Uint256, v @ Value::Uint(_)) => Some(v),
            (SolType::Bool, v @ Value::Bool(_)) => Some(v),
            (
                SolType::Address | SolType::AddressPayable | SolType::Named(_),
                v @ Value::Address(_),
            ) => Some(v),
            _ => None,
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Uint(_) => "uint256",
            Value::Bool(_) => "bool",
            Value::Address(_) => "address",
            Value::Str(_) => "string",
            Value::Unit => "()",
        }
    }
}

impl From<&Literal> for Value {
    fn from(lit: &Literal) -> Self {
        match lit {
            Literal::Uint(v) => Value::Uint(*v),
            Literal::Bool(b) => Value::Bool(*b),
            Literal::Address(a) => Value::Address(*a),
            Literal::Str(s) => Value::Str(s.clone()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Uint(v) => write!(f, "{v}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Address(a) => write!(f, "{a}"),
            Value::Str(s) => write!(f, "{s:?}"),
            Value::Unit => f.write_str("()"),
        }
    }
}

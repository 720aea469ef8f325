//! Static detection of reentrancy candidates.
//!
//! Two patterns are reported:
//!
//! * **SingleFunction**: an ether-moving call (`transfer`, `send`,
//!   `call.value`) followed, at a higher pre-order statement index of the
//!   same function, by a write to contract storage. Branches are ignored, so
//!   a write in an `else` after a call in the `then` still counts.
//! * **CrossFunction**: a storage variable that the calling function read at
//!   or before the call, has not yet written before the call, and that some
//!   other public or external function writes. A re-entrant caller can reach
//!   that other function while the first one still acts on the stale value.
//!
//! Writes performed inside internal calls are attributed to the calling
//! statement.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::frontend::ast::*;
use crate::frontend::effects::{transitive_writes, FunctionEffects};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum GasForwarded {
    Stipend2300,
    /// Explicit `.gas(g)`; `None` when `g` is not a constant.
    Custom(Option<u64>),
    AllRemaining,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExternalCallSite {
    pub contract: String,
    pub function: String,
    pub stmt_index: usize,
    pub kind: CallKind,
    pub gas_forwarded: GasForwarded,
    #[serde(skip)]
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct StateWriteSite {
    pub contract: String,
    pub function: String,
    pub stmt_index: usize,
    /// Storage variable written; mapping writes record the mapping name.
    pub target_var: String,
    /// Internal function that performs the write, when not written directly.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub via: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Pattern {
    SingleFunction,
    CrossFunction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VulnCandidate {
    pub contract: String,
    pub function: String,
    /// `name(type,...)` with ABI type names.
    pub signature: String,
    pub call_site: ExternalCallSite,
    pub writes_after: Vec<StateWriteSite>,
    pub pattern: Pattern,
    pub cross_peers: Vec<String>,
    pub shared_vars: Vec<String>,
    /// False for constructors, fallbacks and non-public functions: the
    /// dynamic stage cannot target them by name.
    pub attackable: bool,
}

fn classify_gas(call: &ExternalCall) -> GasForwarded {
    match call.kind {
        CallKind::Transfer | CallKind::Send => GasForwarded::Stipend2300,
        CallKind::CallValue => match &call.gas {
            None => GasForwarded::AllRemaining,
            Some(g) => match &g.kind {
                ExprKind::Literal(Literal::Uint(v)) if *v <= u64::MAX.into() => {
                    GasForwarded::Custom(Some(v.as_u64()))
                }
                _ => GasForwarded::Custom(None),
            },
        },
    }
}

fn function_calls(contract: &ContractDef, func: &FunctionDef) -> Vec<ExternalCallSite> {
    let mut sites = Vec::new();
    walk_stmts(&func.body, &mut |stmt| {
        for e in stmt.own_exprs() {
            e.walk(&mut |node| {
                if let ExprKind::ExternalCall(call) = &node.kind {
                    sites.push(ExternalCallSite {
                        contract: contract.name.clone(),
                        function: func.display_name().to_string(),
                        stmt_index: stmt.index,
                        kind: call.kind,
                        gas_forwarded: classify_gas(call),
                        span: node.span,
                    });
                }
            });
        }
    });
    sites
}

/// Every ether-moving built-in call in the unit, in source order.
pub fn find_external_calls(unit: &SourceUnit) -> Vec<ExternalCallSite> {
    unit.contracts
        .iter()
        .flat_map(|c| c.all_functions().flat_map(move |f| function_calls(c, f)))
        .collect()
}

pub fn find_candidates(unit: &SourceUnit) -> Vec<VulnCandidate> {
    let mut out = Vec::new();
    for contract in &unit.contracts {
        // Writes of every function reachable by name from outside.
        let peer_writes: BTreeMap<&str, BTreeSet<String>> = contract
            .functions
            .iter()
            .filter(|f| f.visibility.is_exposed())
            .map(|f| (f.display_name(), transitive_writes(contract, f)))
            .collect();

        for func in contract.all_functions() {
            let sites = function_calls(contract, func);
            if sites.is_empty() {
                continue;
            }
            let effects = FunctionEffects::of(contract, func);
            let internal_writes: Vec<(usize, String, BTreeSet<String>)> = effects
                .internal_calls
                .iter()
                .filter_map(|(idx, name)| {
                    contract
                        .function(name)
                        .map(|f| (*idx, name.clone(), transitive_writes(contract, f)))
                })
                .collect();
            let attackable =
                !func.is_constructor && !func.is_fallback() && func.visibility.is_exposed();

            for site in sites {
                let mut writes_after: Vec<StateWriteSite> = effects
                    .writes
                    .iter()
                    .filter(|w| w.stmt_index > site.stmt_index)
                    .map(|w| StateWriteSite {
                        contract: contract.name.clone(),
                        function: func.display_name().to_string(),
                        stmt_index: w.stmt_index,
                        target_var: w.var.clone(),
                        via: None,
                    })
                    .collect();
                for (idx, callee, vars) in &internal_writes {
                    if *idx > site.stmt_index {
                        writes_after.extend(vars.iter().map(|v| StateWriteSite {
                            contract: contract.name.clone(),
                            function: func.display_name().to_string(),
                            stmt_index: *idx,
                            target_var: v.clone(),
                            via: Some(callee.clone()),
                        }));
                    }
                }
                writes_after.sort();
                writes_after.dedup();

                if !writes_after.is_empty() {
                    out.push(VulnCandidate {
                        contract: contract.name.clone(),
                        function: func.display_name().to_string(),
                        signature: func.signature(),
                        call_site: site.clone(),
                        writes_after,
                        pattern: Pattern::SingleFunction,
                        cross_peers: Vec::new(),
                        shared_vars: Vec::new(),
                        attackable,
                    });
                }

                if func.is_constructor {
                    continue;
                }
                let mut committed: BTreeSet<&str> = effects
                    .writes
                    .iter()
                    .filter(|w| w.stmt_index < site.stmt_index)
                    .map(|w| w.var.as_str())
                    .collect();
                for (idx, _, vars) in &internal_writes {
                    if *idx < site.stmt_index {
                        committed.extend(vars.iter().map(String::as_str));
                    }
                }
                let stale: BTreeSet<&str> = effects
                    .reads
                    .iter()
                    .filter(|r| r.stmt_index <= site.stmt_index)
                    .map(|r| r.var.as_str())
                    .filter(|v| !committed.contains(v))
                    .collect();
                let mut peers = Vec::new();
                let mut shared = BTreeSet::new();
                for (peer, writes) in &peer_writes {
                    if Some(*peer) == func.name.as_deref() {
                        continue;
                    }
                    let hit: Vec<&str> = stale
                        .iter()
                        .copied()
                        .filter(|v| writes.contains(*v))
                        .collect();
                    if !hit.is_empty() {
                        peers.push(peer.to_string());
                        shared.extend(hit.into_iter().map(str::to_string));
                    }
                }
                if !shared.is_empty() {
                    out.push(VulnCandidate {
                        contract: contract.name.clone(),
                        function: func.display_name().to_string(),
                        signature: func.signature(),
                        call_site: site,
                        writes_after: Vec::new(),
                        pattern: Pattern::CrossFunction,
                        cross_peers: peers,
                        shared_vars: shared.into_iter().collect(),
                        attackable,
                    });
                }
            }
        }
    }
    out
}

/// Signature list: one `Contract.function(types)` line per distinct
/// function, sorted and deduplicated, LF-terminated.
pub fn emit_signatures(candidates: &[VulnCandidate]) -> String {
    let lines: BTreeSet<String> = candidates
        .iter()
        .map(|c| format!("{}.{}", c.contract, c.signature))
        .collect();
    let mut out = String::new();
    for line in lines {
        out.push_str(&line);
        out.push('\n');
    }
    out
}

//! Per-statement storage effects of a function body.
//!
//! A name refers to storage when it is a declared state variable and no
//! parameter or local of the function shadows it. Locals are collected
//! function-wide, which is conservative for shadowing in nested blocks.

use std::collections::{BTreeSet, HashSet};

use super::ast::*;

/// Storage access recorded at a statement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Access {
    pub stmt_index: usize,
    pub var: String,
    pub span: Span,
}

#[derive(Debug, Clone, Default)]
pub struct FunctionEffects {
    pub reads: Vec<Access>,
    pub writes: Vec<Access>,
    /// Same-contract functions invoked, with the calling statement index.
    pub internal_calls: Vec<(usize, String)>,
    pub ether_calls: usize,
    pub handle_calls: usize,
    pub emits: usize,
    pub reads_environment: bool,
}

impl FunctionEffects {
    pub fn of(contract: &ContractDef, func: &FunctionDef) -> Self {
        let mut locals: HashSet<&str> = func
            .params
            .iter()
            .filter_map(|p| p.name.as_deref())
            .collect();
        walk_stmts(&func.body, &mut |stmt| {
            if let StmtKind::VarDecl { name, .. } = &stmt.kind {
                locals.insert(name);
            }
        });
        let declared: HashSet<&str> = contract
            .functions
            .iter()
            .filter_map(|f| f.name.as_deref())
            .collect();
        let mut collector = Collector {
            contract,
            locals,
            declared,
            effects: FunctionEffects::default(),
        };
        walk_stmts(&func.body, &mut |stmt| collector.stmt(stmt));
        collector.effects
    }
}

struct Collector<'a> {
    contract: &'a ContractDef,
    locals: HashSet<&'a str>,
    declared: HashSet<&'a str>,
    effects: FunctionEffects,
}

impl<'a> Collector<'a> {
    fn storage_var(&self, name: &str) -> bool {
        !self.locals.contains(name) && self.contract.state_var(name).is_some()
    }

    fn stmt(&mut self, stmt: &'a Stmt) {
        let index = stmt.index;
        match &stmt.kind {
            StmtKind::Assign { target, op, value } => {
                let (base, key) = match &target.kind {
                    ExprKind::Ident(name) => (Some(name), None),
                    ExprKind::Index { base, key } => match &base.kind {
                        ExprKind::Ident(name) => (Some(name), Some(key.as_ref())),
                        _ => {
                            self.expr(index, target);
                            (None, None)
                        }
                    },
                    _ => {
                        self.expr(index, target);
                        (None, None)
                    }
                };
                if let Some(key) = key {
                    self.expr(index, key);
                }
                // Compound assignments read before they write.
                self.expr(index, value);
                if let Some(name) = base {
                    if self.storage_var(name) {
                        if *op != AssignOp::Set {
                            self.effects.reads.push(Access {
                                stmt_index: index,
                                var: name.clone(),
                                span: target.span,
                            });
                        }
                        self.effects.writes.push(Access {
                            stmt_index: index,
                            var: name.clone(),
                            span: target.span,
                        });
                    }
                }
            }
            StmtKind::Emit { .. } => {
                self.effects.emits += 1;
                for e in stmt.own_exprs() {
                    self.expr(index, e);
                }
            }
            _ => {
                for e in stmt.own_exprs() {
                    self.expr(index, e);
                }
            }
        }
    }

    fn expr(&mut self, index: usize, expr: &'a Expr) {
        expr.walk(&mut |e| match &e.kind {
            ExprKind::Ident(name) if self.storage_var(name) => self.effects.reads.push(Access {
                stmt_index: index,
                var: name.clone(),
                span: e.span,
            }),
            ExprKind::ExternalCall(_) => self.effects.ether_calls += 1,
            ExprKind::HandleCall { .. } => self.effects.handle_calls += 1,
            ExprKind::InternalCall { name, .. } if self.declared.contains(name.as_str()) => {
                self.effects.internal_calls.push((index, name.clone()))
            }
            ExprKind::Builtin(_) => self.effects.reads_environment = true,
            _ => {}
        });
    }
}

/// State variables written by `func` directly or through internal calls.
pub fn transitive_writes(contract: &ContractDef, func: &FunctionDef) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut seen = HashSet::new();
    collect_transitive(contract, func, &mut seen, &mut out);
    out
}

fn collect_transitive(
    contract: &ContractDef,
    func: &FunctionDef,
    seen: &mut HashSet<String>,
    out: &mut BTreeSet<String>,
) {
    if !seen.insert(func.display_name().to_string()) {
        return;
    }
    let effects = FunctionEffects::of(contract, func);
    out.extend(effects.writes.into_iter().map(|w| w.var));
    for (_, callee) in effects.internal_calls {
        if let Some(f) = contract.function(&callee) {
            collect_transitive(contract, f, seen, out);
        }
    }
}

/// True if `func` or anything it calls internally changes chain state.
pub fn mutates_state(contract: &ContractDef, func: &FunctionDef) -> bool {
    let mut seen = HashSet::new();
    mutates(contract, func, &mut seen)
}

fn mutates(contract: &ContractDef, func: &FunctionDef, seen: &mut HashSet<String>) -> bool {
    if !seen.insert(func.display_name().to_string()) {
        return false;
    }
    let e = FunctionEffects::of(contract, func);
    if !e.writes.is_empty() || e.ether_calls > 0 || e.handle_calls > 0 || e.emits > 0 {
        return true;
    }
    e.internal_calls
        .iter()
        .filter_map(|(_, name)| contract.function(name))
        .any(|f| mutates(contract, f, seen))
}

/// True if `func` observes storage or the execution environment.
pub fn observes_state(contract: &ContractDef, func: &FunctionDef) -> bool {
    let e = FunctionEffects::of(contract, func);
    !e.reads.is_empty() || e.reads_environment || !e.internal_calls.is_empty()
}

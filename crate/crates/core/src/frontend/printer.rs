//! Pretty-printer producing subset source that re-parses to the same tree.

use std::fmt::Write;

use super::ast::*;

const INDENT: &str = "    ";

pub fn render(unit: &SourceUnit) -> String {
    let mut out = String::new();
    writeln!(out, "pragma solidity {};", unit.pragma).unwrap();
    for import in &unit.imports {
        writeln!(out, "import \"{}\";", escape_str(import)).unwrap();
    }
    for contract in &unit.contracts {
        out.push('\n');
        render_contract(&mut out, contract);
    }
    out
}

fn render_contract(out: &mut String, contract: &ContractDef) {
    writeln!(out, "contract {} {{", contract.name).unwrap();
    for var in &contract.state_vars {
        write!(
            out,
            "{INDENT}{} {} {}",
            var.ty,
            var.visibility.keyword(),
            var.name
        )
        .unwrap();
        if let Some(init) = &var.initializer {
            write!(out, " = {init}").unwrap();
        }
        out.push_str(";\n");
    }
    let mut first = contract.state_vars.is_empty();
    for func in contract.all_functions() {
        if !first {
            out.push('\n');
        }
        first = false;
        render_function(out, func);
    }
    out.push_str("}\n");
}

fn render_function(out: &mut String, func: &FunctionDef) {
    out.push_str(INDENT);
    if func.is_constructor {
        out.push_str("constructor");
    } else {
        out.push_str("function");
        if let Some(name) = &func.name {
            write!(out, " {name}").unwrap();
        }
    }
    let params: Vec<String> = func
        .params
        .iter()
        .map(|p| match &p.name {
            Some(n) => format!("{} {n}", p.ty),
            None => p.ty.to_string(),
        })
        .collect();
    write!(out, "({}) {}", params.join(", "), func.visibility.keyword()).unwrap();
    if func.payable {
        out.push_str(" payable");
    }
    if let Some(ret) = &func.returns {
        write!(out, " returns ({ret})").unwrap();
    }
    out.push_str(" {\n");
    render_block(out, &func.body, 2);
    writeln!(out, "{INDENT}}}").unwrap();
}

fn render_block(out: &mut String, block: &Block, depth: usize) {
    for stmt in block {
        render_stmt(out, stmt, depth);
    }
}

fn render_stmt(out: &mut String, stmt: &Stmt, depth: usize) {
    let pad = INDENT.repeat(depth);
    out.push_str(&pad);
    match &stmt.kind {
        StmtKind::VarDecl { ty, name, init } => {
            write!(out, "{ty} {name}").unwrap();
            if let Some(init) = init {
                write!(out, " = {}", expr_to_string(init)).unwrap();
            }
            out.push_str(";\n");
        }
        StmtKind::Assign { target, op, value } => {
            writeln!(
                out,
                "{} {} {};",
                expr_to_string(target),
                op.symbol(),
                expr_to_string(value)
            )
            .unwrap();
        }
        StmtKind::Require { cond, message } => {
            write!(out, "require({}", expr_to_string(cond)).unwrap();
            if let Some(m) = message {
                write!(out, ", \"{}\"", escape_str(m)).unwrap();
            }
            out.push_str(");\n");
        }
        StmtKind::If { .. } => {
            render_if(out, stmt, depth);
            out.push('\n');
        }
        StmtKind::Expr(e) => writeln!(out, "{};", expr_to_string(e)).unwrap(),
        StmtKind::Emit { event, args } => {
            writeln!(out, "emit {event}({});", args_to_string(args)).unwrap()
        }
        StmtKind::Return(value) => match value {
            Some(v) => writeln!(out, "return {};", expr_to_string(v)).unwrap(),
            None => out.push_str("return;\n"),
        },
    }
}

/// Writes an `if` chain without the leading indentation or trailing newline.
fn render_if(out: &mut String, stmt: &Stmt, depth: usize) {
    let StmtKind::If {
        cond,
        then_block,
        else_block,
    } = &stmt.kind
    else {
        unreachable!("render_if on non-if statement");
    };
    let pad = INDENT.repeat(depth);
    writeln!(out, "if ({}) {{", expr_to_string(cond)).unwrap();
    render_block(out, then_block, depth + 1);
    write!(out, "{pad}}}").unwrap();
    if let Some(else_block) = else_block {
        match else_block.as_slice() {
            [only] if matches!(only.kind, StmtKind::If { .. }) => {
                out.push_str(" else ");
                render_if(out, only, depth);
            }
            _ => {
                out.push_str(" else {\n");
                render_block(out, else_block, depth + 1);
                write!(out, "{pad}}}").unwrap();
            }
        }
    }
}

fn args_to_string(args: &[Expr]) -> String {
    args.iter()
        .map(expr_to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

/// Renders an expression with the minimum parentheses needed to preserve structure.
pub fn expr_to_string(expr: &Expr) -> String {
    match &expr.kind {
        ExprKind::Literal(lit) => lit.to_string(),
        ExprKind::Ident(name) => name.clone(),
        ExprKind::Member { base, field } => format!("{}.{field}", postfix_base(base)),
        ExprKind::Index { base, key } => {
            format!("{}[{}]", postfix_base(base), expr_to_string(key))
        }
        ExprKind::Binary { op, lhs, rhs } => {
            let prec = op.precedence();
            let left = match &lhs.kind {
                ExprKind::Binary { op: inner, .. } if inner.precedence() < prec => {
                    format!("({})", expr_to_string(lhs))
                }
                _ => expr_to_string(lhs),
            };
            let right = match &rhs.kind {
                ExprKind::Binary { op: inner, .. } if inner.precedence() <= prec => {
                    format!("({})", expr_to_string(rhs))
                }
                _ => expr_to_string(rhs),
            };
            format!("{left} {} {right}", op.symbol())
        }
        ExprKind::Not(operand) => match operand.kind {
            ExprKind::Binary { .. } => format!("!({})", expr_to_string(operand)),
            _ => format!("!{}", expr_to_string(operand)),
        },
        ExprKind::ExternalCall(call) => {
            let callee = postfix_base(&call.callee);
            let value = expr_to_string(&call.value);
            match call.kind {
                CallKind::Transfer => format!("{callee}.transfer({value})"),
                CallKind::Send => format!("{callee}.send({value})"),
                CallKind::CallValue => {
                    let gas = call
                        .gas
                        .as_ref()
                        .map(|g| format!(".gas({})", expr_to_string(g)))
                        .unwrap_or_default();
                    format!(
                        "{callee}.call.value({value}){gas}({})",
                        args_to_string(&call.payload)
                    )
                }
            }
        }
        ExprKind::InternalCall { name, args } => format!("{name}({})", args_to_string(args)),
        ExprKind::HandleCall {
            target,
            function,
            value,
            args,
        } => {
            let value = value
                .as_ref()
                .map(|v| format!(".value({})", expr_to_string(v)))
                .unwrap_or_default();
            format!(
                "{}.{function}{value}({})",
                postfix_base(target),
                args_to_string(args)
            )
        }
        ExprKind::Builtin(b) => b.text().to_string(),
        ExprKind::Cast { ty, expr } => format!("{ty}({})", expr_to_string(expr)),
        ExprKind::EncodeCall { signature, args } => {
            let mut parts = vec![format!("\"{}\"", escape_str(signature))];
            parts.extend(args.iter().map(expr_to_string));
            format!("abi.encodeWithSignature({})", parts.join(", "))
        }
    }
}

fn postfix_base(expr: &Expr) -> String {
    match expr.kind {
        ExprKind::Binary { .. } | ExprKind::Not(_) => format!("({})", expr_to_string(expr)),
        _ => expr_to_string(expr),
    }
}

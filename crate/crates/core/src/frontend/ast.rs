//! Typed syntax tree for the supported Solidity subset.
//!
//! Every statement and expression carries a [`Span`]. Spans never take part
//! in equality, so two trees parsed from differently formatted text compare
//! equal when their structure matches.

use std::fmt;

use serde::Serialize;

use super::version::VersionRange;
use crate::types::{Address, U256};

/// Source position (1-based line and column).
///
/// `PartialEq` is total: any two spans compare equal, which lets
/// derived equality on tree nodes ignore positions.
#[derive(Debug, Clone, Copy, Default, Eq, Serialize)]
pub struct Span {
    pub line: u32,
    pub column: u32,
}

impl Span {
    pub fn new(line: u32, column: u32) -> Self {
        Span { line, column }
    }
}

impl PartialEq for Span {
    fn eq(&self, _other: &Self) -> bool {
        true
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceUnit {
    pub pragma: VersionRange,
    pub imports: Vec<String>,
    pub contracts: Vec<ContractDef>,
}

impl SourceUnit {
    pub fn contract(&self, name: &str) -> Option<&ContractDef> {
        self.contracts.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractDef {
    pub name: String,
    pub state_vars: Vec<StateVarDecl>,
    pub functions: Vec<FunctionDef>,
    pub constructor: Option<FunctionDef>,
    pub fallback: Option<FunctionDef>,
    pub span: Span,
}

impl ContractDef {
    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions
            .iter()
            .find(|f| f.name.as_deref() == Some(name))
    }

    pub fn state_var(&self, name: &str) -> Option<&StateVarDecl> {
        self.state_vars.iter().find(|v| v.name == name)
    }

    /// Constructor, named functions and fallback, in that order.
    pub fn all_functions(&self) -> impl Iterator<Item = &FunctionDef> {
        self.constructor
            .iter()
            .chain(self.functions.iter())
            .chain(self.fallback.iter())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Visibility {
    Public,
    External,
    Internal,
    Private,
}

impl Visibility {
    pub fn keyword(self) -> &'static str {
        match self {
            Visibility::Public => "public",
            Visibility::External => "external",
            Visibility::Internal => "internal",
            Visibility::Private => "private",
        }
    }

    /// Callable from other accounts.
    pub fn is_exposed(self) -> bool {
        matches!(self, Visibility::Public | Visibility::External)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SolType {
    Uint256,
    Bool,
    Address,
    AddressPayable,
    /// `mapping(address => value)`.
    Mapping(Box<SolType>),
    /// A contract (or otherwise user-defined) type name.
    Named(String),
}

impl SolType {
    /// Canonical ABI type name.
    pub fn abi_name(&self) -> String {
        match self {
            SolType::Uint256 => "uint256".into(),
            SolType::Bool => "bool".into(),
            SolType::Address | SolType::AddressPayable | SolType::Named(_) => "address".into(),
            SolType::Mapping(value) => format!("mapping(address => {})", value.abi_name()),
        }
    }
}

impl fmt::Display for SolType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolType::Uint256 => f.write_str("uint256"),
            SolType::Bool => f.write_str("bool"),
            SolType::Address => f.write_str("address"),
            SolType::AddressPayable => f.write_str("address payable"),
            SolType::Mapping(value) => write!(f, "mapping(address => {value})"),
            SolType::Named(name) => f.write_str(name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateVarDecl {
    pub name: String,
    pub ty: SolType,
    pub visibility: Visibility,
    pub initializer: Option<Literal>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub ty: SolType,
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionDef {
    /// `None` for the fallback; `"constructor"` for constructors.
    pub name: Option<String>,
    pub params: Vec<Param>,
    pub returns: Option<SolType>,
    pub visibility: Visibility,
    pub payable: bool,
    pub body: Block,
    pub is_constructor: bool,
    pub span: Span,
}

impl FunctionDef {
    pub fn is_fallback(&self) -> bool {
        self.name.is_none()
    }

    /// Name used in reports: the declared name, `constructor` or `fallback`.
    pub fn display_name(&self) -> &str {
        self.name.as_deref().unwrap_or("fallback")
    }

    /// `name(type1,type2)` using ABI type names.
    pub fn signature(&self) -> String {
        let types: Vec<String> = self.params.iter().map(|p| p.ty.abi_name()).collect();
        format!("{}({})", self.display_name(), types.join(","))
    }
}

pub type Block = Vec<Stmt>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    /// Pre-order index within the enclosing function body.
    pub index: usize,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AssignOp {
    Set,
    Add,
    Sub,
}

impl AssignOp {
    pub fn symbol(self) -> &'static str {
        match self {
            AssignOp::Set => "=",
            AssignOp::Add => "+=",
            AssignOp::Sub => "-=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    VarDecl {
        ty: SolType,
        name: String,
        init: Option<Expr>,
    },
    Assign {
        target: Expr,
        op: AssignOp,
        value: Expr,
    },
    Require {
        cond: Expr,
        message: Option<String>,
    },
    If {
        cond: Expr,
        then_block: Block,
        else_block: Option<Block>,
    },
    Expr(Expr),
    Emit {
        event: String,
        args: Vec<Expr>,
    },
    Return(Option<Expr>),
}

impl Stmt {
    /// Nested blocks of this statement, in source order.
    pub fn child_blocks(&self) -> Vec<&Block> {
        match &self.kind {
            StmtKind::If {
                then_block,
                else_block,
                ..
            } => std::iter::once(then_block)
                .chain(else_block.iter())
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Expressions owned directly by this statement (not by nested blocks).
    pub fn own_exprs(&self) -> Vec<&Expr> {
        match &self.kind {
            StmtKind::VarDecl { init, .. } => init.iter().collect(),
            StmtKind::Assign { target, value, .. } => vec![target, value],
            StmtKind::Require { cond, .. } => vec![cond],
            StmtKind::If { cond, .. } => vec![cond],
            StmtKind::Expr(e) => vec![e],
            StmtKind::Emit { args, .. } => args.iter().collect(),
            StmtKind::Return(e) => e.iter().collect(),
        }
    }
}

/// Visits every statement of `block` in pre-order.
pub fn walk_stmts<'a>(block: &'a Block, visit: &mut dyn FnMut(&'a Stmt)) {
    for stmt in block {
        visit(stmt);
        for child in stmt.child_blocks() {
            walk_stmts(child, visit);
        }
    }
}

/// Reassigns pre-order statement indices from zero.
pub fn renumber(block: &mut Block) {
    fn go(block: &mut Block, next: &mut usize) {
        for stmt in block.iter_mut() {
            stmt.index = *next;
            *next += 1;
            if let StmtKind::If {
                then_block,
                else_block,
                ..
            } = &mut stmt.kind
            {
                go(then_block, next);
                if let Some(else_block) = else_block {
                    go(else_block, next);
                }
            }
        }
    }
    let mut next = 0;
    go(block, &mut next);
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }

    /// Direct subexpressions in evaluation order.
    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::Literal(_) | ExprKind::Ident(_) | ExprKind::Builtin(_) => Vec::new(),
            ExprKind::Member { base, .. } => vec![base],
            ExprKind::Index { base, key } => vec![base, key],
            ExprKind::Binary { lhs, rhs, .. } => vec![lhs, rhs],
            ExprKind::Not(operand) => vec![operand],
            ExprKind::ExternalCall(call) => {
                let mut out: Vec<&Expr> = vec![&call.callee, &call.value];
                out.extend(call.gas.as_deref());
                out.extend(call.payload.iter());
                out
            }
            ExprKind::InternalCall { args, .. } | ExprKind::EncodeCall { args, .. } => {
                args.iter().collect()
            }
            ExprKind::HandleCall {
                target,
                value,
                args,
                ..
            } => {
                let mut out: Vec<&Expr> = vec![target];
                out.extend(value.as_deref());
                out.extend(args.iter());
                out
            }
            ExprKind::Cast { expr, .. } => vec![expr],
        }
    }

    /// Visits this expression and all subexpressions in pre-order.
    pub fn walk<'a>(&'a self, visit: &mut dyn FnMut(&'a Expr)) {
        visit(self);
        for child in self.children() {
            child.walk(visit);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Literal {
    Uint(U256),
    Bool(bool),
    Address(Address),
    Str(String),
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Uint(v) => write!(f, "{v}"),
            Literal::Bool(b) => write!(f, "{b}"),
            Literal::Address(a) => write!(f, "{a}"),
            Literal::Str(s) => write!(f, "\"{}\"", escape_str(s)),
        }
    }
}

pub(crate) fn escape_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Or => "||",
            BinOp::And => "&&",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
        }
    }

    /// Binding strength; higher binds tighter. All levels are left-associative.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CallKind {
    Transfer,
    Send,
    CallValue,
}

impl fmt::Display for CallKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CallKind::Transfer => "transfer",
            CallKind::Send => "send",
            CallKind::CallValue => "call.value",
        })
    }
}

/// One of the three ether-moving built-ins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalCall {
    pub callee: Box<Expr>,
    pub kind: CallKind,
    pub value: Box<Expr>,
    /// Explicit `.gas(g)`; only ever present for `CallValue`.
    pub gas: Option<Box<Expr>>,
    pub payload: Vec<Expr>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    MsgSender,
    MsgValue,
    TxOrigin,
    BlockNumber,
    /// `address(this).balance`
    SelfBalance,
    /// `this`
    This,
}

impl Builtin {
    pub fn text(self) -> &'static str {
        match self {
            Builtin::MsgSender => "msg.sender",
            Builtin::MsgValue => "msg.value",
            Builtin::TxOrigin => "tx.origin",
            Builtin::BlockNumber => "block.number",
            Builtin::SelfBalance => "address(this).balance",
            Builtin::This => "this",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Literal(Literal),
    Ident(String),
    Member {
        base: Box<Expr>,
        field: String,
    },
    Index {
        base: Box<Expr>,
        key: Box<Expr>,
    },
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Not(Box<Expr>),
    ExternalCall(ExternalCall),
    /// `name(args)`: a function of the same contract, or a contract-type
    /// conversion such as `FairDare(addr)` when no such function exists.
    InternalCall {
        name: String,
        args: Vec<Expr>,
    },
    /// `target.function[.value(v)](args)`: a named call through a contract handle.
    HandleCall {
        target: Box<Expr>,
        function: String,
        value: Option<Box<Expr>>,
        args: Vec<Expr>,
    },
    Builtin(Builtin),
    /// `address(e)` or `uint256(e)`.
    Cast {
        ty: SolType,
        expr: Box<Expr>,
    },
    /// `abi.encodeWithSignature("name(types)", args)`.
    EncodeCall {
        signature: String,
        args: Vec<Expr>,
    },
}

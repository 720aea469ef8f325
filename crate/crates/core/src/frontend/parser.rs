//! Recursive-descent parser for the Solidity subset.

use std::collections::HashSet;

use super::ast::*;
use super::lexer::{tokenize, Token, TokenKind};
use super::version::{Version, VersionConstraint, VersionOp, VersionRange};
use super::FrontendError;
use crate::types::{Address, U256};

type PResult<T> = Result<T, FrontendError>;

/// Words that can never name a variable, function or contract.
const RESERVED: &[&str] = &[
    "contract",
    "function",
    "constructor",
    "if",
    "else",
    "return",
    "returns",
    "require",
    "emit",
    "mapping",
    "public",
    "private",
    "internal",
    "external",
    "payable",
    "pragma",
    "import",
    "true",
    "false",
    "while",
    "for",
    "do",
    "new",
    "delete",
    "assembly",
    "modifier",
    "event",
    "struct",
    "enum",
    "library",
    "interface",
    "using",
];

/// Constructs outside the subset that are reported by name.
const UNSUPPORTED_STATEMENTS: &[(&str, &str)] = &[
    ("for", "for loop"),
    ("while", "while loop"),
    ("do", "do-while loop"),
    ("assembly", "inline assembly"),
    ("throw", "throw statement"),
    ("revert", "revert statement"),
    ("assert", "assert statement"),
    ("delete", "delete statement"),
    ("selfdestruct", "selfdestruct"),
    ("suicide", "selfdestruct"),
    ("try", "try/catch"),
];

const UNSUPPORTED_MEMBERS: &[(&str, &str)] = &[
    ("modifier", "modifier definition"),
    ("event", "event declaration"),
    ("struct", "struct definition"),
    ("enum", "enum definition"),
    ("using", "using-for directive"),
];

pub fn parse(source: &str) -> PResult<SourceUnit> {
    let tokens = tokenize(source)?;
    Parser { tokens, pos: 0 }.source_unit()
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    fn peek_at(&self, offset: usize) -> &TokenKind {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].kind
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn is_symbol(&self, sym: &str) -> bool {
        matches!(self.peek(), TokenKind::Symbol(s) if *s == sym)
    }

    fn is_word(&self, word: &str) -> bool {
        matches!(self.peek(), TokenKind::Ident(s) if s == word)
    }

    fn eat_symbol(&mut self, sym: &str) -> bool {
        if self.is_symbol(sym) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, word: &str) -> bool {
        if self.is_word(word) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error(&self, expected: impl Into<String>) -> FrontendError {
        let span = self.span();
        FrontendError::Parse {
            line: span.line,
            column: span.column,
            expected: expected.into(),
            found: self.peek().describe(),
        }
    }

    fn unsupported(&self, construct: impl Into<String>, position: Span) -> FrontendError {
        FrontendError::UnsupportedConstruct {
            construct: construct.into(),
            position,
        }
    }

    fn expect_symbol(&mut self, sym: &str) -> PResult<()> {
        if self.eat_symbol(sym) {
            Ok(())
        } else {
            Err(self.error(format!("`{sym}`")))
        }
    }

    fn expect_word(&mut self, word: &str) -> PResult<()> {
        if self.eat_word(word) {
            Ok(())
        } else {
            Err(self.error(format!("`{word}`")))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            TokenKind::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.error("identifier")),
        }
    }

    // ---- top level ------------------------------------------------------

    fn source_unit(&mut self) -> PResult<SourceUnit> {
        let mut imports = Vec::new();
        while self.is_word("import") {
            imports.push(self.import()?);
        }
        let pragma_span = self.span();
        if !self.eat_word("pragma") {
            return Err(self.error("`pragma solidity`"));
        }
        if !self.is_word("solidity") {
            let what = match self.peek() {
                TokenKind::Ident(s) => format!("pragma {s}"),
                _ => "pragma".to_string(),
            };
            return Err(self.unsupported(what, pragma_span));
        }
        self.bump();
        let pragma = self.version_range()?;
        if !pragma.is_supported() {
            return Err(FrontendError::UnsupportedVersion {
                pragma: pragma.to_string(),
                position: pragma_span,
            });
        }

        let mut contracts: Vec<ContractDef> = Vec::new();
        loop {
            match self.peek().clone() {
                TokenKind::Eof => break,
                TokenKind::Ident(w) if w == "import" => imports.push(self.import()?),
                TokenKind::Ident(w) if w == "contract" => {
                    let contract = self.contract()?;
                    if contracts.iter().any(|c| c.name == contract.name) {
                        return Err(FrontendError::DuplicateDefinition {
                            name: contract.name,
                            position: contract.span,
                        });
                    }
                    contracts.push(contract);
                }
                TokenKind::Ident(w) if w == "pragma" => {
                    return Err(self.unsupported("additional pragma", self.span()))
                }
                TokenKind::Ident(w) if w == "library" || w == "interface" => {
                    return Err(self.unsupported(w, self.span()))
                }
                TokenKind::Ident(w) if w == "abstract" => {
                    return Err(self.unsupported("abstract contract", self.span()))
                }
                _ => return Err(self.error("`contract` or `import`")),
            }
        }
        Ok(SourceUnit {
            pragma,
            imports,
            contracts,
        })
    }

    fn import(&mut self) -> PResult<String> {
        self.expect_word("import")?;
        match self.peek().clone() {
            TokenKind::Str(path) => {
                self.bump();
                self.expect_symbol(";")?;
                Ok(path)
            }
            _ => Err(self.unsupported("import form other than `import \"file\";`", self.span())),
        }
    }

    fn version_range(&mut self) -> PResult<VersionRange> {
        let mut constraints = Vec::new();
        while !self.is_symbol(";") {
            let op = if self.eat_symbol("^") {
                VersionOp::Caret
            } else if self.eat_symbol("~") {
                VersionOp::Tilde
            } else if self.eat_symbol(">=") {
                VersionOp::Ge
            } else if self.eat_symbol("<=") {
                VersionOp::Le
            } else if self.eat_symbol(">") {
                VersionOp::Gt
            } else if self.eat_symbol("<") {
                VersionOp::Lt
            } else {
                self.eat_symbol("=");
                VersionOp::Exact
            };
            let version = match self.peek().clone() {
                TokenKind::Number(text) => match Version::parse(&text) {
                    Some(v) => {
                        self.bump();
                        v
                    }
                    None => return Err(self.error("version number")),
                },
                _ => return Err(self.error("version number")),
            };
            constraints.push(VersionConstraint { op, version });
        }
        if constraints.is_empty() {
            return Err(self.error("version constraint"));
        }
        self.expect_symbol(";")?;
        Ok(VersionRange { constraints })
    }

    fn contract(&mut self) -> PResult<ContractDef> {
        let span = self.span();
        self.expect_word("contract")?;
        let name = self.ident()?;
        if self.is_word("is") {
            return Err(self.unsupported("inheritance", self.span()));
        }
        self.expect_symbol("{")?;

        let mut contract = ContractDef {
            name,
            state_vars: Vec::new(),
            functions: Vec::new(),
            constructor: None,
            fallback: None,
            span,
        };
        while !self.eat_symbol("}") {
            let member_span = self.span();
            match self.peek().clone() {
                TokenKind::Ident(w) if w == "function" || w == "constructor" => {
                    let func = self.function(&contract.name)?;
                    let position = func.span;
                    if func.is_constructor {
                        if contract.constructor.is_some() {
                            return Err(FrontendError::DuplicateDefinition {
                                name: "constructor".into(),
                                position,
                            });
                        }
                        contract.constructor = Some(func);
                    } else if func.is_fallback() {
                        if contract.fallback.is_some() {
                            return Err(FrontendError::DuplicateDefinition {
                                name: "fallback".into(),
                                position,
                            });
                        }
                        contract.fallback = Some(func);
                    } else {
                        let fname = func.display_name().to_string();
                        if contract.function(&fname).is_some() {
                            return Err(self.unsupported(
                                format!("function overloading (`{fname}`)"),
                                position,
                            ));
                        }
                        contract.functions.push(func);
                    }
                }
                TokenKind::Ident(w) => {
                    if let Some((_, what)) = UNSUPPORTED_MEMBERS.iter().find(|(k, _)| *k == w) {
                        return Err(self.unsupported(*what, member_span));
                    }
                    let var = self.state_var()?;
                    if contract.state_var(&var.name).is_some() {
                        return Err(FrontendError::DuplicateDefinition {
                            name: var.name,
                            position: var.span,
                        });
                    }
                    contract.state_vars.push(var);
                }
                TokenKind::Eof => return Err(self.error("`}`")),
                _ => return Err(self.error("contract member")),
            }
        }
        resolve_events(&mut contract);
        Ok(contract)
    }

    fn state_var(&mut self) -> PResult<StateVarDecl> {
        let span = self.span();
        let ty = self.sol_type()?;
        let mut visibility = None;
        loop {
            let v = match self.peek() {
                TokenKind::Ident(w) if w == "public" => Visibility::Public,
                TokenKind::Ident(w) if w == "private" => Visibility::Private,
                TokenKind::Ident(w) if w == "internal" => Visibility::Internal,
                TokenKind::Ident(w) if w == "constant" || w == "immutable" => {
                    return Err(self.unsupported(format!("{w} state variable"), self.span()))
                }
                _ => break,
            };
            if visibility.is_some() {
                return Err(self.error("state variable name"));
            }
            visibility = Some(v);
            self.bump();
        }
        let name = self.ident()?;
        let initializer = if self.eat_symbol("=") {
            Some(self.literal_only()?)
        } else {
            None
        };
        self.expect_symbol(";")?;
        Ok(StateVarDecl {
            name,
            ty,
            visibility: visibility.unwrap_or(Visibility::Internal),
            initializer,
            span,
        })
    }

    fn literal_only(&mut self) -> PResult<Literal> {
        let start = self.span();
        let expr = self.primary()?;
        match expr.kind {
            ExprKind::Literal(lit) => Ok(lit),
            _ => Err(self.unsupported("non-literal state variable initializer", start)),
        }
    }

    fn sol_type(&mut self) -> PResult<SolType> {
        let span = self.span();
        let word = match self.peek().clone() {
            TokenKind::Ident(w) => w,
            _ => return Err(self.error("type name")),
        };
        let ty = match word.as_str() {
            "uint" | "uint256" => {
                self.bump();
                SolType::Uint256
            }
            "bool" => {
                self.bump();
                SolType::Bool
            }
            "address" => {
                self.bump();
                if self.eat_word("payable") {
                    SolType::AddressPayable
                } else {
                    SolType::Address
                }
            }
            "mapping" => {
                self.bump();
                self.expect_symbol("(")?;
                let key_span = self.span();
                let key = self.sol_type()?;
                if !matches!(key, SolType::Address | SolType::AddressPayable) {
                    return Err(self.unsupported(format!("mapping with `{key}` keys"), key_span));
                }
                self.expect_symbol("=>")?;
                let value_span = self.span();
                let value = self.sol_type()?;
                if !matches!(
                    value,
                    SolType::Uint256 | SolType::Bool | SolType::Address | SolType::AddressPayable
                ) {
                    return Err(
                        self.unsupported(format!("mapping with `{value}` values"), value_span)
                    );
                }
                self.expect_symbol(")")?;
                SolType::Mapping(Box::new(value))
            }
            w if is_unsupported_elementary(w) => {
                return Err(self.unsupported(format!("type `{w}`"), span));
            }
            w if RESERVED.contains(&w) => return Err(self.error("type name")),
            _ => {
                self.bump();
                SolType::Named(word)
            }
        };
        if self.is_symbol("[") {
            return Err(self.unsupported("array type", self.span()));
        }
        Ok(ty)
    }

    fn function(&mut self, contract_name: &str) -> PResult<FunctionDef> {
        let span = self.span();
        let mut is_constructor = false;
        let name = if self.eat_word("constructor") {
            is_constructor = true;
            Some("constructor".to_string())
        } else {
            self.expect_word("function")?;
            if self.is_symbol("(") {
                None
            } else {
                let name = self.ident()?;
                if name == contract_name {
                    is_constructor = true;
                    Some("constructor".to_string())
                } else {
                    Some(name)
                }
            }
        };

        self.expect_symbol("(")?;
        let mut params = Vec::new();
        if !self.eat_symbol(")") {
            loop {
                let ty = self.sol_type()?;
                if matches!(ty, SolType::Mapping(_)) {
                    return Err(self.unsupported("mapping parameter", span));
                }
                if let TokenKind::Ident(w) = self.peek() {
                    if matches!(w.as_str(), "memory" | "storage" | "calldata") {
                        return Err(self.unsupported("data location specifier", self.span()));
                    }
                }
                let pname = match self.peek() {
                    TokenKind::Ident(w) if !RESERVED.contains(&w.as_str()) => Some(self.ident()?),
                    _ => None,
                };
                params.push(Param { ty, name: pname });
                if self.eat_symbol(")") {
                    break;
                }
                self.expect_symbol(",")?;
            }
        }

        let mut visibility = None;
        let mut payable = false;
        let mut returns = None;
        loop {
            let mod_span = self.span();
            let word = match self.peek().clone() {
                TokenKind::Ident(w) => w,
                _ => break,
            };
            match word.as_str() {
                "public" | "external" | "internal" | "private" => {
                    if visibility.is_some() {
                        return Err(self.error("`{`"));
                    }
                    visibility = Some(match word.as_str() {
                        "public" => Visibility::Public,
                        "external" => Visibility::External,
                        "internal" => Visibility::Internal,
                        _ => Visibility::Private,
                    });
                    self.bump();
                }
                "payable" => {
                    payable = true;
                    self.bump();
                }
                "returns" => {
                    self.bump();
                    self.expect_symbol("(")?;
                    let ty = self.sol_type()?;
                    if let TokenKind::Ident(w) = self.peek() {
                        if !RESERVED.contains(&w.as_str()) {
                            self.bump();
                        }
                    }
                    if self.is_symbol(",") {
                        return Err(self.unsupported("multiple return values", self.span()));
                    }
                    self.expect_symbol(")")?;
                    returns = Some(ty);
                }
                "view" | "pure" | "constant" => {
                    return Err(self.unsupported(format!("`{word}` state mutability"), mod_span))
                }
                "override" | "virtual" => {
                    return Err(self.unsupported(format!("`{word}` specifier"), mod_span))
                }
                _ => return Err(self.unsupported(format!("function modifier `{word}`"), mod_span)),
            }
        }
        if name.is_none() && (!params.is_empty() || returns.is_some()) {
            return Err(self.unsupported("fallback function with parameters or returns", span));
        }
        if self.is_symbol(";") {
            return Err(self.unsupported("function without body", self.span()));
        }
        let mut body = self.block()?;
        renumber(&mut body);
        Ok(FunctionDef {
            name,
            params,
            returns,
            visibility: visibility.unwrap_or(Visibility::Public),
            payable,
            body,
            is_constructor,
            span,
        })
    }

    // ---- statements -----------------------------------------------------

    fn block(&mut self) -> PResult<Block> {
        self.expect_symbol("{")?;
        let mut stmts = Vec::new();
        while !self.eat_symbol("}") {
            if matches!(self.peek(), TokenKind::Eof) {
                return Err(self.error("`}`"));
            }
            stmts.push(self.statement()?);
        }
        Ok(stmts)
    }

    /// A braced block, or a single statement standing in for one.
    fn body(&mut self) -> PResult<Block> {
        if self.is_symbol("{") {
            self.block()
        } else {
            Ok(vec![self.statement()?])
        }
    }

    fn statement(&mut self) -> PResult<Stmt> {
        let span = self.span();
        let kind = match self.peek().clone() {
            TokenKind::Symbol("{") => {
                return Err(self.unsupported("nested block statement", span));
            }
            TokenKind::Ident(w) => {
                if let Some((_, what)) = UNSUPPORTED_STATEMENTS
                    .iter()
                    .find(|(k, _)| *k == w && self.peek_at(1) != &TokenKind::Symbol("."))
                {
                    // `try` is an ordinary identifier in the supported compilers.
                    if w != "try" || matches!(self.peek_at(1), TokenKind::Symbol("{")) {
                        return Err(self.unsupported(*what, span));
                    }
                }
                match w.as_str() {
                    "if" => self.if_statement()?,
                    "require" if self.peek_at(1) == &TokenKind::Symbol("(") => {
                        self.bump();
                        self.bump();
                        let cond = self.expr()?;
                        let message = if self.eat_symbol(",") {
                            match self.peek().clone() {
                                TokenKind::Str(s) => {
                                    self.bump();
                                    Some(s)
                                }
                                _ => return Err(self.error("string literal")),
                            }
                        } else {
                            None
                        };
                        self.expect_symbol(")")?;
                        self.expect_symbol(";")?;
                        StmtKind::Require { cond, message }
                    }
                    "return" => {
                        self.bump();
                        let value = if self.is_symbol(";") {
                            None
                        } else {
                            Some(self.expr()?)
                        };
                        self.expect_symbol(";")?;
                        StmtKind::Return(value)
                    }
                    "emit" => {
                        self.bump();
                        let event = self.ident()?;
                        let args = self.call_args()?;
                        self.expect_symbol(";")?;
                        StmtKind::Emit { event, args }
                    }
                    _ if self.starts_var_decl() => {
                        let ty = self.sol_type()?;
                        if matches!(ty, SolType::Mapping(_)) {
                            return Err(self.unsupported("local mapping", span));
                        }
                        if let TokenKind::Ident(w) = self.peek() {
                            if matches!(w.as_str(), "memory" | "storage" | "calldata") {
                                return Err(
                                    self.unsupported("data location specifier", self.span())
                                );
                            }
                        }
                        let name = self.ident()?;
                        let init = if self.eat_symbol("=") {
                            Some(self.expr()?)
                        } else {
                            None
                        };
                        self.expect_symbol(";")?;
                        StmtKind::VarDecl { ty, name, init }
                    }
                    _ => self.expr_or_assign()?,
                }
            }
            TokenKind::Eof => return Err(self.error("statement")),
            _ => self.expr_or_assign()?,
        };
        Ok(Stmt {
            kind,
            index: 0,
            span,
        })
    }

    fn starts_var_decl(&self) -> bool {
        match self.peek() {
            TokenKind::Ident(w) => match w.as_str() {
                "uint" | "uint256" | "bool" | "mapping" => {
                    self.peek_at(1) != &TokenKind::Symbol("(")
                }
                "address" => matches!(self.peek_at(1), TokenKind::Ident(_)),
                w if is_unsupported_elementary(w) => true,
                w if RESERVED.contains(&w) => false,
                _ => {
                    matches!(self.peek_at(1), TokenKind::Ident(n) if !RESERVED.contains(&n.as_str()))
                }
            },
            _ => false,
        }
    }

    fn if_statement(&mut self) -> PResult<StmtKind> {
        self.expect_word("if")?;
        self.expect_symbol("(")?;
        let cond = self.expr()?;
        self.expect_symbol(")")?;
        let then_block = self.body()?;
        let else_block = if self.eat_word("else") {
            Some(self.body()?)
        } else {
            None
        };
        Ok(StmtKind::If {
            cond,
            then_block,
            else_block,
        })
    }

    fn expr_or_assign(&mut self) -> PResult<StmtKind> {
        let start = self.span();
        let target = self.expr()?;
        let op = if self.eat_symbol("=") {
            Some(AssignOp::Set)
        } else if self.eat_symbol("+=") {
            Some(AssignOp::Add)
        } else if self.eat_symbol("-=") {
            Some(AssignOp::Sub)
        } else {
            for sym in ["*=", "/=", "++", "--"] {
                if self.is_symbol(sym) {
                    return Err(self.unsupported(format!("`{sym}` operator"), self.span()));
                }
            }
            None
        };
        let kind = match op {
            Some(op) => {
                if !matches!(target.kind, ExprKind::Ident(_) | ExprKind::Index { .. }) {
                    return Err(self.unsupported("assignment to this expression", start));
                }
                let value = self.expr()?;
                StmtKind::Assign { target, op, value }
            }
            None => StmtKind::Expr(target),
        };
        self.expect_symbol(";")?;
        Ok(kind)
    }

    // ---- expressions ----------------------------------------------------

    fn expr(&mut self) -> PResult<Expr> {
        if self.is_symbol("?") {
            return Err(self.unsupported("conditional expression", self.span()));
        }
        let e = self.binary(1)?;
        if self.is_symbol("?") {
            return Err(self.unsupported("conditional expression", self.span()));
        }
        Ok(e)
    }

    fn peek_binop(&self) -> Option<BinOp> {
        let op = match self.peek() {
            TokenKind::Symbol(s) => match *s {
                "||" => BinOp::Or,
                "&&" => BinOp::And,
                "==" => BinOp::Eq,
                "!=" => BinOp::Ne,
                "<" => BinOp::Lt,
                "<=" => BinOp::Le,
                ">" => BinOp::Gt,
                ">=" => BinOp::Ge,
                "+" => BinOp::Add,
                "-" => BinOp::Sub,
                "*" => BinOp::Mul,
                "/" => BinOp::Div,
                "%" => BinOp::Mod,
                _ => return None,
            },
            _ => return None,
        };
        Some(op)
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.peek_binop() {
            if op.precedence() < min_prec {
                break;
            }
            let span = lhs.span;
            self.bump();
            let rhs = self.binary(op.precedence() + 1)?;
            lhs = Expr::new(
                ExprKind::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                span,
            );
        }
        for sym in ["&", "|", "^", "~"] {
            if self.is_symbol(sym) {
                return Err(self.unsupported(format!("bitwise operator `{sym}`"), self.span()));
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let span = self.span();
        if self.eat_symbol("!") {
            let operand = self.unary()?;
            return Ok(Expr::new(ExprKind::Not(Box::new(operand)), span));
        }
        if self.is_symbol("-")
            || self.is_symbol("++")
            || self.is_symbol("--")
            || self.is_symbol("~")
        {
            return Err(self.unsupported("prefix operator", span));
        }
        self.postfix()
    }

    fn call_args(&mut self) -> PResult<Vec<Expr>> {
        self.expect_symbol("(")?;
        let mut args = Vec::new();
        if self.eat_symbol(")") {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.eat_symbol(")") {
                return Ok(args);
            }
            self.expect_symbol(",")?;
        }
    }

    /// Parses a parenthesised single argument such as `(v)` in `.value(v)`.
    fn single_arg(&mut self, what: &str) -> PResult<Expr> {
        let span = self.span();
        let mut args = self.call_args()?;
        if args.len() != 1 {
            return Err(FrontendError::Parse {
                line: span.line,
                column: span.column,
                expected: format!("exactly one argument to `.{what}()`"),
                found: format!("{} arguments", args.len()),
            });
        }
        Ok(args.remove(0))
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut expr = self.primary()?;
        loop {
            if self.is_symbol(".") {
                self.bump();
                let member_span = self.span();
                let field = match self.peek().clone() {
                    TokenKind::Ident(s) => {
                        self.bump();
                        s
                    }
                    _ => return Err(self.error("member name")),
                };
                expr = self.member_suffix(expr, field, member_span)?;
            } else if self.is_symbol("[") {
                self.bump();
                let key = self.expr()?;
                self.expect_symbol("]")?;
                let span = expr.span;
                expr = Expr::new(
                    ExprKind::Index {
                        base: Box::new(expr),
                        key: Box::new(key),
                    },
                    span,
                );
            } else if self.is_symbol("(") {
                let span = expr.span;
                match expr.kind {
                    ExprKind::Ident(name) => {
                        let args = self.call_args()?;
                        expr = Expr::new(ExprKind::InternalCall { name, args }, span);
                    }
                    _ => return Err(self.unsupported("call of a computed expression", span)),
                }
            } else {
                return Ok(expr);
            }
        }
    }

    /// Handles everything that may follow `base.field`.
    fn member_suffix(&mut self, base: Expr, field: String, span: Span) -> PResult<Expr> {
        let base_span = base.span;
        if let Some(builtin) = builtin_member(&base, &field) {
            return Ok(Expr::new(ExprKind::Builtin(builtin), base_span));
        }
        match field.as_str() {
            "transfer" | "send" if self.is_symbol("(") => {
                let args_span = self.span();
                let args = self.call_args()?;
                if args.len() == 1 {
                    let kind = if field == "transfer" {
                        CallKind::Transfer
                    } else {
                        CallKind::Send
                    };
                    let value = args.into_iter().next().expect("one argument");
                    return Ok(Expr::new(
                        ExprKind::ExternalCall(ExternalCall {
                            callee: Box::new(base),
                            kind,
                            value: Box::new(value),
                            gas: None,
                            payload: Vec::new(),
                        }),
                        base_span,
                    ));
                }
                if field == "send" {
                    return Err(FrontendError::Parse {
                        line: args_span.line,
                        column: args_span.column,
                        expected: "exactly one argument to `.send()`".into(),
                        found: format!("{} arguments", args.len()),
                    });
                }
                Ok(Expr::new(
                    ExprKind::HandleCall {
                        target: Box::new(base),
                        function: field,
                        value: None,
                        args,
                    },
                    base_span,
                ))
            }
            "call" => self.low_level_call(base),
            "delegatecall" | "staticcall" | "callcode" => {
                Err(self.unsupported(format!("`{field}`"), span))
            }
            "encodeWithSignature" if matches!(&base.kind, ExprKind::Ident(n) if n == "abi") => {
                let args_span = self.span();
                let mut args = self.call_args()?;
                if args.is_empty() {
                    return Err(FrontendError::Parse {
                        line: args_span.line,
                        column: args_span.column,
                        expected: "signature string".into(),
                        found: "no arguments".into(),
                    });
                }
                let signature = match args.remove(0).kind {
                    ExprKind::Literal(Literal::Str(s)) => s,
                    _ => {
                        return Err(
                            self.unsupported("non-literal signature in encodeWithSignature", span)
                        )
                    }
                };
                Ok(Expr::new(
                    ExprKind::EncodeCall { signature, args },
                    base_span,
                ))
            }
            _ if self.is_symbol("(") => {
                let args = self.call_args()?;
                Ok(Expr::new(
                    ExprKind::HandleCall {
                        target: Box::new(base),
                        function: field,
                        value: None,
                        args,
                    },
                    base_span,
                ))
            }
            _ if self.is_symbol(".")
                && matches!(self.peek_at(1), TokenKind::Ident(w) if w == "value")
                && self.peek_at(2) == &TokenKind::Symbol("(") =>
            {
                self.bump();
                self.bump();
                let value = self.single_arg("value")?;
                if !self.is_symbol("(") {
                    return Err(self.error("call arguments after `.value(...)`"));
                }
                let args = self.call_args()?;
                Ok(Expr::new(
                    ExprKind::HandleCall {
                        target: Box::new(base),
                        function: field,
                        value: Some(Box::new(value)),
                        args,
                    },
                    base_span,
                ))
            }
            _ => Ok(Expr::new(
                ExprKind::Member {
                    base: Box::new(base),
                    field,
                },
                base_span,
            )),
        }
    }

    /// `callee.call` has been consumed; parses `.value(v)[.gas(g)](payload)`
    /// with the two options in either order.
    fn low_level_call(&mut self, callee: Expr) -> PResult<Expr> {
        let span = callee.span;
        let mut value = None;
        let mut gas = None;
        while self.is_symbol(".") {
            let opt_span = self.span();
            self.bump();
            match self.peek().clone() {
                TokenKind::Ident(w) if w == "value" && value.is_none() => {
                    self.bump();
                    value = Some(self.single_arg("value")?);
                }
                TokenKind::Ident(w) if w == "gas" && gas.is_none() => {
                    self.bump();
                    gas = Some(self.single_arg("gas")?);
                }
                _ => {
                    return Err(FrontendError::Parse {
                        line: opt_span.line,
                        column: opt_span.column,
                        expected: "`.value(...)` or `.gas(...)`".into(),
                        found: self.peek().describe(),
                    })
                }
            }
        }
        let Some(value) = value else {
            return Err(self.unsupported("`call` without `.value(...)`", span));
        };
        if !self.is_symbol("(") {
            return Err(self.error("call payload `(...)`"));
        }
        let payload = self.call_args()?;
        Ok(Expr::new(
            ExprKind::ExternalCall(ExternalCall {
                callee: Box::new(callee),
                kind: CallKind::CallValue,
                value: Box::new(value),
                gas: gas.map(Box::new),
                payload,
            }),
            span,
        ))
    }

    fn primary(&mut self) -> PResult<Expr> {
        let span = self.span();
        match self.peek() {
            TokenKind::Eof => return Err(self.error("expression")),
            TokenKind::Symbol(s) if *s != "(" => return Err(self.error("expression")),
            TokenKind::Ident(w)
                if RESERVED.contains(&w.as_str())
                    && !matches!(w.as_str(), "true" | "false" | "new") =>
            {
                return Err(self.error("expression"))
            }
            _ => {}
        }
        let tok = self.bump();
        let kind = match tok.kind {
            TokenKind::Number(text) => {
                if text.contains('.') {
                    return Err(self.unsupported("fractional number literal", span));
                }
                let mut value = U256::from_dec_str(&text).map_err(|_| FrontendError::Parse {
                    line: span.line,
                    column: span.column,
                    expected: "integer fitting in 256 bits".into(),
                    found: format!("`{text}`"),
                })?;
                if let TokenKind::Ident(unit) = self.peek() {
                    if let Some(mult) = unit_multiplier(unit) {
                        self.bump();
                        value = value
                            .checked_mul(mult)
                            .ok_or_else(|| FrontendError::Parse {
                                line: span.line,
                                column: span.column,
                                expected: "integer fitting in 256 bits".into(),
                                found: format!("`{text}` with unit"),
                            })?;
                    }
                }
                ExprKind::Literal(Literal::Uint(value))
            }
            TokenKind::HexNumber(digits) => {
                if digits.len() == 40 {
                    let addr: Address = format!("0x{digits}").parse().expect("40 hex digits");
                    ExprKind::Literal(Literal::Address(addr))
                } else if digits.len() <= 64 {
                    ExprKind::Literal(Literal::Uint(
                        U256::from_str_radix(&digits, 16).expect("validated hex"),
                    ))
                } else {
                    return Err(self.unsupported("hex literal wider than 256 bits", span));
                }
            }
            TokenKind::Str(s) => ExprKind::Literal(Literal::Str(s)),
            TokenKind::Symbol("(") => {
                let inner = self.expr()?;
                if self.is_symbol(",") {
                    return Err(self.unsupported("tuple expression", self.span()));
                }
                self.expect_symbol(")")?;
                return Ok(inner);
            }
            TokenKind::Ident(word) => match word.as_str() {
                "true" => ExprKind::Literal(Literal::Bool(true)),
                "false" => ExprKind::Literal(Literal::Bool(false)),
                "this" => ExprKind::Builtin(Builtin::This),
                "new" => return Err(self.unsupported("contract creation with `new`", span)),
                "address" | "uint" | "uint256" if self.is_symbol("(") => {
                    let ty = if word == "address" {
                        SolType::Address
                    } else {
                        SolType::Uint256
                    };
                    let inner = self.single_arg(&word)?;
                    ExprKind::Cast {
                        ty,
                        expr: Box::new(inner),
                    }
                }
                "payable" if self.is_symbol("(") => {
                    return Err(self.unsupported("`payable(...)` conversion", span));
                }
                w if is_unsupported_elementary(w) && self.is_symbol("(") => {
                    return Err(self.unsupported(format!("`{w}` conversion"), span));
                }
                _ => ExprKind::Ident(word),
            },
            TokenKind::Symbol(_) | TokenKind::Eof => unreachable!("rejected above"),
        };
        Ok(Expr::new(kind, span))
    }
}

fn unit_multiplier(unit: &str) -> Option<U256> {
    let pow = match unit {
        "wei" => 0,
        "szabo" => 12,
        "finney" => 15,
        "ether" => 18,
        _ => return None,
    };
    Some(U256::exp10(pow))
}

fn is_unsupported_elementary(word: &str) -> bool {
    if matches!(
        word,
        "string" | "bytes" | "int" | "byte" | "fixed" | "ufixed"
    ) {
        return true;
    }
    let numbered = |prefix: &str| {
        word.strip_prefix(prefix)
            .is_some_and(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
    };
    (numbered("uint") && word != "uint256") || numbered("int") || numbered("bytes")
}

fn builtin_member(base: &Expr, field: &str) -> Option<Builtin> {
    match (&base.kind, field) {
        (ExprKind::Ident(b), "sender") if b == "msg" => Some(Builtin::MsgSender),
        (ExprKind::Ident(b), "value") if b == "msg" => Some(Builtin::MsgValue),
        (ExprKind::Ident(b), "origin") if b == "tx" => Some(Builtin::TxOrigin),
        (ExprKind::Ident(b), "number") if b == "block" => Some(Builtin::BlockNumber),
        (
            ExprKind::Cast {
                ty: SolType::Address,
                expr,
            },
            "balance",
        ) if expr.kind == ExprKind::Builtin(Builtin::This) => Some(Builtin::SelfBalance),
        _ => None,
    }
}

/// Rewrites expression statements that call undeclared names into `Emit`
/// statements: event invocations in pre-0.4.21 style carry no `emit`.
fn resolve_events(contract: &mut ContractDef) {
    let declared: HashSet<String> = contract
        .functions
        .iter()
        .filter_map(|f| f.name.clone())
        .collect();
    fn fix(block: &mut Block, declared: &HashSet<String>) {
        for stmt in block.iter_mut() {
            match &mut stmt.kind {
                StmtKind::Expr(Expr {
                    kind: ExprKind::InternalCall { name, args },
                    ..
                }) if !declared.contains(name.as_str()) => {
                    stmt.kind = StmtKind::Emit {
                        event: std::mem::take(name),
                        args: std::mem::take(args),
                    };
                }
                StmtKind::If {
                    then_block,
                    else_block,
                    ..
                } => {
                    fix(then_block, declared);
                    if let Some(e) = else_block {
                        fix(e, declared);
                    }
                }
                _ => {}
            }
        }
    }
    let bodies = contract
        .constructor
        .iter_mut()
        .chain(contract.functions.iter_mut())
        .chain(contract.fallback.iter_mut());
    for func in bodies {
        fix(&mut func.body, &declared);
    }
}

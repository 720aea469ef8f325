//! Line-oriented transaction scripts.
//!
//! ```text
//! # comment
//! deploy <alias> <from> <file.sol> <Contract> [value=N] [gas=N] [args...]
//! send <from> <to> [value=N] [gas=N] [fn=<name>] [args...]
//! balance <account>
//! ```
//!
//! Accounts are `0x`-prefixed 40-digit hex addresses or `@alias` for a
//! contract deployed earlier in the script. Arguments are decimal or hex
//! integers, `true`/`false`, or accounts. Without `fn=`, `send` is a plain
//! value transfer. `gas` defaults to the chain's per-transaction limit.

use std::collections::HashMap;
use std::path::Path;

use super::exec::{deploy, send_transaction, Transaction};
use super::trace::TraceEvent;
use super::value::Value;
use super::world::WorldState;
use crate::frontend;
use crate::types::{parse_u256, Address, Wei};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("script line {line}: {message}")]
pub struct ScriptError {
    pub line: usize,
    pub message: String,
}

/// Result of one executed command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptStep {
    pub line: usize,
    /// Human-readable summary of the command's outcome.
    pub output: String,
    /// Trace of the transaction, empty for `balance`.
    pub trace: Vec<TraceEvent>,
}

struct Runner<'a> {
    world: &'a mut WorldState,
    base_dir: &'a Path,
    aliases: HashMap<String, Address>,
    line: usize,
}

impl Runner<'_> {
    fn err(&self, message: impl Into<String>) -> ScriptError {
        ScriptError {
            line: self.line,
            message: message.into(),
        }
    }

    fn account(&self, token: &str) -> Result<Address, ScriptError> {
        if let Some(alias) = token.strip_prefix('@') {
            return self
                .aliases
                .get(alias)
                .copied()
                .ok_or_else(|| self.err(format!("unknown alias `@{alias}`")));
        }
        token.parse().map_err(|e| self.err(format!("{e}")))
    }

    fn argument(&self, token: &str) -> Result<Value, ScriptError> {
        match token {
            "true" => return Ok(Value::Bool(true)),
            "false" => return Ok(Value::Bool(false)),
            _ => {}
        }
        if token.starts_with('@') || (token.len() == 42 && token.starts_with("0x")) {
            return self.account(token).map(Value::Address);
        }
        parse_u256(token)
            .map(Value::Uint)
            .ok_or_else(|| self.err(format!("cannot parse argument `{token}`")))
    }

    fn amount(&self, key: &str, text: &str) -> Result<Wei, ScriptError> {
        parse_u256(text).ok_or_else(|| self.err(format!("bad {key} `{text}`")))
    }

    /// Splits `key=value` options from positional arguments.
    fn options<'t>(
        &self,
        tokens: &[&'t str],
    ) -> Result<(HashMap<&'t str, &'t str>, Vec<&'t str>), ScriptError> {
        let mut opts = HashMap::new();
        let mut rest = Vec::new();
        for token in tokens {
            match token.split_once('=') {
                Some((k @ ("value" | "gas" | "fn"), v)) => {
                    if opts.insert(k, v).is_some() {
                        return Err(self.err(format!("`{k}=` given twice")));
                    }
                }
                Some((k, _)) => return Err(self.err(format!("unknown option `{k}=`"))),
                None => rest.push(*token),
            }
        }
        Ok((opts, rest))
    }

    fn gas(&self, opts: &HashMap<&str, &str>) -> Result<u64, ScriptError> {
        match opts.get("gas") {
            Some(g) => {
                let v = self.amount("gas", g)?;
                u64::try_from(v).map_err(|_| self.err("gas does not fit in 64 bits"))
            }
            None => Ok(self.world.params().gas_limit),
        }
    }

    fn value(&self, opts: &HashMap<&str, &str>) -> Result<Wei, ScriptError> {
        opts.get("value")
            .map(|v| self.amount("value", v))
            .transpose()
            .map(Option::unwrap_or_default)
    }

    fn run_line(&mut self, tokens: &[&str]) -> Result<ScriptStep, ScriptError> {
        match tokens {
            ["deploy", alias, from, file, contract, rest @ ..] => {
                let from = self.account(from)?;
                let (opts, args) = self.options(rest)?;
                if opts.contains_key("fn") {
                    return Err(self.err("`fn=` is not valid for deploy"));
                }
                let path = self.base_dir.join(file);
                let source = std::fs::read_to_string(&path)
                    .map_err(|e| self.err(format!("{}: {e}", path.display())))?;
                let unit = frontend::parse(&source)
                    .map_err(|e| self.err(format!("{}: {e}", path.display())))?;
                let args = args
                    .iter()
                    .map(|a| self.argument(a))
                    .collect::<Result<Vec<_>, _>>()?;
                let (value, gas) = (self.value(&opts)?, self.gas(&opts)?);
                let (address, result) = deploy(self.world, from, &unit, contract, args, value, gas)
                    .map_err(|e| self.err(e.to_string()))?;
                if result.status.is_success() {
                    self.aliases.insert(alias.to_string(), address);
                }
                Ok(ScriptStep {
                    line: self.line,
                    output: format!(
                        "deploy @{alias} {contract} at {address}: {} gas_used={}",
                        result.status, result.gas_used
                    ),
                    trace: result.trace,
                })
            }
            ["send", from, to, rest @ ..] => {
                let (from, to) = (self.account(from)?, self.account(to)?);
                let (opts, args) = self.options(rest)?;
                let args = args
                    .iter()
                    .map(|a| self.argument(a))
                    .collect::<Result<Vec<_>, _>>()?;
                let call = match opts.get("fn") {
                    Some(name) => Some((name.to_string(), args)),
                    None if args.is_empty() => None,
                    None => return Err(self.err("arguments given without `fn=`")),
                };
                let tx = Transaction {
                    from,
                    to,
                    value: self.value(&opts)?,
                    gas_limit: self.gas(&opts)?,
                    call,
                };
                let label = tx
                    .call
                    .as_ref()
                    .map(|(name, _)| format!(" {name}()"))
                    .unwrap_or_default();
                let result =
                    send_transaction(self.world, tx).map_err(|e| self.err(e.to_string()))?;
                let ret = result
                    .return_value
                    .as_ref()
                    .map(|v| format!(" return={v}"))
                    .unwrap_or_default();
                Ok(ScriptStep {
                    line: self.line,
                    output: format!(
                        "send {from} -> {to}{label}: {} gas_used={}{ret}",
                        result.status, result.gas_used
                    ),
                    trace: result.trace,
                })
            }
            ["balance", who] => {
                let addr = self.account(who)?;
                Ok(ScriptStep {
                    line: self.line,
                    output: format!("balance {addr} = {}", self.world.balance(&addr)),
                    trace: Vec::new(),
                })
            }
            [cmd, ..] => Err(self.err(format!("malformed `{cmd}` command"))),
            [] => unreachable!("blank lines are skipped"),
        }
    }
}

/// Runs `script` against `world`, resolving contract files against
/// `base_dir`. Stops at the first failing command.
pub fn run_script(
    world: &mut WorldState,
    script: &str,
    base_dir: &Path,
) -> Result<Vec<ScriptStep>, ScriptError> {
    let mut runner = Runner {
        world,
        base_dir,
        aliases: HashMap::new(),
        line: 0,
    };
    let mut steps = Vec::new();
    for (idx, raw) in script.lines().enumerate() {
        runner.line = idx + 1;
        let text = raw.split('#').next().unwrap_or_default();
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        steps.push(runner.run_line(&tokens)?);
    }
    Ok(steps)
}

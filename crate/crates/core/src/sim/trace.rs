//! Execution trace events and their line-oriented export.
//!
//! Each event exports as one line of space-separated `key=value` fields in a
//! fixed order, starting with `seq` and `event`.

use std::fmt::{self, Write};

use serde::Serialize;

use super::value::Value;
use crate::types::{Address, Wei};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum ExecStatus {
    Success,
    Reverted(RevertReason),
    OutOfGas,
}

impl ExecStatus {
    pub fn is_success(&self) -> bool {
        matches!(self, ExecStatus::Success)
    }
}

impl fmt::Display for ExecStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExecStatus::Success => f.write_str("success"),
            ExecStatus::Reverted(r) => write!(f, "reverted({r})"),
            ExecStatus::OutOfGas => f.write_str("out_of_gas"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, thiserror::Error)]
#[serde(rename_all = "snake_case")]
pub enum RevertReason {
    #[error("require failed{}", .0.as_deref().map(|m| format!(": {m}")).unwrap_or_default())]
    Require(Option<String>),
    #[error("no matching function and no fallback")]
    NoMatchingFunctionAndNoFallback,
    #[error("non-payable function received value")]
    NonPayableReceivedValue,
    #[error("call depth exceeded")]
    DepthExceeded,
    #[error("insufficient balance")]
    InsufficientBalance,
    #[error("transfer failed")]
    TransferFailed,
    #[error("arithmetic overflow")]
    Overflow,
    #[error("arithmetic underflow")]
    Underflow,
    #[error("division by zero")]
    DivisionByZero,
    #[error("bad arguments: {0}")]
    BadArguments(String),
    #[error("invalid program: {0}")]
    InvalidProgram(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Enter {
        frame: usize,
        depth: usize,
        caller: Address,
        callee: Address,
        /// Entered function: a name, `constructor`, `fallback`, or `-` for
        /// accounts without code.
        function: String,
        #[serde(with = "crate::types::wei_decimal")]
        value: Wei,
        gas: u64,
    },
    Exit {
        frame: usize,
        depth: usize,
        status: ExecStatus,
        gas_used: u64,
    },
    /// One of the ether-moving built-ins or a call through a contract handle.
    BuiltinCall {
        frame: usize,
        kind: String,
        from: Address,
        to: Address,
        #[serde(with = "crate::types::wei_decimal")]
        value: Wei,
        gas_forwarded: u64,
    },
    StateWrite {
        frame: usize,
        address: Address,
        var: String,
        key: Option<Address>,
        value: Value,
    },
    ValueMove {
        frame: usize,
        from: Address,
        to: Address,
        #[serde(with = "crate::types::wei_decimal")]
        value: Wei,
    },
}

impl TraceEvent {
    pub fn frame(&self) -> usize {
        match self {
            TraceEvent::Enter { frame, .. }
            | TraceEvent::Exit { frame, .. }
            | TraceEvent::BuiltinCall { frame, .. }
            | TraceEvent::StateWrite { frame, .. }
            | TraceEvent::ValueMove { frame, .. } => *frame,
        }
    }

    fn write_line(&self, out: &mut String) {
        match self {
            TraceEvent::Enter {
                frame,
                depth,
                caller,
                callee,
                function,
                value,
                gas,
            } => write!(
                out,
                "event=enter frame={frame} depth={depth} caller={caller} callee={callee} function={function} value={value} gas={gas}"
            ),
            TraceEvent::Exit {
                frame,
                depth,
                status,
                gas_used,
            } => {
                let (status, reason) = match status {
                    ExecStatus::Success => ("success", None),
                    ExecStatus::Reverted(r) => ("reverted", Some(r)),
                    ExecStatus::OutOfGas => ("out_of_gas", None),
                };
                write!(out, "event=exit frame={frame} depth={depth} status={status} gas_used={gas_used}")
                    .and_then(|_| match reason {
                        Some(r) => write!(out, " reason={:?}", r.to_string()),
                        None => Ok(()),
                    })
            }
            TraceEvent::BuiltinCall {
                frame,
                kind,
                from,
                to,
                value,
                gas_forwarded,
            } => write!(
                out,
                "event=builtin_call frame={frame} kind={kind} from={from} to={to} value={value} gas_forwarded={gas_forwarded}"
            ),
            TraceEvent::StateWrite {
                frame,
                address,
                var,
                key,
                value,
            } => {
                let key = key.map(|k| k.to_string()).unwrap_or_else(|| "-".into());
                write!(
                    out,
                    "event=state_write frame={frame} address={address} var={var} key={key} value={value}"
                )
            }
            TraceEvent::ValueMove {
                frame,
                from,
                to,
                value,
            } => write!(
                out,
                "event=value_move frame={frame} from={from} to={to} value={value}"
            ),
        }
        .expect("writing to a String cannot fail");
    }
}

/// Renders a trace as one line per event.
pub fn export(trace: &[TraceEvent]) -> String {
    let mut out = String::new();
    for (seq, event) in trace.iter().enumerate() {
        write!(out, "seq={seq} ").unwrap();
        event.write_line(&mut out);
        out.push('\n');
    }
    out
}

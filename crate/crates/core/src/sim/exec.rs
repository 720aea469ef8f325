//! Deployment, transactions and the statement interpreter.
//!
//! Every message call runs in its own frame with its own checkpoint. A frame
//! that reverts or runs out of gas undoes its own writes and those of its
//! children; the caller observes the failure as follows:
//!
//! * `transfer` reverts the caller;
//! * `send`, `call.value` and calls through a contract handle evaluate to
//!   `false`, and the caller continues.

use std::collections::HashMap;
use std::sync::Arc;

use super::gas::{self, GasModel};
use super::trace::{ExecStatus, RevertReason, TraceEvent};
use super::value::Value;
use super::world::{Receipt, StorageKey, WorldState};
use super::SimError;
use crate::frontend::{
    AssignOp, BinOp, Builtin, CallKind, ContractDef, Expr, ExprKind, ExternalCall, FunctionDef,
    SolType, SourceUnit, Stmt, StmtKind,
};
use crate::types::{Address, Wei};

/// Deepest permitted frame; the transaction's own frame has depth 0.
pub const MAX_CALL_DEPTH: usize = 1024;
const MAX_INTERNAL_DEPTH: usize = 1024;

const STACK_RED_ZONE: usize = 128 * 1024;
const STACK_SEGMENT: usize = 4 * 1024 * 1024;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transaction {
    pub from: Address,
    pub to: Address,
    pub value: Wei,
    pub gas_limit: u64,
    /// Function name and arguments; `None` is a plain value transfer.
    pub call: Option<(String, Vec<Value>)>,
}

impl Transaction {
    pub fn transfer(from: Address, to: Address, value: Wei, gas_limit: u64) -> Self {
        Transaction {
            from,
            to,
            value,
            gas_limit,
            call: None,
        }
    }

    pub fn call(
        from: Address,
        to: Address,
        function: &str,
        args: Vec<Value>,
        value: Wei,
        gas_limit: u64,
    ) -> Self {
        Transaction {
            from,
            to,
            value,
            gas_limit,
            call: Some((function.to_string(), args)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionResult {
    pub status: ExecStatus,
    pub gas_used: u64,
    pub return_value: Option<Value>,
    pub trace: Vec<TraceEvent>,
}

fn precheck(world: &WorldState, from: Address, value: Wei, gas_limit: u64) -> Result<(), SimError> {
    if !world.exists(&from) {
        return Err(SimError::UnknownAccount(from));
    }
    let limit = world.params().gas_limit;
    if gas_limit > limit {
        return Err(SimError::GasLimitExceeded {
            requested: gas_limit,
            limit,
        });
    }
    let balance = world.balance(&from);
    if balance < value {
        return Err(SimError::InsufficientFunds {
            account: from,
            balance,
            required: value,
        });
    }
    Ok(())
}

/// Creates `contract` from `unit` at the address derived from the deployer
/// and its nonce, then runs the constructor. On failure no account is
/// created, but the deployer's nonce is still consumed.
pub fn deploy(
    world: &mut WorldState,
    deployer: Address,
    unit: &SourceUnit,
    contract: &str,
    ctor_args: Vec<Value>,
    value: Wei,
    gas_limit: u64,
) -> Result<(Address, ExecutionResult), SimError> {
    let def = unit
        .contract(contract)
        .ok_or_else(|| SimError::UnknownContract(contract.to_string()))?;
    precheck(world, deployer, value, gas_limit)?;
    let address = Address::derive_contract(&deployer, world.nonce(&deployer));
    if world.exists(&address) {
        return Err(SimError::AddressCollision(address));
    }
    world.increment_nonce(deployer);

    let snap = world.snapshot();
    world.install_code(address, Arc::new(def.clone()));
    let mut machine = Machine::new(world, deployer);
    let outcome = machine.message_call(
        deployer,
        address,
        value,
        gas_limit,
        0,
        Entry::Constructor(ctor_args),
    );
    let trace = machine.trace;
    let result = finish(world, snap, deployer, address, gas_limit, outcome, trace);
    Ok((address, result))
}

/// Executes one transaction and mines it into the next block.
pub fn send_transaction(
    world: &mut WorldState,
    tx: Transaction,
) -> Result<ExecutionResult, SimError> {
    precheck(world, tx.from, tx.value, tx.gas_limit)?;
    world.increment_nonce(tx.from);
    let snap = world.snapshot();
    let entry = match tx.call {
        Some((name, args)) => Entry::Function { name, args },
        None => Entry::Bare,
    };
    let mut machine = Machine::new(world, tx.from);
    let outcome = machine.message_call(tx.from, tx.to, tx.value, tx.gas_limit, 0, entry);
    let trace = machine.trace;
    Ok(finish(
        world,
        snap,
        tx.from,
        tx.to,
        tx.gas_limit,
        outcome,
        trace,
    ))
}

fn finish(
    world: &mut WorldState,
    snap: super::world::Snapshot,
    from: Address,
    to: Address,
    gas_limit: u64,
    outcome: Outcome,
    trace: Vec<TraceEvent>,
) -> ExecutionResult {
    let success = outcome.status.is_success();
    if success {
        world.commit(snap)
    } else {
        world.revert_to(snap)
    }
    .expect("transaction checkpoint is outermost");
    let gas_used = gas_limit - outcome.gas_left;
    world.push_receipt(Receipt {
        block_number: world.block_number(),
        from,
        to,
        success,
        gas_used,
    });
    world.advance_block();
    ExecutionResult {
        status: outcome.status,
        gas_used,
        return_value: outcome.return_value,
        trace,
    }
}

enum Entry {
    Bare,
    Function { name: String, args: Vec<Value> },
    Constructor(Vec<Value>),
}

struct Outcome {
    status: ExecStatus,
    gas_left: u64,
    return_value: Option<Value>,
}

struct Frame {
    id: usize,
    address: Address,
    caller: Address,
    value: Wei,
    depth: usize,
    gas: u64,
    contract: Arc<ContractDef>,
    internal_depth: usize,
}

enum Halt {
    Revert(RevertReason),
    OutOfGas,
}

impl From<RevertReason> for Halt {
    fn from(reason: RevertReason) -> Self {
        Halt::Revert(reason)
    }
}

enum Flow {
    Next,
    Return(Option<Value>),
}

type Exec<T> = Result<T, Halt>;
type Locals = HashMap<String, Value>;

fn invalid(msg: impl Into<String>) -> Halt {
    Halt::Revert(RevertReason::InvalidProgram(msg.into()))
}

enum Place {
    Local(String),
    Storage(StorageKey, SolType),
}

struct Machine<'w> {
    world: &'w mut WorldState,
    origin: Address,
    model: GasModel,
    trace: Vec<TraceEvent>,
    next_frame: usize,
}

impl<'w> Machine<'w> {
    fn new(world: &'w mut WorldState, origin: Address) -> Self {
        let model = world.params().gas_model;
        Machine {
            world,
            origin,
            model,
            trace: Vec::new(),
            next_frame: 0,
        }
    }

    fn message_call(
        &mut self,
        caller: Address,
        to: Address,
        value: Wei,
        gas: u64,
        depth: usize,
        entry: Entry,
    ) -> Outcome {
        let id = self.next_frame;
        self.next_frame += 1;
        let code = self.world.code(&to);
        let function = match &code {
            None => "-".to_string(),
            Some(c) => entry_name(c, &entry),
        };
        self.trace.push(TraceEvent::Enter {
            frame: id,
            depth,
            caller,
            callee: to,
            function,
            value,
            gas,
        });
        if depth > MAX_CALL_DEPTH {
            let outcome = Outcome {
                status: ExecStatus::Reverted(RevertReason::DepthExceeded),
                gas_left: gas,
                return_value: None,
            };
            return self.exit(id, depth, gas, outcome);
        }

        let snap = self.world.snapshot();
        let contract = code.clone().unwrap_or_else(|| Arc::new(empty_contract()));
        let mut frame = Frame {
            id,
            address: to,
            caller,
            value,
            depth,
            gas,
            contract,
            internal_depth: 0,
        };
        let result = self.run_frame(&mut frame, code.is_some(), entry);
        let outcome = match result {
            Ok(return_value) => {
                self.world.commit(snap).expect("frame checkpoint");
                Outcome {
                    status: ExecStatus::Success,
                    gas_left: frame.gas,
                    return_value,
                }
            }
            Err(Halt::Revert(reason)) => {
                self.world.revert_to(snap).expect("frame checkpoint");
                Outcome {
                    status: ExecStatus::Reverted(reason),
                    gas_left: frame.gas,
                    return_value: None,
                }
            }
            Err(Halt::OutOfGas) => {
                self.world.revert_to(snap).expect("frame checkpoint");
                Outcome {
                    status: ExecStatus::OutOfGas,
                    gas_left: 0,
                    return_value: None,
                }
            }
        };
        self.exit(id, depth, gas, outcome)
    }

    fn exit(&mut self, frame: usize, depth: usize, gas: u64, outcome: Outcome) -> Outcome {
        self.trace.push(TraceEvent::Exit {
            frame,
            depth,
            status: outcome.status.clone(),
            gas_used: gas - outcome.gas_left,
        });
        outcome
    }

    fn run_frame(&mut self, f: &mut Frame, has_code: bool, entry: Entry) -> Exec<Option<Value>> {
        if !f.value.is_zero() {
            self.world
                .transfer_value(f.caller, f.address, f.value)
                .map_err(|_| RevertReason::InsufficientBalance)?;
            self.trace.push(TraceEvent::ValueMove {
                frame: f.id,
                from: f.caller,
                to: f.address,
                value: f.value,
            });
        }
        if !has_code {
            return Ok(None);
        }
        let contract = Arc::clone(&f.contract);
        let is_constructor = matches!(entry, Entry::Constructor(_));
        let (func, args) = resolve(&contract, entry, f.value)?;
        if is_constructor {
            for var in &contract.state_vars {
                if let Some(init) = &var.initializer {
                    let place = Place::Storage(StorageKey::scalar(&var.name), var.ty.clone());
                    self.store(f, &mut Locals::new(), place, Value::from(init))?;
                }
            }
        }
        match func {
            Some(func) => self.invoke(f, func, args),
            None => Ok(None),
        }
    }

    fn invoke(
        &mut self,
        f: &mut Frame,
        func: &FunctionDef,
        args: Vec<Value>,
    ) -> Exec<Option<Value>> {
        if args.len() != func.params.len() {
            return Err(RevertReason::BadArguments(format!(
                "`{}` expects {} argument(s), got {}",
                func.display_name(),
                func.params.len(),
                args.len()
            ))
            .into());
        }
        let mut locals = Locals::new();
        for (param, arg) in func.params.iter().zip(args) {
            let found = arg.type_name();
            let value = arg.coerce(&param.ty).ok_or_else(|| {
                RevertReason::BadArguments(format!("expected {}, got {found}", param.ty))
            })?;
            if let Some(name) = &param.name {
                locals.insert(name.clone(), value);
            }
        }
        match self.exec_block(f, &mut locals, &func.body)? {
            Flow::Return(v) => Ok(v),
            Flow::Next => Ok(None),
        }
    }

    fn charge(&mut self, f: &mut Frame, amount: u64) -> Exec<()> {
        if f.gas < amount {
            f.gas = 0;
            return Err(Halt::OutOfGas);
        }
        f.gas -= amount;
        Ok(())
    }

    fn exec_block(&mut self, f: &mut Frame, locals: &mut Locals, block: &[Stmt]) -> Exec<Flow> {
        for stmt in block {
            if let Flow::Return(v) = self.exec_stmt(f, locals, stmt)? {
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Next)
    }

    fn exec_stmt(&mut self, f: &mut Frame, locals: &mut Locals, stmt: &Stmt) -> Exec<Flow> {
        self.charge(f, gas::STATEMENT)?;
        match &stmt.kind {
            StmtKind::VarDecl { ty, name, init } => {
                let value = match init {
                    Some(e) => {
                        let v = self.eval(f, locals, e)?;
                        let found = v.type_name();
                        v.coerce(ty).ok_or_else(|| {
                            invalid(format!("cannot initialise {ty} `{name}` with {found}"))
                        })?
                    }
                    None => Value::default_for(ty),
                };
                locals.insert(name.clone(), value);
            }
            StmtKind::Assign { target, op, value } => {
                let place = self.place(f, locals, target)?;
                let rhs = self.eval(f, locals, value)?;
                let new = match op {
                    AssignOp::Set => rhs,
                    AssignOp::Add | AssignOp::Sub => {
                        let current = self.load(f, locals, &place)?;
                        let bin = if *op == AssignOp::Add {
                            BinOp::Add
                        } else {
                            BinOp::Sub
                        };
                        binary(bin, current, rhs)?
                    }
                };
                self.store(f, locals, place, new)?;
            }
            StmtKind::Require { cond, message } => {
                if !self.eval_bool(f, locals, cond)? {
                    return Err(RevertReason::Require(message.clone()).into());
                }
            }
            StmtKind::If {
                cond,
                then_block,
                else_block,
            } => {
                if self.eval_bool(f, locals, cond)? {
                    return self.exec_block(f, locals, then_block);
                } else if let Some(block) = else_block {
                    return self.exec_block(f, locals, block);
                }
            }
            StmtKind::Expr(e) => {
                self.eval(f, locals, e)?;
            }
            StmtKind::Emit { args, .. } => {
                for arg in args {
                    self.eval(f, locals, arg)?;
                }
            }
            StmtKind::Return(e) => {
                let value = match e {
                    Some(e) => Some(self.eval(f, locals, e)?),
                    None => None,
                };
                return Ok(Flow::Return(value));
            }
        }
        Ok(Flow::Next)
    }

    fn mapping_value_type(&self, f: &Frame, locals: &Locals, name: &str) -> Exec<SolType> {
        if locals.contains_key(name) {
            return Err(invalid(format!("`{name}` is not a mapping")));
        }
        match f.contract.state_var(name).map(|v| &v.ty) {
            Some(SolType::Mapping(inner)) => Ok((**inner).clone()),
            _ => Err(invalid(format!("`{name}` is not a mapping"))),
        }
    }

    fn place(&mut self, f: &mut Frame, locals: &mut Locals, target: &Expr) -> Exec<Place> {
        match &target.kind {
            ExprKind::Ident(name) if locals.contains_key(name) => Ok(Place::Local(name.clone())),
            ExprKind::Ident(name) => match f.contract.state_var(name) {
                Some(var) if !matches!(var.ty, SolType::Mapping(_)) => {
                    Ok(Place::Storage(StorageKey::scalar(name), var.ty.clone()))
                }
                _ => Err(invalid(format!("cannot assign to `{name}`"))),
            },
            ExprKind::Index { base, key } => match &base.kind {
                ExprKind::Ident(name) => {
                    let ty = self.mapping_value_type(f, locals, name)?;
                    let key = self.eval_address(f, locals, key)?;
                    Ok(Place::Storage(StorageKey::entry(name, key), ty))
                }
                _ => Err(invalid("assignment to a non-mapping index")),
            },
            _ => Err(invalid("invalid assignment target")),
        }
    }

    fn load(&mut self, f: &mut Frame, locals: &Locals, place: &Place) -> Exec<Value> {
        match place {
            Place::Local(name) => Ok(locals[name].clone()),
            Place::Storage(key, ty) => self.sload(f, key.clone(), ty),
        }
    }

    fn store(
        &mut self,
        f: &mut Frame,
        locals: &mut Locals,
        place: Place,
        value: Value,
    ) -> Exec<()> {
        match place {
            Place::Local(name) => {
                let slot = locals.get_mut(&name).expect("place resolved to a local");
                if slot.type_name() != value.type_name() {
                    return Err(invalid(format!(
                        "cannot assign {} to {} local `{name}`",
                        value.type_name(),
                        slot.type_name()
                    )));
                }
                *slot = value;
                Ok(())
            }
            Place::Storage(key, ty) => {
                let found = value.type_name();
                let value = value.coerce(&ty).ok_or_else(|| {
                    invalid(format!("cannot store {found} in {ty} `{}`", key.var))
                })?;
                self.charge(f, gas::STORAGE_WRITE)?;
                self.trace.push(TraceEvent::StateWrite {
                    frame: f.id,
                    address: f.address,
                    var: key.var.clone(),
                    key: key.key,
                    value: value.clone(),
                });
                self.world.set_storage(f.address, key, value);
                Ok(())
            }
        }
    }

    fn sload(&mut self, f: &mut Frame, key: StorageKey, ty: &SolType) -> Exec<Value> {
        self.charge(f, gas::STORAGE_READ)?;
        Ok(self
            .world
            .storage(&f.address, &key)
            .cloned()
            .unwrap_or_else(|| Value::default_for(ty)))
    }

    fn eval_bool(&mut self, f: &mut Frame, locals: &mut Locals, e: &Expr) -> Exec<bool> {
        match self.eval(f, locals, e)? {
            Value::Bool(b) => Ok(b),
            v => Err(invalid(format!("expected bool, found {}", v.type_name()))),
        }
    }

    fn eval_uint(&mut self, f: &mut Frame, locals: &mut Locals, e: &Expr) -> Exec<Wei> {
        match self.eval(f, locals, e)? {
            Value::Uint(v) => Ok(v),
            v => Err(invalid(format!(
                "expected uint256, found {}",
                v.type_name()
            ))),
        }
    }

    fn eval_address(&mut self, f: &mut Frame, locals: &mut Locals, e: &Expr) -> Exec<Address> {
        match self.eval(f, locals, e)? {
            Value::Address(a) => Ok(a),
            v => Err(invalid(format!(
                "expected address, found {}",
                v.type_name()
            ))),
        }
    }

    fn eval(&mut self, f: &mut Frame, locals: &mut Locals, e: &Expr) -> Exec<Value> {
        match &e.kind {
            ExprKind::Literal(lit) => Ok(Value::from(lit)),
            ExprKind::Ident(name) => {
                if let Some(v) = locals.get(name) {
                    return Ok(v.clone());
                }
                match f.contract.state_var(name).map(|v| v.ty.clone()) {
                    Some(SolType::Mapping(_)) => {
                        Err(invalid(format!("mapping `{name}` used without a key")))
                    }
                    Some(ty) => self.sload(f, StorageKey::scalar(name), &ty),
                    None => Err(invalid(format!("unknown identifier `{name}`"))),
                }
            }
            ExprKind::Member { base, field } => {
                if field != "balance" {
                    return Err(invalid(format!("unsupported member `{field}`")));
                }
                let addr = self.eval_address(f, locals, base)?;
                Ok(Value::Uint(self.world.balance(&addr)))
            }
            ExprKind::Index { base, key } => match &base.kind {
                ExprKind::Ident(name) => {
                    let ty = self.mapping_value_type(f, locals, name)?;
                    let key = self.eval_address(f, locals, key)?;
                    self.sload(f, StorageKey::entry(name, key), &ty)
                }
                _ => Err(invalid("index into a non-mapping expression")),
            },
            ExprKind::Binary { op, lhs, rhs } => match op {
                BinOp::And => {
                    if !self.eval_bool(f, locals, lhs)? {
                        return Ok(Value::Bool(false));
                    }
                    Ok(Value::Bool(self.eval_bool(f, locals, rhs)?))
                }
                BinOp::Or => {
                    if self.eval_bool(f, locals, lhs)? {
                        return Ok(Value::Bool(true));
                    }
                    Ok(Value::Bool(self.eval_bool(f, locals, rhs)?))
                }
                _ => {
                    let l = self.eval(f, locals, lhs)?;
                    let r = self.eval(f, locals, rhs)?;
                    binary(*op, l, r)
                }
            },
            ExprKind::Not(operand) => Ok(Value::Bool(!self.eval_bool(f, locals, operand)?)),
            ExprKind::ExternalCall(call) => self.external_call(f, locals, call),
            ExprKind::InternalCall { name, args } => self.internal_call(f, locals, name, args),
            ExprKind::HandleCall {
                target,
                function,
                value,
                args,
            } => {
                let to = self.eval_address(f, locals, target)?;
                let value = match value {
                    Some(v) => self.eval_uint(f, locals, v)?,
                    None => Wei::zero(),
                };
                let args = self.eval_args(f, locals, args)?;
                self.charge(f, gas::call_cost(!value.is_zero()))?;
                let forward = f.gas.saturating_sub(gas::CALL_RETENTION);
                let entry = Entry::Function {
                    name: function.clone(),
                    args,
                };
                let out = self.child_call(f, "handle", to, value, forward, true, entry);
                Ok(Value::Bool(out.status.is_success()))
            }
            ExprKind::Builtin(b) => Ok(match b {
                Builtin::MsgSender => Value::Address(f.caller),
                Builtin::MsgValue => Value::Uint(f.value),
                Builtin::TxOrigin => Value::Address(self.origin),
                Builtin::BlockNumber => Value::Uint(self.world.block_number().into()),
                Builtin::SelfBalance => Value::Uint(self.world.balance(&f.address)),
                Builtin::This => Value::Address(f.address),
            }),
            ExprKind::Cast { ty, expr } => {
                let v = self.eval(f, locals, expr)?;
                match (ty, v) {
                    (SolType::Address | SolType::AddressPayable, Value::Address(a)) => {
                        Ok(Value::Address(a))
                    }
                    (SolType::Address | SolType::AddressPayable, Value::Uint(u)) => {
                        Ok(Value::Address(Address::from_u256(u)))
                    }
                    (SolType::Uint256, Value::Uint(u)) => Ok(Value::Uint(u)),
                    (SolType::Uint256, Value::Address(a)) => Ok(Value::Uint(a.to_u256())),
                    (ty, v) => Err(invalid(format!("cannot convert {} to {ty}", v.type_name()))),
                }
            }
            ExprKind::EncodeCall { .. } => {
                Err(invalid("abi.encodeWithSignature outside a call payload"))
            }
        }
    }

    fn eval_args(&mut self, f: &mut Frame, locals: &mut Locals, args: &[Expr]) -> Exec<Vec<Value>> {
        args.iter().map(|a| self.eval(f, locals, a)).collect()
    }

    fn external_call(
        &mut self,
        f: &mut Frame,
        locals: &mut Locals,
        call: &ExternalCall,
    ) -> Exec<Value> {
        let to = self.eval_address(f, locals, &call.callee)?;
        let value = self.eval_uint(f, locals, &call.value)?;
        let gas_arg = match &call.gas {
            Some(g) => Some(self.eval_uint(f, locals, g)?),
            None => None,
        };
        let entry = match call.payload.as_slice() {
            [Expr {
                kind: ExprKind::EncodeCall { signature, args },
                ..
            }] => {
                let name = signature
                    .split('(')
                    .next()
                    .unwrap_or_default()
                    .trim()
                    .to_string();
                let args = self.eval_args(f, locals, args)?;
                Entry::Function { name, args }
            }
            payload => {
                self.eval_args(f, locals, payload)?;
                Entry::Bare
            }
        };
        self.charge(f, gas::call_cost(!value.is_zero()))?;
        let stipend_only = matches!(call.kind, CallKind::Transfer | CallKind::Send)
            && self.model == GasModel::Faithful;
        let forward = if stipend_only {
            gas::STIPEND
        } else {
            match gas_arg {
                Some(g) => u64::try_from(g).unwrap_or(u64::MAX).min(f.gas),
                None => f.gas.saturating_sub(gas::CALL_RETENTION),
            }
        };
        let kind = match call.kind {
            CallKind::Transfer => "transfer",
            CallKind::Send => "send",
            CallKind::CallValue => "call_value",
        };
        let out = self.child_call(f, kind, to, value, forward, !stipend_only, entry);
        let success = out.status.is_success();
        match call.kind {
            CallKind::Transfer if !success => Err(RevertReason::TransferFailed.into()),
            CallKind::Transfer => Ok(Value::Unit),
            CallKind::Send | CallKind::CallValue => Ok(Value::Bool(success)),
        }
    }

    /// Issues a message call from frame `f`. When `deduct` is set the
    /// forwarded gas comes out of the caller's meter and unused gas is
    /// refunded; otherwise the callee runs on a free stipend.
    #[allow(clippy::too_many_arguments)]
    fn child_call(
        &mut self,
        f: &mut Frame,
        kind: &str,
        to: Address,
        value: Wei,
        forward: u64,
        deduct: bool,
        entry: Entry,
    ) -> Outcome {
        self.trace.push(TraceEvent::BuiltinCall {
            frame: f.id,
            kind: kind.to_string(),
            from: f.address,
            to,
            value,
            gas_forwarded: forward,
        });
        if deduct {
            f.gas -= forward;
        }
        let (caller, depth) = (f.address, f.depth + 1);
        let out = stacker::maybe_grow(STACK_RED_ZONE, STACK_SEGMENT, || {
            self.message_call(caller, to, value, forward, depth, entry)
        });
        if deduct {
            f.gas += out.gas_left;
        }
        out
    }

    fn internal_call(
        &mut self,
        f: &mut Frame,
        locals: &mut Locals,
        name: &str,
        args: &[Expr],
    ) -> Exec<Value> {
        let contract = Arc::clone(&f.contract);
        let Some(func) = contract.function(name) else {
            // Contract-type conversion such as `Token(addr)`.
            return match args {
                [arg] => Ok(Value::Address(self.eval_address(f, locals, arg)?)),
                _ => Err(invalid(format!("unknown function `{name}`"))),
            };
        };
        let args = self.eval_args(f, locals, args)?;
        if f.internal_depth >= MAX_INTERNAL_DEPTH {
            return Err(RevertReason::DepthExceeded.into());
        }
        self.charge(f, gas::STATEMENT)?;
        f.internal_depth += 1;
        let result =
            stacker::maybe_grow(STACK_RED_ZONE, STACK_SEGMENT, || self.invoke(f, func, args));
        f.internal_depth -= 1;
        Ok(result?.unwrap_or(Value::Unit))
    }
}

fn empty_contract() -> ContractDef {
    ContractDef {
        name: String::new(),
        state_vars: Vec::new(),
        functions: Vec::new(),
        constructor: None,
        fallback: None,
        span: Default::default(),
    }
}

fn entry_name(contract: &ContractDef, entry: &Entry) -> String {
    match entry {
        Entry::Constructor(_) => "constructor".into(),
        Entry::Function { name, .. } => match contract.function(name) {
            Some(f) if f.visibility.is_exposed() => name.clone(),
            _ if contract.fallback.is_some() => "fallback".into(),
            _ => name.clone(),
        },
        Entry::Bare => "fallback".into(),
    }
}

/// Selects the function a message runs and checks payability.
fn resolve(
    contract: &ContractDef,
    entry: Entry,
    value: Wei,
) -> Result<(Option<&FunctionDef>, Vec<Value>), RevertReason> {
    let fallback = || {
        contract
            .fallback
            .as_ref()
            .ok_or(RevertReason::NoMatchingFunctionAndNoFallback)
    };
    let (func, args) = match entry {
        Entry::Constructor(args) => (contract.constructor.as_ref(), args),
        Entry::Function { name, args } => {
            match contract
                .function(&name)
                .filter(|f| f.visibility.is_exposed())
            {
                Some(f) => (Some(f), args),
                None => (Some(fallback()?), Vec::new()),
            }
        }
        Entry::Bare => (Some(fallback()?), Vec::new()),
    };
    if !value.is_zero() && !func.is_some_and(|f| f.payable) {
        return Err(RevertReason::NonPayableReceivedValue);
    }
    if func.is_none() && !args.is_empty() {
        return Err(RevertReason::BadArguments(
            "constructor takes no arguments".into(),
        ));
    }
    Ok((func, args))
}

fn binary(op: BinOp, l: Value, r: Value) -> Exec<Value> {
    use Value::{Bool, Uint};
    let v = match (op, &l, &r) {
        (BinOp::Add, Uint(a), Uint(b)) => Uint(a.checked_add(*b).ok_or(RevertReason::Overflow)?),
        (BinOp::Sub, Uint(a), Uint(b)) => Uint(a.checked_sub(*b).ok_or(RevertReason::Underflow)?),
        (BinOp::Mul, Uint(a), Uint(b)) => Uint(a.checked_mul(*b).ok_or(RevertReason::Overflow)?),
        (BinOp::Div, Uint(a), Uint(b)) => {
            Uint(a.checked_div(*b).ok_or(RevertReason::DivisionByZero)?)
        }
        (BinOp::Mod, Uint(a), Uint(b)) => {
            Uint(a.checked_rem(*b).ok_or(RevertReason::DivisionByZero)?)
        }
        (BinOp::Lt, Uint(a), Uint(b)) => Bool(a < b),
        (BinOp::Le, Uint(a), Uint(b)) => Bool(a <= b),
        (BinOp::Gt, Uint(a), Uint(b)) => Bool(a > b),
        (BinOp::Ge, Uint(a), Uint(b)) => Bool(a >= b),
        (BinOp::Eq, a, b) if a.type_name() == b.type_name() => Bool(a == b),
        (BinOp::Ne, a, b) if a.type_name() == b.type_name() => Bool(a != b),
        _ => {
            return Err(invalid(format!(
                "operator `{}` on {} and {}",
                op.symbol(),
                l.type_name(),
                r.type_name()
            )))
        }
    };
    Ok(v)
}

//! Accounts, balances and storage with journaled checkpoints.
//!
//! Every mutation made while at least one checkpoint is open is recorded in
//! a journal. Reverting a checkpoint undoes the journal back to its mark;
//! committing merely drops the mark, so an enclosing checkpoint can still
//! undo the committed changes.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use super::gas::GasModel;
use super::value::Value;
use super::SimError;
use crate::frontend::ContractDef;
use crate::types::{Address, Wei};

/// Default per-transaction gas cap when no genesis file is given.
pub const DEFAULT_GAS_LIMIT: u64 = 0xffff_ffff;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct StorageKey {
    pub var: String,
    /// Mapping key; `None` for scalar variables.
    pub key: Option<Address>,
}

impl StorageKey {
    pub fn scalar(var: &str) -> Self {
        StorageKey {
            var: var.to_string(),
            key: None,
        }
    }

    pub fn entry(var: &str, key: Address) -> Self {
        StorageKey {
            var: var.to_string(),
            key: Some(key),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Account {
    pub balance: Wei,
    pub nonce: u64,
    pub code: Option<Arc<ContractDef>>,
    pub storage: BTreeMap<StorageKey, Value>,
}

/// Chain parameters fixed at genesis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainParams {
    pub chain_id: u64,
    pub gas_limit: u64,
    pub gas_model: GasModel,
}

impl Default for ChainParams {
    fn default() -> Self {
        ChainParams {
            chain_id: 1,
            gas_limit: DEFAULT_GAS_LIMIT,
            gas_model: GasModel::Faithful,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Receipt {
    pub block_number: u64,
    pub from: Address,
    pub to: Address,
    pub success: bool,
    pub gas_used: u64,
}

/// Checkpoint handle returned by [`WorldState::snapshot`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[must_use]
pub struct Snapshot {
    serial: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum JournalEntry {
    Balance(Address, Wei),
    Nonce(Address, u64),
    Storage(Address, StorageKey, Option<Value>),
    Created(Address),
}

#[derive(Debug, Clone)]
pub struct WorldState {
    accounts: BTreeMap<Address, Account>,
    block_number: u64,
    params: ChainParams,
    receipts: Vec<Receipt>,
    journal: Vec<JournalEntry>,
    checkpoints: Vec<(usize, u64)>,
    next_serial: u64,
}

impl Default for WorldState {
    fn default() -> Self {
        WorldState::new(ChainParams::default())
    }
}

impl PartialEq for WorldState {
    /// Compares ledger contents; open checkpoints are ignored.
    fn eq(&self, other: &Self) -> bool {
        self.accounts == other.accounts
            && self.block_number == other.block_number
            && self.params == other.params
            && self.receipts == other.receipts
    }
}

impl WorldState {
    pub fn new(params: ChainParams) -> Self {
        WorldState {
            accounts: BTreeMap::new(),
            block_number: 0,
            params,
            receipts: Vec::new(),
            journal: Vec::new(),
            checkpoints: Vec::new(),
            next_serial: 0,
        }
    }

    pub fn params(&self) -> &ChainParams {
        &self.params
    }

    pub fn set_gas_model(&mut self, model: GasModel) {
        self.params.gas_model = model;
    }

    pub fn block_number(&self) -> u64 {
        self.block_number
    }

    pub(crate) fn advance_block(&mut self) {
        self.block_number += 1;
    }

    pub fn receipts(&self) -> &[Receipt] {
        &self.receipts
    }

    pub(crate) fn push_receipt(&mut self, receipt: Receipt) {
        self.receipts.push(receipt);
    }

    pub fn accounts(&self) -> impl Iterator<Item = (&Address, &Account)> {
        self.accounts.iter()
    }

    pub fn account(&self, addr: &Address) -> Option<&Account> {
        self.accounts.get(addr)
    }

    pub fn exists(&self, addr: &Address) -> bool {
        self.accounts.contains_key(addr)
    }

    /// Balance of `addr`; zero for unknown accounts.
    pub fn balance(&self, addr: &Address) -> Wei {
        self.accounts
            .get(addr)
            .map(|a| a.balance)
            .unwrap_or_default()
    }

    pub fn nonce(&self, addr: &Address) -> u64 {
        self.accounts.get(addr).map(|a| a.nonce).unwrap_or(0)
    }

    pub fn code(&self, addr: &Address) -> Option<Arc<ContractDef>> {
        self.accounts.get(addr).and_then(|a| a.code.clone())
    }

    pub fn storage(&self, addr: &Address, key: &StorageKey) -> Option<&Value> {
        self.accounts.get(addr).and_then(|a| a.storage.get(key))
    }

    /// Sum of all balances.
    pub fn total_supply(&self) -> Wei {
        self.accounts
            .values()
            .fold(Wei::zero(), |acc, a| acc + a.balance)
    }

    /// Adds an externally owned account; used for genesis allocation.
    pub fn create_account(&mut self, addr: Address, balance: Wei) -> Result<(), SimError> {
        if self.accounts.contains_key(&addr) {
            return Err(SimError::DuplicateAllocAddress(addr));
        }
        self.record(JournalEntry::Created(addr));
        self.accounts.insert(
            addr,
            Account {
                balance,
                ..Account::default()
            },
        );
        Ok(())
    }

    pub(crate) fn install_code(&mut self, addr: Address, code: Arc<ContractDef>) {
        if !self.accounts.contains_key(&addr) {
            self.record(JournalEntry::Created(addr));
        }
        self.accounts.entry(addr).or_default().code = Some(code);
    }

    fn touch(&mut self, addr: Address) -> &mut Account {
        if !self.accounts.contains_key(&addr) {
            self.record(JournalEntry::Created(addr));
        }
        self.accounts.entry(addr).or_default()
    }

    fn set_balance(&mut self, addr: Address, balance: Wei) {
        let old = self.touch(addr).balance;
        self.record(JournalEntry::Balance(addr, old));
        self.touch(addr).balance = balance;
    }

    pub(crate) fn increment_nonce(&mut self, addr: Address) {
        let old = self.touch(addr).nonce;
        self.record(JournalEntry::Nonce(addr, old));
        self.touch(addr).nonce = old + 1;
    }

    /// Moves `value` from `from` to `to`, creating `to` if needed.
    pub fn transfer_value(
        &mut self,
        from: Address,
        to: Address,
        value: Wei,
    ) -> Result<(), SimError> {
        let have = self.balance(&from);
        if have < value {
            return Err(SimError::InsufficientFunds {
                account: from,
                balance: have,
                required: value,
            });
        }
        if value.is_zero() || from == to {
            return Ok(());
        }
        self.set_balance(from, have - value);
        let credit = self.balance(&to) + value;
        self.set_balance(to, credit);
        Ok(())
    }

    /// Moves ether between accounts without executing any code.
    pub fn force_transfer(
        &mut self,
        from: Address,
        to: Address,
        value: Wei,
    ) -> Result<(), SimError> {
        if !self.exists(&from) {
            return Err(SimError::UnknownAccount(from));
        }
        self.transfer_value(from, to, value)
    }

    pub fn set_storage(&mut self, addr: Address, key: StorageKey, value: Value) {
        let old = self.touch(addr).storage.insert(key.clone(), value);
        self.record(JournalEntry::Storage(addr, key, old));
    }

    fn record(&mut self, entry: JournalEntry) {
        if !self.checkpoints.is_empty() {
            self.journal.push(entry);
        }
    }

    /// Opens a checkpoint. Checkpoints nest and must be closed in reverse order.
    pub fn snapshot(&mut self) -> Snapshot {
        let serial = self.next_serial;
        self.next_serial += 1;
        self.checkpoints.push((self.journal.len(), serial));
        Snapshot { serial }
    }

    fn close(&mut self, token: Snapshot) -> Result<usize, SimError> {
        match self.checkpoints.last() {
            Some(&(mark, serial)) if serial == token.serial => {
                self.checkpoints.pop();
                Ok(mark)
            }
            _ => Err(SimError::StaleToken),
        }
    }

    /// Restores balances, nonces, storage and accounts to the checkpoint.
    pub fn revert_to(&mut self, token: Snapshot) -> Result<(), SimError> {
        let mark = self.close(token)?;
        while self.journal.len() > mark {
            match self.journal.pop().expect("journal longer than mark") {
                JournalEntry::Balance(addr, old) => {
                    self.accounts
                        .get_mut(&addr)
                        .expect("journaled account")
                        .balance = old;
                }
                JournalEntry::Nonce(addr, old) => {
                    self.accounts
                        .get_mut(&addr)
                        .expect("journaled account")
                        .nonce = old;
                }
                JournalEntry::Storage(addr, key, old) => {
                    let storage = &mut self
                        .accounts
                        .get_mut(&addr)
                        .expect("journaled account")
                        .storage;
                    match old {
                        Some(v) => storage.insert(key, v),
                        None => storage.remove(&key),
                    };
                }
                JournalEntry::Created(addr) => {
                    self.accounts.remove(&addr);
                }
            }
        }
        self.finish();
        Ok(())
    }

    /// Keeps the changes made since the checkpoint.
    pub fn commit(&mut self, token: Snapshot) -> Result<(), SimError> {
        self.close(token)?;
        self.finish();
        Ok(())
    }

    fn finish(&mut self) {
        if self.checkpoints.is_empty() {
            self.journal.clear();
        }
    }

    /// Number of open checkpoints.
    pub fn open_checkpoints(&self) -> usize {
        self.checkpoints.len()
    }
}

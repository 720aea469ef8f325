#![allow(dead_code)]

use std::collections::BTreeMap;

use super::common::unit;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use reaudit_core::frontend::{contract_abi, parse, render, SourceUnit};
use reaudit_core::sim::*;
use reaudit_core::synth::{attacker_name, synthesize_attacker, AttackPlan};
use reaudit_core::types::{Address, Wei};

pub const CASES: u32 = 256;

fn check<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn addr(n: u8) -> Address {
    Address::from_low_u64(0xa000 + n as u64)
}

fn world_with(balances: &[u64]) -> WorldState {
    let config = GenesisConfig {
        alloc: balances
            .iter()
            .enumerate()
            .map(|(i, b)| (addr(i as u8), Wei::from(*b)))
            .collect(),
        ..GenesisConfig::default()
    };
    genesis(&config).unwrap()
}

fn deploy_ok(
    world: &mut WorldState,
    from: Address,
    unit: &SourceUnit,
    name: &str,
    args: Vec<Value>,
) -> Address {
    let gas = world.params().gas_limit;
    let (a, r) = deploy(world, from, unit, name, args, Wei::zero(), gas).unwrap();
    assert!(r.status.is_success());
    a
}

// ---- ether conservation ----------------------------------------------------

#[derive(Debug, Clone)]
enum Op {
    Transfer {
        from: u8,
        to: u8,
        value: u64,
    },
    Call {
        from: u8,
        target: usize,
        function: &'static str,
        value: u64,
        gas: u64,
    },
    Attack {
        from: u8,
        value: u64,
    },
    Deploy {
        from: u8,
        value: u64,
    },
}

const TARGETS: [(&str, &[&str]); 3] = [
    ("DeFi", &["deposit", "withdraw", "balanceOf", "nope"]),
    ("Token", &["deposit", "withdraw", "transfer"]),
    ("Moneybox", &["deposit", "withdraw", "transfer"]),
];

fn op() -> impl Strategy<Value = Op> {
    let eoa = 0u8..4;
    let value = prop_oneof![Just(0u64), 1u64..60, Just(1_000_000)];
    let gas = prop_oneof![Just(25_000u64), Just(60_000), Just(10_000_000)];
    prop_oneof![
        (eoa.clone(), 0u8..6, value.clone()).prop_map(|(from, to, value)| Op::Transfer {
            from,
            to,
            value
        }),
        (
            eoa.clone(),
            0usize..3,
            any::<prop::sample::Index>(),
            value.clone(),
            gas
        )
            .prop_map(|(from, target, f, value, gas)| {
                let fns = TARGETS[target].1;
                Op::Call {
                    from,
                    target,
                    function: fns[f.index(fns.len())],
                    value,
                    gas,
                }
            }),
        (eoa.clone(), value.clone()).prop_map(|(from, value)| Op::Attack { from, value }),
        (eoa, value).prop_map(|(from, value)| Op::Deploy { from, value }),
    ]
}

struct Bed {
    world: WorldState,
    targets: Vec<Address>,
    attacker: Address,
    receiver: SourceUnit,
}

fn bed(model: GasModel) -> Bed {
    let mut world = world_with(&[500, 500, 500, 500]);
    world.set_gas_model(model);
    let mut targets = Vec::new();
    for (name, _) in TARGETS {
        let file = format!("{name}.sol");
        targets.push(deploy_ok(&mut world, addr(0), &unit(&file), name, vec![]));
    }
    let token = unit("Token.sol");
    let abi = contract_abi(token.contract("Token").unwrap());
    let plan = AttackPlan::with_defaults(&abi, "Token", "withdraw", Wei::from(5), Some(6)).unwrap();
    let attacker_unit = synthesize_attacker(&abi, &plan).unwrap();
    let attacker = deploy_ok(
        &mut world,
        addr(1),
        &attacker_unit,
        &attacker_name("Token"),
        vec![Value::Address(targets[1])],
    );
    Bed {
        world,
        targets,
        attacker,
        receiver: unit("SenderReceiver.sol"),
    }
}

fn apply(bed: &mut Bed, op: &Op) -> Option<ExecStatus> {
    let gas = 10_000_000;
    let result = match op {
        Op::Transfer { from, to, value } => {
            let to = if *to < 4 {
                addr(*to)
            } else {
                bed.targets[*to as usize - 4]
            };
            send_transaction(
                &mut bed.world,
                Transaction::transfer(addr(*from), to, Wei::from(*value), gas),
            )
        }
        Op::Call {
            from,
            target,
            function,
            value,
            gas,
        } => {
            let args = if *function == "transfer" {
                vec![Value::Address(addr(3)), Value::Uint(Wei::from(3))]
            } else if *function == "balanceOf" {
                vec![Value::Address(addr(*from))]
            } else {
                vec![]
            };
            send_transaction(
                &mut bed.world,
                Transaction::call(
                    addr(*from),
                    bed.targets[*target],
                    function,
                    args,
                    Wei::from(*value),
                    *gas,
                ),
            )
        }
        Op::Attack { from, value } => send_transaction(
            &mut bed.world,
            Transaction::call(
                addr(*from),
                bed.attacker,
                "attack",
                vec![],
                Wei::from(*value),
                gas,
            ),
        ),
        Op::Deploy { from, value } => deploy(
            &mut bed.world,
            addr(*from),
            &bed.receiver,
            "Receiver",
            vec![],
            Wei::from(*value),
            gas,
        )
        .map(|(_, r)| r),
    };
    result.ok().map(|r| r.status)
}

/// Total supply is unchanged by every transaction, and rejected
/// transactions leave no trace.
pub fn ether_is_conserved(cases: u32) -> Result<(), String> {
    check(
        cases,
        (any::<bool>(), prop::collection::vec(op(), 1..24)),
        |(paper, ops)| {
            let model = if paper {
                GasModel::Paper
            } else {
                GasModel::Faithful
            };
            let mut bed = bed(model);
            let supply = bed.world.total_supply();
            let expected: Wei = Wei::from(2000u64);
            prop_assert_eq!(supply, expected);
            for op in &ops {
                let before = bed.world.clone();
                let status = apply(&mut bed, op);
                prop_assert_eq!(bed.world.total_supply(), supply, "{:?} -> {:?}", op, status);
                if status.is_none() {
                    prop_assert_eq!(&bed.world, &before, "rejected {:?} changed the world", op);
                }
            }
            Ok(())
        },
    )
}

// ---- revert atomicity ------------------------------------------------------

#[derive(Debug, Clone)]
enum JOp {
    Snapshot,
    Revert,
    Commit,
    Move {
        from: u8,
        to: u8,
        value: u64,
    },
    Store {
        at: u8,
        var: u8,
        key: Option<u8>,
        value: u64,
    },
}

fn jop() -> impl Strategy<Value = JOp> {
    let a = 0u8..8;
    prop_oneof![
        2 => Just(JOp::Snapshot),
        1 => Just(JOp::Revert),
        1 => Just(JOp::Commit),
        3 => (a.clone(), a.clone(), 0u64..40).prop_map(|(from, to, value)| JOp::Move { from, to, value }),
        3 => (a.clone(), 0u8..3, prop::option::of(a), 0u64..9)
            .prop_map(|(at, var, key, value)| JOp::Store { at, var, key, value }),
    ]
}

type Accounts = BTreeMap<Address, (Wei, BTreeMap<StorageKey, Value>)>;

/// Reference model: every checkpoint keeps a full copy of the accounts.
struct Oracle {
    accounts: Accounts,
    saved: Vec<Accounts>,
}

impl Oracle {
    fn balance(&self, a: &Address) -> Wei {
        self.accounts.get(a).map(|x| x.0).unwrap_or_default()
    }

    fn entry(&mut self, a: Address) -> &mut (Wei, BTreeMap<StorageKey, Value>) {
        self.accounts.entry(a).or_default()
    }
}

fn observe(world: &WorldState) -> Accounts {
    world
        .accounts()
        .map(|(a, acc)| (*a, (acc.balance, acc.storage.clone())))
        .collect()
}

fn storage_key(var: u8, key: Option<u8>) -> StorageKey {
    let name = ["a", "b", "c"][var as usize];
    match key {
        Some(k) => StorageKey::entry(name, addr(k)),
        None => StorageKey::scalar(name),
    }
}

/// Snapshot, commit and revert agree with a model that copies the whole
/// world at every checkpoint.
pub fn journal_matches_copy_on_write(cases: u32) -> Result<(), String> {
    let strategy = (
        prop::collection::vec(0u64..100, 1..=8),
        prop::collection::vec(jop(), 1..60),
    );
    check(cases, strategy, |(seed, ops)| {
        let mut world = world_with(&seed);
        let mut oracle = Oracle {
            accounts: observe(&world),
            saved: Vec::new(),
        };
        let mut tokens = Vec::new();
        for op in &ops {
            match op {
                JOp::Snapshot => {
                    tokens.push(world.snapshot());
                    oracle.saved.push(oracle.accounts.clone());
                }
                JOp::Revert => {
                    if let Some(t) = tokens.pop() {
                        world.revert_to(t).unwrap();
                        oracle.accounts = oracle.saved.pop().unwrap();
                    }
                }
                JOp::Commit => {
                    if let Some(t) = tokens.pop() {
                        world.commit(t).unwrap();
                        oracle.saved.pop();
                    }
                }
                JOp::Move { from, to, value } => {
                    let (from, to, value) = (addr(*from), addr(*to), Wei::from(*value));
                    let ok = world.transfer_value(from, to, value).is_ok();
                    prop_assert_eq!(ok, oracle.balance(&from) >= value);
                    if ok && !value.is_zero() && from != to {
                        oracle.entry(from).0 -= value;
                        oracle.entry(to).0 += value;
                    }
                }
                JOp::Store {
                    at,
                    var,
                    key,
                    value,
                } => {
                    let k = storage_key(*var, *key);
                    let v = Value::Uint(Wei::from(*value));
                    world.set_storage(addr(*at), k.clone(), v.clone());
                    oracle.entry(addr(*at)).1.insert(k, v);
                }
            }
            prop_assert_eq!(observe(&world), oracle.accounts.clone(), "after {:?}", op);
        }
        while let Some(t) = tokens.pop() {
            world.revert_to(t).unwrap();
            oracle.accounts = oracle.saved.pop().unwrap();
            prop_assert_eq!(observe(&world), oracle.accounts.clone());
        }
        Ok(())
    })
}

/// A transaction that does not succeed changes no balance or storage.
pub fn failed_transactions_are_atomic(cases: u32) -> Result<(), String> {
    check(cases, prop::collection::vec(op(), 1..16), |ops| {
        let mut bed = bed(GasModel::Faithful);
        for op in &ops {
            let before = observe(&bed.world);
            let status = apply(&mut bed, op);
            if let Some(s) = status {
                if !s.is_success() {
                    let after = observe(&bed.world);
                    let created: Vec<_> =
                        after.keys().filter(|a| !before.contains_key(a)).collect();
                    prop_assert!(created.is_empty(), "{:?} left accounts {:?}", op, created);
                    prop_assert_eq!(after, before, "{:?} -> {}", op, s);
                }
            }
        }
        Ok(())
    })
}

// ---- parse/render round trip ----------------------------------------------

const UINTS: [&str; 3] = ["total", "count", "amount"];
const MAPS: [&str; 2] = ["balances", "credit"];

fn leaf() -> impl Strategy<Value = String> {
    prop_oneof![
        (0u64..1_000_000).prop_map(|n| n.to_string()),
        prop::sample::select(&UINTS[..]).prop_map(str::to_string),
        prop::sample::select(&MAPS[..]).prop_map(|m| format!("{m}[msg.sender]")),
        Just("msg.value".to_string()),
        Just("block.number".to_string()),
        Just("address(this).balance".to_string()),
        Just("p".to_string()),
    ]
}

fn uint_expr() -> impl Strategy<Value = String> {
    leaf().prop_recursive(3, 16, 2, |inner| {
        (
            inner.clone(),
            prop::sample::select(vec!["+", "-", "*", "/", "%"]),
            inner,
        )
            .prop_map(|(l, op, r)| format!("({l} {op} {r})"))
    })
}

fn bool_expr() -> impl Strategy<Value = String> {
    let cmp = (
        uint_expr(),
        prop::sample::select(vec!["<", "<=", ">", ">=", "==", "!="]),
        uint_expr(),
    )
        .prop_map(|(l, op, r)| format!("{l} {op} {r}"));
    prop_oneof![
        cmp,
        Just("true".to_string()),
        Just("tx.origin == msg.sender".to_string()),
    ]
    .prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            (
                inner.clone(),
                prop::sample::select(vec!["&&", "||"]),
                inner.clone()
            )
                .prop_map(|(l, op, r)| format!("({l}) {op} ({r})")),
            inner.prop_map(|e| format!("!({e})")),
        ]
    })
}

fn target() -> impl Strategy<Value = String> {
    prop_oneof![
        prop::sample::select(&UINTS[..]).prop_map(str::to_string),
        prop::sample::select(&MAPS[..]).prop_map(|m| format!("{m}[msg.sender]")),
    ]
}

fn stmt() -> impl Strategy<Value = String> {
    let simple = prop_oneof![
        (
            target(),
            prop::sample::select(vec!["=", "+=", "-="]),
            uint_expr()
        )
            .prop_map(|(t, op, e)| format!("{t} {op} {e};")),
        (bool_expr(), prop::option::of("[a-z ]{0,8}")).prop_map(|(c, m)| match m {
            Some(m) => format!("require({c}, \"{m}\");"),
            None => format!("require({c});"),
        }),
        uint_expr().prop_map(|e| format!("msg.sender.transfer({e});")),
        uint_expr().prop_map(|e| format!("require(msg.sender.send({e}));")),
        uint_expr().prop_map(|e| format!("msg.sender.call.value({e})(\"\");")),
        (uint_expr(), 0u64..100_000)
            .prop_map(|(e, g)| format!("require(msg.sender.call.value({e}).gas({g})());")),
        uint_expr().prop_map(|e| format!("Logged(msg.sender, {e});")),
        uint_expr().prop_map(|e| format!("uint256 tmp = {e};")),
    ];
    simple.prop_recursive(2, 12, 3, |inner| {
        (
            bool_expr(),
            prop::collection::vec(inner.clone(), 0..3),
            prop::option::of(prop::collection::vec(inner, 0..3)),
        )
            .prop_map(|(c, then_b, else_b)| {
                let mut s = format!("if ({c}) {{ {} }}", then_b.join(" "));
                if let Some(e) = else_b {
                    s.push_str(&format!(" else {{ {} }}", e.join(" ")));
                }
                s
            })
    })
}

fn program() -> impl Strategy<Value = String> {
    let function = (
        prop::collection::vec(stmt(), 0..5),
        prop::sample::select(vec!["public", "external", "internal", "private"]),
        any::<bool>(),
    );
    (
        prop::collection::vec(function, 1..4),
        any::<bool>(),
        any::<bool>(),
    )
        .prop_map(|(fns, ctor, fallback)| {
            let mut src = String::from("pragma solidity >=0.4.22 <0.6.0;\ncontract Gen {\n");
            for v in UINTS {
                src.push_str(&format!("    uint256 public {v};\n"));
            }
            for m in MAPS {
                src.push_str(&format!("    mapping(address => uint256) private {m};\n"));
            }
            src.push_str(
                "    address payable owner = 0x00000000000000000000000000000000000000aa;\n",
            );
            if ctor {
                src.push_str("    constructor() public { owner = msg.sender; }\n");
            }
            for (i, (body, vis, payable)) in fns.iter().enumerate() {
                let pay = if *payable { " payable" } else { "" };
                src.push_str(&format!("    function f{i}(uint256 p) {vis}{pay} {{\n"));
                for s in body {
                    src.push_str(&format!("        {s}\n"));
                }
                src.push_str("    }\n");
            }
            if fallback {
                src.push_str("    function() external payable { total += msg.value; }\n");
            }
            src.push_str("}\n");
            src
        })
}

pub fn render_then_parse_is_identity(cases: u32) -> Result<(), String> {
    check(cases, program(), |src| {
        let unit = parse(&src).map_err(|e| TestCaseError::fail(format!("{e}\n{src}")))?;
        let text = render(&unit);
        let again = parse(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&again, &unit);
        prop_assert_eq!(render(&again), text);
        Ok(())
    })
}

// ---- msg.sender / tx.origin ------------------------------------------------

const HOP: &str = r#"pragma solidity ^0.5.0;
contract Hop {
    address public sender;
    address public origin;
    uint256 public visits;
    Hop next;
    function setNext(address n) public {
        next = Hop(n);
    }
    function go() public payable {
        sender = msg.sender;
        origin = tx.origin;
        visits += 1;
        if (address(next) != address(0)) {
            next.go();
        }
    }
}"#;

/// In a chain EOA -> h1 -> ... -> hd, each hop sees its predecessor as
/// `msg.sender` and the EOA as `tx.origin`.
pub fn nested_frames_see_caller_and_originator(cases: u32) -> Result<(), String> {
    let order = Just((0u8..6).collect::<Vec<_>>()).prop_shuffle();
    check(
        cases,
        (order, 1usize..=6, 0u8..3),
        |(order, depth, origin)| {
            let hop = parse(HOP).unwrap();
            let mut world = world_with(&[1_000, 1_000, 1_000]);
            let hops: Vec<Address> = (0..6)
                .map(|_| deploy_ok(&mut world, addr(0), &hop, "Hop", vec![]))
                .collect();
            let chain: Vec<Address> = order[..depth].iter().map(|&i| hops[i as usize]).collect();
            let gas = world.params().gas_limit;
            for pair in chain.windows(2) {
                send_transaction(
                    &mut world,
                    Transaction::call(
                        addr(0),
                        pair[0],
                        "setNext",
                        vec![Value::Address(pair[1])],
                        Wei::zero(),
                        gas,
                    ),
                )
                .unwrap();
            }
            let caller = addr(origin);
            let r = send_transaction(
                &mut world,
                Transaction::call(caller, chain[0], "go", vec![], Wei::zero(), gas),
            )
            .unwrap();
            prop_assert!(r.status.is_success());
            let slot = |a: &Address, var: &str| world.storage(a, &StorageKey::scalar(var)).cloned();
            let mut expected_sender = caller;
            for a in &chain {
                prop_assert_eq!(slot(a, "sender"), Some(Value::Address(expected_sender)));
                prop_assert_eq!(slot(a, "origin"), Some(Value::Address(caller)));
                prop_assert_eq!(slot(a, "visits"), Some(Value::Uint(Wei::one())));
                expected_sender = *a;
            }
            for a in hops.iter().filter(|a| !chain.contains(a)) {
                prop_assert_eq!(slot(a, "visits"), None);
            }
            Ok(())
        },
    )
}

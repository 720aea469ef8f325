mod common;

use common::{fixture_path, unit};
use reaudit_core::frontend::{contract_abi, parse, SourceUnit};
use reaudit_core::sim::script::run_script;
use reaudit_core::sim::*;
use reaudit_core::synth::{attacker_name, synthesize_attacker, AttackPlan};
use reaudit_core::types::{Address, Wei};
use sha2::{Digest, Sha256};

const GAS: u64 = 10_000_000;

fn eoa(n: u64) -> Address {
    Address::from_low_u64(0x1000 + n)
}

fn world_with(balances: &[u64]) -> WorldState {
    let config = GenesisConfig {
        alloc: balances
            .iter()
            .enumerate()
            .map(|(i, b)| (eoa(i as u64), Wei::from(*b)))
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
    let (addr, result) = deploy(world, from, unit, name, args, Wei::zero(), GAS).unwrap();
    assert!(result.status.is_success(), "{name}: {}", result.status);
    addr
}

fn call(
    world: &mut WorldState,
    from: Address,
    to: Address,
    f: &str,
    args: Vec<Value>,
    value: u64,
) -> ExecutionResult {
    send_transaction(
        world,
        Transaction::call(from, to, f, args, Wei::from(value), GAS),
    )
    .unwrap()
}

fn uint(world: &WorldState, addr: Address, key: StorageKey) -> Wei {
    match world.storage(&addr, &key) {
        Some(Value::Uint(v)) => *v,
        None => Wei::zero(),
        Some(other) => panic!("not a uint: {other}"),
    }
}

fn enters<'a>(trace: &'a [TraceEvent], function: &str) -> Vec<(usize, usize)> {
    trace
        .iter()
        .filter_map(|e| match e {
            TraceEvent::Enter {
                frame,
                depth,
                function: f,
                ..
            } if f == function => Some((*frame, *depth)),
            _ => None,
        })
        .collect()
}

fn exit_status(trace: &[TraceEvent], frame: usize) -> ExecStatus {
    trace
        .iter()
        .find_map(|e| match e {
            TraceEvent::Exit {
                frame: f, status, ..
            } if *f == frame => Some(status.clone()),
            _ => None,
        })
        .unwrap()
}

#[test]
fn allocations_sum_and_stay_conserved() {
    let mut world = world_with(&[5, 7]);
    assert_eq!(world.total_supply(), Wei::from(12));
    for (from, to, v) in [(0, 1, 3), (1, 0, 10), (0, 1, 100), (1, 2, 1)] {
        let _ = send_transaction(
            &mut world,
            Transaction::transfer(eoa(from), eoa(to), Wei::from(v), GAS),
        );
        assert_eq!(world.total_supply(), Wei::from(12));
    }
}

#[test]
fn plain_transfer_moves_ten_wei() {
    let mut world = world_with(&[100, 0]);
    let r = send_transaction(
        &mut world,
        Transaction::transfer(eoa(0), eoa(1), Wei::from(10), GAS),
    )
    .unwrap();
    assert_eq!(r.status, ExecStatus::Success);
    assert_eq!(world.balance(&eoa(0)), Wei::from(90));
    assert_eq!(world.balance(&eoa(1)), Wei::from(10));
}

#[test]
fn deploy_fair_dare_starts_with_empty_storage() {
    let mut world = world_with(&[1_000]);
    let addr = deploy_ok(
        &mut world,
        eoa(0),
        &unit("FairDare.sol"),
        "FairDare",
        vec![],
    );
    let account = world.account(&addr).unwrap();
    assert!(account.code.is_some());
    assert!(account.storage.is_empty());
    assert_eq!(account.balance, Wei::zero());
}

#[test]
fn underfunded_deploy_leaves_world_unchanged() {
    let mut world = world_with(&[10]);
    let before = world.clone();
    let err = deploy(
        &mut world,
        eoa(0),
        &unit("FairDare.sol"),
        "FairDare",
        vec![],
        Wei::from(11),
        GAS,
    )
    .unwrap_err();
    assert!(matches!(err, SimError::InsufficientFunds { .. }));
    assert_eq!(world, before);
}

#[test]
fn sequential_deploys_use_derived_addresses() {
    let mut world = world_with(&[1_000]);
    let u = unit("DeFi.sol");
    let a = deploy_ok(&mut world, eoa(0), &u, "DeFi", vec![]);
    let b = deploy_ok(&mut world, eoa(0), &u, "DeFi", vec![]);
    let expected = |nonce: u64| {
        let mut h = Sha256::new();
        h.update(eoa(0).0);
        h.update(nonce.to_be_bytes());
        let digest = h.finalize();
        let mut out = [0u8; 20];
        out.copy_from_slice(&digest[12..]);
        Address(out)
    };
    assert_ne!(a, b);
    assert_eq!(a, expected(0));
    assert_eq!(b, expected(1));
}

#[test]
fn unknown_function_lands_in_receiver_fallback() {
    let mut world = world_with(&[1_000]);
    let receiver = deploy_ok(
        &mut world,
        eoa(0),
        &unit("SenderReceiver.sol"),
        "Receiver",
        vec![],
    );
    let r = call(&mut world, eoa(0), receiver, "doesNotExist", vec![], 3);
    assert_eq!(r.status, ExecStatus::Success);
    assert_eq!(
        uint(&world, receiver, StorageKey::scalar("balance")),
        Wei::from(3)
    );
    assert_eq!(world.balance(&receiver), Wei::from(3));
}

fn fair_dare_payout(blocks_past: u64) -> (Wei, Wei) {
    let mut world = world_with(&[1_000_000, 0]);
    let dare = deploy_ok(
        &mut world,
        eoa(0),
        &unit("FairDare.sol"),
        "FairDare",
        vec![],
    );
    world
        .force_transfer(eoa(0), dare, Wei::from(10_000))
        .unwrap();
    let user = eoa(1);
    while world.block_number() < blocks_past {
        send_transaction(
            &mut world,
            Transaction::transfer(eoa(0), eoa(0), Wei::zero(), GAS),
        )
        .unwrap();
    }
    world.set_storage(
        dare,
        StorageKey::entry("depositAmount", user),
        Value::Uint(Wei::from(100)),
    );
    let at = world.block_number() - blocks_past;
    world.set_storage(
        dare,
        StorageKey::entry("depositBlock", user),
        Value::Uint(Wei::from(at)),
    );
    let r = call(&mut world, user, dare, "withdraw", vec![], 0);
    assert_eq!(r.status, ExecStatus::Success);
    (
        world.balance(&user),
        uint(&world, dare, StorageKey::entry("depositAmount", user)),
    )
}

#[test]
fn fair_dare_pays_deposit_with_bonus() {
    for blocks_past in [0, 10, 100] {
        let (paid, left) = fair_dare_payout(blocks_past);
        assert_eq!(paid, Wei::from(100 * (100 + blocks_past) / 100));
        assert_eq!(left, Wei::zero());
    }
}

fn attacker_for(
    victim: &SourceUnit,
    contract: &str,
    function: &str,
    funding: u64,
    bound: Option<u32>,
) -> SourceUnit {
    let abi = contract_abi(victim.contract(contract).unwrap());
    let plan =
        AttackPlan::with_defaults(&abi, contract, function, Wei::from(funding), bound).unwrap();
    synthesize_attacker(&abi, &plan).unwrap()
}

#[test]
fn dao_loop_drains_victim_and_reverts_innermost_only() {
    let mut world = world_with(&[1_000_000, 1_000_000]);
    let victim_unit = unit("Token.sol");
    let victim = deploy_ok(&mut world, eoa(0), &victim_unit, "Token", vec![]);
    world.force_transfer(eoa(0), victim, Wei::from(20)).unwrap();
    let attacker_unit = attacker_for(&victim_unit, "Token", "withdraw", 5, None);
    let attacker = deploy_ok(
        &mut world,
        eoa(1),
        &attacker_unit,
        &attacker_name("Token"),
        vec![Value::Address(victim)],
    );

    let r = call(&mut world, eoa(1), attacker, "attack", vec![], 5);
    assert_eq!(r.status, ExecStatus::Success);
    let frames = enters(&r.trace, "withdraw");
    let depths: Vec<usize> = frames.iter().map(|f| f.1).collect();
    assert_eq!(depths, [1, 3, 5, 7, 9, 11]);
    for (i, (frame, _)) in frames.iter().enumerate() {
        let status = exit_status(&r.trace, *frame);
        assert_eq!(
            status.is_success(),
            i + 1 < frames.len(),
            "withdraw #{i}: {status}"
        );
    }
    assert_eq!(world.balance(&victim), Wei::zero());
    assert_eq!(world.balance(&attacker), Wei::from(25));
}

#[test]
fn stipend_stops_storage_writing_fallback() {
    let mut world = world_with(&[1_000_000, 1_000_000]);
    let victim_unit = unit("Moneybox.sol");
    let victim = deploy_ok(&mut world, eoa(0), &victim_unit, "Moneybox", vec![]);
    world
        .force_transfer(eoa(0), victim, Wei::from(100))
        .unwrap();
    let attacker_unit = attacker_for(&victim_unit, "Moneybox", "withdraw", 5, Some(8));
    let attacker = deploy_ok(
        &mut world,
        eoa(1),
        &attacker_unit,
        &attacker_name("Moneybox"),
        vec![Value::Address(victim)],
    );

    let r = call(&mut world, eoa(1), attacker, "attack", vec![], 5);
    let withdraws = enters(&r.trace, "withdraw");
    assert_eq!(withdraws.len(), 1);
    assert!(matches!(
        exit_status(&r.trace, withdraws[0].0),
        ExecStatus::Reverted(RevertReason::TransferFailed)
    ));
    let fallback = enters(&r.trace, "fallback");
    assert_eq!(fallback.len(), 1);
    assert_eq!(exit_status(&r.trace, fallback[0].0), ExecStatus::OutOfGas);
    assert_eq!(world.balance(&victim), Wei::from(105));
    assert_eq!(world.balance(&attacker), Wei::zero());
}

#[test]
fn paper_mode_lets_transfer_reenter() {
    let mut world = world_with(&[1_000_000, 1_000_000]);
    world.set_gas_model(GasModel::Paper);
    let victim_unit = unit("Moneybox.sol");
    let victim = deploy_ok(&mut world, eoa(0), &victim_unit, "Moneybox", vec![]);
    world
        .force_transfer(eoa(0), victim, Wei::from(100))
        .unwrap();
    let attacker_unit = attacker_for(&victim_unit, "Moneybox", "withdraw", 5, Some(3));
    let attacker = deploy_ok(
        &mut world,
        eoa(1),
        &attacker_unit,
        &attacker_name("Moneybox"),
        vec![Value::Address(victim)],
    );
    let r = call(&mut world, eoa(1), attacker, "attack", vec![], 5);
    assert_eq!(enters(&r.trace, "withdraw").len(), 4);
    assert_eq!(world.balance(&attacker), Wei::from(20));
}

const PROBE: &str = r#"pragma solidity ^0.5.0;
contract Sink {
    uint256 hits;
    function() external payable {
        hits += 1;
    }
}
contract Probe {
    function touch(address payable s, uint256 g) public payable {
        require(s.call.value(0).gas(g)(""));
    }
    function nothing() public {
        require(true);
    }
}"#;

#[test]
fn explicit_gas_decides_whether_a_write_fits() {
    let u = parse(PROBE).unwrap();
    let mut world = world_with(&[1_000_000]);
    let sink = deploy_ok(&mut world, eoa(0), &u, "Sink", vec![]);
    let probe = deploy_ok(&mut world, eoa(0), &u, "Probe", vec![]);
    let hits = |w: &WorldState| uint(w, sink, StorageKey::scalar("hits"));

    let r = call(
        &mut world,
        eoa(0),
        probe,
        "touch",
        vec![Value::Address(sink), Value::Uint(Wei::from(2300))],
        0,
    );
    assert!(!r.status.is_success());
    assert_eq!(hits(&world), Wei::zero());

    let r = call(
        &mut world,
        eoa(0),
        probe,
        "touch",
        vec![Value::Address(sink), Value::Uint(Wei::from(20_000))],
        0,
    );
    assert_eq!(r.status, ExecStatus::Success);
    assert_eq!(hits(&world), Wei::from(1));
}

#[test]
fn require_true_changes_nothing() {
    let u = parse(PROBE).unwrap();
    let mut world = world_with(&[1_000_000]);
    let probe = deploy_ok(&mut world, eoa(0), &u, "Probe", vec![]);
    let before = world.account(&probe).unwrap().clone();
    let r = call(&mut world, eoa(0), probe, "nothing", vec![], 0);
    assert_eq!(r.status, ExecStatus::Success);
    let after = world.account(&probe).unwrap();
    assert_eq!(after.storage, before.storage);
    assert_eq!(after.balance, before.balance);
}

#[test]
fn snapshot_revert_restores_storage() {
    let mut world = world_with(&[1_000]);
    let dare = deploy_ok(
        &mut world,
        eoa(0),
        &unit("FairDare.sol"),
        "FairDare",
        vec![],
    );
    let before = world.clone();
    let snap = world.snapshot();
    world.set_storage(
        dare,
        StorageKey::entry("depositAmount", eoa(0)),
        Value::Uint(Wei::from(9)),
    );
    world.force_transfer(eoa(0), dare, Wei::from(5)).unwrap();
    world.revert_to(snap).unwrap();
    assert_eq!(world, before);
}

const NESTED: &str = r#"pragma solidity ^0.5.0;
contract Child {
    uint256 y;
    function poke() public {
        y = 1;
        require(false, "no");
    }
}
contract Parent {
    uint256 x;
    Child c;
    constructor(address child) public {
        c = Child(child);
    }
    function go() public {
        x = 1;
        c.poke();
    }
}"#;

#[test]
fn child_revert_keeps_parent_writes() {
    let u = parse(NESTED).unwrap();
    let mut world = world_with(&[1_000]);
    let child = deploy_ok(&mut world, eoa(0), &u, "Child", vec![]);
    let parent = deploy_ok(
        &mut world,
        eoa(0),
        &u,
        "Parent",
        vec![Value::Address(child)],
    );
    let r = call(&mut world, eoa(0), parent, "go", vec![], 0);
    assert_eq!(r.status, ExecStatus::Success);
    assert_eq!(uint(&world, parent, StorageKey::scalar("x")), Wei::from(1));
    assert_eq!(world.storage(&child, &StorageKey::scalar("y")), None);
}

const CHAIN: &str = r#"pragma solidity ^0.5.0;
contract Hop {
    address public sender;
    address public origin;
    Hop next;
    function setNext(address n) public {
        next = Hop(n);
    }
    function go() public {
        sender = msg.sender;
        origin = tx.origin;
        if (address(next) != address(0)) {
            next.go();
        }
    }
}"#;

#[test]
fn sender_and_origin_along_a_chain() {
    let u = parse(CHAIN).unwrap();
    let mut world = world_with(&[1_000]);
    let hops: Vec<Address> = (0..3)
        .map(|_| deploy_ok(&mut world, eoa(0), &u, "Hop", vec![]))
        .collect();
    for pair in hops.windows(2) {
        call(
            &mut world,
            eoa(0),
            pair[0],
            "setNext",
            vec![Value::Address(pair[1])],
            0,
        );
    }
    let r = call(&mut world, eoa(0), hops[0], "go", vec![], 0);
    assert_eq!(r.status, ExecStatus::Success);
    let expected_senders = [eoa(0), hops[0], hops[1]];
    for (hop, sender) in hops.iter().zip(expected_senders) {
        assert_eq!(
            world.storage(hop, &StorageKey::scalar("sender")),
            Some(&Value::Address(sender))
        );
        assert_eq!(
            world.storage(hop, &StorageKey::scalar("origin")),
            Some(&Value::Address(eoa(0)))
        );
    }
}

const SELF_CALL: &str = r#"pragma solidity ^0.5.0;
contract Loop {
    Loop me;
    uint256 count;
    function arm() public {
        me = Loop(address(this));
    }
    function spin() public {
        count += 1;
        me.spin();
    }
}"#;

#[test]
fn call_depth_is_capped() {
    let u = parse(SELF_CALL).unwrap();
    let mut world = world_with(&[1_000]);
    let l = deploy_ok(&mut world, eoa(0), &u, "Loop", vec![]);
    call(&mut world, eoa(0), l, "arm", vec![], 0);
    let r = send_transaction(
        &mut world,
        Transaction::call(eoa(0), l, "spin", vec![], Wei::zero(), DEFAULT_GAS),
    )
    .unwrap();
    let depths: Vec<usize> = enters(&r.trace, "spin").iter().map(|f| f.1).collect();
    assert_eq!(*depths.last().unwrap(), MAX_CALL_DEPTH + 1);
    let last = enters(&r.trace, "spin").last().unwrap().0;
    assert_eq!(
        exit_status(&r.trace, last),
        ExecStatus::Reverted(RevertReason::DepthExceeded)
    );
    assert_eq!(
        uint(&world, l, StorageKey::scalar("count")),
        Wei::from(MAX_CALL_DEPTH as u64 + 1)
    );
}

const DEFAULT_GAS: u64 = 0xffff_ffff;

fn dao_run() -> (WorldState, String) {
    let mut world = world_with(&[1_000_000, 1_000_000]);
    let victim_unit = unit("Token.sol");
    let victim = deploy_ok(&mut world, eoa(0), &victim_unit, "Token", vec![]);
    world.force_transfer(eoa(0), victim, Wei::from(50)).unwrap();
    let attacker_unit = attacker_for(&victim_unit, "Token", "withdraw", 5, Some(4));
    let attacker = deploy_ok(
        &mut world,
        eoa(1),
        &attacker_unit,
        &attacker_name("Token"),
        vec![Value::Address(victim)],
    );
    let r = call(&mut world, eoa(1), attacker, "attack", vec![], 5);
    (world, export_trace(&r.trace))
}

#[test]
fn runs_are_deterministic() {
    let (w1, t1) = dao_run();
    let (w2, t2) = dao_run();
    assert_eq!(w1, w2);
    assert_eq!(t1.as_bytes(), t2.as_bytes());
}

#[test]
fn block_number_advances_per_transaction() {
    let mut world = world_with(&[1_000, 0]);
    assert_eq!(world.block_number(), 0);
    deploy_ok(&mut world, eoa(0), &unit("DeFi.sol"), "DeFi", vec![]);
    send_transaction(
        &mut world,
        Transaction::transfer(eoa(0), eoa(1), Wei::from(1), GAS),
    )
    .unwrap();
    assert_eq!(world.block_number(), 2);
    assert_eq!(world.receipts().len(), 2);
}

#[test]
fn gas_above_chain_limit_is_rejected() {
    let config = GenesisConfig {
        gas_limit: 1_000,
        alloc: vec![(eoa(0), Wei::from(10))],
        ..GenesisConfig::default()
    };
    let mut world = genesis(&config).unwrap();
    let err = send_transaction(
        &mut world,
        Transaction::transfer(eoa(0), eoa(1), Wei::one(), 1_001),
    )
    .unwrap_err();
    assert!(matches!(err, SimError::GasLimitExceeded { .. }));
}

#[test]
fn script_drives_deploys_and_calls() {
    let genesis_text = format!(
        r#"{{"config": {{"chainID": 7}}, "alloc": {{"{}": {{"balance": "1000"}}}}, "gasLimit": "0xffffffff"}}"#,
        eoa(0)
    );
    let mut world = genesis(&GenesisConfig::from_json(&genesis_text).unwrap()).unwrap();
    let script = format!(
        "# deposit and withdraw\n\
         deploy bank {me} DeFi.sol DeFi\n\
         send {me} @bank value=40 fn=deposit\n\
         balance @bank\n\
         send {me} @bank fn=withdraw\n\
         balance @bank\n\
         send {me} {other} value=0x10\n\
         balance {other}\n",
        me = eoa(0),
        other = eoa(1),
    );
    let steps = run_script(&mut world, &script, &fixture_path("")).unwrap();
    let out: Vec<&str> = steps.iter().map(|s| s.output.as_str()).collect();
    assert_eq!(out.len(), 7);
    assert!(out[0].starts_with("deploy @bank DeFi at 0x"));
    assert!(out[1].contains("success"), "{}", out[1]);
    assert!(out[2].ends_with("= 40"));
    assert!(out[4].ends_with("= 0"));
    assert!(out[6].ends_with("= 16"));
    assert_eq!(world.balance(&eoa(0)), Wei::from(1000 - 16));

    let err = run_script(&mut world, "send @nobody @bank\n", &fixture_path("")).unwrap_err();
    assert_eq!(err.line, 1);
}

//! Dynamic confirmation of static candidates.
//!
//! Each candidate is attacked in a private world: the victim is deployed and
//! seeded with a bankroll, a synthesized attacker is deployed against it and
//! `attack()` is sent from the attacker's owner. A second run with a
//! non-reentering attacker measures what the attacker is legitimately owed.

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::analyzer::{find_candidates, Pattern, VulnCandidate};
use crate::frontend::{self, contract_abi, SourceUnit};
use crate::sim::{
    deploy, export_trace, send_transaction, GasModel, SimError, TraceEvent, Transaction, Value,
    WorldState,
};
use crate::sim::{genesis, GenesisConfig};
use crate::synth::{attacker_name, funding_path, synthesize_attacker, AttackPlan};
use crate::types::{Address, Wei};

pub const DEFAULT_MAX_REENTRY: u32 = 64;
pub const DEFAULT_SEED_WEI: u64 = 1000;
/// Deposit made by the attacker when the victim accepts one.
pub const DEFAULT_FUNDING_WEI: u64 = 5;

const BANK_BALANCE: u128 = 1_000_000_000_000_000_000_000_000;
const EOA_BALANCE: u128 = 1_000_000_000_000_000_000_000;

/// Externally owned accounts present in every attack world.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Actors {
    /// Source of victim bankrolls.
    pub bank: Address,
    /// Deploys the victim.
    pub deployer: Address,
    /// Deploys and drives the attacker.
    pub attacker_owner: Address,
}

impl Default for Actors {
    fn default() -> Self {
        Actors {
            bank: Address::from_label("bank"),
            deployer: Address::from_label("deployer"),
            attacker_owner: Address::from_label("attacker"),
        }
    }
}

/// A fresh world holding only the [`Actors`].
pub fn attack_world(gas_model: GasModel) -> WorldState {
    let actors = Actors::default();
    let config = GenesisConfig {
        alloc: vec![
            (actors.bank, Wei::from(BANK_BALANCE)),
            (actors.deployer, Wei::from(EOA_BALANCE)),
            (actors.attacker_owner, Wei::from(EOA_BALANCE)),
        ],
        ..GenesisConfig::default()
    };
    let mut world = genesis(&config).expect("fixed genesis is valid");
    world.set_gas_model(gas_model);
    world
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "reason")]
pub enum Verdict {
    Confirmed,
    NotConfirmed,
    NotAttackable,
    AnalysisFailed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AttackReport {
    pub contract: String,
    pub function: String,
    pub signature: String,
    pub static_pattern: Pattern,
    pub verdict: Verdict,
    pub max_reentry_depth: usize,
    #[serde(with = "crate::types::wei_decimal")]
    pub ether_extracted: Wei,
    #[serde(with = "crate::types::wei_decimal")]
    pub entitled: Wei,
    #[serde(with = "crate::types::wei_decimal")]
    pub victim_balance_before: Wei,
    #[serde(with = "crate::types::wei_decimal")]
    pub victim_balance_after: Wei,
    /// Whether the total ether supply was unchanged by the run.
    pub conserved: bool,
    pub gas_model: GasModel,
    pub trace_file: Option<PathBuf>,
    /// Trace of the attack transaction.
    #[serde(skip)]
    pub trace: Vec<TraceEvent>,
}

impl AttackReport {
    fn empty(candidate: &VulnCandidate, gas_model: GasModel, verdict: Verdict) -> Self {
        AttackReport {
            contract: candidate.contract.clone(),
            function: candidate.function.clone(),
            signature: candidate.signature.clone(),
            static_pattern: candidate.pattern,
            verdict,
            max_reentry_depth: 0,
            ether_extracted: Wei::zero(),
            entitled: Wei::zero(),
            victim_balance_before: Wei::zero(),
            victim_balance_after: Wei::zero(),
            conserved: true,
            gas_model,
            trace_file: None,
            trace: Vec::new(),
        }
    }
}

/// Largest number of simultaneously open frames running `function` on
/// `victim`.
pub fn max_reentry_depth(trace: &[TraceEvent], victim: Address, function: &str) -> usize {
    let mut open = BTreeSet::new();
    let mut max = 0;
    for event in trace {
        match event {
            TraceEvent::Enter {
                frame,
                callee,
                function: f,
                ..
            } if *callee == victim && f == function => {
                open.insert(*frame);
                max = max.max(open.len());
            }
            TraceEvent::Exit { frame, .. } => {
                open.remove(frame);
            }
            _ => {}
        }
    }
    max
}

fn constructor_args(unit: &SourceUnit, contract: &str, deployer: Address) -> Vec<Value> {
    let Some(ctor) = unit.contract(contract).and_then(|c| c.constructor.as_ref()) else {
        return Vec::new();
    };
    ctor.params
        .iter()
        .map(|p| match Value::default_for(&p.ty) {
            Value::Address(_) => Value::Address(deployer),
            v => v,
        })
        .collect()
}

fn sim_failure(err: SimError) -> Verdict {
    Verdict::AnalysisFailed(err.to_string())
}

/// Outcome of deploying an attacker and sending `attack()`.
struct Run {
    gain: Wei,
    received: Wei,
    trace: Vec<TraceEvent>,
    victim_after: Wei,
    conserved: bool,
}

fn attacker_run(
    mut world: WorldState,
    attacker: &SourceUnit,
    victim_name: &str,
    victim: Address,
    funding: Wei,
) -> Result<Run, String> {
    let owner = Actors::default().attacker_owner;
    let gas = world.params().gas_limit;
    let supply = world.total_supply();
    let owner_before = world.balance(&owner);
    let (attacker_addr, created) = deploy(
        &mut world,
        owner,
        attacker,
        &attacker_name(victim_name),
        vec![Value::Address(victim)],
        Wei::zero(),
        gas,
    )
    .map_err(|e| e.to_string())?;
    if !created.status.is_success() {
        return Err(format!("attacker constructor failed: {}", created.status));
    }
    let result = send_transaction(
        &mut world,
        Transaction::call(owner, attacker_addr, "attack", Vec::new(), funding, gas),
    )
    .map_err(|e| e.to_string())?;
    let after = world.balance(&owner) + world.balance(&attacker_addr);
    Ok(Run {
        gain: after.saturating_sub(owner_before),
        received: (after + funding).saturating_sub(owner_before),
        trace: result.trace,
        victim_after: world.balance(&victim),
        conserved: world.total_supply() == supply,
    })
}

/// Attacks `candidate` from a copy of `world`, which must hold the
/// [`Actors`]. `seed` is moved from the bank into the victim after
/// deployment.
pub fn run_attack(
    world: &WorldState,
    unit: &SourceUnit,
    candidate: &VulnCandidate,
    plan: &AttackPlan,
    seed: Wei,
) -> AttackReport {
    let gas_model = world.params().gas_model;
    if !candidate.attackable {
        return AttackReport::empty(candidate, gas_model, Verdict::NotAttackable);
    }
    let mut report = AttackReport::empty(candidate, gas_model, Verdict::NotConfirmed);
    if let Err(verdict) = attack_into(world, unit, candidate, plan, seed, &mut report) {
        report.verdict = verdict;
    }
    report
}

fn attack_into(
    world: &WorldState,
    unit: &SourceUnit,
    candidate: &VulnCandidate,
    plan: &AttackPlan,
    seed: Wei,
    report: &mut AttackReport,
) -> Result<(), Verdict> {
    let actors = Actors::default();
    let mut world = world.clone();
    let def = unit.contract(&candidate.contract).ok_or_else(|| {
        Verdict::AnalysisFailed(format!("unknown contract `{}`", candidate.contract))
    })?;
    let abi = contract_abi(def);
    let gas = world.params().gas_limit;

    let args = constructor_args(unit, &candidate.contract, actors.deployer);
    let (victim, created) = deploy(
        &mut world,
        actors.deployer,
        unit,
        &candidate.contract,
        args,
        Wei::zero(),
        gas,
    )
    .map_err(sim_failure)?;
    if !created.status.is_success() {
        return Err(Verdict::AnalysisFailed(format!(
            "victim constructor failed: {}",
            created.status
        )));
    }
    world
        .force_transfer(actors.bank, victim, seed)
        .map_err(sim_failure)?;
    report.victim_balance_before = world.balance(&victim);

    let control_plan = AttackPlan {
        max_reentry: Some(0),
        ..plan.clone()
    };
    let synth = |p: &AttackPlan| {
        synthesize_attacker(&abi, p).map_err(|e| Verdict::AnalysisFailed(e.to_string()))
    };
    let (attacker, control_attacker) = (synth(plan)?, synth(&control_plan)?);

    let control = attacker_run(
        world.clone(),
        &control_attacker,
        &candidate.contract,
        victim,
        plan.funding,
    )
    .map_err(Verdict::AnalysisFailed)?;
    let attack = attacker_run(world, &attacker, &candidate.contract, victim, plan.funding)
        .map_err(Verdict::AnalysisFailed)?;

    report.entitled = plan.funding + control.received;
    report.ether_extracted = attack.gain;
    report.victim_balance_after = attack.victim_after;
    report.conserved = attack.conserved && control.conserved;
    report.max_reentry_depth = max_reentry_depth(&attack.trace, victim, &candidate.function);
    report.trace = attack.trace;
    if report.max_reentry_depth >= 2 && report.ether_extracted > report.entitled {
        report.verdict = Verdict::Confirmed;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineOptions {
    pub gas_model: GasModel,
    pub max_reentry: u32,
    pub seed_victim: Wei,
    /// Attacker deposit; `None` picks [`DEFAULT_FUNDING_WEI`] when the victim
    /// has a payable entry point and 0 otherwise.
    pub funding: Option<Wei>,
    /// Stop after static analysis.
    pub static_only: bool,
    pub trace_dir: Option<PathBuf>,
    /// Worker threads; 0 uses rayon's default.
    pub jobs: usize,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            gas_model: GasModel::Faithful,
            max_reentry: DEFAULT_MAX_REENTRY,
            seed_victim: Wei::from(DEFAULT_SEED_WEI),
            funding: None,
            static_only: false,
            trace_dir: None,
            jobs: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CandidateSummary {
    pub function: String,
    pub signature: String,
    pub pattern: Pattern,
    pub call_stmt: usize,
    pub writes_after: Vec<String>,
    pub cross_peers: Vec<String>,
    pub attackable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContractReport {
    pub contract: String,
    pub candidates: Vec<CandidateSummary>,
    pub attacks: Vec<AttackReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileReport {
    pub file: String,
    /// Set when the file could not be analyzed at all.
    pub error: Option<String>,
    pub contracts: Vec<ContractReport>,
}

impl FileReport {
    fn attacks(&self) -> impl Iterator<Item = &AttackReport> {
        self.contracts.iter().flat_map(|c| c.attacks.iter())
    }

    /// Parse failure, or every attack on the file ended in `AnalysisFailed`.
    pub fn failed(&self) -> bool {
        self.error.is_some()
            || (self.attacks().next().is_some()
                && self
                    .attacks()
                    .all(|a| matches!(a.verdict, Verdict::AnalysisFailed(_))))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub confirmed: usize,
    /// Candidates the dynamic stage did not confirm.
    pub potential: usize,
    /// Contracts without candidates.
    pub safe: usize,
    /// Unparseable files plus failed attacks.
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PipelineReport {
    pub gas_model: GasModel,
    pub static_only: bool,
    pub files: Vec<FileReport>,
    pub summary: Summary,
}

impl PipelineReport {
    pub fn attacks(&self) -> impl Iterator<Item = &AttackReport> {
        self.files.iter().flat_map(FileReport::attacks)
    }

    pub fn candidates(&self) -> impl Iterator<Item = (&str, &CandidateSummary)> {
        self.files.iter().flat_map(|f| {
            f.contracts
                .iter()
                .flat_map(|c| c.candidates.iter().map(move |s| (c.contract.as_str(), s)))
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }

    /// 1 with any confirmed finding, otherwise 3 when every input failed,
    /// otherwise 0.
    pub fn exit_code(&self) -> i32 {
        if self.summary.confirmed > 0 {
            1
        } else if !self.files.is_empty() && self.files.iter().all(FileReport::failed) {
            3
        } else {
            0
        }
    }
}

fn summarize(files: &[FileReport]) -> Summary {
    let mut summary = Summary::default();
    for file in files {
        if file.error.is_some() {
            summary.failed += 1;
        }
        for contract in &file.contracts {
            if contract.candidates.is_empty() {
                summary.safe += 1;
            }
            for attack in &contract.attacks {
                match attack.verdict {
                    Verdict::Confirmed => summary.confirmed += 1,
                    Verdict::NotConfirmed | Verdict::NotAttackable => summary.potential += 1,
                    Verdict::AnalysisFailed(_) => summary.failed += 1,
                }
            }
        }
    }
    summary
}

fn summary_of(candidate: &VulnCandidate) -> CandidateSummary {
    CandidateSummary {
        function: candidate.function.clone(),
        signature: candidate.signature.clone(),
        pattern: candidate.pattern,
        call_stmt: candidate.call_site.stmt_index,
        writes_after: candidate
            .writes_after
            .iter()
            .map(|w| w.target_var.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect(),
        cross_peers: candidate.cross_peers.clone(),
        attackable: candidate.attackable,
    }
}

/// The plan the pipeline uses for `contract.function`.
pub fn default_plan(
    unit: &SourceUnit,
    contract: &str,
    function: &str,
    options: &PipelineOptions,
) -> Result<AttackPlan, String> {
    let def = unit
        .contract(contract)
        .ok_or_else(|| format!("unknown contract `{contract}`"))?;
    let abi = contract_abi(def);
    let funding = options.funding.unwrap_or_else(|| {
        if funding_path(&abi, function).is_some() {
            Wei::from(DEFAULT_FUNDING_WEI)
        } else {
            Wei::zero()
        }
    });
    AttackPlan::with_defaults(&abi, contract, function, funding, Some(options.max_reentry))
        .map_err(|e| e.to_string())
}

fn trace_file_name(report: &AttackReport) -> String {
    let pattern = match report.static_pattern {
        Pattern::SingleFunction => "single",
        Pattern::CrossFunction => "cross",
    };
    format!("{}.{}.{pattern}.trace", report.contract, report.function)
}

/// Analyzes one source text. `file` is only used for labelling.
pub fn analyze_source(file: &str, source: &str, options: &PipelineOptions) -> FileReport {
    let unit = match frontend::parse(source) {
        Ok(unit) => unit,
        Err(e) => {
            return FileReport {
                file: file.to_string(),
                error: Some(e.to_string()),
                contracts: Vec::new(),
            }
        }
    };
    let candidates = find_candidates(&unit);
    let world = attack_world(options.gas_model);
    let mut by_contract: HashMap<&str, Vec<&VulnCandidate>> = HashMap::new();
    for c in &candidates {
        by_contract.entry(c.contract.as_str()).or_default().push(c);
    }
    let mut contracts = Vec::new();
    for def in &unit.contracts {
        let mine = by_contract.remove(def.name.as_str()).unwrap_or_default();
        let attacks = if options.static_only {
            Vec::new()
        } else {
            mine.iter()
                .map(
                    |c| match default_plan(&unit, &c.contract, &c.function, options) {
                        Ok(plan) => run_attack(&world, &unit, c, &plan, options.seed_victim),
                        Err(_) if !c.attackable => {
                            AttackReport::empty(c, options.gas_model, Verdict::NotAttackable)
                        }
                        Err(e) => {
                            AttackReport::empty(c, options.gas_model, Verdict::AnalysisFailed(e))
                        }
                    },
                )
                .collect()
        };
        contracts.push(ContractReport {
            contract: def.name.clone(),
            candidates: mine.into_iter().map(summary_of).collect(),
            attacks,
        });
    }
    contracts.sort_by(|a, b| a.contract.cmp(&b.contract));
    FileReport {
        file: file.to_string(),
        error: None,
        contracts,
    }
}

fn write_traces(file: &mut FileReport, dir: &Path) {
    for contract in &mut file.contracts {
        for attack in &mut contract.attacks {
            if attack.trace.is_empty() {
                continue;
            }
            let path = dir.join(trace_file_name(attack));
            match std::fs::write(&path, export_trace(&attack.trace)) {
                Ok(()) => attack.trace_file = Some(path),
                Err(e) => log::warn!("cannot write trace {}: {e}", path.display()),
            }
        }
    }
}

fn analyze_path(path: &Path, options: &PipelineOptions) -> FileReport {
    let label = path.display().to_string();
    let mut report = match std::fs::read_to_string(path) {
        Ok(source) => analyze_source(&label, &source, options),
        Err(e) => FileReport {
            file: label,
            error: Some(e.to_string()),
            contracts: Vec::new(),
        },
    };
    if let Some(dir) = &options.trace_dir {
        write_traces(&mut report, dir);
    }
    report
}

fn collect(mut files: Vec<FileReport>, options: &PipelineOptions) -> PipelineReport {
    files.sort_by(|a, b| a.file.cmp(&b.file));
    PipelineReport {
        gas_model: options.gas_model,
        static_only: options.static_only,
        summary: summarize(&files),
        files,
    }
}

/// Runs the pipeline on every file, in parallel across files. Output order is
/// sorted by path and independent of scheduling.
pub fn analyze_pipeline(sources: &[PathBuf], options: &PipelineOptions) -> PipelineReport {
    if let Some(dir) = &options.trace_dir {
        if let Err(e) = std::fs::create_dir_all(dir) {
            log::warn!("cannot create trace directory {}: {e}", dir.display());
        }
    }
    let run = || {
        sources
            .par_iter()
            .map(|p| analyze_path(p, options))
            .collect::<Vec<_>>()
    };
    let files = match rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs)
        .build()
    {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    };
    collect(files, options)
}

/// In-memory variant of [`analyze_pipeline`] over `(label, source)` pairs.
pub fn analyze_sources(sources: &[(String, String)], options: &PipelineOptions) -> PipelineReport {
    let files = sources
        .par_iter()
        .map(|(label, text)| analyze_source(label, text, options))
        .collect();
    collect(files, options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{ExecStatus, RevertReason};

    fn enter(frame: usize, callee: Address, function: &str) -> TraceEvent {
        TraceEvent::Enter {
            frame,
            depth: frame,
            caller: Address::ZERO,
            callee,
            function: function.into(),
            value: Wei::zero(),
            gas: 0,
        }
    }

    fn exit(frame: usize) -> TraceEvent {
        TraceEvent::Exit {
            frame,
            depth: frame,
            status: ExecStatus::Reverted(RevertReason::Require(None)),
            gas_used: 0,
        }
    }

    #[test]
    fn depth_counts_overlapping_frames_only() {
        let v = Address::from_low_u64(1);
        let other = Address::from_low_u64(2);
        let nested = [
            enter(0, v, "withdraw"),
            enter(1, other, "fallback"),
            enter(2, v, "withdraw"),
            exit(2),
            exit(1),
            exit(0),
        ];
        assert_eq!(max_reentry_depth(&nested, v, "withdraw"), 2);
        let sequential = [
            enter(0, v, "withdraw"),
            exit(0),
            enter(1, v, "withdraw"),
            exit(1),
        ];
        assert_eq!(max_reentry_depth(&sequential, v, "withdraw"), 1);
        assert_eq!(max_reentry_depth(&nested, other, "withdraw"), 0);
    }

    #[test]
    fn empty_input_gives_empty_report() {
        let report = analyze_pipeline(&[], &PipelineOptions::default());
        assert!(report.files.is_empty());
        assert_eq!(report.summary, Summary::default());
        assert_eq!(report.exit_code(), 0);
    }

    #[test]
    fn parse_failure_is_recorded_not_raised() {
        let report = analyze_sources(
            &[("bad.sol".into(), "contract {".into())],
            &PipelineOptions::default(),
        );
        assert!(report.files[0].error.is_some());
        assert_eq!(report.summary.failed, 1);
        assert_eq!(report.exit_code(), 3);
    }
}

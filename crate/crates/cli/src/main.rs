//! `reaudit`: reentrancy auditor for a Solidity subset.
//!
//! Exit codes: 0 no confirmed findings, 1 at least one confirmed finding,
//! 2 usage error, 3 every input failed analysis.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use reaudit_core::frontend::{self, contract_abi};
use reaudit_core::orchestrator::{
    analyze_pipeline, default_plan, PipelineOptions, PipelineReport, Verdict, DEFAULT_MAX_REENTRY,
    DEFAULT_SEED_WEI,
};
use reaudit_core::sim::script::run_script;
use reaudit_core::sim::{export_trace, genesis, GasModel, GenesisConfig};
use reaudit_core::synth::{attacker_file_name, render_attacker, synthesize_attacker, AttackPlan};
use reaudit_core::types::{parse_u256, Wei};

const EXIT_FAILED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "reaudit",
    version,
    about = "Detect and confirm reentrancy in Solidity contracts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Static analysis followed by simulated attacks.
    Analyze {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[command(flatten)]
        attack: AttackArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Write the synthesized attacker of each attackable candidate here.
        #[arg(long, value_name = "DIR")]
        emit_attacker: Option<PathBuf>,
    },
    /// Static analysis only; prints one `Contract.function(types)` line per
    /// flagged function.
    Scan {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Write the attacker contract for one function.
    EmitAttacker {
        file: PathBuf,
        #[arg(long)]
        function: String,
        /// Target contract; defaults to the only contract declaring `function`.
        #[arg(long)]
        contract: Option<String>,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_REENTRY)]
        max_reentry: u32,
        #[arg(long, value_name = "WEI", value_parser = wei, default_value = "0")]
        funding: Wei,
    },
    /// Run a transaction script against a genesis world.
    Simulate {
        #[arg(long, value_name = "FILE")]
        genesis: PathBuf,
        #[arg(long, value_name = "FILE")]
        script: PathBuf,
        #[arg(long, default_value_t = GasModel::Faithful)]
        gas_model: GasModel,
        /// Write one trace file per transaction here.
        #[arg(long, value_name = "DIR")]
        trace_dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct AttackArgs {
    #[arg(long, default_value_t = GasModel::Faithful)]
    gas_model: GasModel,
    /// Bound on re-entrant calls made by the attacker.
    #[arg(long, default_value_t = DEFAULT_MAX_REENTRY)]
    max_reentry: u32,
    /// Balance given to each victim before the attack.
    #[arg(long, value_name = "WEI", value_parser = wei, default_value_t = Wei::from(DEFAULT_SEED_WEI))]
    seed_victim: Wei,
    /// Attacker deposit; defaults to 5 wei when the victim accepts deposits.
    #[arg(long, value_name = "WEI", value_parser = wei)]
    funding: Option<Wei>,
    #[arg(long, value_name = "DIR")]
    trace_dir: Option<PathBuf>,
}

#[derive(Args)]
struct OutputArgs {
    /// Print the machine-readable report.
    #[arg(long)]
    json: bool,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

fn wei(text: &str) -> Result<Wei, String> {
    parse_u256(text).ok_or_else(|| format!("`{text}` is not a decimal or 0x-hex integer"))
}

fn print_report(report: &PipelineReport) {
    for file in &report.files {
        if let Some(err) = &file.error {
            println!("{}: analysis failed: {err}", file.file);
            continue;
        }
        for contract in &file.contracts {
            for attack in &contract.attacks {
                let verdict = match &attack.verdict {
                    Verdict::AnalysisFailed(reason) => format!("AnalysisFailed ({reason})"),
                    v => format!("{v:?}"),
                };
                print!(
                    "{}: {}.{} [{:?}] {verdict} depth={} extracted={} entitled={}",
                    file.file,
                    attack.contract,
                    attack.signature,
                    attack.static_pattern,
                    attack.max_reentry_depth,
                    attack.ether_extracted,
                    attack.entitled,
                );
                match &attack.trace_file {
                    Some(path) => println!(" trace={}", path.display()),
                    None => println!(),
                }
            }
        }
    }
    let s = report.summary;
    println!(
        "confirmed={} potential={} safe={} failed={} gas_model={}",
        s.confirmed, s.potential, s.safe, s.failed, report.gas_model
    );
}

fn write_attackers(report: &PipelineReport, dir: &Path, options: &PipelineOptions) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for file in report.files.iter().filter(|f| f.error.is_none()) {
        let source = std::fs::read_to_string(&file.file)?;
        let unit = frontend::parse(&source)?;
        let mut done = BTreeSet::new();
        let candidates = file
            .contracts
            .iter()
            .flat_map(|c| c.candidates.iter().map(move |s| (c.contract.as_str(), s)));
        for (contract, candidate) in candidates {
            if !candidate.attackable || !done.insert((contract, candidate.function.as_str())) {
                continue;
            }
            let Some(def) = unit.contract(contract) else {
                continue;
            };
            let abi = contract_abi(def);
            let plan = default_plan(&unit, contract, &candidate.function, options)
                .map_err(anyhow::Error::msg)?;
            let attacker = synthesize_attacker(&abi, &plan)?;
            let path = dir.join(attacker_file_name(contract, &candidate.function));
            std::fs::write(&path, render_attacker(&attacker))?;
            log::info!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn analyze(
    files: Vec<PathBuf>,
    attack: AttackArgs,
    output: OutputArgs,
    emit: Option<PathBuf>,
) -> Result<u8> {
    let options = PipelineOptions {
        gas_model: attack.gas_model,
        max_reentry: attack.max_reentry,
        seed_victim: attack.seed_victim,
        funding: attack.funding,
        static_only: false,
        trace_dir: attack.trace_dir,
        jobs: output.jobs,
    };
    let report = analyze_pipeline(&files, &options);
    if output.json {
        println!("{}", report.to_json());
    } else {
        print_report(&report);
    }
    if let Some(dir) = emit {
        write_attackers(&report, &dir, &options)?;
    }
    Ok(report.exit_code() as u8)
}

fn scan(files: Vec<PathBuf>, output: OutputArgs) -> Result<u8> {
    let options = PipelineOptions {
        static_only: true,
        jobs: output.jobs,
        ..PipelineOptions::default()
    };
    let report = analyze_pipeline(&files, &options);
    if output.json {
        println!("{}", report.to_json());
    } else {
        let lines: BTreeSet<String> = report
            .candidates()
            .map(|(contract, c)| format!("{contract}.{}", c.signature))
            .collect();
        for line in lines {
            println!("{line}");
        }
        for file in &report.files {
            if let Some(err) = &file.error {
                eprintln!("{}: analysis failed: {err}", file.file);
            }
        }
    }
    Ok(report.exit_code() as u8)
}

fn emit_attacker(
    file: &Path,
    function: &str,
    contract: Option<String>,
    out: &Path,
    max_reentry: u32,
    funding: Wei,
) -> Result<u8> {
    let source =
        std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let unit = frontend::parse(&source).with_context(|| format!("parsing {}", file.display()))?;
    let def = match contract {
        Some(name) => unit
            .contract(&name)
            .with_context(|| format!("no contract `{name}` in {}", file.display()))?,
        None => {
            let mut owners = unit
                .contracts
                .iter()
                .filter(|c| c.function(function).is_some());
            match (owners.next(), owners.next()) {
                (Some(def), None) => def,
                (None, _) => bail!("no contract in {} declares `{function}`", file.display()),
                (Some(_), Some(_)) => {
                    bail!("`{function}` is declared by several contracts; pass --contract")
                }
            }
        }
    };
    let abi = contract_abi(def);
    let plan = AttackPlan::with_defaults(&abi, &def.name, function, funding, Some(max_reentry))?;
    let attacker = synthesize_attacker(&abi, &plan)?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let path = out.join(attacker_file_name(&def.name, function));
    std::fs::write(&path, render_attacker(&attacker))?;
    println!("{}", path.display());
    Ok(0)
}

fn simulate(
    genesis_path: &Path,
    script_path: &Path,
    gas_model: GasModel,
    trace_dir: Option<PathBuf>,
) -> Result<u8> {
    let text = std::fs::read_to_string(genesis_path)
        .with_context(|| format!("reading {}", genesis_path.display()))?;
    let mut world = genesis(&GenesisConfig::from_json(&text)?)?;
    world.set_gas_model(gas_model);
    let script = std::fs::read_to_string(script_path)
        .with_context(|| format!("reading {}", script_path.display()))?;
    let base = script_path.parent().unwrap_or(Path::new("."));
    let steps = run_script(&mut world, &script, base)?;
    if let Some(dir) = &trace_dir {
        std::fs::create_dir_all(dir)?;
    }
    for step in &steps {
        println!("{}", step.output);
        if let Some(dir) = &trace_dir {
            if !step.trace.is_empty() {
                std::fs::write(
                    dir.join(format!("line{}.trace", step.line)),
                    export_trace(&step.trace),
                )?;
            }
        }
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Analyze {
            files,
            attack,
            output,
            emit_attacker,
        } => analyze(files, attack, output, emit_attacker),
        Command::Scan { files, output } => scan(files, output),
        Command::EmitAttacker {
            file,
            function,
            contract,
            out,
            max_reentry,
            funding,
        } => emit_attacker(&file, &function, contract, &out, max_reentry, funding),
        Command::Simulate {
            genesis,
            script,
            gas_model,
            trace_dir,
        } => simulate(&genesis, &script, gas_model, trace_dir),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FAILED)
        }
    }
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use syncsec::fixtures::{fixture_fig1, fixture_fig2};
use syncsec::format::{NdiWitnessDoc, NdsWitnessDoc, ResDoc};
use syncsec::ndi::{check_ndi_with, ndi_witness_replay, NdiLimits, NdiVerdict};
use syncsec::nds::{check_nds, verify_nds_witness, NdsLimits, NdsVerdict};
use syncsec::oracle::{brute_ndi, brute_nds, brute_res, OracleVerdict};
use syncsec::random::{random_machine, random_small_machine, Envelope, MachineParams};
use syncsec::reductions::{nfa_to_machine, peek_to_machine, Nfa, PeekInstance};
use syncsec::res::{check_res_report, ResVerdict};
use syncsec::{Machine, MachineDef};

const SATISFIES: u8 = 0;
const VIOLATES: u8 = 1;
const INPUT_ERROR: u8 = 2;
const RESOURCE_LIMIT: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "syncsec", version, about = "Information-flow checks for synchronous two-agent machines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide a property of a machine file
    Check(CheckArgs),
    /// Report every well-formedness problem in a machine file
    Validate { file: PathBuf },
    /// Print a machine built from a source file, a seed or a fixture
    #[command(subcommand)]
    Gen(GenCommand),
    /// Compare a checker with its brute-force oracle
    Oracle(OracleArgs),
    /// Check a witness against a machine; exit 0 when it demonstrates a violation
    Replay {
        property: WitnessKind,
        machine: PathBuf,
        /// Bare witness or the structured output of `check --witness`
        witness: PathBuf,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Property {
    Ndi,
    Nds,
    Res,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum WitnessKind {
    Ndi,
    Nds,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long, short)]
    property: Property,
    /// Print a witness for a violation, or the partition for res
    #[arg(long)]
    witness: bool,
    /// Cap on visited search states (ignored by res)
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    limits: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Include wall-clock time in the statistics
    #[arg(long)]
    timing: bool,
    file: PathBuf,
}

#[derive(Subcommand, Debug)]
enum GenCommand {
    /// Machine that violates NDI iff the automaton is not universal
    Nfa { file: PathBuf },
    /// Machine that violates NDS iff player 1 wins the game
    Peek { file: PathBuf },
    /// Random input-enabled machine
    Random {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..=4096))]
        states: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..=64))]
        h_actions: u64,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..=64))]
        l_actions: u64,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..=64))]
        observations: u64,
    },
    /// One of the built-in example machines
    Fixture { name: FixtureName },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FixtureName {
    Fig1,
    Fig2,
}

#[derive(Args, Debug)]
struct OracleArgs {
    property: Property,
    /// Number of random machines
    #[arg(long, default_value_t = 200)]
    count: u64,
    /// First seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Search horizon for the ndi and nds oracles
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=64))]
    depth: Option<u64>,
    /// Also run both built-in fixtures
    #[arg(long)]
    fixtures: bool,
    /// Negate the checker's verdicts, to see the harness fail
    #[arg(long)]
    inject_fault: bool,
    /// Machine files to include
    files: Vec<PathBuf>,
}

/// Exit status plus the message printed on stderr.
struct Failure(u8, String);

type CmdResult = Result<u8, Failure>;

fn input_error(msg: impl Into<String>) -> Failure {
    Failure(INPUT_ERROR, msg.into())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn load_machine(path: &Path) -> Result<Machine, Failure> {
    let def: MachineDef = read_json(path)?;
    Machine::from_def(&def).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn print_machine(m: &Machine) -> CmdResult {
    let text = serde_json::to_string_pretty(&m.to_def()).expect("machine serializes");
    println!("{text}");
    Ok(SATISFIES)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check(args) => cmd_check(&args),
        Command::Validate { file } => cmd_validate(&file),
        Command::Gen(g) => cmd_gen(g),
        Command::Oracle(args) => cmd_oracle(&args),
        Command::Replay {
            property,
            machine,
            witness,
        } => cmd_replay(property, &machine, &witness),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("syncsec: {msg}");
            ExitCode::from(code)
        }
    }
}

struct Outcome {
    verdict: &'static str,
    code: u8,
    visited: Option<usize>,
    witness: Option<Value>,
    detail: Option<String>,
}

fn cmd_check(args: &CheckArgs) -> CmdResult {
    let m = load_machine(&args.file)?;
    let cap = args.limits.map(|l| usize::try_from(l).unwrap_or(usize::MAX));
    let start = Instant::now();
    let out = match args.property {
        Property::Ndi => {
            let limits = cap.map_or_else(NdiLimits::default, |max_visited| NdiLimits { max_visited });
            match check_ndi_with(&m, &limits) {
                Ok(r) => match r.verdict {
                    NdiVerdict::Satisfies => outcome("satisfies", SATISFIES, Some(r.visited), None),
                    NdiVerdict::Violates(w) => {
                        let doc = NdiWitnessDoc::from_witness(&m, &w);
                        outcome("violates", VIOLATES, Some(r.visited), Some(json!(doc)))
                    }
                },
                Err(e) => exceeded(None, e.to_string()),
            }
        }
        Property::Nds => {
            let limits = cap.map_or_else(NdsLimits::default, NdsLimits::with_max_visited);
            let r = check_nds(&m, &limits);
            match r.verdict {
                NdsVerdict::Satisfies => outcome("satisfies", SATISFIES, Some(r.visited), None),
                NdsVerdict::Violates(w) => {
                    let doc = NdsWitnessDoc::from_witness(&m, &w);
                    outcome("violates", VIOLATES, Some(r.visited), Some(json!(doc)))
                }
                NdsVerdict::ResourceExceeded(d) => exceeded(Some(r.visited), d),
            }
        }
        Property::Res => {
            let r = check_res_report(&m);
            let doc = json!(ResDoc::from_verdict(&m, &r.verdict));
            match r.verdict {
                ResVerdict::Satisfies(_) => outcome("satisfies", SATISFIES, None, Some(doc)),
                ResVerdict::Violates { .. } => outcome("violates", VIOLATES, None, Some(doc)),
            }
        }
    };
    let elapsed = start.elapsed();
    let name = property_name(args.property);
    match args.format {
        Format::Structured => {
            let mut stats = serde_json::Map::new();
            if let Some(v) = out.visited {
                stats.insert("visited".into(), json!(v));
            }
            if args.timing {
                stats.insert("elapsed_ms".into(), json!(elapsed.as_secs_f64() * 1e3));
            }
            let mut doc = json!({
                "property": name,
                "verdict": out.verdict,
                "statistics": stats,
            });
            if args.witness {
                doc["witness"] = out.witness.clone().unwrap_or(Value::Null);
            }
            if let Some(d) = &out.detail {
                doc["detail"] = json!(d);
            }
            println!("{}", serde_json::to_string_pretty(&doc).expect("report serializes"));
        }
        Format::Text => {
            println!("{name}: {}", out.verdict);
            if let Some(d) = &out.detail {
                println!("detail: {d}");
            }
            if let Some(v) = out.visited {
                println!("visited: {v}");
            }
            if args.timing {
                println!("elapsed: {:.3} ms", elapsed.as_secs_f64() * 1e3);
            }
            if args.witness {
                if let Some(w) = &out.witness {
                    print_witness_text(w);
                }
            }
        }
    }
    Ok(out.code)
}

fn outcome(verdict: &'static str, code: u8, visited: Option<usize>, witness: Option<Value>) -> Outcome {
    Outcome {
        verdict,
        code,
        visited,
        witness,
        detail: None,
    }
}

fn exceeded(visited: Option<usize>, detail: String) -> Outcome {
    Outcome {
        verdict: "resource-exceeded",
        code: RESOURCE_LIMIT,
        visited,
        witness: None,
        detail: Some(detail),
    }
}

fn property_name(p: Property) -> &'static str {
    match p {
        Property::Ndi => "ndi",
        Property::Nds => "nds",
        Property::Res => "res",
    }
}

fn words(v: &Value) -> String {
    v.as_array()
        .map(|xs| xs.iter().filter_map(Value::as_str).collect::<Vec<_>>().join(" "))
        .unwrap_or_default()
}

fn print_witness_text(w: &Value) {
    if let Some(alpha) = w.get("alpha") {
        println!("H actions: {}", words(alpha));
        println!("L view: {}", words(&w["view"]));
    } else if let Some(beta) = w.get("beta") {
        println!("excluded L view: {}", words(beta));
        for (step, level) in w["strategy"].as_array().into_iter().flatten().enumerate() {
            for entry in level.as_array().into_iter().flatten() {
                println!(
                    "step {step}: {{{}}} -> {}",
                    words(&entry["knowledge"]).replace(' ', ","),
                    entry["action"].as_str().unwrap_or_default()
                );
            }
        }
    } else if let Some(c) = w.get("counterexample") {
        println!(
            "state {}: H actions {} and {} differ under L action {}",
            c["state"].as_str().unwrap_or_default(),
            c["a1"].as_str().unwrap_or_default(),
            c["a2"].as_str().unwrap_or_default(),
            c["a3"].as_str().unwrap_or_default()
        );
    } else if let Some(blocks) = w.get("blocks") {
        for b in blocks.as_array().into_iter().flatten() {
            println!("block: {}", words(b));
        }
    }
}

fn cmd_validate(path: &Path) -> CmdResult {
    let def: MachineDef = read_json(path)?;
    let report = syncsec::model::validate_machine(&def);
    if report.is_empty() {
        println!("valid: {} states", def.states.len());
        return Ok(SATISFIES);
    }
    for v in &report.violations {
        println!("{:?}: {}", v.kind, v.element);
    }
    Ok(INPUT_ERROR)
}

fn cmd_gen(g: GenCommand) -> CmdResult {
    match g {
        GenCommand::Nfa { file } => {
            let a: Nfa = read_json(&file)?;
            let m = nfa_to_machine(&a).map_err(|e| input_error(format!("{}: {e}", file.display())))?;
            print_machine(&m)
        }
        GenCommand::Peek { file } => {
            let g: PeekInstance = read_json(&file)?;
            let m = peek_to_machine(&g).map_err(|e| input_error(format!("{}: {e}", file.display())))?;
            print_machine(&m)
        }
        GenCommand::Random {
            states,
            seed,
            h_actions,
            l_actions,
            observations,
        } => {
            let p = MachineParams::new(
                states as usize,
                h_actions as usize,
                l_actions as usize,
                observations as usize,
            );
            print_machine(&random_machine(&p, seed))
        }
        GenCommand::Fixture { name } => print_machine(&match name {
            FixtureName::Fig1 => fixture_fig1(),
            FixtureName::Fig2 => fixture_fig2(),
        }),
    }
}

/// Largest machines each oracle accepts.
fn oracle_envelope(p: Property) -> Envelope {
    match p {
        Property::Ndi => Envelope {
            max_states: 3,
            max_h: 2,
            max_l: 2,
            max_obs: 2,
        },
        Property::Res => Envelope {
            max_states: 4,
            max_h: 2,
            max_l: 2,
            max_obs: 2,
        },
        Property::Nds => Envelope {
            max_states: 2,
            max_h: 2,
            max_l: 1,
            max_obs: 2,
        },
    }
}

fn within(m: &Machine, env: &Envelope) -> bool {
    m.num_states() <= env.max_states
        && m.num_h_actions() <= env.max_h
        && m.num_l_actions() <= env.max_l
        && m.num_observations() <= env.max_obs
}

/// Checker and oracle verdicts (true = satisfies) on one machine.
fn paired(p: Property, m: &Machine, depth: Option<usize>) -> Result<(bool, bool), Failure> {
    let cap = 1 << 22;
    let limit = |e: syncsec::ResourceExceeded| Failure(RESOURCE_LIMIT, e.to_string());
    match p {
        Property::Ndi => {
            let fast = check_ndi_with(m, &NdiLimits::default())
                .map_err(limit)?
                .verdict
                .is_satisfied();
            let d = depth.unwrap_or(m.num_states() << m.num_states());
            let slow = brute_ndi(m, d, cap).map_err(limit)?;
            Ok((fast, slow == OracleVerdict::Satisfies))
        }
        Property::Nds => {
            let d = depth.unwrap_or(3);
            let limits = NdsLimits {
                max_depth: Some(d),
                ..NdsLimits::default()
            };
            let fast = match check_nds(m, &limits).verdict {
                NdsVerdict::Satisfies => true,
                NdsVerdict::Violates(_) => false,
                NdsVerdict::ResourceExceeded(e) => return Err(Failure(RESOURCE_LIMIT, e)),
            };
            let slow = brute_nds(m, d, cap).map_err(limit)?;
            Ok((fast, slow == OracleVerdict::Satisfies))
        }
        Property::Res => {
            let fast = matches!(check_res_report(m).verdict, ResVerdict::Satisfies(_));
            let slow = brute_res(m, cap).map_err(limit)?.verdict;
            Ok((fast, slow == OracleVerdict::Satisfies))
        }
    }
}

fn cmd_oracle(args: &OracleArgs) -> CmdResult {
    let env = oracle_envelope(args.property);
    let depth = args.depth.map(|d| d as usize);
    let mut cases: Vec<(String, Machine)> = Vec::new();
    for f in &args.files {
        let m = load_machine(f)?;
        if !within(&m, &env) {
            return Err(input_error(format!(
                "{}: outside the {} oracle envelope ({} states, {} H actions, {} L actions, {} observations at most)",
                f.display(),
                property_name(args.property),
                env.max_states,
                env.max_h,
                env.max_l,
                env.max_obs
            )));
        }
        cases.push((f.display().to_string(), m));
    }
    if args.fixtures {
        // the fixtures exceed the small envelopes but stay cheap
        cases.push(("fig1".into(), fixture_fig1()));
        cases.push(("fig2".into(), fixture_fig2()));
    }
    for seed in args.seed..args.seed.saturating_add(args.count) {
        cases.push((format!("seed {seed}"), random_small_machine(&env, seed)));
    }
    let mut disagreements = Vec::new();
    for (name, m) in &cases {
        let (mut fast, slow) = paired(args.property, m, depth)?;
        if args.inject_fault {
            fast = !fast;
        }
        if fast != slow {
            disagreements.push(name.as_str());
        }
    }
    println!(
        "{}: {} machines, {} disagreements",
        property_name(args.property),
        cases.len(),
        disagreements.len()
    );
    for d in &disagreements {
        println!("disagreement: {d}");
    }
    Ok(if disagreements.is_empty() { SATISFIES } else { VIOLATES })
}

fn cmd_replay(kind: WitnessKind, machine: &Path, witness: &Path) -> CmdResult {
    let m = load_machine(machine)?;
    let mut doc: Value = read_json(witness)?;
    if let Some(w) = doc.get_mut("witness") {
        doc = w.take();
    }
    let bad = |e: String| input_error(format!("{}: {e}", witness.display()));
    let valid = match kind {
        WitnessKind::Ndi => {
            let d: NdiWitnessDoc = serde_json::from_value(doc).map_err(|e| bad(e.to_string()))?;
            let w = d.to_witness(&m).map_err(|e| bad(e.to_string()))?;
            ndi_witness_replay(&m, &w).map_err(|e| bad(e.to_string()))?
        }
        WitnessKind::Nds => {
            let d: NdsWitnessDoc = serde_json::from_value(doc).map_err(|e| bad(e.to_string()))?;
            let w = d.to_witness(&m).map_err(|e| bad(e.to_string()))?;
            verify_nds_witness(&m, &w).map_err(|e| bad(e.to_string()))?
        }
    };
    println!("{}", if valid { "witness confirmed" } else { "witness rejected" });
    Ok(if valid { SATISFIES } else { VIOLATES })
}

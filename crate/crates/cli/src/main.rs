use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use horn_core::analysis::{
    certify_productive, check_non_overlapping, probe_productivity, ProbeResult, ProductivityCertificate,
};
use horn_core::frontend::{
    parse_atom, parse_formula, parse_program, parse_proof, proved_doc, replay_document, result_doc, ResultDoc,
    TraceDocument, SCHEMA_VERSION,
};
use horn_core::realizability::{transform_program, ProofOutcome, ProofSearch};
use horn_core::reduction::DEFAULT_TM_FUEL;
use horn_core::typecheck::check_clause_proof;
use horn_core::{solve, Outcome, Program, SearchConfig, Strategy};

const EXIT_OK: u8 = 0;
const EXIT_NO_ANSWER: u8 = 1;
const EXIT_FUEL: u8 = 2;
const EXIT_USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "horn", version, about = "Horn-clause resolution with proof extraction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a query.
    Solve(SolveArgs),
    /// Print the program with witness arguments added.
    Transform {
        #[arg(long)]
        program: PathBuf,
    },
    /// Check a proof term against a goal or clause formula.
    Check {
        #[arg(long)]
        program: PathBuf,
        #[arg(long)]
        proof: String,
        /// `A`, `A <= B1, ..., Bn` or `B1, ..., Bn => A`.
        #[arg(long)]
        goal: String,
    },
    /// Report head overlaps and a productivity certificate.
    Analyze(AnalyzeArgs),
    /// Replay a JSON trace produced by `solve --json`.
    Replay {
        #[arg(long)]
        program: PathBuf,
        #[arg(long)]
        trace: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Unif,
    Tm,
    Struct,
}

#[derive(Clone, Copy, ValueEnum)]
enum SearchArg {
    Dfs,
    Iddfs,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    program: PathBuf,
    #[arg(long)]
    query: String,
    /// Defaults to `unif`, or to `struct` with `--with-proof`.
    #[arg(long, value_enum)]
    strategy: Option<StrategyArg>,
    /// Solve on the transformed program and extract a checked proof.
    #[arg(long)]
    with_proof: bool,
    /// Report every outcome instead of stopping at the first answer.
    #[arg(long)]
    all: bool,
    #[arg(long)]
    fuel: Option<usize>,
    #[arg(long)]
    tm_fuel: Option<usize>,
    #[arg(long, value_enum, default_value = "iddfs")]
    search: SearchArg,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    program: PathBuf,
    /// Analyze the transformed program instead.
    #[arg(long)]
    transformed: bool,
    /// Also run term-matching normalization on this query.
    #[arg(long)]
    probe: Option<String>,
    #[arg(long, default_value_t = DEFAULT_TM_FUEL)]
    tm_fuel: usize,
    #[arg(long)]
    json: bool,
}

/// A failure that ends the run with the given status.
struct Failure(u8, String);

fn usage(msg: impl Into<String>) -> Failure {
    Failure(EXIT_USAGE, msg.into())
}

fn load_program(path: &Path) -> Result<Program, Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    parse_program(&text).map_err(|e| usage(format!("{}:{e}", path.display())))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    let result = match cli.command {
        Command::Solve(args) => run_solve(&args),
        Command::Transform { program } => run_transform(&program),
        Command::Check { program, proof, goal } => run_check(&program, &proof, &goal),
        Command::Analyze(args) => run_analyze(&args),
        Command::Replay { program, trace } => run_replay(&program, &trace),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("horn: {msg}");
            ExitCode::from(code)
        }
    }
}

fn run_solve(args: &SolveArgs) -> Result<u8, Failure> {
    let program = load_program(&args.program)?;
    let query = parse_atom(&args.query).map_err(|e| usage(format!("query: {e}")))?;
    program.check_atom(&query).map_err(|e| usage(format!("query: {e}")))?;
    let strategy = match args.strategy {
        Some(StrategyArg::Unif) => Strategy::Unif,
        Some(StrategyArg::Tm) => Strategy::Tm,
        Some(StrategyArg::Struct) => Strategy::Struct,
        // the transformed program is productive and non-overlapping
        None if args.with_proof => Strategy::Struct,
        None => Strategy::Unif,
    };
    let mut cfg = SearchConfig::new(strategy);
    if let SearchArg::Dfs = args.search {
        cfg = cfg.dfs();
    }
    if let Some(n) = args.fuel {
        cfg = cfg.with_fuel(n);
    }
    if let Some(n) = args.tm_fuel {
        cfg = cfg.with_tm_fuel(n);
    }

    let (results, lifted) = if args.with_proof {
        let search = ProofSearch::new(&program, &query).map_err(|e| usage(e.to_string()))?;
        let docs = collect(search.run(&cfg).map(|o| match o {
            ProofOutcome::Proved(p) => proved_doc(&p),
            ProofOutcome::Other(o) => result_doc(&o),
        }), args.all);
        (docs, Some(search.lifted.to_string()))
    } else {
        (collect(solve(&program, &query, &cfg).map(|o: Outcome| result_doc(&o)), args.all), None)
    };

    let code = exit_status(&results);
    let doc = TraceDocument { schema: SCHEMA_VERSION, strategy, query: query.to_string(), lifted_query: lifted, results };
    if args.json {
        println!("{}", serde_json::to_string_pretty(&doc).expect("trace documents serialize"));
    } else {
        print!("{doc}");
    }
    Ok(code)
}

/// Without `all`, keeps the first success alone, or every outcome when none
/// succeeds.
fn collect(outcomes: impl Iterator<Item = ResultDoc>, all: bool) -> Vec<ResultDoc> {
    let mut kept = Vec::new();
    for r in outcomes {
        if !all && matches!(r, ResultDoc::Success { .. }) {
            return vec![r];
        }
        kept.push(r);
    }
    kept
}

fn exit_status(results: &[ResultDoc]) -> u8 {
    if results.iter().any(|r| matches!(r, ResultDoc::Success { .. })) {
        EXIT_OK
    } else if results.iter().any(|r| matches!(r, ResultDoc::FuelExhausted { .. })) {
        EXIT_FUEL
    } else {
        EXIT_NO_ANSWER
    }
}

fn run_transform(path: &Path) -> Result<u8, Failure> {
    let program = load_program(path)?;
    let transformed = transform_program(&program).map_err(|e| usage(e.to_string()))?;
    print!("{transformed}");
    Ok(EXIT_OK)
}

fn run_check(path: &Path, proof: &str, goal: &str) -> Result<u8, Failure> {
    let program = load_program(path)?;
    let e = parse_proof(proof).map_err(|e| usage(format!("proof: {e}")))?;
    let f = parse_formula(goal).map_err(|e| usage(format!("goal: {e}")))?;
    match check_clause_proof(&program, &e, &f) {
        Ok(checked) => {
            println!("accepted: {e} : {f}");
            for i in &checked.instances {
                println!("  {i}");
            }
            Ok(EXIT_OK)
        }
        Err(err) => {
            println!("rejected: {err}");
            Ok(EXIT_NO_ANSWER)
        }
    }
}

fn run_analyze(args: &AnalyzeArgs) -> Result<u8, Failure> {
    let mut program = load_program(&args.program)?;
    if args.transformed {
        program = transform_program(&program).map_err(|e| usage(e.to_string()))?;
    }
    let probe = match &args.probe {
        Some(q) => {
            let a = parse_atom(q).map_err(|e| usage(format!("probe: {e}")))?;
            program.check_atom(&a).map_err(|e| usage(format!("probe: {e}")))?;
            Some((a.to_string(), probe_productivity(&program, &a, args.tm_fuel)))
        }
        None => None,
    };
    let overlap = check_non_overlapping(&program);
    let productivity = certify_productive(&program);

    if args.json {
        let violations: Vec<_> = overlap
            .violations
            .iter()
            .map(|o| json!({ "first": o.first.as_str(), "second": o.second.as_str(), "instance": o.instance.to_string() }))
            .collect();
        let productivity = match &productivity {
            ProductivityCertificate::MeasureFound { positions } => json!({ "status": "measure_found", "positions": positions }),
            ProductivityCertificate::Unknown { reason } => json!({ "status": "unknown", "reason": reason }),
            ProductivityCertificate::ProbedDivergent { query, steps } => {
                json!({ "status": "probed_divergent", "query": query, "steps": steps })
            }
        };
        let probe = probe.as_ref().map(|(q, r)| match r {
            ProbeResult::Terminated { steps } => json!({ "query": q, "status": "terminated", "steps": steps }),
            ProbeResult::ProbedDivergent { steps } => json!({ "query": q, "status": "probed_divergent", "steps": steps }),
        });
        let self_overlaps: Vec<&str> = overlap.self_overlaps.iter().map(|s| s.as_str()).collect();
        let doc = json!({
            "overlap": { "certified": overlap.is_certified(), "violations": violations, "self_overlaps": self_overlaps },
            "productivity": productivity,
            "probe": probe,
        });
        println!("{}", serde_json::to_string_pretty(&doc).expect("json values serialize"));
    } else {
        if overlap.is_certified() {
            println!("non-overlapping");
        } else {
            for o in &overlap.violations {
                println!("overlap: {} and {} at {}", o.first, o.second, o.instance);
            }
        }
        match &productivity {
            ProductivityCertificate::MeasureFound { positions } => {
                let parts: Vec<String> = positions.iter().map(|(k, p)| format!("{k} at {}", p + 1)).collect();
                println!("productive: decreasing argument {}", parts.join(", "));
            }
            ProductivityCertificate::Unknown { reason } => println!("productivity unknown: {reason}"),
            ProductivityCertificate::ProbedDivergent { query, steps } => {
                println!("not productive: {query} diverges after {steps} steps")
            }
        }
        match &probe {
            Some((q, ProbeResult::Terminated { steps })) => println!("probe {q}: normal form after {steps} steps"),
            Some((q, ProbeResult::ProbedDivergent { steps })) => {
                println!("probe {q}: no normal form within {steps} steps")
            }
            None => {}
        }
    }
    let diverged = matches!(probe, Some((_, ProbeResult::ProbedDivergent { .. })));
    Ok(if overlap.is_certified() && productivity.is_measure() && !diverged { EXIT_OK } else { EXIT_NO_ANSWER })
}

fn run_replay(program: &Path, trace: &Path) -> Result<u8, Failure> {
    let program = load_program(program)?;
    let text = fs::read_to_string(trace).map_err(|e| usage(format!("{}: {e}", trace.display())))?;
    let doc: TraceDocument =
        serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", trace.display())))?;
    match replay_document(&program, &doc) {
        Ok(rebuilt) if rebuilt == doc => {
            println!("replayed {} results", doc.results.len());
            Ok(EXIT_OK)
        }
        Ok(_) => {
            println!("trace differs from its replay");
            Ok(EXIT_NO_ANSWER)
        }
        Err(e) => {
            println!("replay failed: {e}");
            Ok(EXIT_NO_ANSWER)
        }
    }
}

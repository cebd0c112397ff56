use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use tockta::csp::{parse, print_spec, CspSpec};
use tockta::exec::{traces_ta, traces_ta_prime};
use tockta::harness::{check_spec, generate_corpus, prove_stop_base, ComparisonReport, Verdict, DEFAULT_DEPTH};
use tockta::semantics::traces_tock_csp;
use tockta::translate::assemble;
use tockta::xml;

const EXIT_MISMATCH: u8 = 1;
const EXIT_ERROR: u8 = 2;

#[derive(Parser)]
#[command(name = "tockta", version, about = "Translate tock-CSP into UPPAAL timed automata and compare traces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Translate a tock-CSP file into an UPPAAL XML network.
    Translate {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Print the bounded traces of a model, one per line.
    #[command(subcommand)]
    Traces(TracesCommand),
    /// Compare the traces of a tock-CSP file with those of its translation.
    Check {
        input: PathBuf,
        #[command(flatten)]
        depth: Depth,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Work with the generated corpus.
    #[command(subcommand)]
    Corpus(CorpusCommand),
    /// Check the STOP base case for every depth up to `--max-n`.
    ProveStop {
        #[arg(long, default_value_t = 20)]
        max_n: usize,
    },
}

#[derive(Subcommand)]
enum TracesCommand {
    /// Traces of a tock-CSP file.
    Csp {
        input: PathBuf,
        #[command(flatten)]
        depth: Depth,
    },
    /// Traces of an UPPAAL XML network.
    Ta {
        input: PathBuf,
        #[command(flatten)]
        depth: Depth,
        /// Keep start, finish, sync and other coordinating actions.
        #[arg(long)]
        keep_coordinating: bool,
    },
}

#[derive(Subcommand)]
enum CorpusCommand {
    /// Check every corpus entry in parallel.
    Run {
        #[command(flatten)]
        depth: Depth,
        /// Directory receiving one `.tcsp` and one `.json` file per entry.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Depth {
    /// Maximum trace length.
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    depth: usize,
}

fn read_spec(path: &Path) -> Result<CspSpec, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn print_report(report: &ComparisonReport, json: bool) {
    if json {
        println!("{}", serde_json::to_string_pretty(report).expect("reports serialise"));
        return;
    }
    println!("{} depth {}: {:?} ({} ms)", report.id, report.depth, report.verdict, report.millis);
    for w in &report.witnesses {
        println!("  only in {:?}: {}", w.side, w.trace);
    }
}

fn run(cli: Cli) -> Result<u8, String> {
    match cli.command {
        Command::Translate { input, output } => {
            let spec = read_spec(&input)?;
            let net = assemble(&spec).map_err(|e| e.to_string())?;
            fs::write(&output, xml::emit(&net)).map_err(|e| format!("{}: {e}", output.display()))?;
            println!("{}: {} automata, {} channels", output.display(), net.automata.len(), net.channels.len());
            Ok(0)
        }
        Command::Traces(TracesCommand::Csp { input, depth }) => {
            let spec = read_spec(&input)?;
            let traces = traces_tock_csp(&spec, depth.depth).map_err(|e| e.to_string())?;
            print!("{}", traces.to_canonical_text());
            Ok(0)
        }
        Command::Traces(TracesCommand::Ta { input, depth, keep_coordinating }) => {
            let text = fs::read_to_string(&input).map_err(|e| format!("{}: {e}", input.display()))?;
            let net = xml::load(&text).map_err(|e| format!("{}: {e}", input.display()))?;
            let traces = if keep_coordinating {
                traces_ta_prime(&net, depth.depth)
            } else {
                traces_ta(&net, depth.depth)
            }
            .map_err(|e| e.to_string())?;
            print!("{}", traces.to_canonical_text());
            Ok(0)
        }
        Command::Check { input, depth, json } => {
            let spec = read_spec(&input)?;
            let report = check_spec(&spec, depth.depth).map_err(|e| e.to_string())?;
            print_report(&report, json);
            Ok(if report.verdict.passed() { 0 } else { EXIT_MISMATCH })
        }
        Command::Corpus(CorpusCommand::Run { depth, out }) => run_corpus(depth.depth, out.as_deref()),
        Command::ProveStop { max_n } => {
            let proof = prove_stop_base(max_n).map_err(|e| e.to_string())?;
            print!("{}", proof.report());
            Ok(if proof.passed() { 0 } else { EXIT_MISMATCH })
        }
    }
}

fn run_corpus(depth: usize, out: Option<&Path>) -> Result<u8, String> {
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    }
    let corpus = generate_corpus();
    let results: Vec<Result<ComparisonReport, String>> = corpus
        .par_iter()
        .map(|entry| {
            let mut report = check_spec(&entry.spec, depth).map_err(|e| format!("{}: {e}", entry.id))?;
            report.id = entry.id.clone();
            if let Some(dir) = out {
                let write = |name: String, body: String| {
                    let path = dir.join(name);
                    fs::write(&path, body).map_err(|e| format!("{}: {e}", path.display()))
                };
                write(format!("{}.tcsp", entry.id), print_spec(&entry.spec))?;
                write(format!("{}.json", entry.id), serde_json::to_string_pretty(&report).expect("reports serialise"))?;
            }
            Ok(report)
        })
        .collect();

    let mut failures = 0;
    let mut errors = 0;
    let mut millis = 0;
    for result in &results {
        match result {
            Ok(report) => {
                millis += report.millis;
                if report.verdict != Verdict::EqualAtStage1 {
                    print_report(report, false);
                }
                if !report.verdict.passed() {
                    failures += 1;
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                errors += 1;
            }
        }
    }
    println!(
        "{} specs at depth {depth}: {} passed, {failures} mismatched, {errors} errors ({millis} ms of checking)",
        results.len(),
        results.len() - failures - errors
    );
    Ok(if errors > 0 {
        EXIT_ERROR
    } else if failures > 0 {
        EXIT_MISMATCH
    } else {
        0
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

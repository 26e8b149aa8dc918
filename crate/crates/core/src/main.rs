use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use slc::automaton::{dump, CompiledSpec};
use slc::diag::Diagnostic;
use slc::engine::{Options, Session, DEFAULT_MAX_STEPS};
use slc::term::Term;
use slc::term_io::{parse_term, pretty_term_plain};

const STACK_SIZE: usize = 1 << 30;

#[derive(Parser)]
#[command(name = "slc", version, about = "Check, compile and run SL specifications of syntactic theories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and typecheck a specification
    Check {
        spec: PathBuf,
        /// Print the inferred types of dynamic and context definitions
        #[arg(long)]
        types: bool,
    },
    /// Evaluate the term in INPUT to a normal form, printing the trace
    Run {
        spec: PathBuf,
        input: PathBuf,
        /// Shuffle alternatives with this seed instead of textual order
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
        max_steps: usize,
        /// Print only the final term
        #[arg(long)]
        quiet: bool,
    },
    /// Print the compiled automata
    #[command(alias = "dump-automaton")]
    Dump { spec: PathBuf },
    /// Print every one-step successor of the term in INPUT
    Enumerate { spec: PathBuf, input: PathBuf },
}

struct Failed(u8);

fn read(path: &Path) -> Result<String, Failed> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("{}: error: {e}", path.display());
        Failed(1)
    })
}

fn report(path: &Path, diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("{}", d.render(&path.display().to_string()));
    }
}

fn load(path: &Path) -> Result<CompiledSpec, Failed> {
    let src = read(path)?;
    match slc::load(&src) {
        Ok((compiled, warnings)) => {
            report(path, &warnings);
            Ok(compiled)
        }
        Err(diags) => {
            report(path, &diags);
            Err(Failed(1))
        }
    }
}

fn load_term(compiled: &CompiledSpec, path: &Path) -> Result<Term, Failed> {
    let src = read(path)?;
    let t = parse_term(&compiled.spec().signature, &src).map_err(|d| {
        report(path, &[d]);
        Failed(1)
    })?;
    let start = compiled.checked.start_type();
    slc::term_io::check_term(&compiled.spec().signature, &t, &start).map_err(|e| {
        eprintln!("{}: error: input term: {e}", path.display());
        Failed(1)
    })?;
    Ok(t)
}

fn runtime_error(e: slc::meta_eval::RuntimeError) -> Failed {
    eprintln!("error: {e}");
    Failed(1)
}

fn execute(cli: Cli) -> Result<(), Failed> {
    match cli.command {
        Command::Check { spec, types } => {
            let compiled = load(&spec)?;
            if types {
                let checked = &compiled.checked;
                for (name, ty) in &checked.dynamic_types {
                    println!("dynamic {name} : {ty}");
                }
                for (name, ty) in &checked.context_types {
                    println!("context {name} : {ty}");
                }
            }
            Ok(())
        }
        Command::Run { spec, input, seed, max_steps, quiet } => {
            let compiled = load(&spec)?;
            let t = load_term(&compiled, &input)?;
            let opts = Options { seed, ..Options::default() };
            let trace = Session::new(&compiled, &opts).evaluate(&t, max_steps).map_err(runtime_error)?;
            if quiet {
                println!("{}", pretty_term_plain(trace.last()));
            } else {
                print!("{}", trace.render());
            }
            if trace.limit_reached {
                eprintln!("stopped after {max_steps} steps");
                return Err(Failed(2));
            }
            Ok(())
        }
        Command::Dump { spec } => {
            let compiled = load(&spec)?;
            print!("{}", dump(&compiled));
            Ok(())
        }
        Command::Enumerate { spec, input } => {
            let compiled = load(&spec)?;
            let t = load_term(&compiled, &input)?;
            let found = Session::new(&compiled, &Options::default()).enumerate_steps(&t).map_err(runtime_error)?;
            let mut lines: Vec<String> = found
                .into_iter()
                .map(|(t, labels)| format!("{}\tby {}", pretty_term_plain(&t), labels.join(",")))
                .collect();
            lines.sort();
            lines.dedup();
            for l in lines {
                println!("{l}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let worker = std::thread::Builder::new().stack_size(STACK_SIZE).spawn(move || execute(cli));
    match worker.map(|h| h.join()) {
        Ok(Ok(Ok(()))) => ExitCode::SUCCESS,
        Ok(Ok(Err(Failed(code)))) => ExitCode::from(code),
        _ => {
            eprintln!("error: interpreter thread failed");
            ExitCode::from(1)
        }
    }
}

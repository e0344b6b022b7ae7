//! Command-line front end.
//!
//! Exit codes: 0 when the identity holds, the proof is valid, or the
//! verification confirms its claim; 1 when a counterexample or witness is
//! found or a proof is invalid; 2 for usage and input errors.

use std::ffi::OsString;
use std::io::Write;
use std::ops::ControlFlow;
use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand};

use crate::magma::{check_identity, load_table, CayleyTable};
use crate::proof::{builtin_script, check_script, parse_script};
use crate::search::{self, Constraint, Structure};
use crate::term::Identity;
use crate::variety::{builtin, classify, subgroupoid_closure, Subset};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FOUND: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "trimedial", about = "Cayley tables, medial identities, model search and proof checking")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check one identity on a table
    Check(CheckArgs),
    /// Report cancellation flags, registry identities and trimediality
    Props {
        #[arg(long)]
        table: PathBuf,
    },
    /// Subgroupoid generated by a set of elements
    Closure {
        #[arg(long)]
        table: PathBuf,
        /// Comma-separated elements, e.g. "0,2"
        #[arg(long)]
        seed: String,
    },
    /// List every table of one order with the given structure
    Enumerate {
        #[arg(long)]
        order: usize,
        #[arg(long)]
        structure: Structure,
        #[arg(long)]
        count_only: bool,
    },
    /// Search orders 1..=max-order for tables meeting identity constraints
    Search(SearchArgs),
    /// Run a verification campaign
    Verify {
        #[command(subcommand)]
        campaign: Campaign,
    },
    /// Check an equational proof script
    Proof {
        #[command(subcommand)]
        source: ProofSource,
    },
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("which").required(true).args(["identity", "name"])))]
pub struct CheckArgs {
    #[arg(long)]
    pub table: PathBuf,
    /// Identity text, e.g. "(x*x)*(y*z) = (x*y)*(x*z)"
    #[arg(long)]
    pub identity: Option<String>,
    /// Registry name: medial, i1, i2, i3, kepka, corollary
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub max_order: usize,
    #[arg(long)]
    pub structure: Structure,
    #[arg(long, value_delimiter = ',')]
    pub satisfies: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub refutes: Vec<String>,
    /// Stop after this many witnesses
    #[arg(long, default_value_t = 10)]
    pub limit: usize,
    /// Print witnesses in canonical form, one per isomorphism class
    #[arg(long)]
    pub canonical: bool,
    /// Worker threads (0 = all cores); output does not depend on it
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

#[derive(Debug, Subcommand)]
pub enum Campaign {
    /// Left-cancellative tables satisfying i2 and i3 must satisfy i1
    Theorem {
        #[arg(long)]
        max_order: usize,
        /// Allow one order beyond the default guard
        #[arg(long)]
        force: bool,
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// i1+i2+i3, kepka, corollary and trimediality agree on quasigroups
    Equivalences {
        #[arg(long)]
        max_order: usize,
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum ProofSource {
    /// Check a script file
    Check { file: PathBuf },
    /// Check a builtin script: theorem, corollary-to-i2, corollary-to-i3
    Builtin { name: String },
}

/// Input problems reported with exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct InputError(String);

fn input<E: std::fmt::Display>(context: impl std::fmt::Display) -> impl FnOnce(E) -> InputError {
    move |e| InputError(format!("{context}: {e}"))
}

fn read_table(path: &PathBuf) -> Result<CayleyTable, InputError> {
    let text = std::fs::read_to_string(path).map_err(input(path.display()))?;
    load_table(&text).map_err(input(path.display()))
}

/// Parse `argv` (program name first), run the command, and return the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                EXIT_USAGE
            } else {
                let _ = out.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<u8, InputError> {
    let io = input("write");
    match command {
        Command::Check(args) => {
            let table = read_table(&args.table)?;
            let id: Identity = match (args.identity, args.name) {
                (Some(text), _) => text.parse().map_err(input("--identity"))?,
                (None, Some(name)) => builtin(&name).map_err(input("--name"))?,
                (None, None) => unreachable!("clap enforces one of --identity/--name"),
            };
            let check = check_identity(&table, &id);
            writeln!(out, "{check}").map_err(io)?;
            Ok(if check.holds() { EXIT_OK } else { EXIT_FOUND })
        }
        Command::Props { table } => {
            let table = read_table(&table)?;
            write!(out, "{}", classify(&table)).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Closure { table, seed } => {
            let table = read_table(&table)?;
            let seed: Subset = seed.parse().map_err(input("--seed"))?;
            let closure = subgroupoid_closure(&table, seed).map_err(input("--seed"))?;
            writeln!(out, "closure: {closure}").map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Enumerate {
            order,
            structure,
            count_only,
        } => {
            let mut write_err = None;
            let mut first = true;
            let count = search::try_enumerate(order, structure, |t| {
                if count_only {
                    return ControlFlow::Continue(());
                }
                let sep = if first { "" } else { "\n" };
                first = false;
                match write!(out, "{sep}{t}") {
                    Ok(()) => ControlFlow::Continue(()),
                    Err(e) => {
                        write_err = Some(e);
                        ControlFlow::Break(())
                    }
                }
            })
            .map_err(input("enumerate"))?;
            if let Some(e) = write_err {
                return Err(input("write")(e));
            }
            if !count_only && count > 0 {
                writeln!(out).map_err(input("write"))?;
            }
            writeln!(out, "count: {count}").map_err(input("write"))?;
            Ok(EXIT_OK)
        }
        Command::Search(args) => {
            let c = Constraint::new(args.structure, &args.satisfies, &args.refutes).map_err(input("search"))?;
            let mut report =
                search::search(args.max_order, &c, Some(args.limit), args.workers).map_err(input("search"))?;
            if args.canonical {
                report.dedup_canonical().map_err(input("search"))?;
            }
            write!(out, "{report}").map_err(io)?;
            Ok(if report.witnesses.is_empty() {
                EXIT_OK
            } else {
                EXIT_FOUND
            })
        }
        Command::Verify { campaign } => match campaign {
            Campaign::Theorem {
                max_order,
                force,
                workers,
            } => {
                let r = search::verify_theorem(max_order, force, workers).map_err(input("verify theorem"))?;
                write!(out, "{r}").map_err(io)?;
                Ok(if r.passed() { EXIT_OK } else { EXIT_FOUND })
            }
            Campaign::Equivalences { max_order, workers } => {
                let r = search::verify_equivalences(max_order, workers).map_err(input("verify equivalences"))?;
                write!(out, "{r}").map_err(io)?;
                Ok(if r.passed() { EXIT_OK } else { EXIT_FOUND })
            }
        },
        Command::Proof { source } => {
            let script = match source {
                ProofSource::Check { file } => {
                    let text = std::fs::read_to_string(&file).map_err(input(file.display()))?;
                    parse_script(&text).map_err(input(file.display()))?
                }
                ProofSource::Builtin { name } => builtin_script(&name).map_err(input("proof builtin"))?,
            };
            let verdict = check_script(&script);
            write!(out, "{verdict}").map_err(io)?;
            Ok(if verdict.is_valid() { EXIT_OK } else { EXIT_FOUND })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (u8, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("trimedial").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_two() {
        let (code, out, err) = run_str(&["check", "--name", "medial"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(out.is_empty());
        assert!(err.contains("Usage"), "{err}");
        let both = ["check", "--table", "t", "--name", "medial", "--identity", "x=x"];
        assert!(run_str(&both).2.contains("cannot be used with"));
        assert_eq!(run_str(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run_str(&[]).0, EXIT_USAGE);
        assert_eq!(run_str(&["enumerate", "--order", "3", "--structure", "loop"]).0, EXIT_USAGE);
    }

    #[test]
    fn input_errors_exit_two() {
        let (code, _, err) = run_str(&["props", "--table", "/nonexistent/table.tbl"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.starts_with("error: /nonexistent/table.tbl"));
        assert_eq!(run_str(&["enumerate", "--order", "9", "--structure", "none"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["proof", "builtin", "lemma"]).0, EXIT_USAGE);
        assert_eq!(
            run_str(&["search", "--max-order", "2", "--structure", "none", "--satisfies", "entropic"]).0,
            EXIT_USAGE
        );
    }

    #[test]
    fn enumerate_output() {
        let (code, out, _) = run_str(&["enumerate", "--order", "2", "--structure", "quasigroup"]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(out, "2\n0 1\n1 0\n\n2\n1 0\n0 1\n\ncount: 2\n");
        let (_, out, _) = run_str(&["enumerate", "--order", "3", "--structure", "left", "--count-only"]);
        assert_eq!(out, "count: 216\n");
    }

    #[test]
    fn proof_builtin() {
        let (code, out, _) = run_str(&["proof", "builtin", "theorem"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.ends_with("valid\n"));
        assert!(out.starts_with("step 1: i3 rev at . with u=(x*z),v=(y*z)\n"), "{out}");
    }

    #[test]
    fn search_output_and_exit_codes() {
        let (code, out, _) = run_str(&["search", "--max-order", "1", "--structure", "none", "--limit", "1"]);
        assert_eq!(code, EXIT_FOUND);
        assert_eq!(out, "order: 1 visited: 1 matched: 1\nexhausted: true\nwitnesses: 1\n\n1\n0\n");
        let (code, out, _) = run_str(&[
            "search",
            "--max-order",
            "3",
            "--structure",
            "left",
            "--satisfies",
            "i2,i3",
            "--refutes",
            "i1",
        ]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("exhausted: true\nwitnesses: 0\n"), "{out}");
    }
}

//! Command-line front end.
//!
//! Exit codes: 0 success, 1 when any error diagnostic was reported, 2 on
//! usage errors. Diagnostics go to standard error; data goes to files or
//! standard output.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::bridge::{decode, encode, DecodeResult};
use crate::diag::{has_errors, Diagnostic};
use crate::dot::to_dot;
use crate::firm::{ConstValue, FirmGraph};
use crate::gxl::{parse_gxl_with_id, serialize_gxl};
use crate::interp::{evaluate, parse_args};
use crate::opt::{optimize, OptimizeOptions, Pass};
use crate::verify::check;

#[derive(Debug, Parser)]
#[command(name = "gxlfirm", version, about = "Verify, optimize and convert GXL-encoded Firm graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a graph and print its diagnostics.
    Verify { input: PathBuf },
    /// Fold constants and simplify control flow.
    Opt {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u32).range(1..))]
        max_iter: u32,
        /// One of fold, dead-blocks, normalize, dead-phis.
        #[arg(long = "disable-pass", value_name = "NAME", value_parser = parse_pass)]
        disable_pass: Vec<Pass>,
        /// Leave Cmp nodes unfolded.
        #[arg(long)]
        no_cmp_fold: bool,
        /// Write a DOT file after each pipeline stage.
        #[arg(long, value_name = "DIR")]
        dot_dir: Option<PathBuf>,
    },
    /// Render a graph as Graphviz DOT.
    Dot {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Decode and re-encode without optimizing.
    Roundtrip {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Interpret a graph on the given arguments.
    Eval {
        input: PathBuf,
        /// Comma-separated values, e.g. `1,-2:Bs,2.5,true`.
        #[arg(long, default_value = "", allow_hyphen_values = true, value_parser = parse_arg_vector)]
        args: ArgVector,
        #[arg(long, default_value_t = 10_000)]
        step_limit: usize,
    },
}

#[derive(Debug, Clone)]
struct ArgVector(Vec<ConstValue>);

fn parse_arg_vector(s: &str) -> Result<ArgVector, String> {
    parse_args(s).map(ArgVector)
}

fn parse_pass(s: &str) -> Result<Pass, String> {
    Pass::from_name(s).ok_or_else(|| {
        let names: Vec<_> = Pass::ALL.iter().map(|p| p.name()).collect();
        format!("unknown pass '{s}' (expected one of {})", names.join(", "))
    })
}

/// Runs the command line `argv` (program name first) against the process's
/// standard streams.
pub fn run(argv: impl IntoIterator<Item = OsString>) -> i32 {
    run_with(argv, &mut io::stdout().lock(), &mut io::stderr().lock())
}

/// Like [`run`] with explicit output streams.
pub fn run_with(argv: impl IntoIterator<Item = OsString>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return e.exit_code();
        }
    };
    let mut session = Session { stdout, stderr, failed: false };
    session.execute(cli.command);
    i32::from(session.failed)
}

struct Session<'a> {
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
    failed: bool,
}

struct Loaded {
    decoded: DecodeResult,
    graph: FirmGraph,
}

impl Session<'_> {
    fn execute(&mut self, command: Command) {
        match command {
            Command::Verify { input } => {
                if let Some(l) = self.load(&input) {
                    self.report(&check(&l.graph));
                }
            }
            Command::Opt { input, output, max_iter, disable_pass, no_cmp_fold, dot_dir } => {
                let options = OptimizeOptions {
                    max_iterations: max_iter as usize,
                    enabled: Pass::ALL.into_iter().filter(|p| !disable_pass.contains(p)).collect(),
                    fold_cmp: !no_cmp_fold,
                    emit_dot_after_each_stage: dot_dir.is_some(),
                };
                self.opt(&input, &output, &options, dot_dir.as_deref());
            }
            Command::Dot { input, output } => {
                if let Some(l) = self.load(&input) {
                    self.write(&output, to_dot(&l.graph).as_bytes());
                }
            }
            Command::Roundtrip { input, output } => {
                if let Some(l) = self.load(&input) {
                    self.emit(&l, &l.graph, &output);
                }
            }
            Command::Eval { input, args, step_limit } => {
                let Some(l) = self.load(&input) else { return };
                let diags: Vec<Diagnostic> = check(&l.graph).into_iter().filter(Diagnostic::is_error).collect();
                if self.report(&diags) {
                    return;
                }
                match evaluate(&l.graph, &args.0, step_limit) {
                    Ok(values) => {
                        let text: Vec<String> = values.iter().map(ToString::to_string).collect();
                        let _ = writeln!(self.stdout, "{}", text.join(","));
                    }
                    Err(e) => self.fail(format!("error: {e}")),
                }
            }
        }
    }

    fn opt(&mut self, input: &Path, output: &Path, options: &OptimizeOptions, dot_dir: Option<&Path>) {
        let Some(l) = self.load(input) else { return };
        if self.report(&check(&l.graph)) {
            return;
        }
        let outcome = optimize(&l.graph, options);
        let failed = self.report(&outcome.diagnostics);
        if let Some(dir) = dot_dir {
            if let Err(e) = std::fs::create_dir_all(dir) {
                self.fail(format!("error: cannot create {}: {e}", dir.display()));
                return;
            }
            for (name, dot) in &outcome.stages {
                self.write(&dir.join(format!("{name}.dot")), dot.as_bytes());
            }
        }
        let after: Vec<Diagnostic> = check(&outcome.graph).into_iter().filter(Diagnostic::is_error).collect();
        if failed || self.report(&after) {
            return;
        }
        self.emit(&l, &outcome.graph, output);
    }

    /// Reads, parses and decodes `path`, reporting every diagnostic.
    fn load(&mut self, path: &Path) -> Option<Loaded> {
        let bytes = match std::fs::read(path) {
            Ok(b) => b,
            Err(e) => {
                self.fail(format!("error: cannot read {}: {e}", path.display()));
                return None;
            }
        };
        let parsed = parse_gxl_with_id(&bytes, &path.display().to_string());
        if self.report(&parsed.diagnostics) {
            return None;
        }
        let mut decoded = decode(parsed.document.as_ref()?);
        if self.report(&decoded.diagnostics) {
            return None;
        }
        let graph = decoded.graph.take()?;
        Some(Loaded { decoded, graph })
    }

    fn emit(&mut self, l: &Loaded, graph: &FirmGraph, output: &Path) {
        let metamodel = l.decoded.metamodel.as_ref().expect("decoded documents have a metamodel");
        let id = l.decoded.object_graph_id.as_deref().unwrap_or("Firm");
        match encode(graph, metamodel, &l.decoded.classname_to_meta_id, id) {
            Ok(doc) => self.write(output, &serialize_gxl(&doc)),
            Err(e) => self.fail(format!("error: {e}")),
        }
    }

    /// Prints diagnostics; true when one of them is an error.
    fn report(&mut self, diags: &[Diagnostic]) -> bool {
        for d in diags {
            let _ = writeln!(self.stderr, "{d}");
        }
        let errors = has_errors(diags);
        self.failed |= errors;
        errors
    }

    fn fail(&mut self, message: String) {
        let _ = writeln!(self.stderr, "{message}");
        self.failed = true;
    }

    fn write(&mut self, path: &Path, bytes: &[u8]) {
        if let Err(e) = write_atomic(path, bytes) {
            self.fail(format!("error: cannot write {}: {e}", path.display()));
        }
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

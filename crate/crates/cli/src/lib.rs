//! The `comodi` command. Each subcommand is a thin composition of library
//! operations; artifacts go to stdout or `-o`, diagnostics to stderr.
//!
//! Exit codes: 0 success, 1 diagnostics about the inputs, 2 usage,
//! 3 environment (files, network, compilers, configuration).

mod assemble;
mod develop;
mod output;
mod repo;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use output::Format;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIAGNOSTICS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ENVIRONMENT: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "comodi", version, about = "Component developer toolchain")]
struct Cli {
    /// Output format for reports and artifacts.
    #[arg(long, value_enum, global = true, default_value_t = Format::Xml)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Grammar tools.
    Grammar {
        #[command(subcommand)]
        command: GrammarCommand,
    },
    /// Extract the interface of a source file.
    Extract(develop::ExtractArgs),
    /// Draft and confirm a component descriptor from an extracted interface.
    Describe(develop::DescribeArgs),
    /// Generate glue code and wiring metadata for a descriptor.
    Glue(develop::GlueArgs),
    /// Pack a component into an archive.
    Pack(develop::PackArgs),
    /// Compile sources into a shared object for one platform.
    Compile(develop::CompileArgs),
    /// Register an archive with a repository.
    Register(repo::RegisterArgs),
    /// Repository server.
    Repo {
        #[command(subcommand)]
        command: RepoCommand,
    },
    /// Fetch a package into the local repository.
    Fetch(repo::FetchArgs),
    /// Validate a project against its components' descriptors.
    Validate(assemble::ValidateArgs),
    /// Bind and run a project.
    Run(assemble::RunArgs),
}

#[derive(Subcommand, Debug)]
enum GrammarCommand {
    /// Parse and validate an EBNF grammar.
    Check(develop::GrammarCheckArgs),
}

#[derive(Subcommand, Debug)]
enum RepoCommand {
    /// Serve a repository directory over HTTP.
    Serve(repo::ServeArgs),
}

/// Why a command stopped.
#[derive(Debug)]
pub(crate) enum Failure {
    /// The inputs are wrong; the message says how.
    Diagnostics(String),
    /// Something outside the inputs is missing or broken.
    Environment(String),
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Diagnostics(_) => EXIT_DIAGNOSTICS,
            Failure::Environment(_) => EXIT_ENVIRONMENT,
        }
    }
}

pub(crate) type Outcome = Result<(), Failure>;

/// Where a command writes: its artifact stream and its diagnostic stream.
pub(crate) struct Io<'a> {
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
    pub format: Format,
}

impl Io<'_> {
    /// Writes `text` to `path`, or to stdout when there is no path.
    pub fn emit(&mut self, path: Option<&PathBuf>, text: &[u8]) -> Outcome {
        match path {
            Some(p) => std::fs::write(p, text).map_err(|e| Failure::Environment(format!("{}: {e}", p.display()))),
            None => self.out.write_all(text).map_err(|e| Failure::Environment(format!("stdout: {e}"))),
        }
    }

    pub fn note(&mut self, line: impl std::fmt::Display) {
        let _ = writeln!(self.err, "{line}");
    }
}

pub(crate) fn read_text(path: &std::path::Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Environment(format!("{}: {e}", path.display())))
}

pub(crate) fn read_bytes(path: &std::path::Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::Environment(format!("{}: {e}", path.display())))
}

/// Runs one invocation; returns the exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(rendered.as_bytes());
            } else {
                let _ = out.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    let mut io = Io {
        out,
        err,
        format: cli.format,
    };
    let result = match cli.command {
        Command::Grammar {
            command: GrammarCommand::Check(a),
        } => develop::grammar_check(a, &mut io),
        Command::Extract(a) => develop::extract(a, &mut io),
        Command::Describe(a) => develop::describe(a, &mut io),
        Command::Glue(a) => develop::glue(a, &mut io),
        Command::Pack(a) => develop::pack(a, &mut io),
        Command::Compile(a) => develop::compile(a, &mut io),
        Command::Register(a) => repo::register(a, &mut io),
        Command::Repo {
            command: RepoCommand::Serve(a),
        } => repo::serve(a, &mut io),
        Command::Fetch(a) => repo::fetch(a, &mut io),
        Command::Validate(a) => assemble::validate(a, &mut io),
        Command::Run(a) => assemble::run(a, &mut io),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let code = f.exit_code();
            match f {
                Failure::Diagnostics(m) => io.note(m),
                Failure::Environment(m) => io.note(format!("error: {m}")),
            }
            code
        }
    }
}

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use chrono::Utc;
use clap::{Args, Parser, Subcommand, ValueEnum};
use maj3_core::{AlgorithmId, Error};

use manifest::{OutputDigest, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "maj3", version, about = "Query complexity of recursive majority-of-three")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Seed for every random choice.
    #[arg(long, global = true, env = "MAJ3_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads for parallel stages; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Manifest path. Defaults to `<out>.manifest.json`, or one JSON line on
    /// standard error when writing to standard output.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// No progress messages.
    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw hard inputs in the fixture format.
    Sample {
        #[arg(long)]
        h: u32,
        #[arg(long, default_value_t = 1)]
        count: u64,
        /// Restrict to one root value.
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
        root: Option<u8>,
    },
    /// Monte Carlo estimate of an algorithm's expected query count.
    Estimate {
        #[arg(long, value_enum)]
        alg: Alg,
        #[arg(long)]
        h: u32,
        /// Also run every height up to this one and report growth ratios.
        #[arg(long)]
        h_max: Option<u32>,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        /// `uniform-hard`, `uniform-hard-0`, `uniform-hard-1` or `fixed:<bits>`.
        #[arg(long, default_value = "uniform-hard")]
        distribution: String,
    },
    /// Exact expected query count over the algorithm's coins.
    Expect {
        #[arg(long, value_enum)]
        alg: Alg,
        /// Input bits; leaves are listed left to right.
        #[arg(long, conflicts_with = "hard", required_unless_present = "hard")]
        input: Option<String>,
        /// Average over every hard input of this height instead.
        #[arg(long)]
        hard: Option<u32>,
        /// `root`, or `complete:<node>:<child>` with dotted child paths.
        #[arg(long, default_value = "root")]
        entry: String,
    },
    /// Table of T, S^M and S^m as CSV.
    Recurrences {
        #[arg(long, default_value_t = 40)]
        max_h: u32,
        /// Fractional digits of the decimal columns.
        #[arg(long, default_value_t = 6)]
        precision: u32,
    },
    /// The constant alpha_k from the stable-class program.
    Alpha {
        #[arg(long)]
        k: u32,
    },
    /// Certified lower-bound base and value.
    Bounds {
        #[arg(long)]
        k: u32,
        /// alpha_k as a fraction; computed when omitted.
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long, default_value = "0")]
        delta: String,
        #[arg(long, default_value_t = 1)]
        h: u32,
        #[arg(long, default_value_t = 6)]
        precision: u32,
    },
    /// Run a verification suite; exits 2 when a check fails.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        /// JSON object of expected values overriding the built-in ones.
        #[arg(long)]
        expected: Option<PathBuf>,
        /// Largest k for the alpha suite.
        #[arg(long, default_value_t = 3)]
        k_max: u32,
    },
    /// Stable classes as JSON lines, optionally with optimal values.
    DumpClasses {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        alpha: Option<String>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Alg {
    Full,
    Naive,
    Depth2,
}

impl From<Alg> for AlgorithmId {
    fn from(a: Alg) -> Self {
        match a {
            Alg::Full => AlgorithmId::FullRead,
            Alg::Naive => AlgorithmId::Naive,
            Alg::Depth2 => AlgorithmId::Depth2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Oracles,
    Ansatz,
    Encodings,
    Alpha,
    All,
}

pub const EXIT_VERIFY: u8 = 2;
pub const EXIT_USAGE: u8 = 3;
pub const EXIT_CAP: u8 = 4;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Cap(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Cap(_) => EXIT_CAP,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Cap(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::HeightCap { .. } | Error::EnumerationGuard { .. } | Error::LevelRange { .. } => {
                CliError::Cap(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Result bytes plus the exit code they come with.
pub struct Outcome {
    pub data: Vec<u8>,
    pub code: u8,
}

impl Outcome {
    pub fn ok(data: Vec<u8>) -> Self {
        Outcome { data, code: 0 }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let started = Utc::now();
    let g = &cli.global;
    if let Some(n) = g.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().expect("first pool initialization");
    }
    let name = subcommand_name(&cli.command);
    let mut manifest = RunManifest::new(name, std::env::args().skip(1).collect(), g.seed, g.threads, started);

    let code = match run(&cli) {
        Ok(outcome) => match emit(g, &outcome.data, &mut manifest) {
            Ok(()) => outcome.code,
            Err(e) => {
                eprintln!("error: {e}");
                e.code()
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    };
    manifest.finish(started, code as i32);
    let path = g.manifest.clone().or_else(|| g.out.as_ref().map(|o| with_suffix(o, ".manifest.json")));
    if let Err(e) = manifest.write(path.as_deref()) {
        eprintln!("error: cannot write manifest: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(code)
}

fn with_suffix(p: &std::path::Path, suffix: &str) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn emit(g: &Global, data: &[u8], manifest: &mut RunManifest) -> Result<(), CliError> {
    use std::io::Write;
    match &g.out {
        Some(path) => {
            std::fs::write(path, data).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            manifest.outputs.push(OutputDigest::new(&path.display().to_string(), data));
        }
        None => {
            std::io::stdout().write_all(data)?;
            manifest.outputs.push(OutputDigest::new("-", data));
        }
    }
    Ok(())
}

fn subcommand_name(c: &Command) -> &'static str {
    match c {
        Command::Sample { .. } => "sample",
        Command::Estimate { .. } => "estimate",
        Command::Expect { .. } => "expect",
        Command::Recurrences { .. } => "recurrences",
        Command::Alpha { .. } => "alpha",
        Command::Bounds { .. } => "bounds",
        Command::Verify { .. } => "verify",
        Command::DumpClasses { .. } => "dump-classes",
    }
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let g = &cli.global;
    let progress = !g.quiet;
    match &cli.command {
        Command::Sample { h, count, root } => commands::sample(*h, *count, root.map(|r| r == 1), g.seed),
        Command::Estimate { alg, h, h_max, trials, distribution } => {
            commands::estimate((*alg).into(), *h, *h_max, *trials, distribution, g.seed, g.threads)
        }
        Command::Expect { alg, input, hard, entry } => {
            commands::expect((*alg).into(), input.as_deref(), *hard, entry)
        }
        Command::Recurrences { max_h, precision } => commands::recurrences(*max_h, *precision),
        Command::Alpha { k } => commands::alpha(*k, progress),
        Command::Bounds { k, alpha, delta, h, precision } => {
            commands::bounds(*k, alpha.as_deref(), delta, *h, *precision, progress)
        }
        Command::Verify { suite, expected, k_max } => commands::verify(*suite, expected.as_deref(), *k_max, progress),
        Command::DumpClasses { k, alpha } => commands::dump_classes(*k, alpha.as_deref(), progress),
    }
}

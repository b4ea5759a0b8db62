use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

use commands::{CliError, Ctx};

/// Dequantize read-once quantum formulas, compile circuits to one-qubit
/// programs and check the results by exhaustive simulation.
#[derive(Parser, Debug)]
#[command(name = "qformula", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalOpts {
    /// Emit reports as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for enumeration; 0 picks the core count.
    #[arg(long, global = true, env = "QF_THREADS", default_value_t = 0)]
    threads: usize,
    #[arg(long, global = true)]
    eps_num: Option<f64>,
    #[arg(long, global = true)]
    eps_dedup: Option<f64>,
    #[arg(long, global = true)]
    eps_classical: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a formula, circuit or program on one input or all of them.
    Simulate {
        path: PathBuf,
        /// Input bits indexed by variable, e.g. `10` sets x0=1, x1=0.
        #[arg(long, conflicts_with = "all", required_unless_present = "all")]
        x: Option<String>,
        #[arg(long)]
        all: bool,
    },
    /// Convert a read-once quantum formula into a classical one.
    Dequantize {
        path: PathBuf,
        /// Bounded-error mode with this separation slack; exact when absent.
        #[arg(long)]
        delta: Option<f64>,
        /// Where to write the classical formula.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Where to write the formula together with its gate certificates.
        #[arg(long)]
        certificates: Option<PathBuf>,
    },
    /// Compile an AND/OR/NOT circuit into a one-qubit program.
    CompileOqp {
        path: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compare two documents on every input; exit 1 on the first difference.
    VerifyEquiv { left: PathBuf, right: PathBuf },
    /// Table of a Toffoli gate dressed by single-bit gates, or the whole family.
    ClassifyToffoli {
        /// Number of Toffoli inputs, controls plus target.
        #[arg(long, short)]
        m: usize,
        /// Comma-separated input gates from id, not, c0, c1, h.
        #[arg(long, required_unless_present = "enumerate")]
        pre: Option<String>,
        #[arg(long, default_value = "id")]
        post: String,
        /// List every table reachable with classical dressings.
        #[arg(long, conflicts_with = "pre")]
        enumerate: bool,
    },
    /// Whether a function has degree at most one over GF(2).
    AffineCheck {
        #[arg(conflicts_with = "table", required_unless_present = "table")]
        path: Option<PathBuf>,
        #[arg(long)]
        table: Option<String>,
    },
    /// Write a seeded random document.
    Gen {
        kind: GenKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        max_vars: usize,
        #[arg(long, default_value_t = 4)]
        max_depth: usize,
        #[arg(long, default_value_t = 3)]
        max_arity: usize,
        /// Depolarizing strength; `noisy` defaults to 0.005.
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long, default_value_t = 1)]
        rounds: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum GenKind {
    Cformula,
    Qformula,
    Noisy,
    Circuit,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let ctx = Ctx::new(
        cli.global.json,
        cli.global.threads,
        cli.global.eps_num,
        cli.global.eps_dedup,
        cli.global.eps_classical,
    )?;
    ctx.install(|| match cli.command {
        Command::Simulate { path, x, all } => commands::simulate(&ctx, &path, x.as_deref(), all),
        Command::Dequantize {
            path,
            delta,
            output,
            certificates,
        } => commands::dequantize(&ctx, &path, delta, output.as_deref(), certificates.as_deref()),
        Command::CompileOqp { path, output } => commands::compile_oqp(&ctx, &path, output.as_deref()),
        Command::VerifyEquiv { left, right } => commands::verify_equiv(&ctx, &left, &right),
        Command::ClassifyToffoli { m, pre, post, enumerate } => {
            commands::classify_toffoli(&ctx, m, pre.as_deref(), &post, enumerate)
        }
        Command::AffineCheck { path, table } => commands::affine_check(&ctx, path.as_deref(), table.as_deref()),
        Command::Gen {
            kind,
            seed,
            max_vars,
            max_depth,
            max_arity,
            noise,
            rounds,
            output,
        } => {
            let noise = noise.unwrap_or(if kind == GenKind::Noisy { 0.005 } else { 0.0 });
            let cfg = qformula::genrand::GenConfig {
                seed,
                max_vars,
                max_depth,
                max_arity,
                noise,
                obfuscation_rounds: rounds,
            };
            let kind = match kind {
                GenKind::Cformula => commands::Gen::Classical,
                GenKind::Qformula => commands::Gen::Quantum,
                GenKind::Noisy => commands::Gen::Noisy,
                GenKind::Circuit => commands::Gen::Circuit,
            };
            commands::gen(&ctx, kind, &cfg, output.as_deref())
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { commands::EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !e.message.is_empty() {
                eprintln!("error: {}", e.message);
            }
            ExitCode::from(e.code)
        }
    }
}

//! `framekit`: frame analysis, perturbation audits, Gabor systems and the
//! randomized audit corpus from the command line.
//!
//! Exit codes: 0 success, 1 an applicable audit was violated, 2 input
//! error, 3 no audit was applicable.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "framekit",
    version,
    about = "Finite frames, approximately dual frames and their perturbations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Frame bounds, excess and canonical dual.
    Frame {
        #[command(subcommand)]
        action: FrameCmd,
    },
    /// Perturbation audits between a frame and a perturbed family.
    Perturb {
        #[command(subcommand)]
        action: PerturbCmd,
    },
    /// Write instance files.
    Generate {
        #[command(subcommand)]
        action: GenerateCmd,
    },
    /// Discrete Gabor systems.
    Gabor {
        #[command(subcommand)]
        action: GaborCmd,
    },
    /// Seeded randomized corpus over every audit.
    Corpus(CorpusArgs),
}

#[derive(Subcommand)]
enum FrameCmd {
    Analyze {
        input: PathBuf,
        /// Include the canonical dual in the report.
        #[arg(long)]
        emit_dual: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum PerturbCmd {
    Audit(AuditArgs),
}

#[derive(Args)]
pub struct AuditArgs {
    /// The frame `F`.
    pub frame_a: PathBuf,
    /// The perturbed family `G`.
    pub frame_b: PathBuf,
    /// `(A1, Theta1)` for duals of `F`; defaults to `(I, 0)`.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// `(A2, Theta2)` for duals of `G`; `A2` defaults to `A1`, `Theta2` to 0.
    #[arg(long)]
    pub params_b: Option<PathBuf>,
    /// Dual of `F` weighting the d-quadratic measure; defaults to canonical.
    #[arg(long)]
    pub lambda_dual: Option<PathBuf>,
    /// Comma-separated audit kinds.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    pub kinds: Vec<Kind>,
    /// Random `Lambda` samples for the best-approximation audit.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Audit batch (JSON array).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Full report with closeness measures and bounds.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Kind {
    #[value(name = "gap-11")]
    Gap,
    Per1200,
    #[value(name = "per1200-d-quad")]
    Per1200DQuad,
    #[value(name = "per1200-c-quad")]
    Per1200CQuad,
    #[value(name = "per1200-mu")]
    Per1200Mu,
    DisIdentity,
    Cad,
    PropDis,
    BestApp,
    DQuad,
    CQuad,
    Gamma,
    /// Every audit whose hypothesis is `mu < sqrt(m)`.
    MuOnly,
    All,
}

#[derive(Subcommand)]
enum GenerateCmd {
    /// The truncated block-repetition pair.
    Exam {
        #[arg(long)]
        blocks: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Subcommand)]
pub enum GaborCmd {
    Analyze {
        system: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    DualWindow {
        system: PathBuf,
        #[command(flatten)]
        op: OperatorArgs,
        /// Window `h` as a JSON array of `[re, im]` pairs; defaults to 0.
        #[arg(long)]
        h: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    Perturb {
        system: PathBuf,
        /// Perturbed window as a JSON array of `[re, im]` pairs.
        window: PathBuf,
        /// `A1 = c I`.
        #[arg(long, default_value_t = 1.0)]
        a1: f64,
        /// `A2 = c I`.
        #[arg(long, default_value_t = 1.0)]
        a2: f64,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
pub struct OperatorArgs {
    /// `A = c I`.
    #[arg(long, conflicts_with = "poly")]
    pub scalar: Option<f64>,
    /// `A = sum_k c_k S^k`, coefficients comma-separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub poly: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args)]
pub struct CorpusArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    /// Random `Lambda` samples per best-approximation audit.
    #[arg(long, default_value_t = 16)]
    pub samples: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Run trials on one thread.
    #[arg(long)]
    pub sequential: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = commands::tolerance().and_then(|tol| match cli.command {
        Command::Frame {
            action:
                FrameCmd::Analyze {
                    input,
                    emit_dual,
                    output,
                },
        } => commands::frame_analyze(&input, emit_dual, output.as_deref(), &tol),
        Command::Perturb {
            action: PerturbCmd::Audit(args),
        } => commands::perturb_audit(&args, &tol),
        Command::Generate {
            action: GenerateCmd::Exam { blocks, output },
        } => commands::generate_exam(blocks, &output),
        Command::Gabor { action } => commands::gabor(&action, &tol),
        Command::Corpus(args) => commands::corpus(&args, &tol),
    });
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("framekit: {e}");
            ExitCode::from(commands::EXIT_INPUT)
        }
    }
}

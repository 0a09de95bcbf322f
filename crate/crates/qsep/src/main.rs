//! Thin command-line front end; all behavior lives in `qsep::harness`.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use qsep::experiment::ProtocolKind;
use qsep::harness::{
    self, CalibrateOptions, EvalOptions, GenOptions, ReproduceOptions, TrainOptions,
};

#[derive(Parser)]
#[command(
    name = "qsep",
    version,
    about = "Two-qubit separability lab: calibrate a photon-pair source model, \
             simulate measurement protocols, train classifiers, and score them"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProtocolArg {
    Linear,
    Nonlinear,
}

impl From<ProtocolArg> for ProtocolKind {
    fn from(p: ProtocolArg) -> Self {
        match p {
            ProtocolArg::Linear => ProtocolKind::Linear,
            ProtocolArg::Nonlinear => ProtocolKind::Nonlinear,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ArchArg {
    Linear,
    Mlp,
}

impl ArchArg {
    fn as_str(self) -> &'static str {
        match self {
            ArchArg::Linear => "linear",
            ArchArg::Mlp => "mlp",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the source model hitting the purity/concurrence targets
    Calibrate {
        /// Target purity of the noisy reference state
        #[arg(long, default_value_t = harness::DEFAULT_TARGET_PURITY)]
        purity: f64,
        /// Target concurrence of the noisy reference state
        #[arg(long, default_value_t = harness::DEFAULT_TARGET_CONCURRENCE)]
        concurrence: f64,
        /// Output directory (source.json, provenance.json)
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate labeled datasets (CSV plus JSON sidecar per file)
    Gen {
        /// linear traces boundaries on a p grid; nonlinear adds phase classes
        #[arg(long, value_enum)]
        protocol: Option<ProtocolArg>,
        /// Exact features and labels instead of simulated acquisitions
        #[arg(long)]
        theory: bool,
        /// Events per pool component and measurement setting
        #[arg(long)]
        shots: Option<u64>,
        /// Master seed for every substream of this run
        #[arg(long)]
        seed: Option<u64>,
        /// Measurement plan: xz, xz-chsh, or xyz
        #[arg(long)]
        plan: Option<String>,
        /// Source model file (from calibrate); default: calibrate in-process
        #[arg(long)]
        source: Option<PathBuf>,
        /// Also dump reconstructed density matrices per sample
        #[arg(long)]
        matrices: bool,
        /// Full protocol description as JSON; flags override its fields
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a classifier on a dataset CSV
    Train {
        /// Dataset CSV (its .json sidecar must sit next to it)
        #[arg(long)]
        data: PathBuf,
        /// Architecture; inferred from --nne when omitted
        #[arg(long, value_enum)]
        arch: Option<ArchArg>,
        /// Hidden units; 0 selects the linear model
        #[arg(long)]
        nne: Option<usize>,
        /// Seed for weight initialization
        #[arg(long)]
        seed: Option<u64>,
        /// Gradient-descent epochs
        #[arg(long)]
        epochs: Option<u32>,
        /// Initial learning rate
        #[arg(long)]
        learning_rate: Option<f64>,
        /// Full training config as JSON; flags override its fields
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (model.json, training_report.json)
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a trained model against a dataset CSV
    Eval {
        /// Model file written by train
        #[arg(long)]
        model: PathBuf,
        /// Dataset CSV acquired under the same measurement plan
        #[arg(long)]
        data: PathBuf,
        /// Output directory (eval.json, mismatches.csv)
        #[arg(long)]
        out: PathBuf,
    },
    /// Rebuild a shipped figure end to end (fig3, fig4, fig5, figS1)
    Reproduce {
        /// Which figure to rebuild
        #[arg(long)]
        figure: String,
        /// Master seed; every dataset and training seed derives from it
        #[arg(long)]
        seed: Option<u64>,
        /// Events per pool component and measurement setting
        #[arg(long)]
        shots: Option<u64>,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> qsep::Result<()> {
    match cli.command {
        Command::Calibrate {
            purity,
            concurrence,
            out,
        } => {
            cmd(harness::cmd_calibrate(&CalibrateOptions {
                target_purity: purity,
                target_concurrence: concurrence,
                out,
            }))
        }
        Command::Gen {
            protocol,
            theory,
            shots,
            seed,
            plan,
            source,
            matrices,
            config,
            out,
        } => harness::cmd_gen(&GenOptions {
            protocol: protocol.map(Into::into),
            theory,
            shots,
            seed,
            plan,
            source,
            matrices,
            config,
            out,
        }),
        Command::Train {
            data,
            arch,
            nne,
            seed,
            epochs,
            learning_rate,
            config,
            out,
        } => cmd(harness::cmd_train(&TrainOptions {
            data,
            arch: arch.map(|a| a.as_str().to_string()),
            nne,
            seed,
            epochs,
            learning_rate,
            config,
            out,
        })),
        Command::Eval { model, data, out } => {
            cmd(harness::cmd_eval(&EvalOptions { model, data, out }))
        }
        Command::Reproduce {
            figure,
            seed,
            shots,
            out,
        } => harness::cmd_reproduce(&ReproduceOptions {
            figure,
            seed,
            shots,
            out,
        }),
    }
}

/// Drop a command's structured return value; the files are the output.
fn cmd<T>(r: qsep::Result<T>) -> qsep::Result<()> {
    r.map(|_| ())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

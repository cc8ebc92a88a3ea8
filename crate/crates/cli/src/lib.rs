//! `vnet` command-line pipeline: synthetic data, two-stage training,
//! spectral analysis, tan-model fits and the commutator-function bench.

mod commands;
mod manifest;
mod settings;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use manifest::RunManifest;
pub use settings::{parse_config, Settings};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "vnet",
    version,
    about = "Learn factorized bare/effective interaction tensors and analyze their kernels",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub(crate) struct Common {
    /// Seed for every random draw of the run.
    #[arg(long)]
    seed: Option<u64>,
    /// Flat key=value file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output location (directory, or file for fit-tan).
    #[arg(long)]
    out: Option<PathBuf>,
    /// desk (ℓ=32, hidden 64,64) or paper (ℓ=300, hidden 200,200,200).
    #[arg(long)]
    profile: Option<String>,
    /// Root of the per-system run directories.
    #[arg(long)]
    workdir: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub(crate) struct TrainFlags {
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    /// Hidden widths, comma separated.
    #[arg(long)]
    hidden: Option<String>,
    /// Pseudo-orbital length ℓ.
    #[arg(long)]
    ell: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub(crate) enum Command {
    /// Plant a synthetic bare + effective series for a preset system.
    Synth {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        system: Option<String>,
        /// Alias for --system; accepts names like default-h4.
        #[arg(long)]
        plant: Option<String>,
        /// Gaussian noise added to tensor entries.
        #[arg(long)]
        noise: Option<f64>,
    },
    /// Stage 1: fit net and kernel to the bare tensors.
    TrainBare {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        system: Option<String>,
        /// 1 for one-body, 2 for two-body.
        #[arg(long)]
        body: Option<u8>,
        /// Directory holding series/ (defaults to <workdir>/<system>).
        #[arg(long)]
        data: Option<PathBuf>,
        #[command(flatten)]
        train: TrainFlags,
    },
    /// Stage 2: fine-tune the effective head at the reference geometries.
    Finetune {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        system: Option<String>,
        #[arg(long)]
        body: Option<u8>,
        #[arg(long)]
        data: Option<PathBuf>,
        /// Stage-1 checkpoint (defaults to <data>/bare-<body>.ckpt).
        #[arg(long)]
        model: Option<PathBuf>,
        /// Reference geometries, comma separated.
        #[arg(long)]
        refs: Option<String>,
        /// Train the kernel only.
        #[arg(long)]
        freeze_orbitals: bool,
        #[command(flatten)]
        train: TrainFlags,
    },
    /// Per-geometry MAE of a checkpoint against the series.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        system: Option<String>,
        #[arg(long)]
        body: Option<u8>,
        #[arg(long)]
        data: Option<PathBuf>,
        /// Checkpoint (defaults to <data>/eff-<body>.ckpt).
        #[arg(long)]
        model: Option<PathBuf>,
        /// Geometries labelled train for effective models.
        #[arg(long)]
        refs: Option<String>,
    },
    /// Eigen-decompose and align the bare and effective kernels.
    AnalyzeSpectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        system: Option<String>,
        #[arg(long)]
        body: Option<u8>,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        bare: Option<PathBuf>,
        #[arg(long)]
        eff: Option<PathBuf>,
    },
    /// Fit the tan law to an eigenpair table.
    FitTan {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        system: Option<String>,
        #[arg(long)]
        body: Option<u8>,
        #[arg(long)]
        data: Option<PathBuf>,
        /// CSV with eps_B and eps_D columns (as written by analyze-spectrum).
        #[arg(long)]
        eigenpairs: Option<PathBuf>,
    },
    /// Check the commutator-function identities on random Hamiltonians.
    SuzukiVerify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        rdim: Option<usize>,
        #[arg(long)]
        coupling: Option<f64>,
        #[arg(long)]
        trials: Option<usize>,
        /// Highest series order in the convergence curve.
        #[arg(long)]
        nmax: Option<usize>,
        /// Couplings for the sweep, comma separated.
        #[arg(long)]
        sweep: Option<String>,
        #[arg(long)]
        sweep_trials: Option<usize>,
    },
    /// Collect plot data (MAE, overlap, eigen-difference, tan fit) for a system.
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        system: Option<String>,
        #[arg(long)]
        data: Option<PathBuf>,
    },
}

fn usage() -> String {
    format!(
        "usage: vnet <synth|train-bare|finetune|eval|analyze-spectrum|fit-tan|suzuki-verify|report> [flags]\n\
         run `vnet <command> --help` for the flags of one command\n\n\
         presets:\n{}",
        vnet_core::synth_gen::presets_table()
    )
}

/// Maps an error to the process exit code: numerical failures give 2,
/// everything else 1.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<vnet_core::Error>() {
        Some(e) if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_INVALID,
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    if args.len() <= 1 {
        eprint!("{}", usage());
        return EXIT_INVALID;
    }
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    EXIT_OK
                }
                _ => {
                    eprint!("{e}\n{}", usage());
                    EXIT_INVALID
                }
            };
        }
    };
    match commands::dispatch(cli.cmd) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

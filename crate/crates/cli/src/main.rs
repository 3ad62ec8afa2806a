use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use seashell_core::certify::certify;
use seashell_core::error::{Error, ErrorKind, Result};
use seashell_core::forward_oracle::{roundtrip, spectral_data, PotentialSpec, ROUNDTRIP_GRID};
use seashell_core::io::{
    read_json, reconstruction_csv, to_json, write_text, Sidecar, SpectralInput,
};
use seashell_core::reconstruction::{reconstruct, ReconstructOptions, Scheme, Shift, DEFAULT_GRID};
use seashell_core::spectral_data::{detect_finite_rank, DetectOptions};

#[derive(Parser, Debug)]
#[command(
    name = "seashell",
    version,
    about = "Inverse Sturm-Liouville reconstruction from finite spectral data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ShiftArg {
    None,
    Auto,
    Tail,
}

impl From<ShiftArg> for Shift {
    fn from(s: ShiftArg) -> Self {
        match s {
            ShiftArg::None => Shift::None,
            ShiftArg::Auto => Shift::Auto,
            ShiftArg::Tail => Shift::Tail,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum SchemeArg {
    Central2,
    Central4,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Central2 => Scheme::Central2,
            SchemeArg::Central4 => Scheme::Central4,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reconstruct q, h, H from a spectral-data JSON file; writes CSV plus a JSON sidecar.
    Reconstruct {
        #[arg(short, long)]
        input: PathBuf,
        /// CSV destination; the sidecar goes next to it with a `.json` extension.
        #[arg(short, long)]
        output: PathBuf,
        #[arg(short, long, default_value_t = DEFAULT_GRID)]
        m: usize,
        #[arg(long, value_enum, default_value = "auto")]
        shift: ShiftArg,
        #[arg(long, value_enum, default_value = "central2")]
        scheme: SchemeArg,
        /// Take H from the asymptotic limit formula.
        #[arg(long)]
        h_from_limit: bool,
    },
    /// Compute eigenvalues and norming constants for a potential spec JSON.
    Forward {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(short = 'n', long)]
        count: usize,
    },
    /// Forward, reconstruct, forward again, and report the spectral discrepancy.
    Roundtrip {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(short = 'n', long)]
        count: usize,
        #[arg(short, long, default_value_t = ROUNDTRIP_GRID)]
        m: usize,
        #[arg(long, value_enum, default_value = "tail")]
        shift: ShiftArg,
        #[arg(long, value_enum, default_value = "central4")]
        scheme: SchemeArg,
    },
    /// Issue an a-priori error certificate, or refuse.
    Certify {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Bound on the remainder sequences; overrides `M` in the input file.
        #[arg(short = 'M', long = "bound")]
        bound: Option<f64>,
        /// Number of data pairs used by the reconstruction (default: all stored).
        #[arg(short = 'n', long)]
        count: Option<usize>,
    },
    /// Detect the rank N of data that becomes trivial after some index.
    Detect {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Length of the trivial run that terminates the scan.
        #[arg(long)]
        n_tilde: usize,
        #[arg(long)]
        trivial_tol: Option<f64>,
    },
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("SEASHELL_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Error::Validation(format!(
            "SEASHELL_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Io(e.to_string()))
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Reconstruct {
            input,
            output,
            m,
            shift,
            scheme,
            h_from_limit,
        } => {
            let data = read_json::<SpectralInput>(&input)?.data()?;
            let opts = ReconstructOptions {
                shift: shift.into(),
                scheme: scheme.into(),
                h_from_limit,
            };
            let rec = reconstruct(&data, m, opts)?;
            write_text(&output, &reconstruction_csv(&rec))?;
            write_text(
                &output.with_extension("json"),
                &to_json(&Sidecar::from(&rec))?,
            )
        }
        Command::Forward {
            input,
            output,
            count,
        } => {
            let spec: PotentialSpec = read_json(&input)?;
            let data = spectral_data(&spec, count)?;
            emit(output.as_deref(), &to_json(&SpectralInput::from(&data))?)
        }
        Command::Roundtrip {
            input,
            output,
            count,
            m,
            shift,
            scheme,
        } => {
            let spec: PotentialSpec = read_json(&input)?;
            let opts = ReconstructOptions {
                shift: shift.into(),
                scheme: scheme.into(),
                h_from_limit: false,
            };
            let report = roundtrip(&spec, count, m, opts)?;
            emit(output.as_deref(), &to_json(&report)?)
        }
        Command::Certify {
            input,
            output,
            bound,
            count,
        } => {
            let file: SpectralInput = read_json(&input)?;
            if let Some(w) = file.omega_hint.filter(|&w| w != 0.0) {
                return Err(Error::NotInOmega0M(format!("input declares omega = {w}")));
            }
            let m = bound.or(file.m).ok_or_else(|| {
                Error::Validation("bound M missing: pass --bound or set \"M\" in the input".into())
            })?;
            let data = file.data()?;
            let n = count.unwrap_or(data.len());
            let cert = certify(&data, m, n)?;
            eprintln!(
                "certified: N = {} > N0 = {:.4e}; |q_N - q|_(-1,inf) <= {:.4e}, |h_N - h| <= {:.4e}, |H_N - H| <= {:.4e}",
                cert.n, cert.n0, cert.bound_q, cert.bound_h, cert.bound_big_h
            );
            emit(output.as_deref(), &to_json(&cert)?)
        }
        Command::Detect {
            input,
            output,
            n_tilde,
            trivial_tol,
        } => {
            let data = read_json::<SpectralInput>(&input)?.data()?;
            let opts = DetectOptions {
                trivial_tol,
                ..Default::default()
            };
            let n = detect_finite_rank(|k| (data.lambda_at(k), data.alpha_at(k)), n_tilde, opts)?;
            emit(output.as_deref(), &format!("{}\n", json!({ "N": n })))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Validation => 2,
                ErrorKind::Numerical => 3,
                ErrorKind::CertificateRefused => 4,
            })
        }
    }
}

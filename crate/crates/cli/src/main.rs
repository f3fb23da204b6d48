//! Thin dispatch layer: parse flags, merge the optional config file,
//! run one core computation from the main thread, and map every
//! failure onto the documented exit codes: 0 success, 1 usage or
//! unphysical input, 2 numerical truncation or convergence failure,
//! 3 falsified determinant structure.

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{ChannelSection, FileConfig, Overrides, RunSection, StateSection};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(cv_damp_core::Error),
    Falsified(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Falsified(m) => write!(f, "determinant structure falsified: {m}"),
        }
    }
}

impl From<cv_damp_core::Error> for CliError {
    fn from(e: cv_damp_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(e) => match e {
                cv_damp_core::Error::InvalidArgument(_) | cv_damp_core::Error::Unphysical(_) => 1,
                _ => 2,
            },
            CliError::Falsified(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Core(e) => match e {
                cv_damp_core::Error::InvalidArgument(_) | cv_damp_core::Error::Unphysical(_) => {
                    "usage"
                }
                _ => "numerical",
            },
            CliError::Falsified(_) => "falsified",
        }
    }
}

#[derive(Args, Debug, Default, Clone)]
struct StateOpts {
    /// State preset: squeezed_vacuum, squeezed_thermal, or explicit.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Squeezing parameter for the squeezed presets.
    #[arg(long)]
    r: Option<f64>,
    /// Thermal occupation for squeezed_thermal.
    #[arg(long)]
    n0: Option<f64>,
    /// Mode-1 envelope coefficient for the explicit preset.
    #[arg(long)]
    a10: Option<f64>,
    /// Mode-2 envelope coefficient for the explicit preset.
    #[arg(long)]
    a20: Option<f64>,
    /// Correlation (real part) for the explicit preset.
    #[arg(long, allow_negative_numbers = true)]
    b0_re: Option<f64>,
    /// Correlation (imaginary part) for the explicit preset.
    #[arg(long, allow_negative_numbers = true)]
    b0_im: Option<f64>,
}

impl StateOpts {
    fn section(&self) -> StateSection {
        StateSection {
            preset: self.preset.clone(),
            r: self.r,
            n0: self.n0,
            a10: self.a10,
            a20: self.a20,
            b0_re: self.b0_re,
            b0_im: self.b0_im,
        }
    }
}

#[derive(Args, Debug, Default, Clone)]
struct ChannelOpts {
    /// Amplitude damping rate, both modes.
    #[arg(long)]
    gamma_amp: Option<f64>,
    /// Amplitude damping rate, mode 1 (overrides --gamma-amp).
    #[arg(long)]
    gamma_amp_1: Option<f64>,
    /// Amplitude damping rate, mode 2 (overrides --gamma-amp).
    #[arg(long)]
    gamma_amp_2: Option<f64>,
    /// Phase damping rate, both modes.
    #[arg(long)]
    gamma_phase: Option<f64>,
    /// Phase damping rate, mode 1 (overrides --gamma-phase).
    #[arg(long)]
    gamma_phase_1: Option<f64>,
    /// Phase damping rate, mode 2 (overrides --gamma-phase).
    #[arg(long)]
    gamma_phase_2: Option<f64>,
    /// Thermal occupation of the bath, both modes.
    #[arg(long)]
    nbar: Option<f64>,
    /// Bath occupation, mode 1 (overrides --nbar).
    #[arg(long)]
    nbar_1: Option<f64>,
    /// Bath occupation, mode 2 (overrides --nbar).
    #[arg(long)]
    nbar_2: Option<f64>,
}

impl ChannelOpts {
    fn section(&self) -> ChannelSection {
        ChannelSection {
            gamma_amp: self.gamma_amp,
            gamma_amp_1: self.gamma_amp_1,
            gamma_amp_2: self.gamma_amp_2,
            gamma_phase: self.gamma_phase,
            gamma_phase_1: self.gamma_phase_1,
            gamma_phase_2: self.gamma_phase_2,
            nbar: self.nbar,
            nbar_1: self.nbar_1,
            nbar_2: self.nbar_2,
        }
    }
}

#[derive(Args, Debug, Default, Clone)]
struct TolOpts {
    /// Adaptive block truncation threshold, in (0,1).
    #[arg(long)]
    eps_trace: Option<f64>,
    /// Series and quadrature truncation threshold, in (0,1).
    #[arg(long)]
    eps_series: Option<f64>,
    /// Relative width for root bisection, in (0,1).
    #[arg(long)]
    root_tol: Option<f64>,
}

impl TolOpts {
    fn run_section(&self) -> RunSection {
        RunSection {
            eps_trace: self.eps_trace,
            eps_series: self.eps_series,
            root_tol: self.root_tol,
            ..RunSection::default()
        }
    }
}

#[derive(Args, Debug, Default, Clone)]
struct CommonOpts {
    #[command(flatten)]
    state: StateOpts,
    #[command(flatten)]
    channel: ChannelOpts,
    #[command(flatten)]
    tol: TolOpts,
}

impl CommonOpts {
    fn overrides(&self, run: RunSection) -> Overrides {
        Overrides {
            state: self.state.section(),
            channel: self.channel.section(),
            run,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "cv-damp",
    version,
    about = "Two-mode Gaussian states under amplitude and phase damping: \
             block spectra, entanglement measures, separability classification, \
             and independent verification oracles"
)]
struct Cli {
    /// TOML configuration file; command-line flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Emit JSON on stdout and JSON errors on stderr.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Characteristic function of the damped state at one point.
    Chi {
        #[command(flatten)]
        common: CommonOpts,
        /// Evolution time.
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        mu1_re: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        mu1_im: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        mu2_re: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        mu2_im: f64,
        /// Evaluation route: series (closed form) or quadrature.
        #[arg(long, default_value = "series")]
        route: String,
    },
    /// Eigenvalues of one photon-number sector block.
    Spectrum {
        #[command(flatten)]
        common: CommonOpts,
        /// Evolution time.
        #[arg(long)]
        t: Option<f64>,
        /// Which operator: pt (partial transpose) or state.
        #[arg(long, default_value = "pt")]
        block: String,
        /// Sector index.
        #[arg(long, default_value_t = 1)]
        m: usize,
        /// Truncation size for state sectors (pt sectors are finite).
        #[arg(long, default_value_t = 32)]
        size: usize,
    },
    /// Negativity of the damped state.
    Negativity {
        #[command(flatten)]
        common: CommonOpts,
        /// Evolution time.
        #[arg(long)]
        t: Option<f64>,
    },
    /// Logarithmic negativity of the damped state.
    Ln {
        #[command(flatten)]
        common: CommonOpts,
        /// Evolution time.
        #[arg(long)]
        t: Option<f64>,
    },
    /// Von Neumann entropy of the damped state.
    Entropy {
        #[command(flatten)]
        common: CommonOpts,
        /// Evolution time.
        #[arg(long)]
        t: Option<f64>,
    },
    /// Coherent information in both directions.
    CoherentInfo {
        #[command(flatten)]
        common: CommonOpts,
        /// Evolution time.
        #[arg(long)]
        t: Option<f64>,
    },
    /// Separability region and criterion margins.
    Classify {
        #[command(flatten)]
        common: CommonOpts,
        /// Evolution time.
        #[arg(long)]
        t: Option<f64>,
    },
    /// Zero crossings of the four witness curves over [0, t_max].
    Crossings {
        #[command(flatten)]
        common: CommonOpts,
        /// Scan horizon.
        #[arg(long)]
        t_max: Option<f64>,
        /// Scan grid points.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// CSV time series of margins, log-negativity, and coherent information.
    Curves {
        #[command(flatten)]
        common: CommonOpts,
        /// Curve horizon.
        #[arg(long)]
        t_max: Option<f64>,
        /// Number of time steps (rows minus one).
        #[arg(long)]
        steps: Option<usize>,
        /// Output file; omit to stream CSV to stdout.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Exact-arithmetic proof of the determinant sign structure.
    ProveDet {
        /// Verify all sector matrices up to this index.
        #[arg(long)]
        m_max: Option<usize>,
    },
    /// Truncated Fock-basis master equation oracle (squeezed vacuum input).
    Oracle {
        #[command(flatten)]
        common: CommonOpts,
        /// Evolution time.
        #[arg(long)]
        t: Option<f64>,
        /// Fock grid cutoff per mode.
        #[arg(long)]
        cutoff: Option<usize>,
        /// Largest integrator step.
        #[arg(long)]
        dt_max: Option<f64>,
    },
}

fn report_error(e: &CliError, json: bool) {
    if json {
        let doc = serde_json::json!({
            "error": { "kind": e.kind(), "exit_code": e.exit_code(), "message": e.to_string() }
        });
        eprintln!("{doc}");
    } else {
        eprintln!("error: {e}");
    }
}

/// CV_DAMP_THREADS caps the worker pool; unset keeps the rayon default.
fn init_threads() -> Result<(), CliError> {
    match std::env::var("CV_DAMP_THREADS") {
        Err(_) => Ok(()),
        Ok(raw) => {
            let n: usize = raw
                .parse()
                .ok()
                .filter(|&n| n >= 1)
                .ok_or_else(|| {
                    CliError::Usage(format!("CV_DAMP_THREADS must be a positive integer, got {raw:?}"))
                })?;
            // A second build_global is harmless here: the pool can only
            // have been configured by this same code path.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            Ok(())
        }
    }
}

fn file_config(path: Option<&PathBuf>) -> Result<FileConfig, CliError> {
    match path {
        Some(p) => config::load(p),
        None => Ok(FileConfig::default()),
    }
}

fn dispatch(cli: &Cli) -> Result<Option<commands::Report>, CliError> {
    let file = file_config(cli.config.as_ref())?;
    match &cli.cmd {
        Cmd::Chi { common, t, mu1_re, mu1_im, mu2_re, mu2_im, route } => {
            let mut run = common.tol.run_section();
            run.t = *t;
            let r = config::resolve(&common.overrides(run), &file)?;
            commands::chi(&r, [*mu1_re, *mu1_im, *mu2_re, *mu2_im], route).map(Some)
        }
        Cmd::Spectrum { common, t, block, m, size } => {
            let mut run = common.tol.run_section();
            run.t = *t;
            let r = config::resolve(&common.overrides(run), &file)?;
            commands::spectrum(&r, block, *m, *size).map(Some)
        }
        Cmd::Negativity { common, t } => {
            let mut run = common.tol.run_section();
            run.t = *t;
            let r = config::resolve(&common.overrides(run), &file)?;
            commands::negativity(&r).map(Some)
        }
        Cmd::Ln { common, t } => {
            let mut run = common.tol.run_section();
            run.t = *t;
            let r = config::resolve(&common.overrides(run), &file)?;
            commands::log_negativity(&r).map(Some)
        }
        Cmd::Entropy { common, t } => {
            let mut run = common.tol.run_section();
            run.t = *t;
            let r = config::resolve(&common.overrides(run), &file)?;
            commands::entropy(&r).map(Some)
        }
        Cmd::CoherentInfo { common, t } => {
            let mut run = common.tol.run_section();
            run.t = *t;
            let r = config::resolve(&common.overrides(run), &file)?;
            commands::coherent_info(&r).map(Some)
        }
        Cmd::Classify { common, t } => {
            let mut run = common.tol.run_section();
            run.t = *t;
            let r = config::resolve(&common.overrides(run), &file)?;
            commands::classify_cmd(&r).map(Some)
        }
        Cmd::Crossings { common, t_max, grid } => {
            let mut run = common.tol.run_section();
            run.t_max = *t_max;
            run.grid = *grid;
            let r = config::resolve(&common.overrides(run), &file)?;
            commands::crossings(&r).map(Some)
        }
        Cmd::Curves { common, t_max, steps, out } => {
            let mut run = common.tol.run_section();
            run.t_max = *t_max;
            run.steps = *steps;
            let r = config::resolve(&common.overrides(run), &file)?;
            commands::curves(&r, out.as_deref())
        }
        Cmd::ProveDet { m_max } => {
            let m_max = m_max.or(file.run.m_max).unwrap_or(5);
            commands::prove_det(m_max, cli.json).map(Some)
        }
        Cmd::Oracle { common, t, cutoff, dt_max } => {
            let mut run = common.tol.run_section();
            run.t = *t;
            run.cutoff = *cutoff;
            run.dt_max = *dt_max;
            let r = config::resolve(&common.overrides(run), &file)?;
            commands::oracle(&r).map(Some)
        }
    }
}

fn run() -> i32 {
    // The json flag has to be readable even when parsing fails, so
    // error output stays machine readable on request.
    let json_wanted = std::env::args().any(|a| a == "--json");
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            report_error(&CliError::Usage(e.to_string()), json_wanted);
            return 1;
        }
    };
    if let Err(e) = init_threads() {
        report_error(&e, cli.json);
        return e.exit_code();
    }
    match dispatch(&cli) {
        Ok(Some(rep)) => {
            print!("{}", rep.render(cli.json));
            0
        }
        Ok(None) => 0,
        Err(e) => {
            report_error(&e, cli.json);
            e.exit_code()
        }
    }
}

fn main() {
    std::process::exit(run());
}

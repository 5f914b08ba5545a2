mod commands;
mod config;
mod error;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use roe_lab::boundary::ZonalProfile;
use roe_lab::engine::{SequenceKind, Verdict};

use commands::{Outcome, ProfileArgs, ProfileKind, SequenceArgs};
use config::{RunConfig, CONFIG_ENV};
use error::CliError;
use report::Recorder;

#[derive(Parser)]
#[command(name = "roe-lab", version, about = "Numerical checks for Roe-type theorems on hyperbolic space")]
struct Cli {
    /// Config file (key = value lines). Falls back to $ROE_LAB_CONFIG.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Output directory for CSV/JSON reports.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Flat-space sequences, annulus localization, operator invariants.
    VerifyEuclidean {
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long = "rho-sq", default_value_t = 0.0)]
        rho_sq: f64,
        #[arg(long = "J", default_value_t = 10)]
        j_max: usize,
        #[arg(long, default_value_t = 0.25)]
        epsilon: f64,
    },
    /// Spherical function ODE, K-commutation, ball stencil order.
    VerifySpherical {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long = "lambda-list", value_delimiter = ',', default_value = "0.5,1,2")]
        lambdas: Vec<f64>,
    },
    /// Spherical transform: heat multiplier, semigroup, round trips.
    VerifyTransforms {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long = "t-list", value_delimiter = ',', default_value = "0.3,0.5,1")]
        ts: Vec<f64>,
    },
    /// Abel transform followed by an even Fourier transform.
    VerifySliceProjection {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        t: f64,
    },
    /// Hardy norm of Poisson transforms against boundary norms.
    VerifyPoisson {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long = "p-list", value_delimiter = ',', default_value = "1,2,inf", value_parser = parse_p)]
        ps: Vec<f64>,
        /// File of zonal profiles, one comma-separated coefficient list per line.
        #[arg(long)]
        boundary: Option<PathBuf>,
    },
    /// Build and judge one two-sided sequence.
    RunSequence {
        #[arg(long, value_parser = parse_kind)]
        kind: SequenceKind,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value = "1", value_parser = parse_lambda)]
        lambda: Complex64,
        #[arg(long, default_value = "inf", value_parser = parse_p)]
        p: f64,
        #[arg(long = "M", default_value_t = 0.0)]
        weight_exponent: f64,
        #[arg(long = "J", default_value_t = 10)]
        j_max: usize,
        /// Boundary profile file; the first profile is used.
        #[arg(long)]
        boundary: Option<PathBuf>,
        /// Expected verdict; defaults to the one the kind should produce.
        #[arg(long, value_parser = parse_verdict)]
        expect: Option<Verdict>,
    },
    /// The two counterexample families.
    RunCounterexample {
        #[arg(long, value_enum)]
        which: Which,
    },
    /// Calibrate c_inv and kappa, writing calibration.conf.
    Calibrate,
    /// Dump one profile as x,y CSV.
    EmitProfile {
        #[arg(long, value_enum)]
        what: ProfileKind,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 0.5)]
        t: f64,
        #[arg(long, default_value = "inf", value_parser = parse_p)]
        p: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    ComplexPair,
    Distinguished,
}

fn parse_p(s: &str) -> Result<f64, String> {
    let v = match s.trim() {
        "inf" | "infinity" | "Inf" => f64::INFINITY,
        t => t.parse::<f64>().map_err(|e| e.to_string())?,
    };
    if v >= 1.0 {
        Ok(v)
    } else {
        Err(format!("p must be >= 1 or inf, got {s}"))
    }
}

fn parse_lambda(s: &str) -> Result<Complex64, String> {
    commands::parse_complex(s).map_err(|e| e.to_string())
}

fn parse_kind(s: &str) -> Result<SequenceKind, String> {
    s.replace('-', "_").parse::<SequenceKind>().map_err(|e| e.to_string())
}

fn parse_verdict(s: &str) -> Result<Verdict, String> {
    s.replace('-', "_").parse::<Verdict>().map_err(|e| e.to_string())
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli.config.clone().or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    let mut cfg = match path {
        Some(p) => RunConfig::load(&p)?,
        None => RunConfig::default(),
    };
    for pair in &cli.set {
        cfg.apply_override(pair)?;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn boundary_profile(path: &Option<PathBuf>, n: usize) -> Result<Option<ZonalProfile>, CliError> {
    match path {
        Some(p) => Ok(commands::read_profiles(p, n)?.into_iter().next()),
        None => Ok(None),
    }
}

fn dispatch(cli: &Cli, cfg: &RunConfig, rec: &mut Recorder) -> Result<(&'static str, Outcome), CliError> {
    let out: &Path = &cfg.output_dir;
    Ok(match &cli.command {
        Command::VerifyEuclidean {
            alpha,
            rho_sq,
            j_max,
            epsilon,
        } => {
            let a = commands::EuclidArgs {
                alpha: *alpha,
                rho_sq: *rho_sq,
                j_max: *j_max,
                epsilon: *epsilon,
            };
            ("verify-euclidean", commands::verify_euclidean(cfg, &a, rec)?)
        }
        Command::VerifySpherical { n, lambdas } => (
            "verify-spherical",
            commands::verify_spherical(cfg, n.unwrap_or(cfg.n), lambdas, rec)?,
        ),
        Command::VerifyTransforms { n, ts } => (
            "verify-transforms",
            commands::verify_transforms(cfg, n.unwrap_or(cfg.n), ts, rec)?,
        ),
        Command::VerifySliceProjection { n, t } => (
            "verify-slice-projection",
            commands::verify_slice_projection(cfg, *n, *t, rec)?,
        ),
        Command::VerifyPoisson {
            n,
            lambda,
            ps,
            boundary,
        } => {
            let profiles = match boundary {
                Some(p) => commands::read_profiles(p, *n)?,
                None => commands::default_profiles(*n)?,
            };
            ("verify-poisson", commands::verify_poisson(cfg, *n, *lambda, ps, &profiles, rec)?)
        }
        Command::RunSequence {
            kind,
            n,
            lambda,
            p,
            weight_exponent,
            j_max,
            boundary,
            expect,
        } => {
            let a = SequenceArgs {
                kind: *kind,
                n: *n,
                lambda: *lambda,
                p: *p,
                weight_exponent: *weight_exponent,
                j_max: *j_max,
                boundary: boundary_profile(boundary, *n)?,
                expect: *expect,
            };
            ("run-sequence", commands::run_sequence_cmd(cfg, &a, rec)?)
        }
        Command::RunCounterexample { which } => match which {
            Which::ComplexPair => ("run-counterexample", commands::run_complex_pair(cfg, rec)?),
            Which::Distinguished => ("run-counterexample", commands::run_distinguished(cfg, rec)?),
        },
        Command::Calibrate => ("calibrate", commands::calibrate(cfg, out, rec)?),
        Command::EmitProfile { what, n, lambda, t, p } => {
            let a = ProfileArgs {
                what: *what,
                n: n.unwrap_or(cfg.n),
                lambda: *lambda,
                t: *t,
                p: *p,
            };
            ("emit-profile", commands::emit_profile(cfg, &a, out, rec)?)
        }
    })
}

fn run(cli: &Cli) -> Result<i32, CliError> {
    let cfg = load_config(cli)?;
    let mut rec = Recorder::new(cfg.timing);
    let (stem, outcome) = dispatch(cli, &cfg, &mut rec)?;
    let (csv, _) = report::write_reports(&cfg.output_dir, stem, rec.records())?;
    print!("{}", report::summary(rec.records()));
    println!("reports: {}", csv.with_extension("{csv,json}").display());
    Ok(if outcome.inconclusive {
        3
    } else if rec.all_pass() {
        0
    } else {
        1
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("roe-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

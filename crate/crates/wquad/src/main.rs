//! Thin command-line front end; all functionality lives in the library.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use wquad::commands::{self, EXIT_CONFIG};
use wquad::config::{parse_meshes, CommandKind, KindSelect, RunConfig, StudyKind};

#[derive(Parser)]
#[command(
    name = "wquad",
    about = "Weighted Gaussian quadrature rules for uniform B-spline spaces and row-wise matrix assembly",
    long_about = "Derives weighted Gaussian quadrature rules for uniform C^1 quadratic and C^2 \
                  cubic B-spline spaces, assembles mass/stiffness matrices row by row with them, \
                  and validates exactness, convergence and evaluation-count reductions.\n\n\
                  Exit codes: 0 success, 2 validation-tolerance failure, 3 solver failure, \
                  4 configuration error, 1 I/O error.",
    version
)]
struct Cli {
    /// JSON config file used instead of flags (must be the only argument).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Derive weighted Gaussian rule tables and write them as JSON.
    DeriveRules(DeriveRulesArgs),
    /// Assemble mass/stiffness matrices and export them with counters.
    Assemble(AssembleArgs),
    /// Run a validation study (eig-convergence, spectrum, poisson).
    Study(StudyArgs),
}

#[derive(Args)]
struct DeriveRulesArgs {
    /// Spline degree (2 or 3).
    #[arg(long)]
    degree: usize,
    /// Which rules to derive: mass, stiffness or both.
    #[arg(long, default_value = "both")]
    kind: String,
    /// Family parameter for the cubic stiffness rule [default: 1.0].
    #[arg(long)]
    omega1: Option<f64>,
    /// Max accepted exactness residual [default: 1e-12, the acceptance value].
    #[arg(long)]
    tol_residual: Option<f64>,
    /// Run the unconstrained (undamped, unprojected) Newton demonstration.
    #[arg(long)]
    unsafe_newton: bool,
    /// Start for the unsafe run: published, wrong-element, or t1,t2,w1,w2.
    #[arg(long)]
    start: Option<String>,
    /// Output directory [default: .].
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct AssembleArgs {
    /// Spatial dimension (1, 2 or 3).
    #[arg(long)]
    d: usize,
    /// Spline degree (2 or 3).
    #[arg(long)]
    p: usize,
    /// Elements per direction.
    #[arg(long)]
    mesh: usize,
    /// Assembly strategy: standard, nc-weighted or gauss-weighted.
    #[arg(long, default_value = "gauss-weighted")]
    strategy: String,
    /// Which matrices: mass, stiffness or both.
    #[arg(long, default_value = "both")]
    kind: String,
    /// Matrix file format: matrix-market or band-json.
    #[arg(long, default_value = "matrix-market")]
    format: String,
    /// Compare every stored entry against the exact-integration oracle.
    #[arg(long)]
    check_oracle: bool,
    /// Max accepted |entry - oracle| [default: 1e-12, the acceptance value].
    #[arg(long)]
    tol_oracle: Option<f64>,
    /// Also run all three strategies and report evaluation-count ratios.
    #[arg(long)]
    ratios: bool,
    /// Output directory [default: .].
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct StudyArgs {
    /// Study name: eig-convergence, spectrum or poisson.
    name: String,
    /// Spatial dimension (1, 2 or 3; eig-convergence and poisson).
    #[arg(long)]
    d: Option<usize>,
    /// Spline degree (2 or 3).
    #[arg(long)]
    p: usize,
    /// Comma-separated mesh sizes (eig-convergence, poisson).
    #[arg(long)]
    meshes: Option<String>,
    /// Single mesh size (spectrum).
    #[arg(long)]
    mesh: Option<usize>,
    /// 1-based eigenvalue index, counted with multiplicity [default: 1].
    #[arg(long)]
    eigen_index: Option<usize>,
    /// Manufactured solution for poisson: product-of-sines or zero.
    #[arg(long)]
    solution: Option<String>,
    /// Fitted-rate tolerance [defaults: 0.3 for p=2, 0.4 for p=3, the acceptance values].
    #[arg(long)]
    rate_tol: Option<f64>,
    /// Spectrum eigenvalue agreement tolerance [default: 1e-9, the acceptance value].
    #[arg(long)]
    tol_spectrum: Option<f64>,
    /// Output directory [default: .].
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn to_config(cmd: Command) -> Result<RunConfig, wquad::Error> {
    let mut cfg = RunConfig {
        command: CommandKind::DeriveRules,
        study: None,
        degree: None,
        dimension: None,
        mesh: None,
        meshes: None,
        strategy: None,
        kind: None,
        omega1: None,
        eigen_index: None,
        solution: None,
        out_dir: None,
        format: None,
        check_oracle: None,
        ratios: None,
        unsafe_newton: None,
        start: None,
        tol_residual: None,
        tol_oracle: None,
        rate_tol: None,
        tol_spectrum: None,
    };
    match cmd {
        Command::DeriveRules(a) => {
            cfg.command = CommandKind::DeriveRules;
            cfg.degree = Some(a.degree);
            cfg.kind = Some(KindSelect::parse(&a.kind)?);
            cfg.omega1 = a.omega1;
            cfg.tol_residual = a.tol_residual;
            cfg.unsafe_newton = Some(a.unsafe_newton);
            cfg.start = a.start;
            cfg.out_dir = a.out_dir;
        }
        Command::Assemble(a) => {
            cfg.command = CommandKind::Assemble;
            cfg.degree = Some(a.p);
            cfg.dimension = Some(a.d);
            cfg.mesh = Some(a.mesh);
            cfg.strategy = Some(a.strategy);
            cfg.kind = Some(KindSelect::parse(&a.kind)?);
            cfg.format = Some(a.format);
            cfg.check_oracle = Some(a.check_oracle);
            cfg.tol_oracle = a.tol_oracle;
            cfg.ratios = Some(a.ratios);
            cfg.out_dir = a.out_dir;
        }
        Command::Study(a) => {
            cfg.command = CommandKind::Study;
            cfg.study = Some(match a.name.as_str() {
                "eig-convergence" => StudyKind::EigConvergence,
                "spectrum" => StudyKind::Spectrum,
                "poisson" => StudyKind::Poisson,
                other => {
                    return Err(wquad::Error::Config(format!("unknown study '{other}'")));
                }
            });
            cfg.degree = Some(a.p);
            cfg.dimension = a.d;
            cfg.mesh = a.mesh;
            cfg.meshes = match a.meshes {
                Some(s) => Some(parse_meshes(&s)?),
                None => None,
            };
            cfg.eigen_index = a.eigen_index;
            cfg.solution = a.solution;
            cfg.rate_tol = a.rate_tol;
            cfg.tol_spectrum = a.tol_spectrum;
            cfg.out_dir = a.out_dir;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version print and exit 0; real parse errors are config errors
            if e.use_stderr() {
                eprint!("{e}");
                std::process::exit(EXIT_CONFIG);
            }
            print!("{e}");
            std::process::exit(0);
        }
    };

    let config = match (cli.config, cli.command) {
        (Some(path), None) => match RunConfig::from_json_file(&path) {
            Ok(cfg) => cfg,
            Err(e) => {
                eprintln!("error: {e}");
                std::process::exit(commands::exit_code_for(&e));
            }
        },
        (None, Some(cmd)) => match to_config(cmd) {
            Ok(cfg) => cfg,
            Err(e) => {
                eprintln!("error: {e}");
                std::process::exit(commands::exit_code_for(&e));
            }
        },
        (Some(_), Some(_)) => {
            eprintln!("error: --config replaces the subcommand; give one or the other");
            std::process::exit(EXIT_CONFIG);
        }
        (None, None) => {
            eprintln!("error: a subcommand or --config is required (see --help)");
            std::process::exit(EXIT_CONFIG);
        }
    };

    std::process::exit(commands::run(&config));
}

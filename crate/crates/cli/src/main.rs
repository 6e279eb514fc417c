use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use swquasi::harness::fit::fit_decay;
use swquasi::harness::run::write_outputs;
use swquasi::harness::verify::{DECAY_WINDOW, RHO_DECAY_TOL, U_DECAY_TOL};
use swquasi::harness::{run, verify, Report, RunConfig};
use swquasi::solver::Mode;
use swquasi::Error;

const EXIT_FAIL: u8 = 1;
const EXIT_BLOWUP: u8 = 2;
const EXIT_CONFIG: u8 = 3;

#[derive(Parser)]
#[command(name = "swquasi", version, about = "Viscous shallow-water runs around a heat-driven quasi-solution")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation and write the CSV series, summary and optional dumps.
    Run(Common),
    /// Run verification suites and print a JSON report.
    Verify(Common),
    /// Run a simulation and fit the decay exponents of the density and velocity norms.
    Fit(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    ShallowWater,
    Friction,
    HeatOnly,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Points per axis.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    fr: Option<f64>,
    #[arg(long)]
    rfric: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// lp, besov, paraproduct, quasi, solver, decay or all.
    #[arg(long)]
    suite: Option<String>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, Error> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(m) = self.mode {
            c.solver.mode = match m {
                ModeArg::ShallowWater => Mode::ShallowWater,
                ModeArg::Friction => Mode::Friction,
                ModeArg::HeatOnly => Mode::HeatOnly,
            };
        }
        macro_rules! set {
            ($flag:expr, $field:expr) => {
                if let Some(v) = $flag {
                    $field = v;
                }
            };
        }
        set!(self.grid, c.grid.n);
        set!(self.mu, c.solver.mu);
        set!(self.a, c.solver.a);
        set!(self.fr, c.solver.fr);
        set!(self.rfric, c.solver.r_fric);
        set!(self.dt, c.solver.dt);
        set!(self.t_end, c.solver.t_end);
        set!(self.eps, c.init.eps);
        set!(self.seed, c.init.seed);
        if self.out.is_some() {
            c.out = self.out.clone();
        }
        if self.suite.is_some() {
            c.suite = self.suite.clone();
        }
        c.validate()?;
        Ok(c)
    }
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::Blowup { .. } | Error::Cfl { .. } | Error::DensityFloor { .. } => EXIT_BLOWUP,
        _ => EXIT_CONFIG,
    }
}

fn emit(report: &Report, out: Option<&PathBuf>) -> Result<(), Error> {
    for line in report.lines() {
        eprintln!("{line}");
    }
    println!("{}", report.to_json());
    if let Some(dir) = out {
        report.write(&dir.join("report.json"))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (Command::Run(common) | Command::Verify(common) | Command::Fit(common)) = &cli.command;
    let config = match common.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let result = match &cli.command {
        Command::Run(_) => run(&config).map(|out| {
            println!("{}", out.summary.to_json());
            true
        }),
        Command::Verify(_) => {
            let suite = config.suite.clone().unwrap_or_else(|| "all".into());
            verify(&suite, &config).and_then(|r| emit(&r, config.out.as_ref()).map(|_| r.pass()))
        }
        Command::Fit(_) => run(&config).and_then(|out| {
            if let Some(dir) = &config.out {
                write_outputs(dir, &out.rows, &out.summary)?;
            }
            let t: Vec<f64> = out.rows.iter().map(|r| r.t).collect();
            let n = config.grid.dim as f64;
            let mut report = Report::default();
            let rho: Vec<f64> = out.rows.iter().map(|r| r.linf_rho_minus_1).collect();
            let u: Vec<f64> = out.rows.iter().map(|r| r.besov_u_m1_inf).collect();
            report.decay.push(fit_decay("linf_rho_minus_1", &t, &rho, DECAY_WINDOW, n / 2.0, RHO_DECAY_TOL)?);
            report.decay.push(fit_decay("besov_u_m1_inf", &t, &u, DECAY_WINDOW, n / 2.0 + 0.5, U_DECAY_TOL)?);
            emit(&report, config.out.as_ref())?;
            Ok(report.pass())
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}

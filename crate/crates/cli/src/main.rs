use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use forager_core::grid::Grid;
use forager_core::harness::{
    calibrate_kappa, run, scenario_suite, sweep, sweep_summary, HarnessError, RunConfig,
    SuiteOptions,
};
use forager_core::model::{
    compute_regime_quantities, damping_exponents_admissible, taxis_smallness,
};

const EXIT_CONFIG: u8 = 2;
const EXIT_SUITE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "forager",
    version,
    about = "Forager-exploiter chemotaxis simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write its run directory.
    Run {
        config: PathBuf,
        /// Run directory (default: runs/<config stem>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeat a run over values of one numeric key.
    Sweep {
        config: PathBuf,
        /// Key to vary, e.g. params.xi.
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run one configuration at a time.
        #[arg(long)]
        serial: bool,
    },
    /// Run a canned scenario suite.
    Suite {
        name: String,
        /// Cells per axis, replacing the suite default.
        #[arg(long)]
        cells: Option<usize>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find the largest kappa whose induced taxis strengths stay bounded.
    CalibrateKappa {
        config: PathBuf,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long, default_value_t = 8)]
        iterations: usize,
    },
    /// Print the regime quantities and condition checks for a configuration.
    CheckConditions { config: PathBuf },
}

fn fail(e: HarnessError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_config_error() { EXIT_CONFIG } else { 1 })
}

fn load(path: &PathBuf) -> Result<RunConfig, HarnessError> {
    Ok(RunConfig::load(path)?)
}

fn default_out(kind: &str, path: &std::path::Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map_or("run".into(), |s| s.to_string_lossy().into_owned());
    PathBuf::from(kind).join(stem)
}

fn check_conditions(cfg: &RunConfig) -> Result<(), HarnessError> {
    let grid: Grid<f64> = cfg.grid()?;
    let source = cfg.nutrient_source(grid)?;
    let [u0, v0, w0] = cfg.initial_fields(grid);
    let q = compute_regime_quantities(&cfg.params, &source, &u0, &v0, &w0, cfg.kappa)?;
    let s = taxis_smallness(&q, &cfg.params);
    println!("p  = {}", q.p);
    println!("A  = {}", q.a);
    println!("B  = {}", q.b);
    println!("Q  = {}", q.q);
    println!("G0 = {}", q.g0);
    println!("H0 = {}", q.h0);
    println!("r* = {}", q.r_star);
    println!("kappa = {}", q.kappa);
    println!(
        "chi <= kappa/G0: {} ({} vs {})",
        s.chi_ok(),
        s.chi,
        s.chi_threshold
    );
    println!(
        "xi  <= threshold: {} ({} vs {})",
        s.xi_ok(),
        s.xi,
        s.xi_threshold
    );
    match damping_exponents_admissible(cfg.params.m, cfg.params.l) {
        Ok(ok) => println!(
            "damping exponents admissible (m={}, l={}): {ok}",
            cfg.params.m, cfg.params.l
        ),
        Err(e) => println!("damping exponents: {e}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out } => load(&config).and_then(|cfg| {
            let dir = out.unwrap_or_else(|| default_out("runs", &config));
            let r = run(&cfg, Some(&dir))?;
            let v = &r.verdict;
            println!("verdict: {} ({})", v.kind, v.reason);
            println!(
                "ceilings: u={} v={} w={}",
                v.ceilings[0], v.ceilings[1], v.ceilings[2]
            );
            println!(
                "steps: {}, wall time {:.2}s, written to {}",
                r.steps,
                r.wall_time.as_secs_f64(),
                dir.display()
            );
            Ok(ExitCode::SUCCESS)
        }),
        Command::Sweep {
            config,
            axis,
            values,
            out,
            serial,
        } => load(&config).and_then(|cfg| {
            let dir = out.unwrap_or_else(|| default_out("sweeps", &config));
            let entries = sweep(&cfg, &axis, &values, !serial, Some(&dir))?;
            print!("{}", sweep_summary(&axis, &entries));
            Ok(ExitCode::SUCCESS)
        }),
        Command::Suite {
            name,
            cells,
            horizon,
            out,
        } => {
            let out = out.unwrap_or_else(|| PathBuf::from("suites").join(&name));
            scenario_suite(
                &name,
                &SuiteOptions {
                    cells,
                    horizon,
                    out: Some(out),
                },
            )
            .map(|report| {
                print!("{}", report.text());
                if report.passed() {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(EXIT_SUITE)
                }
            })
        }
        Command::CalibrateKappa {
            config,
            lo,
            hi,
            iterations,
        } => load(&config).and_then(|cfg| {
            let c = calibrate_kappa(&cfg, lo, hi, iterations)?;
            println!("kappa,chi,xi,verdict,ceiling");
            for p in &c.probes {
                println!("{},{},{},{},{}", p.kappa, p.chi, p.xi, p.verdict, p.ceiling);
            }
            println!(
                "empirical kappa = {} (bracket [{}, {}])",
                c.kappa, c.bracket.0, c.bracket.1
            );
            Ok(ExitCode::SUCCESS)
        }),
        Command::CheckConditions { config } => load(&config)
            .and_then(|cfg| check_conditions(&cfg))
            .map(|_| ExitCode::SUCCESS),
    };
    result.unwrap_or_else(fail)
}

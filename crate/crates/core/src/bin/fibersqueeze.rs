use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use fibersqueeze::measurement::FilterKind;
use fibersqueeze::scenario::{
    parse_fault, run_scenario, selftest, RunError, ScenarioConfig, BUILTIN_SCENARIOS, FAULT_NAMES,
    OUTPUT_ROOT_ENV,
};

const OK: u8 = 0;
const INVALID: u8 = 1;
const RUNTIME: u8 = 2;

#[derive(Parser)]
#[command(version, about = "Pulse propagation and photon-number squeezing in nonlinear fiber")]
struct Cli {
    /// Directory scenario outputs are written under.
    #[arg(long, global = true, env = OUTPUT_ROOT_ENV, default_value = "output")]
    output_root: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file (TOML, or a config.json echo) or a builtin name.
    Run { config: String },
    /// List every violated precondition of a scenario without running it.
    Validate { config: String },
    /// Fast property checks on small grids.
    Selftest {
        /// Inject a deliberate defect: flip-dispersion or conjugate-nu.
        #[arg(long, default_value = "none")]
        inject: String,
    },
    /// Knife-edge sweep at the given edges.
    Sweep {
        #[arg(long, value_delimiter = ',', required = true)]
        edges: Vec<f64>,
        #[arg(long, value_enum, default_value = "both")]
        kind: SweepKind,
        /// Scenario to sweep (file or builtin name).
        #[arg(long, default_value = "default")]
        config: String,
    },
    /// Print a builtin scenario as TOML.
    Show { name: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepKind {
    LowPass,
    HighPass,
    Both,
}

fn load(source: &str) -> Result<ScenarioConfig, u8> {
    ScenarioConfig::load(source).map_err(|e| {
        eprintln!("{e}");
        if !Path::new(source).exists() {
            eprintln!("builtin scenarios: {}", BUILTIN_SCENARIOS.join(", "));
        }
        INVALID
    })
}

fn run(config: &ScenarioConfig, root: &Path) -> u8 {
    match run_scenario(config, root) {
        Ok(outcome) => {
            for e in &outcome.summary.energies {
                print!("{} pJ: {} steps", e.energy_pj, e.steps);
                if let Some(p) = e.raman_peak_nm {
                    print!(", Raman peak {p:.1} nm");
                }
                println!();
                for s in &e.sweeps {
                    if let (Some(edge), Some(db)) = (s.best_edge_nm, s.best_fano_db) {
                        println!(
                            "  best {} edge {edge} nm: {db:.2} dB ({:.2} dB at efficiency {})",
                            s.kind.label(),
                            s.best_fano_db_at_efficiency.unwrap_or(f64::NAN),
                            outcome.summary.efficiency
                        );
                    }
                }
            }
            println!("results in {}", outcome.directory.display());
            OK
        }
        Err(e) => report(&e),
    }
}

fn report(e: &RunError) -> u8 {
    eprintln!("{e}");
    if e.is_validation() {
        INVALID
    } else {
        RUNTIME
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config } => match load(&config) {
            Ok(c) => run(&c, &cli.output_root),
            Err(code) => code,
        },
        Command::Validate { config } => match load(&config) {
            Ok(c) => {
                let v = c.violations();
                if v.is_empty() {
                    println!("{}: ok", c.name);
                    OK
                } else {
                    for s in &v {
                        println!("violation: {s}");
                    }
                    INVALID
                }
            }
            Err(code) => code,
        },
        Command::Selftest { inject } => match parse_fault(&inject) {
            Some(fault) => {
                let r = selftest(fault);
                println!("{r}");
                if r.all_passed() {
                    OK
                } else {
                    RUNTIME
                }
            }
            None => {
                eprintln!("unknown fault {inject:?}; choose one of {}", FAULT_NAMES.join(", "));
                INVALID
            }
        },
        Command::Sweep { edges, kind, config } => match load(&config) {
            Ok(mut c) => {
                c.measurement.edges_nm = edges;
                c.measurement.sweeps = match kind {
                    SweepKind::LowPass => vec![FilterKind::LowPass],
                    SweepKind::HighPass => vec![FilterKind::HighPass],
                    SweepKind::Both => vec![FilterKind::LowPass, FilterKind::HighPass],
                };
                c.measurement.correlation_map = false;
                c.output.directory = format!("{}_sweep", c.output.directory);
                run(&c, &cli.output_root)
            }
            Err(code) => code,
        },
        Command::Show { name } => match ScenarioConfig::builtin(&name) {
            Some(c) => {
                print!("{}", c.to_toml());
                OK
            }
            None => {
                eprintln!("no builtin {name:?}; choose one of {}", BUILTIN_SCENARIOS.join(", "));
                INVALID
            }
        },
    };
    ExitCode::from(code)
}

//! Command-line front end: generate networks, run the estimator experiment,
//! evaluate accuracy bounds, and run the randomized verification suites.
//!
//! Exit codes: 0 on success, 2 on validation failures, 3 on numerical
//! failures.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use dwls::bounds::{covariance_bound, estimate_bound};
use dwls::graph::{NodeId, SensorNetwork};
use dwls::harness::{
    generate, run_experiment, ExperimentConfig, GeneratorSpec, GraphSource, HarnessError,
    MeasurementModel, TopologyFamily,
};
use dwls::verify;

#[derive(Parser)]
#[command(name = "dwls", version, about = "Distributed WLS estimation on sensor networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    RingOfTrees,
    RandomRegular,
    Grid,
}

impl From<FamilyArg> for TopologyFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::RingOfTrees => TopologyFamily::RingOfTrees,
            FamilyArg::RandomRegular => TopologyFamily::RandomRegular,
            FamilyArg::Grid => TopologyFamily::Grid,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Riemann,
    Equiv,
    Bounds,
    Acyclic,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic network and write it as a graph JSON document.
    Gen {
        #[arg(long)]
        nodes: usize,
        #[arg(long, default_value_t = 3)]
        degree: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = FamilyArg::RingOfTrees)]
        family: FamilyArg,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 0.4)]
        coupling: f64,
        #[arg(long, default_value_t = 0.01)]
        noise_var: f64,
    },
    /// Run the estimator and baseline against the centralized oracle,
    /// writing convergence.csv, depth_cov.csv, and depth_est.csv.
    Run {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        rounds: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Print the covariance and estimate bound reports at a probe node.
    Bounds {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        probe: usize,
    },
    /// Run a randomized verification suite.
    Verify {
        #[arg(long, value_enum)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        trials: Option<usize>,
    },
}

const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn load_validated(path: &PathBuf) -> Result<SensorNetwork, u8> {
    let net = match SensorNetwork::load_json(path) {
        Ok(net) => net,
        Err(err) => {
            eprintln!("error: {err}");
            return Err(EXIT_VALIDATION);
        }
    };
    let report = net.validate();
    if !report.is_pass() {
        eprintln!("error: network failed validation:\n{report}");
        return Err(EXIT_VALIDATION);
    }
    Ok(net)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run_command(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => ExitCode::from(code),
    }
}

fn run_command(command: Command) -> Result<(), u8> {
    match command {
        Command::Gen { nodes, degree, seed, out, family, dim, coupling, noise_var } => {
            let spec = GeneratorSpec { family: family.into(), nodes, degree };
            let model = MeasurementModel { dim, coupling, noise_var };
            let net = generate(&spec, &model, seed).map_err(|err| {
                eprintln!("error: {err}");
                EXIT_VALIDATION
            })?;
            net.save_json(&out).map_err(|err| {
                eprintln!("error: {err}");
                EXIT_NUMERICAL
            })?;
            println!(
                "wrote {} ({} nodes, {} edges, seed {seed})",
                out.display(),
                net.node_count(),
                net.edge_count()
            );
            Ok(())
        }
        Command::Run { graph, rounds, out_dir } => {
            let config = ExperimentConfig {
                source: GraphSource::File(graph),
                seed: 0,
                rounds,
                probes: None,
                model: MeasurementModel::default(),
            };
            let summary = run_experiment(&config, &out_dir).map_err(|err| {
                let code = match &err {
                    HarnessError::Graph(_) | HarnessError::Unsatisfiable(_) => EXIT_VALIDATION,
                    _ => EXIT_NUMERICAL,
                };
                eprintln!("error: {err}");
                code
            })?;
            println!("{}", serde_json::to_string_pretty(&summary).unwrap());
            Ok(())
        }
        Command::Bounds { graph, probe } => {
            let net = load_validated(&graph)?;
            let probe = NodeId::new(probe);
            let cov = covariance_bound(&net, probe).map_err(|err| {
                eprintln!("error: {err}");
                EXIT_NUMERICAL
            })?;
            let est = estimate_bound(&net, probe).map_err(|err| {
                eprintln!("error: {err}");
                EXIT_NUMERICAL
            })?;
            let out = serde_json::json!({ "covariance": cov, "estimate": est });
            println!("{}", serde_json::to_string_pretty(&out).unwrap());
            Ok(())
        }
        Command::Verify { suite, seed, trials } => {
            let report = match suite {
                SuiteArg::Riemann => verify::riemann_suite(seed, trials.unwrap_or(200)),
                SuiteArg::Equiv => verify::equiv_suite(seed, trials.unwrap_or(30)),
                SuiteArg::Bounds => verify::bounds_suite(seed, trials.unwrap_or(30)),
                SuiteArg::Acyclic => verify::acyclic_suite(seed, trials.unwrap_or(50)),
            };
            println!("{report}");
            if report.pass() {
                Ok(())
            } else {
                Err(EXIT_NUMERICAL)
            }
        }
    }
}

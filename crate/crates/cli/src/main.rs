use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use catlearn::error::Result;
use catlearn::error_models::ErrorModel;
use catlearn::exec::Execution;
use catlearn::harness::data::parse_vector;
use catlearn::harness::{
    cmd_request, cmd_train, cmd_verify, Dataset, ParamsFile, Report, RequestConfig, TrainConfig, VerifyOptions,
};
use catlearn::nnet::{builtin_activation, Activation, Network};

#[derive(Parser)]
#[command(name = "catlearn", version, about = "Train small networks and check the laws of learners numerically")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and print its report.
    Verify {
        /// learn-axioms, para-axioms, functoriality, bimonoid, neurons,
        /// section6, gradients or cross-entropy
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Override every check's tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Add wall-clock time to the report (which then varies run to run).
        #[arg(long)]
        timing: bool,
        /// Evaluate trials on one thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Train a network by sequential gradient descent over a CSV dataset.
    Train {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "quadratic")]
        error: String,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        epochs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the final parameters here as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the network file's activation (default sigmoid).
        #[arg(long)]
        activation: Option<String>,
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        init_low: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        init_high: f64,
    },
    /// Iterate the request function at fixed parameters and target.
    Request {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        params: PathBuf,
        /// Comma-separated input, e.g. "0.1,0.2".
        #[arg(long, allow_hyphen_values = true)]
        input: String,
        /// Comma-separated target.
        #[arg(long, allow_hyphen_values = true)]
        target: String,
        #[arg(long, default_value_t = 1)]
        steps: usize,
        #[arg(long, default_value = "quadratic")]
        error: String,
        #[arg(long)]
        activation: Option<String>,
    },
}

fn load_network(path: &Path, flag: Option<&str>) -> Result<(Network, Activation)> {
    let (net, from_file) = Network::from_json_file(path)?;
    let name = flag.or(from_file.as_deref()).unwrap_or("sigmoid");
    Ok((net, builtin_activation(name)?))
}

fn execution(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

fn run(cli: Cli) -> Result<Report> {
    match cli.command {
        Command::Verify {
            suite,
            seed,
            trials,
            tol,
            timing,
            sequential,
        } => {
            let opts = VerifyOptions {
                seed,
                trials,
                tol,
                exec: execution(sequential),
            };
            let start = Instant::now();
            let mut report = cmd_verify(&suite, &opts)?;
            if timing {
                report.timing_ms = Some(start.elapsed().as_secs_f64() * 1e3);
            }
            Ok(report)
        }
        Command::Train {
            net,
            data,
            error,
            eps,
            epochs,
            seed,
            out,
            activation,
            init_low,
            init_high,
        } => {
            let (network, act) = load_network(&net, activation.as_deref())?;
            let model = ErrorModel::by_name(&error)?;
            let dataset = Dataset::from_csv_file(&data, network.width_in(), network.width_out())?;
            let command = format!(
                "train --net {} --data {} --error {} --eps {eps} --epochs {epochs} --seed {seed} --activation {}",
                net.display(),
                data.display(),
                model.name(),
                act.name()
            );
            let cfg = TrainConfig {
                activation: act,
                model,
                eps,
                epochs,
                seed,
                init: (init_low, init_high),
            };
            let outcome = cmd_train(&network, &cfg, &dataset)?;
            if let Some(path) = out {
                ParamsFile { params: outcome.params.clone() }.write(&path)?;
            }
            Ok(outcome.report(command, seed))
        }
        Command::Request {
            net,
            params,
            input,
            target,
            steps,
            error,
            activation,
        } => {
            let (network, act) = load_network(&net, activation.as_deref())?;
            let model = ErrorModel::by_name(&error)?;
            let p = ParamsFile::read(&params)?.params;
            let (a, b) = (parse_vector(&input)?, parse_vector(&target)?);
            let command = format!(
                "request --net {} --params {} --input {input} --target {target} --steps {steps} --error {} --activation {}",
                net.display(),
                params.display(),
                model.name(),
                act.name()
            );
            let cfg = RequestConfig {
                activation: act,
                model,
                steps,
            };
            Ok(cmd_request(&network, &cfg, &p, &a, &b)?.report(command))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli).and_then(|r| Ok((r.to_json()?, r.pass))) {
        Ok((json, pass)) => {
            println!("{json}");
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

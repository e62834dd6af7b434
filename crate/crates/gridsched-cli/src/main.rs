//! Command-line front end: generates scenario data, fits the forecaster,
//! trains and evaluates scheduling policies, and tabulates comparisons.
//!
//! Every verb writes only into its `--out` directory (plus an
//! `effective-config.toml` snapshot there, so each run records exactly what
//! it ran with) and is deterministic for a fixed config and seed apart from
//! wall-clock fields.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error, 3 configuration
//! file unreadable, 4 configuration invalid.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gridsched::agent::DqnAgent;
use gridsched::config::AppConfig;
use gridsched::forecast::{compute_metrics, EdRvflModel};
use gridsched::harness::{
    comparison_rows, evaluate_policy, export_scenario_csv, read_degradation_csv,
    read_summary_json, train_agent, write_comparison_csv,
    write_degradation_csv, write_learning_curve_csv, write_summary_json, DpOracle, EvalOptions,
    EvalOutcome, ForecastTable, GreedyAgentPolicy, OracleInputs, OracleOptions, OraclePolicy,
    RunSummary, Scenario, TrainOptions, UncontrolledPolicy,
};
use gridsched::Error;

const EXIT_RUNTIME: u8 = 1;
const EXIT_CONFIG_UNREADABLE: u8 = 3;
const EXIT_CONFIG_INVALID: u8 = 4;

#[derive(Parser)]
#[command(
    name = "gridsched",
    version,
    about = "Degradation-aware scheduling for a building microgrid with stationary storage and an EV fleet"
)]
struct Cli {
    /// TOML configuration file; built-in defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed for data generation, forecasting, and learning.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,

    /// Output directory; created if missing.
    #[arg(long, global = true, default_value = "runs/latest")]
    out: PathBuf,

    /// Suppress progress output; errors still print to stderr.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic load/PV/tariff series and write them as CSVs.
    GenerateData,
    /// Fit the net-load forecaster on the history split and save the model.
    ForecastTrain,
    /// Score a saved forecaster one-step-ahead over the evaluation days.
    ForecastEval {
        /// Model file written by forecast-train (default: <out>/model.json).
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Train a scheduling agent; writes checkpoint and learning curve.
    Train {
        /// Learner ablation: dqn, d2qn, d3qn, or d3qnper.
        #[arg(long)]
        variant: Option<String>,
        /// Episode budget.
        #[arg(long)]
        episodes: Option<usize>,
    },
    /// Evaluate a trained checkpoint over the held-out days.
    Evaluate {
        /// Checkpoint written by train (default: <out>/checkpoint.json).
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Run the uncontrolled charge-to-full baseline over the held-out days.
    Baseline,
    /// Solve the perfect-foresight program and run it closed-loop.
    Oracle,
    /// Merge run summaries into a comparison table (first = proposed).
    Compare {
        /// Paths to summary.json files; the first is the reference run.
        #[arg(required = true, num_args = 1..)]
        summaries: Vec<PathBuf>,
    },
    /// Print per-day battery health from a degradation.csv.
    DegradationReport {
        /// degradation.csv written by evaluate, baseline, or oracle.
        degradation: PathBuf,
    },
}

/// A failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn runtime(message: impl Into<String>) -> Self {
        Failure { code: EXIT_RUNTIME, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: EXIT_RUNTIME, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: EXIT_RUNTIME, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Loads the configuration file, or the defaults when none was given.
/// Unreadable and invalid files exit with distinct codes.
fn load_config(cli: &Cli) -> Result<AppConfig, Failure> {
    match &cli.config {
        None => Ok(AppConfig::default()),
        Some(path) => AppConfig::load(path).map_err(|e| match e {
            Error::Io(io) => Failure {
                code: EXIT_CONFIG_UNREADABLE,
                message: format!("cannot read {}: {io}", path.display()),
            },
            other => Failure {
                code: EXIT_CONFIG_INVALID,
                message: format!("invalid configuration {}: {other}", path.display()),
            },
        }),
    }
}

/// Creates the out directory and snapshots the resolved configuration there.
fn prepare_out_dir(cli: &Cli, config: &AppConfig) -> Result<(), Failure> {
    std::fs::create_dir_all(&cli.out)?;
    config.write_effective(&cli.out.join("effective-config.toml"))?;
    Ok(())
}

fn build_scenario(cli: &Cli, config: &AppConfig) -> Result<Scenario, Failure> {
    let sc = config.to_scenario_config(cli.seed)?;
    Ok(Scenario::generate(sc)?)
}

/// Forecast table for scheduling runs: day-ahead model forecasts from a
/// forecaster fitted on the history split, exactly as deployment would see.
fn build_forecast_table(
    cli: &Cli,
    config: &AppConfig,
    scenario: &Scenario,
) -> Result<ForecastTable, Failure> {
    let fc = config.to_forecast_config(cli.seed)?;
    let model = EdRvflModel::train(fc, scenario.forecast_training_series())?;
    Ok(ForecastTable::from_model(&model, scenario)?)
}

fn say(cli: &Cli, line: impl AsRef<str>) {
    if !cli.quiet {
        println!("{}", line.as_ref());
    }
}

fn write_run_artifacts(cli: &Cli, outcome: &EvalOutcome) -> Result<(), Failure> {
    outcome.trace.write_csv(&cli.out.join("trace.csv"))?;
    write_summary_json(&cli.out.join("summary.json"), &outcome.summary)?;
    write_degradation_csv(&cli.out.join("degradation.csv"), &outcome.degradation)?;
    Ok(())
}

fn report_summary(cli: &Cli, s: &RunSummary) {
    say(cli, format!("policy            {}", s.policy));
    say(cli, format!("days              {}", s.days));
    say(cli, format!("operating cost    {:.2}", s.operating_cost));
    say(cli, format!("  energy net      {:.2}", s.energy_net_cost));
    say(cli, format!("  cycling wear    {:.2}", s.ess_cycle_cost + s.ev_cycle_cost));
    say(cli, format!("  calendar (ess)  {:.2}", s.ess_calendar_cost));
    say(cli, format!("ev user cost      {:.2}", s.ev_user_cost));
    say(cli, format!("throughput kWh    ess {:.1} / ev {:.1}", s.csp_ess_kwh, s.csp_ev_kwh));
    say(cli, format!("window health     ess {:.4} / ev {:.4}", s.window_soh_ess, s.window_soh_ev));
    say(cli, format!("departure misses  {}", s.ev_departure_violations));
    say(cli, format!("mean decision     {:.1} us", s.mean_decision_latency_us));
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let config = load_config(cli)?;
    match &cli.command {
        Command::GenerateData => {
            prepare_out_dir(cli, &config)?;
            let scenario = build_scenario(cli, &config)?;
            export_scenario_csv(&scenario, &cli.out)?;
            say(
                cli,
                format!(
                    "wrote {} days ({} warmup, {} train, {} eval) to {}",
                    scenario.config.total_days(),
                    scenario.config.warmup_days,
                    scenario.config.train_days,
                    scenario.config.eval_days,
                    cli.out.display()
                ),
            );
            say(cli, format!("mean net load {:.1} kW", scenario.mean_net_kw()));
            Ok(())
        }

        Command::ForecastTrain => {
            prepare_out_dir(cli, &config)?;
            let scenario = build_scenario(cli, &config)?;
            let fc = config.to_forecast_config(cli.seed)?;
            let model = EdRvflModel::train(fc, scenario.forecast_training_series())?;
            let path = cli.out.join("model.json");
            model.save_json(&path)?;
            // In-sample one-step error, for a quick sanity read.
            let series = scenario.forecast_training_series();
            let predicted = model.predict_series_one_step(series)?;
            let window = model.config().window;
            let metrics = compute_metrics(&series[window..], &predicted)?;
            say(cli, format!("saved {}", path.display()));
            say(
                cli,
                format!(
                    "in-sample one-step: rmse {:.2} kW, mae {:.2} kW, mase {:.3}",
                    metrics.rmse, metrics.mae, metrics.mase
                ),
            );
            Ok(())
        }

        Command::ForecastEval { model } => {
            prepare_out_dir(cli, &config)?;
            let scenario = build_scenario(cli, &config)?;
            let model_path = model.clone().unwrap_or_else(|| cli.out.join("model.json"));
            if !model_path.exists() {
                return Err(Failure::runtime(format!(
                    "no model at {} (run forecast-train first or pass --model)",
                    model_path.display()
                )));
            }
            let model = EdRvflModel::load_json(&model_path)?;
            let eval_days = scenario.eval_day_range();
            let start = eval_days.start * 24;
            let end = eval_days.end * 24;
            // One-step-ahead over the evaluation window, conditioning on the
            // true history up to each hour.
            let mut predicted = Vec::with_capacity(end - start);
            for h in start..end {
                predicted.push(model.forecast(&scenario.nets[..h], 1)?[0]);
            }
            let metrics = compute_metrics(&scenario.nets[start..end], &predicted)?;
            let path = cli.out.join("forecast-metrics.json");
            let file = std::fs::File::create(&path)?;
            serde_json::to_writer_pretty(file, &metrics)
                .map_err(|e| Failure::runtime(e.to_string()))?;
            say(
                cli,
                format!(
                    "held-out one-step: rmse {:.2} kW, mae {:.2} kW, mase {:.3}, r2 {:.3}",
                    metrics.rmse, metrics.mae, metrics.mase, metrics.r2
                ),
            );
            say(cli, format!("wrote {}", path.display()));
            Ok(())
        }

        Command::Train { variant, episodes } => {
            prepare_out_dir(cli, &config)?;
            let scenario = build_scenario(cli, &config)?;
            let table = build_forecast_table(cli, &config, &scenario)?;
            let agent_config =
                config.to_agent_config(variant.as_deref(), *episodes, cli.seed)?;
            let mut options =
                TrainOptions::new(agent_config.episode_budget, scenario.config.temperature_k);
            options.dump_dir = Some(cli.out.clone());
            say(
                cli,
                format!(
                    "training {} for {} episodes on {} days",
                    agent_config.variant.as_str(),
                    agent_config.episode_budget,
                    scenario.config.train_days
                ),
            );
            let outcome = train_agent(&scenario, &table, agent_config, &options)?;
            outcome.agent.save_checkpoint(&cli.out.join("checkpoint.json"))?;
            write_learning_curve_csv(&cli.out.join("learning_curve.csv"), &outcome.curve)?;
            let last = outcome.curve.last().expect("positive episode budget");
            say(
                cli,
                format!(
                    "done in {:.1}s: final epsilon {:.3}, last-episode reward {:.1}",
                    outcome.wall_clock_s, last.epsilon, last.reward
                ),
            );
            say(cli, format!("wrote checkpoint.json and learning_curve.csv to {}", cli.out.display()));
            Ok(())
        }

        Command::Evaluate { checkpoint } => {
            prepare_out_dir(cli, &config)?;
            let scenario = build_scenario(cli, &config)?;
            let table = build_forecast_table(cli, &config, &scenario)?;
            let path = checkpoint.clone().unwrap_or_else(|| cli.out.join("checkpoint.json"));
            if !path.exists() {
                return Err(Failure::runtime(format!(
                    "no checkpoint at {} (run train first or pass --checkpoint)",
                    path.display()
                )));
            }
            let agent = DqnAgent::load_checkpoint(&path)?;
            let mut policy = GreedyAgentPolicy::new(agent);
            let options = EvalOptions::new(scenario.config.temperature_k);
            let outcome = evaluate_policy(&mut policy, &scenario, &table, &options)?;
            write_run_artifacts(cli, &outcome)?;
            report_summary(cli, &outcome.summary);
            Ok(())
        }

        Command::Baseline => {
            prepare_out_dir(cli, &config)?;
            let scenario = build_scenario(cli, &config)?;
            let table = build_forecast_table(cli, &config, &scenario)?;
            let options = EvalOptions::new(scenario.config.temperature_k);
            let outcome =
                evaluate_policy(&mut UncontrolledPolicy, &scenario, &table, &options)?;
            write_run_artifacts(cli, &outcome)?;
            report_summary(cli, &outcome.summary);
            Ok(())
        }

        Command::Oracle => {
            prepare_out_dir(cli, &config)?;
            let scenario = build_scenario(cli, &config)?;
            let table = build_forecast_table(cli, &config, &scenario)?;
            let oracle =
                DpOracle::solve(&OracleInputs::from_scenario(&scenario), OracleOptions::default())?;
            say(cli, format!("planned frozen-coefficient cost {:.2}", oracle.planned_cost()));
            let mut options = EvalOptions::new(scenario.config.temperature_k);
            // The program plans with frozen coefficients; keep the realized
            // accounting on the same basis.
            options.update_alpha = false;
            let outcome = {
                let mut policy = OraclePolicy::new(&oracle);
                evaluate_policy(&mut policy, &scenario, &table, &options)?
            };
            write_run_artifacts(cli, &outcome)?;
            report_summary(cli, &outcome.summary);
            Ok(())
        }

        Command::Compare { summaries } => {
            prepare_out_dir(cli, &config)?;
            let mut loaded = Vec::with_capacity(summaries.len());
            for path in summaries {
                loaded.push(read_summary_json(path).map_err(|e| {
                    Failure::runtime(format!("cannot read {}: {e}", path.display()))
                })?);
            }
            let (proposed, others) = loaded.split_first().expect("clap enforces at least one");
            let refs: Vec<&RunSummary> = others.iter().collect();
            let rows = comparison_rows(proposed, &refs);
            write_comparison_csv(&cli.out.join("comparison.csv"), &rows)?;
            say(cli, format!("{:<14} {:>14} {:>12} {:>8}", "policy", "operating", "delta", "pct"));
            for r in &rows {
                say(
                    cli,
                    format!(
                        "{:<14} {:>14.2} {:>12.2} {:>7.1}%",
                        r.policy,
                        r.operating_cost,
                        r.cost_delta_vs_proposed,
                        100.0 * r.cost_pct_vs_proposed
                    ),
                );
            }
            say(cli, format!("wrote {}", cli.out.join("comparison.csv").display()));
            Ok(())
        }

        Command::DegradationReport { degradation } => {
            let rows = read_degradation_csv(degradation)
                .map_err(|e| Failure::runtime(format!("cannot read {}: {e}", degradation.display())))?;
            if rows.is_empty() {
                return Err(Failure::runtime("degradation file has no rows"));
            }
            println!(
                "{:>5} {:>10} {:>10} {:>12} {:>12} {:>10} {:>10}",
                "day", "soh_ess", "soh_ev", "cyc_fade_e", "cyc_fade_v", "alpha_e", "alpha_v"
            );
            for r in &rows {
                println!(
                    "{:>5} {:>10.5} {:>10.5} {:>12.6} {:>12.6} {:>10.4} {:>10.4}",
                    r.day, r.soh_ess, r.soh_ev, r.cycle_fade_ess, r.cycle_fade_ev, r.alpha_ess,
                    r.alpha_ev
                );
            }
            let first = rows.first().expect("nonempty");
            let last = rows.last().expect("nonempty");
            println!(
                "health drop: ess {:.5}, ev {:.5} over {} days",
                first.soh_ess - last.soh_ess,
                first.soh_ev - last.soh_ev,
                rows.len()
            );
            Ok(())
        }
    }
}

//! Experiment harness: synthetic scenarios, the training loop, deployment
//! evaluation, the uncontrolled baseline, the perfect-foresight comparator,
//! run summaries, and multi-run fan-out.

pub mod baseline;
pub mod evaluate;
pub mod oracle;
pub mod parallel;
pub mod pipeline;
pub mod scenario;
pub mod summary;
pub mod train;

pub use baseline::UncontrolledPolicy;
pub use evaluate::{evaluate_policy, EvalOptions, EvalOutcome, GreedyAgentPolicy, Policy};
pub use oracle::{DpOracle, OracleInputs, OracleOptions, OraclePolicy};
pub use parallel::{parallel_map, parallel_map_with_limit, thread_limit, THREADS_ENV_VAR};
pub use pipeline::{episode_inputs, train_forecaster, ForecastTable};
pub use scenario::{
    export_scenario_csv, GeneratorParams, Scenario, ScenarioConfig, Season, TariffTiers,
};
pub use summary::{
    comparison_rows, frozen_alpha_cost, read_degradation_csv, read_summary_json,
    reconstruct_operating_cost, write_comparison_csv, write_degradation_csv, write_summary_json,
    ComparisonRow, DegradationRow, RunSummary,
};
pub use train::{
    read_learning_curve_csv, tail_improvement, train_agent, write_learning_curve_csv, CurvePoint,
    TrainOptions, TrainOutcome,
};

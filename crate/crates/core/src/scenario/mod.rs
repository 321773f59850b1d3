//! Scenario files, named experiments, result bundles and the self-test.

mod config;
mod output;
mod run;
mod selftest;

pub use config::{
    FiberSection, GridSection, InputSection, MeasurementSection, OutputSection, PulseShape,
    QuantumSection, ScenarioConfig, SolverKind, SolverSection, BUILTIN_SCENARIOS,
    GREEN_EXPORT_MAX_POINTS,
};
pub use output::{correlation_svg, squeeze_svg, OutputDir};
pub use run::{
    analyze_energy, output_root, run_scenario, EnergyAnalysis, EnergySummary, RunError, RunSummary,
    ScenarioOutcome, SweepSummary, DEFAULT_OUTPUT_ROOT, OUTPUT_ROOT_ENV,
};
pub use selftest::{parse_fault, selftest, CheckResult, SelftestReport, FAULT_NAMES};

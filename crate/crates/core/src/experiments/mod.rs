//! Parameter-grid suites comparing predicted and estimated exponents.

mod config;
mod plan;
mod report;
mod source;
mod suites;

pub use config::{
    ContentConfig, HopfConfig, PoincareConfig, ProjectionsConfig, SamplingConfig, SuiteConfig,
    TheoremPhaseConfig, ToleranceConfig, TricotConfig, SUITE_IDS,
};
pub use plan::{
    chirp_plan, family_diameter, family_plan, family_turn_gap, hopf_initial, hopf_plan, solve_gap,
    spiral_plan, Plan,
};
pub use report::{
    emit_report, load_report, passes, read_suite_csv, write_suite_csv, write_summary_csv, Row, SuiteResult,
};
pub use source::{BuildOptions, CurveSource, KeyValues, CHIRP_PHASE_T_MAX, SOURCE_KINDS};
pub use suites::{
    run_all, run_suite, suite_degenerate_content, suite_hopf, suite_poincare, suite_projections,
    suite_theorem_phase, suite_tricot_baselines,
};

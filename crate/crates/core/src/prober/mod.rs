//! Stabilizability experiments: toppling growth over nested volumes, its
//! finite-scale classification, critical-density brackets, and checks of
//! exact identities.

mod bracket;
mod classify;
mod green_check;
mod policy;
mod probe;
mod theory;

pub use bracket::{critical_bracket, probe_density, CriticalBracket, DensityFamily, DensityPoint};
pub use classify::{classify, majority, Verdict, VerdictClass, MIN_SERIES_LEN};
pub use green_check::{green_identity_check, GreenCheck};
pub use policy::{default_schedule, doubling_schedule, schedule_from_sides, ProbePolicy};
pub use probe::{check_nested, nested_probe, obstacle_lower_bound_1d, probe_config, ProbeSeries};
pub use theory::{
    counterexample_6bar, d1_exact_check, rectangle_lower_bound, D1Expectation, D1Report, RectangleBound,
    SixBarReport,
};

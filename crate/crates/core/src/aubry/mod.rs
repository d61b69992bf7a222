//! Aubry-Mather machinery: configurations, minimizers, barriers and exact
//! continued-fraction arithmetic.

mod barrier;
mod chain;
mod config;
mod minimal;
mod rational;

pub use barrier::{
    barrier_csv, barrier_rational, barrier_signed, configuration_csv, BarrierSample, PeriodicBarrier, Sign,
    SignedBarrier, WindowSchedule, WindowValue,
};
pub(crate) use config::check_reduced;
pub use config::{crossing_count, nondensity_gap, rotation_symbol_of, Configuration, Period, RotationSymbol};
pub use minimal::{minimal_periodic, minimize_segment, periodic_residual, Minimizer, PeriodicMinimizer, KKT_TOL};
pub use rational::{
    convergents, liouville_deficiency, liouville_partial_sum, log10_liouville_deficiency, Convergent,
    ContinuedFraction,
};

//! Pure-birth continuous-time Markov chain model of infection spread.
//!
//! State `k` counts infected individuals out of a population of `N`; the
//! chain only moves `k → k + 1`, at a rate set by one of the families in
//! [`rate_models`]. The crate provides:
//!
//! - exact and large-population expected absorption times, plus the
//!   hypoexponential law of the absorption time ([`analytic`]);
//! - numerical solutions of the forward equations ([`forward_solver`]);
//! - reproducible exact-event simulation ([`montecarlo`]);
//! - the `purebirth` command-line front end ([`cli`]).

// `!(x > 0.0)` style checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod cli;
pub mod error;
pub mod forward_solver;
pub mod montecarlo;
pub mod rate_models;
pub mod summation;

pub use analytic::{
    expected_absorption_time, expected_absorption_time_approx, harmonic_number, hitting_time_distribution,
    powerlaw_expected_time, AbsorptionTimeReport, HittingTimeDistribution, PowerLawRegime, PowerLawReport,
};
pub use error::{Error, Result};
pub use forward_solver::{
    absorption_probability, forward_grid, forward_probabilities, mean_state, DistributionSnapshot, Method,
    SolverConfig,
};
pub use montecarlo::{
    empirical_distribution_at, estimate_absorption_time, explosion_study, simulate_path, Execution,
    MonteCarloSummary, StateHistogram, Trajectory,
};
pub use rate_models::{build_rate_model, Family, ModelSpec, RateModel};

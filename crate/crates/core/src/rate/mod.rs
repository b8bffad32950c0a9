//! Rate functionals: `Θ(w)`, `ω_θ` and the two min-max problems.

pub mod closed_form;
pub mod grid;
pub mod heuristic;
pub mod lp;
pub mod solver;
pub mod theta;

pub use closed_form::{
    icc_closed_form, icc_z2z4_closed_form, icc_zpr_closed_form, isc_closed_form,
    isc_z2z4_closed_form, isc_zpr_closed_form,
};
pub use grid::{grid_search, GridResult};
pub use heuristic::{optimize_test_channel, HeuristicOptions, HeuristicResult};
pub use solver::{
    channel_terms, evaluate_at, icc, isc, solve_minimax, source_terms, term_ratio, RateResult,
    Sense, SolverOptions, ThetaTerm, ThetaTerms,
};
pub use theta::{
    enumerate_theta, enumerate_theta_pinned, omega, omega_coefficients, omega_scaled,
    scale_weights, theta_of_thetahat, unscale_weights, Support, WeightVector,
};

//! A laboratory for difference-of-convex (DC) minimization.
//!
//! * [`instance`]: the `f = g - h` abstraction and a quadratic smoke test.
//! * [`solver`]: the DC algorithm (DCA) with exact or iterative subproblems.
//! * [`adversarial`]: a one-dimensional instance on which DCA converges at
//!   exactly `|grad f(x_k)| = (k+1)^-(1/2+delta)`.
//! * [`analysis`]: checks of the averaged-gradient and descent-sum
//!   inequalities along recorded trajectories.
//! * [`baseline`]: fixed-step steepest descent for comparison.
//! * [`io`]: CSV/JSON trajectory and report files.

pub mod adversarial;
pub mod analysis;
pub mod baseline;
pub mod error;
pub mod instance;
pub mod io;
pub mod solver;
pub mod zeta;

pub use adversarial::{
    build_adversarial, figure_data, theoretical_grad_norm, zeta_lower_bound, AdversarialInstance,
};
pub use analysis::{
    descent_sum_check, iterations_to_eps, numerator_sequence, scaled_rate_table, thm1_check,
    RateReport,
};
pub use baseline::{run_steepest_descent, GdConfig};
pub use error::DcError;
pub use instance::{
    f_grad, f_value, finite_diff_check, make_quadratic_dc, DcInstance, Domain, Point, QuadraticDc,
};
pub use solver::{
    dca_step, run_dca, solve_subproblem, solve_subproblem_from, IterateRecord, SolveFailure,
    SolverConfig, Termination, Trajectory,
};

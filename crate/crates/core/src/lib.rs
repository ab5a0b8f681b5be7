//! Scaling-law engine with time and efficiency growth.
//!
//! Loss falls with cumulative compute as `L ∝ C^(−κ)`, and usable compute per
//! unit time and power doubles at rate `γ` per year. The crate evaluates the
//! resulting relative-loss curve, inverts it for time-to-target, runs
//! multi-year fleet scenarios, and does GPU-hour accounting.
//!
//! ```
//! use scaling_horizon::{time_to_target, ScalingConfig};
//!
//! let config = ScalingConfig::new(0.048, 0.5).unwrap();
//! let years = time_to_target(&config, 0.68).unwrap().time_to_target;
//! assert!((years - 20.13).abs() < 0.01);
//! ```

pub mod accounting;
pub mod error;
pub mod scaling;
pub mod scenario;
pub mod solve;

pub use accounting::{
    account_table, kappa_from_exponents, logical_compute, mean_field_power, optimal_allocation,
    optimal_loss_exponent_check, reference_gpu_hours, relative_efficiency, LossSurface,
    ModelAccount,
};
pub use error::{Error, Result};
pub use scaling::{
    asymptotic_halving_time, delta_compute_ratio, efficiency_at, loss_at, relative_loss,
    relative_loss_perturbed, sample_trajectory, static_relative_loss, ScalingConfig,
    TrajectoryPoint, TrajectorySeries,
};
pub use scenario::{
    compare, find_preset, initial_loss, presets, run_scenario, run_scenario_with, Scenario,
    ScenarioResult, ValueSource,
};
pub use solve::{
    horizon_grid, sensitivity_slope, space_unfold_factor, time_to_target, time_to_target_perturbed,
    Branch, Perturbation, SolveResult,
};

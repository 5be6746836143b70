//! Load and current optimizers.
//!
//! The parasitic reactances are chosen in closed form from a diagonal
//! approximation of `Z_P` under which every load acts as an independent
//! Lorentzian-constrained weight. The active currents then follow from a
//! power-constrained matched filter on the effective system. A multistart
//! numerical optimizer of the exact beam pattern and a random-search baseline
//! are provided for comparison.

mod active_current;
mod baseline;
mod closed_form;
mod lorentzian;
mod oracle;

pub use active_current::{optimal_active_current, optimal_current, PD_TOLERANCE};
pub use baseline::{random_search_baseline, BaselineConfig};
pub use closed_form::{
    closed_form_phase, closed_form_reactance_hybrid, closed_form_reactance_los, unit_phases, ClosedFormLoads,
    ClosedFormPhases,
};
pub use lorentzian::{
    approx_beam_pattern, reactance_to_weight, weight_from_reactance, weight_to_reactance, zeta, ApproxObjective,
    LorentzianWeight, Reactance,
};
pub use oracle::{numerical_oracle_los, OracleConfig, OracleResult};

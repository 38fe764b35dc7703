//! Predictions for entangled neutral-kaon pairs from φ decay.
//!
//! * [`qm`]: closed-form quantum joint probabilities and asymmetry
//! * [`local_realism`]: realistic kaon states and the asymmetry interval
//!   allowed by any local model
//! * [`montecarlo`]: explicit local hidden-variable models, simulated
//!   event by event
//! * [`chsh`]: schedules, CHSH functionals and the violation scanner
//!
//! Times are proper times in units of the K_S lifetime τ_S.

pub mod chsh;
pub mod error;
pub mod local_realism;
pub mod montecarlo;
pub mod optimize;
pub mod params;
pub mod qm;

pub use chsh::{
    find_extremal_violation, locality_check, s_from_probs, s_qm, s_stable, s_unrenormalized,
    simulate_chsh, ChshEstimate, ChshInputs, ChshSchedule, ChshValue, LocalityVerdict,
};
pub use error::{Error, Result};
pub use local_realism::{
    asymmetry_bounds, initial_pair_assignments, lr_gap, q_fraction, AsymmetryBounds,
    InitialPairAssignment, QSign, RealisticKaonState,
};
pub use montecarlo::{
    estimate_asymmetry, run_experiment, sample_pair, strangeness_at, CountsTable,
    EstimateWithError, HiddenVariables, HvModel, Outcome,
};
pub use optimize::{Extremum, Objective};
pub use params::{default_params, load_params, validate, ParamError, ParameterSet};
pub use qm::{
    joint_cp_prob, joint_strangeness_prob, qm_asymmetry, renormalized_joint, survival_factor,
    survival_prob, CpEigenvalue, Strangeness,
};

//! Normalized Ricci-DeTurck evolution on a collar chart.

pub mod deturck;
pub mod linsolve;
pub mod operator;
pub mod rescale;
pub mod stepper;

pub use deturck::{deturck_vector_field, DeturckField};
pub use linsolve::{BlockTridiag, ImplicitSolver, LinearOperator};
pub use operator::{
    ansatz_defect, condition_decompose, lichnerowicz_apply, quadratic_part, rdtf_rhs,
    rhs_and_linear, Decomposition,
};
pub use rescale::{normalize_time, unnormalize_time, UnnormalizedSample};
pub use stepper::{
    explicit_dt_limit, run_flow, run_with, step, Boundary, FlowConfig, FlowFlags, FlowSample, FlowTrace, Scheme,
    Snapshot, Stepper, CFL, ROUNDOFF_FLOOR,
};

//! Weighted 0-Hoelder norm estimators, Whitney covers and derivative operators.

pub mod derivative;
pub mod norms;
pub mod whitney;

pub use derivative::{b_derivative, zero_derivative, ZeroDirection};
pub use norms::{
    c2_norm, path_c2_norm, path_weighted_sup, tangential_regularity_report, tensor_holder_norm,
    tensor_sup_report, tensor_weighted_sup, weighted_holder_norm, weighted_sup, NormReport,
};
pub use whitney::{whitney_cover, WhitneyBall, WhitneyCover};

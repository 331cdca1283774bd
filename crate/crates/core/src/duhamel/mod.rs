//! Heat operator, Duhamel convolution and the Picard contraction.

pub mod heat;
pub mod picard;

pub use heat::{
    commutator_check, duhamel_convolve, dy_tensor, heat_apply, weight_preservation,
    CommutatorReport, HeatPropagator,
};
pub use picard::{contraction_estimate, picard_solve, DuhamelReport, PicardConfig};

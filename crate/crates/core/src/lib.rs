//! Numerical laboratory for the normalized Ricci-DeTurck flow of conformally
//! compact, asymptotically hyperbolic metrics on collar charts.

pub mod duhamel;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod spaces;
pub mod stability;

pub use error::{FlowError, Result};
pub use flow::{run_flow, step, Boundary, FlowConfig, FlowTrace, Scheme};
pub use geometry::{build_background, Anisotropy, Background, CollarChart, MetricState, Mode, ZeroFrameTensor};

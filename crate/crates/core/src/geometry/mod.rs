//! Collar charts, tensor fields and pointwise differential geometry.

pub mod background;
pub mod chart;
pub mod curvature;
pub mod inverse;
pub mod jet;
pub mod perturb;
pub mod state;
pub mod stencil;
pub mod tensor;

pub use background::{Background, BackgroundGeometry, NodeGeometry};
pub use chart::{Anisotropy, CollarChart, Mode};
pub use curvature::{
    admissibility_check, christoffel, curvature_error, riemann_ricci, AdmissibilityReport,
    CurvatureBundle,
};
pub use inverse::{inverse_expansion, InverseExpansion};
pub use state::{build_background, build_background_with, MetricState};
pub use stencil::SClosure;
pub use tensor::{ScalarField, ZeroFrameTensor};

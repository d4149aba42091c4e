//! Local hidden-variable models and the quadrature that turns them into rates.

mod io;
mod model;
mod quadrature;
mod sampler;
mod series;
mod two_tier;

pub use io::ModelDocument;
pub use model::{lhv_coincidence_ratio, lhv_singles_ratio, model_scan, Arm, Correlation, HiddenVariableModel};
pub use quadrature::{gauss_legendre, nodes, Nodes, QuadratureSpec, Rule};
pub use sampler::{sample_admissible_model, sample_two_tier, sample_with, Family, SamplerSpec};
pub use series::AngularSeries;
pub use two_tier::{effective_response, MuDensity, ResponseKernel, TwoTierModel};

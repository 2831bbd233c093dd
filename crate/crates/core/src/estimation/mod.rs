//! Estimators of the marginal CDF G, the alternative weight a, and the
//! alternative CDF F.

mod density;
mod ecdf;
mod null_fraction;
mod projection;
mod qhat;

pub use density::{default_bandwidth, kernel_density, KernelDensity, GRID_POINTS};
pub use ecdf::{ecdf, EcdfEstimate, EcdfVariant, LinearPiece};
pub use null_fraction::{
    astar_lower, dkw_epsilon, kernel_a_consistent, storey_a0, NullFractionEstimate, NullFractionMethod, DEFAULT_T0,
};
pub use projection::{project_f, projection_objective, Projection, ProjectionShape};
pub use qhat::{q_hat, QHat};

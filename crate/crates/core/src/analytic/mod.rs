//! Exact analysis of the two-group (`r = 2`) chain: inversion of the season map,
//! bivariate and transition densities, conditional forecasts and the stationary law.

mod inverse;
mod kernel;
mod mixed;
mod stationary;

pub use inverse::{
    g_function, g_partials, in_region_a, re_r2, region_check, region_upper_re, solve_delta_star,
    InversePoint, RegionViolation,
};
pub use kernel::{lognormal_cdf, DensityPoint, R2Model, BOUNDARY_GAP, TAU_TAIL_MASS};
pub use mixed::MixedDensity1D;
pub use stationary::{
    KernelMatrix, KernelRoute, StationaryConditional, StationaryLaw, StationaryOptions,
    DEFAULT_GRID, UNBOUNDED_SUPPORT_UPPER,
};

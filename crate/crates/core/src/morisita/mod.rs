//! Multipoint Morisita index and the intrinsic-dimension estimator built on it.

mod grid;
mod heuristic;
mod mindid;
mod scales;

pub(crate) use grid::check_unit_cube;
pub use grid::{
    cell_index, falling_factorial, falling_sum, index_from_sums, log_index_from_sums,
    morisita_index, point_to_quadrat, Occupancy,
};
pub use heuristic::{
    choose_scales, ScaleChoice, ScaleSearch, DOUBLING_THRESHOLD, FLAT_RMS_RESIDUAL,
    LINEARITY_R_SQUARED,
};
pub use mindid::{cell_sums, mindid, IdEstimate};
pub use scales::ScaleSet;

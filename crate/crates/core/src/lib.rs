//! Intrinsic-dimension based feature selection for regression.
//!
//! The crate estimates the intrinsic dimension of point sets with the
//! multipoint Morisita index, ranks regression features by how much they
//! reduce the dimension the target adds on top of them, and validates the
//! resulting subsets with an extreme learning machine.
//!
//! - [`dataset`]: CSV ingestion, rescaling to the unit cube, subsetting.
//! - [`morisita`]: quadrat counting, the index, the dimension estimator and
//!   the scale heuristic.
//! - [`filter`]: the forward-selection filter, relevance coefficient and
//!   redundancy diagnostic.
//! - [`simgen`]: butterfly and Friedman generators plus a Monte Carlo driver.
//! - [`eval`]: extreme learning machine and the split/cross-validation protocol.
//! - [`report`]: SVG profile plots.
//! - [`cli`]: the `mbfr` command-line entry point.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod filter;
pub mod fit;
pub mod morisita;
pub mod report;
pub mod simgen;

pub use dataset::{Dataset, LoadOptions, RescaleRecord};
pub use error::{Error, Result};
pub use filter::{
    classify_rejected, dimensional_relevance, dissimilarity, mbfr_select, Dissimilarity, DrReport,
    RedundancyScore, SelectionTrace, StepRecord,
};
pub use morisita::{choose_scales, mindid, morisita_index, IdEstimate, ScaleSearch, ScaleSet};

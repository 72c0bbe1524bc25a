use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{check_unit_cube, falling_factorial, log_index_from_sums, Occupancy};
use super::scales::ScaleSet;
use crate::error::{Error, Result};
use crate::fit::fit_line;

/// Morisita intrinsic-dimension estimate for one point set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdEstimate {
    /// Index order.
    pub m: u32,
    pub scales: ScaleSet,
    /// `(ln k, ln I_{m,k})` for every scale with a positive index.
    pub log_points: Vec<[f64; 2]>,
    /// Morisita slope: OLS slope of the log points.
    pub slope: f64,
    /// `E - slope / (m - 1)`.
    pub intrinsic_dim: f64,
    pub embedding_dim: usize,
    pub warnings: Vec<String>,
}

impl IdEstimate {
    /// Builds the estimate from the per-scale falling sums of the occupied cells.
    ///
    /// `cell_sums[s]` belongs to `scales[s]`; `total` is `N (N-1) ... (N-m+1)`.
    pub fn from_sums(
        embedding_dim: usize,
        m: u32,
        scales: &ScaleSet,
        cell_sums: &[u128],
        total: u128,
    ) -> Result<IdEstimate> {
        debug_assert_eq!(cell_sums.len(), scales.len());
        let mut warnings = Vec::new();
        let mut log_points = Vec::with_capacity(scales.len());
        for (k, &s) in scales.iter().zip(cell_sums) {
            if s == 0 {
                warnings.push(format!(
                    "scale {k} excluded: no quadrat holds {m} or more points"
                ));
                continue;
            }
            log_points.push([
                f64::from(k).ln(),
                log_index_from_sums(embedding_dim, m, k, s, total),
            ]);
        }
        if log_points.len() < 2 {
            return Err(Error::TooFewScales {
                usable: log_points.len(),
            });
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = log_points.iter().map(|p| (p[0], p[1])).unzip();
        let slope = fit_line(&xs, &ys)
            .ok_or_else(|| Error::Numerical("degenerate log-log fit".into()))?
            .slope;
        let order = f64::from(m - 1);
        let intrinsic_dim = embedding_dim as f64 - slope / order;
        if slope < -0.1 * order || intrinsic_dim > embedding_dim as f64 + 0.1 {
            warnings.push(format!(
                "implausible estimate: slope {slope:.4} gives dimension {intrinsic_dim:.4} in {embedding_dim} dimensions"
            ));
        }
        for w in &warnings {
            log::debug!("{w}");
        }
        Ok(IdEstimate {
            m,
            scales: scales.clone(),
            log_points,
            slope,
            intrinsic_dim,
            embedding_dim,
            warnings,
        })
    }
}

/// Falling sums of the occupied cells of `columns` at every scale.
pub fn cell_sums(columns: &[&[f64]], n: usize, m: u32, scales: &ScaleSet) -> Vec<u128> {
    scales
        .as_slice()
        .par_iter()
        .map(|&k| Occupancy::of_columns(columns, n, k).falling_sum(m))
        .collect()
}

/// Morisita estimate of the intrinsic dimension of the points whose
/// coordinates are given column by column, all in `[0, 1]`.
pub fn mindid(columns: &[&[f64]], m: u32, scales: &ScaleSet) -> Result<IdEstimate> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "index order m={m} must be >= 2"
        )));
    }
    if columns.is_empty() {
        return Err(Error::Shape("no columns".into()));
    }
    let n = check_unit_cube(columns)?;
    if n < m as usize {
        return Err(Error::TooFewPoints {
            needed: m as usize,
            got: n,
        });
    }
    let sums = cell_sums(columns, n, m, scales);
    IdEstimate::from_sums(
        columns.len(),
        m,
        scales,
        &sums,
        falling_factorial(n as u64, m),
    )
}

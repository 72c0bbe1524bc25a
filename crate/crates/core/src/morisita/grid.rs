//! Sparse quadrat counting over the unit cube.
//!
//! A grid with `k` cells per axis is laid over `[0, 1]^E`. Rather than
//! allocating the `k^E` cells, the occupied cells are discovered one axis at a
//! time: each row carries a compact label for the cell it occupies in the
//! columns seen so far, and adding a column splits every label by the row's
//! cell index on that axis. Only occupied cells ever exist, so the cost is
//! `O(N)` hash operations per column and scale.

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};

/// Cell index along one axis. Cells are half-open `[c/k, (c+1)/k)` except the
/// last one, which also holds the coordinate `1.0`.
#[inline]
pub fn cell_index(x: f64, inv_edge: u32) -> u32 {
    // truncation is floor for x >= 0
    ((x * f64::from(inv_edge)) as u32).min(inv_edge - 1)
}

/// The E-tuple of per-axis cell indices holding `coords`.
pub fn point_to_quadrat(coords: &[f64], inv_edge: u32) -> Result<Vec<u32>> {
    if inv_edge == 0 {
        return Err(Error::InvalidScales(
            "inverse edge length must be >= 1".into(),
        ));
    }
    coords
        .iter()
        .enumerate()
        .map(|(axis, &x)| {
            if (0.0..=1.0).contains(&x) {
                Ok(cell_index(x, inv_edge))
            } else {
                Err(Error::OutsideUnitCube {
                    column: axis,
                    value: x,
                })
            }
        })
        .collect()
}

pub(crate) fn check_unit_cube(columns: &[&[f64]]) -> Result<usize> {
    let n = columns.first().map_or(0, |c| c.len());
    for (j, col) in columns.iter().enumerate() {
        if col.len() != n {
            return Err(Error::Shape(format!(
                "column {j} has {} rows, expected {n}",
                col.len()
            )));
        }
        if let Some(&v) = col.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::OutsideUnitCube {
                column: j,
                value: v,
            });
        }
    }
    Ok(n)
}

/// `n (n-1) ... (n-m+1)`, zero when `n < m`.
pub fn falling_factorial(n: u64, m: u32) -> u128 {
    if n < u64::from(m) {
        return 0;
    }
    (0..u64::from(m)).fold(1u128, |acc, i| acc * u128::from(n - i))
}

/// Occupancy of the grid cells by the rows of a point set, restricted to the
/// columns folded in so far.
#[derive(Clone, Debug)]
pub struct Occupancy {
    labels: Vec<u32>,
    counts: Vec<u32>,
}

impl Occupancy {
    /// Every row in one cell: the grid over zero columns.
    pub fn single(n: usize) -> Self {
        Occupancy {
            labels: vec![0; n],
            counts: vec![n as u32],
        }
    }

    /// Occupancy of `columns` at `inv_edge` cells per axis. Values must lie in `[0, 1]`.
    pub fn of_columns(columns: &[&[f64]], n: usize, inv_edge: u32) -> Self {
        columns
            .iter()
            .fold(Occupancy::single(n), |occ, col| occ.refine(col, inv_edge))
    }

    pub fn n_points(&self) -> usize {
        self.labels.len()
    }

    /// Points per occupied cell, in order of first appearance.
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Splits every occupied cell along one more axis.
    pub fn refine(&self, column: &[f64], inv_edge: u32) -> Occupancy {
        let mut labels = Vec::with_capacity(self.labels.len());
        let counts = self.split(column, inv_edge, |l| labels.push(l));
        Occupancy { labels, counts }
    }

    /// Cell counts after refining with `column`, without keeping row labels.
    pub fn refined_counts(&self, column: &[f64], inv_edge: u32) -> Vec<u32> {
        self.split(column, inv_edge, |_| {})
    }

    fn split(&self, column: &[f64], inv_edge: u32, mut emit: impl FnMut(u32)) -> Vec<u32> {
        debug_assert_eq!(column.len(), self.labels.len());
        let k = u64::from(inv_edge);
        let cap = (self.counts.len() * inv_edge as usize).min(self.labels.len());
        let mut ids: FxHashMap<u64, u32> = FxHashMap::default();
        ids.reserve(cap);
        let mut counts: Vec<u32> = Vec::with_capacity(cap);
        for (&label, &x) in self.labels.iter().zip(column) {
            let key = u64::from(label) * k + u64::from(cell_index(x, inv_edge));
            let next = counts.len() as u32;
            let id = *ids.entry(key).or_insert(next);
            if id == next {
                counts.push(0);
            }
            counts[id as usize] += 1;
            emit(id);
        }
        counts
    }

    /// `sum_i n_i (n_i - 1) ... (n_i - m + 1)` over occupied cells.
    pub fn falling_sum(&self, m: u32) -> u128 {
        falling_sum(&self.counts, m)
    }
}

pub fn falling_sum(counts: &[u32], m: u32) -> u128 {
    // exact integer accumulation: independent of summation order
    counts
        .iter()
        .map(|&c| falling_factorial(u64::from(c), m))
        .sum()
}

/// Index value from its integer ingredients:
/// `Q^(m-1) * S / D` with `Q = k^E`, `S` the falling sum over cells and
/// `D = N (N-1) ... (N-m+1)`.
pub fn index_from_sums(
    embedding_dim: usize,
    m: u32,
    inv_edge: u32,
    cell_sum: u128,
    total: u128,
) -> f64 {
    let q_pow = f64::from(inv_edge).powi((embedding_dim * (m as usize - 1)) as i32);
    q_pow * (cell_sum as f64 / total as f64)
}

/// Natural log of [`index_from_sums`], finite even when `Q^(m-1)` overflows.
pub fn log_index_from_sums(
    embedding_dim: usize,
    m: u32,
    inv_edge: u32,
    cell_sum: u128,
    total: u128,
) -> f64 {
    (m - 1) as f64 * embedding_dim as f64 * f64::from(inv_edge).ln() + (cell_sum as f64).ln()
        - (total as f64).ln()
}

/// The multipoint Morisita index of a point set in the unit cube.
///
/// `columns` holds one slice per dimension. Only occupied quadrats are
/// enumerated.
pub fn morisita_index(columns: &[&[f64]], m: u32, inv_edge: u32) -> Result<f64> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "index order m={m} must be >= 2"
        )));
    }
    if inv_edge == 0 {
        return Err(Error::InvalidScales(
            "inverse edge length must be >= 1".into(),
        ));
    }
    let n = check_unit_cube(columns)?;
    if n < m as usize {
        return Err(Error::TooFewPoints {
            needed: m as usize,
            got: n,
        });
    }
    let occ = Occupancy::of_columns(columns, n, inv_edge);
    Ok(index_from_sums(
        columns.len(),
        m,
        inv_edge,
        occ.falling_sum(m),
        falling_factorial(n as u64, m),
    ))
}

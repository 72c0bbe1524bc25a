//! Automatic choice of the analysis scales from the log-log plot of the
//! full data set.
//!
//! 1. Probe `ln I_{2,k}` against `ln k` for `k = 1..=probe_max`.
//! 2. Keep the longest contiguous window that is linear, never reaching past
//!    the last `k` at which some quadrat still holds two points.
//! 3. Thin the window to a doubling progression when its upper end is 30 or more.

use serde::Serialize;

use super::grid::{check_unit_cube, falling_factorial, log_index_from_sums};
use super::mindid::cell_sums;
use super::scales::ScaleSet;
use crate::error::{Error, Result};
use crate::fit::{fit_line, LineFit};

/// Minimum coefficient of determination for a window to count as linear.
pub const LINEARITY_R_SQUARED: f64 = 0.99;
/// A window whose RMS residual (natural-log units) is at most this is linear
/// even when R² is meaningless because the plot is flat.
pub const FLAT_RMS_RESIDUAL: f64 = 0.01;
/// Upper bounds at or above this are thinned to a doubling progression.
pub const DOUBLING_THRESHOLD: u32 = 30;

#[derive(Clone, Debug)]
pub struct ScaleSearch {
    pub probe_max: u32,
    pub min_r_squared: f64,
    pub flat_rms: f64,
    /// Shortest window the linearity bar is applied to.
    pub min_window: usize,
    /// Among equally long linear windows, take the steepest one.
    pub prefer_steepest: bool,
}

impl Default for ScaleSearch {
    fn default() -> Self {
        ScaleSearch {
            probe_max: 130,
            min_r_squared: LINEARITY_R_SQUARED,
            flat_rms: FLAT_RMS_RESIDUAL,
            min_window: 3,
            prefer_steepest: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScaleChoice {
    pub scales: ScaleSet,
    /// Inclusive bounds of the selected linear window.
    pub window: (u32, u32),
    pub slope: f64,
    pub r_squared: f64,
    /// Largest probed `k` with a quadrat holding at least two points.
    pub upper_cap: u32,
    /// `(k, ln I_{2,k})` for every probed scale with a positive index.
    pub probe: Vec<(u32, f64)>,
    pub warnings: Vec<String>,
}

struct Window {
    lo: usize,
    hi: usize,
    fit: LineFit,
}

impl Window {
    fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    fn r2(&self) -> f64 {
        // a flat plot is a perfect line for this purpose
        if self.fit.r_squared.is_nan() {
            1.0
        } else {
            self.fit.r_squared
        }
    }
}

/// Runs the three-step scale heuristic on a point set in the unit cube,
/// normally the full data set including the target.
pub fn choose_scales(columns: &[&[f64]], search: &ScaleSearch) -> Result<ScaleChoice> {
    if search.probe_max < 2 {
        return Err(Error::InvalidArgument("probe_max must be >= 2".into()));
    }
    let n = check_unit_cube(columns)?;
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    let e = columns.len();
    let probe_set = ScaleSet::range(1, search.probe_max)?;
    let sums = cell_sums(columns, n, 2, &probe_set);
    let total = falling_factorial(n as u64, 2);

    // k = 1 always has a positive sum, so the leading run is never empty
    let run = sums.iter().take_while(|&&s| s > 0).count();
    let upper_cap = run as u32;
    let probe: Vec<(u32, f64)> = (1..=upper_cap)
        .zip(&sums)
        .map(|(k, &s)| (k, log_index_from_sums(e, 2, k, s, total)))
        .collect();
    if probe.len() < 2 {
        return Err(Error::TooFewScales {
            usable: probe.len(),
        });
    }
    let xs: Vec<f64> = probe.iter().map(|&(k, _)| f64::from(k).ln()).collect();
    let ys: Vec<f64> = probe.iter().map(|&(_, y)| y).collect();

    let mut windows = Vec::new();
    for lo in 0..probe.len() {
        for hi in lo + 1..probe.len() {
            if let Some(fit) = fit_line(&xs[lo..=hi], &ys[lo..=hi]) {
                windows.push(Window { lo, hi, fit });
            }
        }
    }
    let is_linear = |w: &Window| {
        w.len() >= search.min_window
            && (w.fit.r_squared >= search.min_r_squared || w.fit.rms_residual <= search.flat_rms)
    };
    let tie_score = |w: &Window| {
        if search.prefer_steepest {
            w.fit.slope.abs()
        } else {
            w.r2()
        }
    };

    let mut warnings = Vec::new();
    let best = windows.iter().filter(|w| is_linear(w)).max_by(|a, b| {
        a.len()
            .cmp(&b.len())
            .then(tie_score(a).total_cmp(&tie_score(b)))
            // earliest window on a full tie
            .then(b.lo.cmp(&a.lo))
    });
    let best = match best {
        Some(w) => w,
        None => {
            let min_len = if probe.len() >= search.min_window {
                search.min_window
            } else {
                2
            };
            let w = windows
                .iter()
                .filter(|w| w.len() >= min_len)
                .max_by(|a, b| a.r2().total_cmp(&b.r2()).then(b.lo.cmp(&a.lo)))
                .ok_or(Error::TooFewScales {
                    usable: probe.len(),
                })?;
            warnings.push(format!(
                "no window meets the linearity bar (R² >= {}); using the best window with R² = {:.4}",
                search.min_r_squared,
                w.r2()
            ));
            w
        }
    };
    let (lo, hi) = (probe[best.lo].0, probe[best.hi].0);
    let scales = if hi >= DOUBLING_THRESHOLD {
        ScaleSet::doubling(lo, hi)?
    } else {
        ScaleSet::range(lo, hi)?
    };
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(ScaleChoice {
        scales,
        window: (lo, hi),
        slope: best.fit.slope,
        r_squared: best.fit.r_squared,
        upper_cap,
        probe,
        warnings,
    })
}

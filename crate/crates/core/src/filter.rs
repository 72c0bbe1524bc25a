//! Morisita-based filter for regression.
//!
//! The dissimilarity between a feature set `F` and the target `Y` is the
//! increase in estimated intrinsic dimension when `Y` joins `F`:
//! `M2(F, Y) - M2(F)`. Relevant, non-redundant features drive it towards 0;
//! irrelevant ones leave it near `M2(Y)`. Selection is sequential forward
//! search on that quantity.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::morisita::{
    check_unit_cube, falling_factorial, falling_sum, mindid, IdEstimate, Occupancy, ScaleSet,
};

/// The filter always works with the pair-count index.
pub const INDEX_ORDER: u32 = 2;

/// Fraction of `M2(Y)` used by [`SelectionTrace::knee`].
pub const KNEE_TOLERANCE: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dissimilarity {
    pub diss: f64,
    pub id_with_target: f64,
    pub id_without_target: f64,
}

impl Dissimilarity {
    fn new(id_with_target: f64, id_without_target: f64) -> Self {
        Dissimilarity {
            diss: id_with_target - id_without_target,
            id_with_target,
            id_without_target,
        }
    }
}

/// `M2(F, Y) - M2(F)` for feature columns `F` and target column `Y`, all in `[0, 1]`.
pub fn dissimilarity(
    features: &[&[f64]],
    target: &[f64],
    scales: &ScaleSet,
) -> Result<Dissimilarity> {
    if features.is_empty() {
        return Err(Error::InvalidArgument(
            "dissimilarity needs at least one feature".into(),
        ));
    }
    let mut with: Vec<&[f64]> = features.to_vec();
    with.push(target);
    let id_with = mindid(&with, INDEX_ORDER, scales)?;
    let id_without = mindid(features, INDEX_ORDER, scales)?;
    Ok(Dissimilarity::new(
        id_with.intrinsic_dim,
        id_without.intrinsic_dim,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub feature: String,
    pub diss: f64,
    pub id_with_target: f64,
    pub id_without_target: f64,
    /// Dissimilarity of every candidate evaluated at this step.
    pub candidate_scores: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionTrace {
    pub target: String,
    /// `M2(Y)`.
    pub target_id: f64,
    pub scales: ScaleSet,
    pub steps: Vec<StepRecord>,
}

impl SelectionTrace {
    /// Number of forward steps performed.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn selected(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.feature.as_str()).collect()
    }

    pub fn diss_profile(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.diss).collect()
    }

    /// Smallest dissimilarity over the trace and the 1-based step reaching it.
    pub fn min_diss(&self) -> Option<(usize, f64)> {
        self.steps
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.diss.total_cmp(&b.1.diss))
            .map(|(i, s)| (i + 1, s.diss))
    }

    /// Relevance coefficient of the first `k` selected features.
    pub fn dr_after(&self, k: usize) -> Option<f64> {
        let step = self.steps.get(k.checked_sub(1)?)?;
        Some(1.0 - step.diss / self.target_id)
    }

    /// Suggested cut-off: the first step after which adding the next feature
    /// lowers the dissimilarity by less than `KNEE_TOLERANCE * M2(Y)`, or the
    /// last step. A reading aid only.
    pub fn knee(&self) -> Option<usize> {
        if self.steps.is_empty() {
            return None;
        }
        let eps = KNEE_TOLERANCE * self.target_id.abs();
        let k = self
            .steps
            .windows(2)
            .position(|w| w[0].diss - w[1].diss < eps)
            .map_or(self.steps.len(), |i| i + 1);
        Some(k)
    }

    /// `step,feature,diss,id_with,id_without` rows.
    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "step,feature,diss,id_with,id_without")?;
        for (i, s) in self.steps.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{}",
                i + 1,
                s.feature,
                s.diss,
                s.id_with_target,
                s.id_without_target
            )?;
        }
        Ok(())
    }
}

/// Grid occupancy of the already selected features, one entry per scale.
struct Selected<'a> {
    scales: &'a ScaleSet,
    occupancy: Vec<Occupancy>,
    dims: usize,
    total: u128,
}

impl<'a> Selected<'a> {
    fn empty(n: usize, scales: &'a ScaleSet) -> Self {
        Selected {
            scales,
            occupancy: scales.iter().map(|_| Occupancy::single(n)).collect(),
            dims: 0,
            total: falling_factorial(n as u64, INDEX_ORDER),
        }
    }

    fn add(&mut self, column: &[f64]) {
        self.occupancy = self
            .occupancy
            .par_iter()
            .zip(self.scales.as_slice())
            .map(|(occ, &k)| occ.refine(column, k))
            .collect();
        self.dims += 1;
    }

    fn estimate(&self, dims: usize, sums: &[u128]) -> Result<IdEstimate> {
        IdEstimate::from_sums(dims, INDEX_ORDER, self.scales, sums, self.total)
    }

    /// Dissimilarity of `selected + candidate` with the target.
    fn with_candidate(&self, candidate: &[f64], target: &[f64]) -> Result<Dissimilarity> {
        let mut without = Vec::with_capacity(self.scales.len());
        let mut with = Vec::with_capacity(self.scales.len());
        for (occ, k) in self.occupancy.iter().zip(self.scales.iter()) {
            let grown = occ.refine(candidate, k);
            without.push(grown.falling_sum(INDEX_ORDER));
            with.push(falling_sum(&grown.refined_counts(target, k), INDEX_ORDER));
        }
        let id_without = self.estimate(self.dims + 1, &without)?;
        let id_with = self.estimate(self.dims + 2, &with)?;
        Ok(Dissimilarity::new(
            id_with.intrinsic_dim,
            id_without.intrinsic_dim,
        ))
    }
}

/// Sequential forward selection of `steps` features minimizing the dissimilarity.
///
/// Ties go to the candidate with the lowest column index. The data set must
/// already lie in the unit cube (see [`Dataset::rescale_unit`]).
pub fn mbfr_select(d: &Dataset, scales: &ScaleSet, steps: usize) -> Result<SelectionTrace> {
    let n_features = d.n_cols() - 1;
    if steps == 0 || steps > n_features {
        return Err(Error::InvalidArgument(format!(
            "number of steps {steps} must lie in 1..={n_features}"
        )));
    }
    let n = check_unit_cube(&d.columns())?;
    if n < INDEX_ORDER as usize {
        return Err(Error::TooFewPoints {
            needed: INDEX_ORDER as usize,
            got: n,
        });
    }
    let target = d.target();
    let target_id = mindid(&[target], INDEX_ORDER, scales)?.intrinsic_dim;

    let mut pool: Vec<usize> = (0..d.n_cols()).filter(|&j| j != d.target_index()).collect();
    let mut selected = Selected::empty(n, scales);
    let mut records = Vec::with_capacity(steps);
    for _ in 0..steps {
        let scored: Vec<Dissimilarity> = pool
            .par_iter()
            .map(|&j| selected.with_candidate(d.column_at(j), target))
            .collect::<Result<_>>()?;
        // fixed-order reduction; strict comparison keeps the lowest index on ties
        let mut best = 0;
        for (i, s) in scored.iter().enumerate().skip(1) {
            if s.diss < scored[best].diss {
                best = i;
            }
        }
        let candidate_scores = pool
            .iter()
            .zip(&scored)
            .map(|(&j, s)| (d.names()[j].clone(), s.diss))
            .collect();
        let chosen = pool.remove(best);
        let s = scored[best];
        log::debug!("selected {} with diss {:.4}", d.names()[chosen], s.diss);
        records.push(StepRecord {
            feature: d.names()[chosen].clone(),
            diss: s.diss,
            id_with_target: s.id_with_target,
            id_without_target: s.id_without_target,
            candidate_scores,
        });
        selected.add(d.column_at(chosen));
    }
    Ok(SelectionTrace {
        target: d.target_name().to_string(),
        target_id,
        scales: scales.clone(),
        steps: records,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrReport {
    /// `1 - diss / target_id`, unclipped.
    pub dr: f64,
    pub dr_clipped: f64,
    pub diss: f64,
    pub target_id: f64,
}

impl DrReport {
    pub fn new(diss: f64, target_id: f64) -> Result<Self> {
        if !(target_id > 0.0) {
            return Err(Error::DegenerateTarget(target_id));
        }
        let dr = 1.0 - diss / target_id;
        Ok(DrReport {
            dr,
            dr_clipped: dr.clamp(0.0, 1.0),
            diss,
            target_id,
        })
    }
}

/// Coefficient of dimensional relevance of `features` for `target`.
pub fn dimensional_relevance(
    features: &[&[f64]],
    target: &[f64],
    scales: &ScaleSet,
) -> Result<DrReport> {
    let diss = dissimilarity(features, target, scales)?;
    let target_id = mindid(&[target], INDEX_ORDER, scales)?.intrinsic_dim;
    DrReport::new(diss.diss, target_id)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RedundancyScore {
    /// 1 for fully redundant, 0 for fully irrelevant, clipped to `[0, 1]`.
    pub score: f64,
    pub score_raw: f64,
    /// `M2(Z + rejected) - M2(Z)`.
    pub delta_id: f64,
    /// `M2(rejected)`.
    pub standalone_id: f64,
}

/// How much of a rejected feature's information is already carried by the
/// selected features `selected`.
pub fn classify_rejected<S: AsRef<str>>(
    d: &Dataset,
    selected: &[S],
    rejected: &str,
    scales: &ScaleSet,
) -> Result<RedundancyScore> {
    if selected.is_empty() {
        return Err(Error::InvalidArgument("no selected features".into()));
    }
    if selected.iter().any(|s| s.as_ref() == rejected) {
        return Err(Error::InvalidArgument(format!(
            "{rejected:?} is among the selected features"
        )));
    }
    let z = d.columns_of(selected)?;
    let r = d.column(rejected)?;
    let mut grown = z.clone();
    grown.push(r);
    let delta_id = mindid(&grown, INDEX_ORDER, scales)?.intrinsic_dim
        - mindid(&z, INDEX_ORDER, scales)?.intrinsic_dim;
    let standalone_id = mindid(&[r], INDEX_ORDER, scales)?.intrinsic_dim;
    if !(standalone_id > 0.0) {
        return Err(Error::DegenerateFeature {
            name: rejected.to_string(),
            id: standalone_id,
        });
    }
    let score_raw = 1.0 - delta_id / standalone_id;
    Ok(RedundancyScore {
        score: score_raw.clamp(0.0, 1.0),
        score_raw,
        delta_id,
        standalone_id,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// y depends on a and b; c is noise; d copies a.
    fn small_problem(n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let c: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let y: Vec<f64> = a.iter().zip(&b).map(|(a, b)| (a + b * b).sin()).collect();
        Dataset::new(
            ["a", "b", "c", "d", "y"].map(String::from).to_vec(),
            vec![a.clone(), b, c, a, y],
            "y",
        )
        .unwrap()
        .rescale_unit()
    }

    #[test]
    fn trace_matches_direct_dissimilarity() {
        let d = small_problem(3000, 1);
        let scales = ScaleSet::range(2, 10).unwrap();
        let trace = mbfr_select(&d, &scales, 4).unwrap();
        let mut z: Vec<&[f64]> = Vec::new();
        for step in &trace.steps {
            z.push(d.column(&step.feature).unwrap());
            let direct = dissimilarity(&z, d.target(), &scales).unwrap();
            assert_eq!(direct.diss.to_bits(), step.diss.to_bits());
            assert_eq!(
                direct.id_with_target.to_bits(),
                step.id_with_target.to_bits()
            );
            assert_eq!(step.diss, step.id_with_target - step.id_without_target);
        }
    }

    #[test]
    fn pool_shrinks_by_one_per_step() {
        let d = small_problem(1000, 2);
        let scales = ScaleSet::range(2, 8).unwrap();
        let trace = mbfr_select(&d, &scales, 4).unwrap();
        for (i, step) in trace.steps.iter().enumerate() {
            assert_eq!(step.candidate_scores.len(), 4 - i);
            assert_eq!(step.candidate_scores[&step.feature], step.diss);
            let min = step
                .candidate_scores
                .values()
                .copied()
                .fold(f64::INFINITY, f64::min);
            assert_eq!(min, step.diss);
        }
        let names = trace.selected();
        let mut uniq = names.clone();
        uniq.sort_unstable();
        uniq.dedup();
        assert_eq!(uniq.len(), names.len());
    }

    #[test]
    fn ties_go_to_lowest_index() {
        // d is an exact copy of a, so their scores tie at every step
        let d = small_problem(2000, 3);
        let scales = ScaleSet::range(2, 8).unwrap();
        let trace = mbfr_select(&d, &scales, 4).unwrap();
        let sel = trace.selected();
        let pa = sel.iter().position(|&s| s == "a").unwrap();
        let pd = sel.iter().position(|&s| s == "d").unwrap();
        assert!(pa < pd);
    }

    #[test]
    fn step_count_is_validated() {
        let d = small_problem(200, 4);
        let scales = ScaleSet::range(2, 4).unwrap();
        assert!(mbfr_select(&d, &scales, 0).is_err());
        assert!(mbfr_select(&d, &scales, 5).is_err());
    }

    #[test]
    fn raw_data_is_rejected() {
        let d = Dataset::new(
            vec!["x".into(), "y".into()],
            vec![vec![0.0, 2.0, 3.0], vec![1.0, 0.5, 0.2]],
            "y",
        )
        .unwrap();
        let scales = ScaleSet::range(1, 3).unwrap();
        assert!(matches!(
            mbfr_select(&d, &scales, 1),
            Err(Error::OutsideUnitCube { .. })
        ));
    }

    #[test]
    fn dr_endpoints() {
        assert_eq!(DrReport::new(0.0, 0.9).unwrap().dr, 1.0);
        assert_eq!(DrReport::new(0.9, 0.9).unwrap().dr, 0.0);
        let r = DrReport::new(-0.1, 1.0).unwrap();
        assert!(r.dr > 1.0);
        assert_eq!(r.dr_clipped, 1.0);
        assert!(matches!(
            DrReport::new(0.1, 0.0),
            Err(Error::DegenerateTarget(_))
        ));
    }

    #[test]
    fn duplicate_feature_is_fully_redundant() {
        let d = small_problem(3000, 5);
        let scales = ScaleSet::range(2, 10).unwrap();
        let s = classify_rejected(&d, &["a", "b"], "d", &scales).unwrap();
        assert!((s.score_raw - 1.0).abs() < 1e-9, "{s:?}");
        assert_eq!(s.score, 1.0);
        assert!(classify_rejected(&d, &["a"], "a", &scales).is_err());
    }

    #[test]
    fn knee_and_csv() {
        let trace = SelectionTrace {
            target: "y".into(),
            target_id: 1.0,
            scales: ScaleSet::range(1, 2).unwrap(),
            steps: [0.9, 0.3, 0.02, 0.05]
                .iter()
                .enumerate()
                .map(|(i, &diss)| StepRecord {
                    feature: format!("f{i}"),
                    diss,
                    id_with_target: diss + 1.0,
                    id_without_target: 1.0,
                    candidate_scores: BTreeMap::new(),
                })
                .collect(),
        };
        assert_eq!(trace.min_diss(), Some((3, 0.02)));
        assert_eq!(trace.knee(), Some(3));
        assert_eq!(trace.dr_after(2), Some(0.7));
        let mut flat = trace.clone();
        flat.steps[1].diss = 0.88;
        assert_eq!(flat.knee(), Some(1));
        flat.steps.truncate(1);
        assert_eq!(flat.knee(), Some(1));
        flat.steps.clear();
        assert_eq!(flat.knee(), None);
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("step,feature,diss,id_with,id_without\n1,f0,0.9,"));
        assert_eq!(text.lines().count(), 5);
    }
}

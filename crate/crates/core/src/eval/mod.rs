//! Validation of feature subsets with an extreme learning machine.
//!
//! Every split of the protocol:
//! 1. holds out a random 20% of the rows as a test set (the split depends
//!    only on the protocol seed, so subsets compared in one session share it);
//! 2. records min/max scaling coefficients on the remaining 80% and applies
//!    them to both portions;
//! 3. picks the hidden-layer size by 10-fold cross-validation;
//! 4. retrains 100 models on the full 80%, averages their test predictions,
//!    maps them back to the original units and scores them with [`relative_error`].
//!
//! The report aggregates the per-split scores.

mod elm;

use std::io::Write;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use elm::{min_norm_lstsq, ElmModel, ElmOptions, RANK_TOLERANCE};

use crate::dataset::{Dataset, RescaleRecord};
use crate::error::{Error, Result};
use crate::fit::{mean, sample_sd};

/// Residual sum of squares over the centred sum of squares of `y_true`.
/// The mean predictor scores exactly 1.
pub fn relative_error(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Shape(format!(
            "{} targets for {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    if y_true.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: y_true.len(),
        });
    }
    let m = mean(y_true);
    let centred: f64 = y_true.iter().map(|y| (y - m).powi(2)).sum();
    if centred == 0.0 {
        return Err(Error::ConstantReference);
    }
    let resid: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(y, p)| (y - p).powi(2))
        .sum();
    Ok(resid / centred)
}

/// Min/max scaling learnt on one set of rows and applied to others.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitScaler {
    pub records: Vec<RescaleRecord>,
}

impl UnitScaler {
    pub fn fit(columns: &[Vec<f64>]) -> Self {
        UnitScaler {
            records: columns.iter().map(|c| RescaleRecord::of(c)).collect(),
        }
    }

    /// Values outside the fitted range map outside `[0, 1]`; they are not clipped.
    pub fn transform(&self, columns: &[Vec<f64>]) -> Vec<Vec<f64>> {
        columns
            .iter()
            .zip(&self.records)
            .map(|(c, r)| c.iter().map(|&v| r.apply(v)).collect())
            .collect()
    }
}

/// The thinned hidden-size grid: 1..=20, then every fifth value up to 350.
pub fn thinned_hidden_grid() -> Vec<usize> {
    (1..=20).chain((25..=350).step_by(5)).collect()
}

/// Every hidden size from 1 to 350.
pub fn full_hidden_grid() -> Vec<usize> {
    (1..=350).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub splits: usize,
    pub test_fraction: f64,
    pub folds: usize,
    pub retrains: usize,
    /// Candidate hidden-layer sizes, ascending.
    pub hidden_grid: Vec<usize>,
    pub seed: u64,
    pub elm: ElmOptions,
}

impl Default for Protocol {
    fn default() -> Self {
        Protocol {
            splits: 20,
            test_fraction: 0.2,
            folds: 10,
            retrains: 100,
            hidden_grid: thinned_hidden_grid(),
            seed: 0,
            elm: ElmOptions::default(),
        }
    }
}

impl Protocol {
    fn validate(&self, n_rows: usize) -> Result<()> {
        if self.splits == 0 || self.retrains == 0 || self.folds < 2 {
            return Err(Error::InvalidArgument(
                "protocol needs splits >= 1, retrains >= 1 and folds >= 2".into(),
            ));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "test fraction {} outside (0, 1)",
                self.test_fraction
            )));
        }
        if self.hidden_grid.is_empty()
            || self.hidden_grid[0] == 0
            || self.hidden_grid.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidArgument(
                "hidden grid must be strictly increasing positive sizes".into(),
            ));
        }
        let n_test = self.n_test(n_rows);
        if n_test < 2 || n_rows - n_test < self.folds {
            return Err(Error::TooFewPoints {
                needed: self.folds + 2,
                got: n_rows,
            });
        }
        Ok(())
    }

    fn n_test(&self, n_rows: usize) -> usize {
        (self.test_fraction * n_rows as f64).round() as usize
    }

    /// Test and training row indices of split `s`.
    pub fn split(&self, n_rows: usize, s: usize) -> (Vec<usize>, Vec<usize>) {
        let mut rows: Vec<usize> = (0..n_rows).collect();
        rows.shuffle(&mut rng_for(self.seed, &[SPLIT, s as u64]));
        let train = rows.split_off(self.n_test(n_rows));
        (rows, train)
    }
}

const SPLIT: u64 = 1;
const FOLDS: u64 = 2;
const CV_FIT: u64 = 3;
const FINAL_FIT: u64 = 4;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of an independent stream identified by `path` under `base`.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix(base), |acc, &p| splitmix(acc ^ splitmix(p)))
}

fn rng_for(base: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, path))
}

/// Scaled design matrix and response of one training/test portion.
struct Portion {
    x: DMatrix<f64>,
    y: Vec<f64>,
}

impl Portion {
    fn rows(&self, idx: &[usize]) -> Portion {
        Portion {
            x: self.x.select_rows(idx),
            y: idx.iter().map(|&i| self.y[i]).collect(),
        }
    }
}

/// Raw columns of `features` followed by the target, restricted to `rows`.
fn gather(d: &Dataset, features: &[usize], rows: &[usize]) -> Vec<Vec<f64>> {
    features
        .iter()
        .chain(std::iter::once(&d.target_index()))
        .map(|&j| rows.iter().map(|&r| d.column_at(j)[r]).collect())
        .collect()
}

fn to_portion(mut scaled: Vec<Vec<f64>>) -> Portion {
    let y = scaled.pop().expect("target column");
    let n = y.len();
    let x = DMatrix::from_fn(n, scaled.len(), |i, j| scaled[j][i]);
    Portion { x, y }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvPoint {
    pub n_hidden: usize,
    pub mean_mse: f64,
    pub sd_mse: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub curve: Vec<CvPoint>,
    /// Smallest size whose mean error is within one pooled sd of the best mean.
    pub chosen: CvPoint,
    pub best: CvPoint,
}

/// Root mean of the per-size fold variances.
pub fn pooled_sd(curve: &[CvPoint]) -> f64 {
    (curve.iter().map(|p| p.sd_mse * p.sd_mse).sum::<f64>() / curve.len() as f64).sqrt()
}

/// Picks the smallest hidden size whose mean CV error lies within one
/// pooled sd of the lowest mean error. Returns `(chosen, best)`.
pub fn choose_hidden(curve: &[CvPoint]) -> Option<(CvPoint, CvPoint)> {
    let best = *curve
        .iter()
        .min_by(|a, b| a.mean_mse.total_cmp(&b.mean_mse))?;
    let bar = best.mean_mse + pooled_sd(curve);
    let chosen = *curve.iter().find(|p| p.mean_mse <= bar)?;
    Some((chosen, best))
}

fn cross_validate(train: &Portion, protocol: &Protocol, split: usize) -> Result<CvResult> {
    let n = train.y.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_for(protocol.seed, &[FOLDS, split as u64]));
    let folds: Vec<(Portion, Portion)> = (0..protocol.folds)
        .map(|f| {
            let (held, kept): (Vec<(usize, usize)>, Vec<(usize, usize)>) = order
                .iter()
                .copied()
                .enumerate()
                .partition(|(pos, _)| pos % protocol.folds == f);
            let held: Vec<usize> = held.into_iter().map(|(_, r)| r).collect();
            let kept: Vec<usize> = kept.into_iter().map(|(_, r)| r).collect();
            (train.rows(&kept), train.rows(&held))
        })
        .collect();

    let jobs: Vec<(usize, usize)> = protocol
        .hidden_grid
        .iter()
        .flat_map(|&h| (0..protocol.folds).map(move |f| (h, f)))
        .collect();
    let errors: Vec<f64> = jobs
        .par_iter()
        .map(|&(h, f)| {
            let (fit_on, check_on) = &folds[f];
            let seed = derive_seed(protocol.seed, &[CV_FIT, split as u64, f as u64, h as u64]);
            let model = ElmModel::fit(&fit_on.x, &fit_on.y, h, seed, &protocol.elm)?;
            let pred = model.predict(&check_on.x);
            Ok(pred
                .iter()
                .zip(&check_on.y)
                .map(|(p, y)| (p - y).powi(2))
                .sum::<f64>()
                / pred.len() as f64)
        })
        .collect::<Result<_>>()?;

    let curve: Vec<CvPoint> = protocol
        .hidden_grid
        .iter()
        .zip(errors.chunks(protocol.folds))
        .map(|(&n_hidden, e)| CvPoint {
            n_hidden,
            mean_mse: mean(e),
            sd_mse: sample_sd(e),
        })
        .collect();
    let (chosen, best) = choose_hidden(&curve)
        .ok_or_else(|| Error::Numerical("cross-validation produced no errors".into()))?;
    Ok(CvResult {
        curve,
        chosen,
        best,
    })
}

/// Training and test portions of split `s`, scaled with training coefficients.
fn prepare_split(
    d: &Dataset,
    features: &[usize],
    protocol: &Protocol,
    s: usize,
) -> (Portion, Portion, UnitScaler) {
    let (test_rows, train_rows) = protocol.split(d.n_rows(), s);
    let train_raw = gather(d, features, &train_rows);
    let scaler = UnitScaler::fit(&train_raw);
    let train = to_portion(scaler.transform(&train_raw));
    let test = to_portion(scaler.transform(&gather(d, features, &test_rows)));
    (train, test, scaler)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitOutcome {
    pub relative_error: f64,
    pub n_hidden: usize,
    pub cv_mse: f64,
}

fn run_split(
    d: &Dataset,
    features: &[usize],
    protocol: &Protocol,
    s: usize,
) -> Result<SplitOutcome> {
    let (train, test, scaler) = prepare_split(d, features, protocol, s);
    let cv = cross_validate(&train, protocol, s)?;
    let h = cv.chosen.n_hidden;
    let preds: Vec<Vec<f64>> = (0..protocol.retrains)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(protocol.seed, &[FINAL_FIT, s as u64, r as u64]);
            Ok(ElmModel::fit(&train.x, &train.y, h, seed, &protocol.elm)?.predict(&test.x))
        })
        .collect::<Result<_>>()?;
    // accumulate in retrain order
    let mut avg = vec![0.0; test.y.len()];
    for p in &preds {
        for (a, v) in avg.iter_mut().zip(p) {
            *a += v;
        }
    }
    let target = scaler.records.last().expect("target record");
    let y_pred: Vec<f64> = avg
        .iter()
        .map(|a| target.invert(a / protocol.retrains as f64))
        .collect();
    let y_true: Vec<f64> = test.y.iter().map(|&v| target.invert(v)).collect();
    Ok(SplitOutcome {
        relative_error: relative_error(&y_true, &y_pred)?,
        n_hidden: h,
        cv_mse: cv.chosen.mean_mse,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub features: Vec<String>,
    pub re_per_split: Vec<f64>,
    pub mean_re: f64,
    pub sd_re: f64,
    pub chosen_n_hidden: Vec<usize>,
    /// Wall-clock seconds; left out of serialized output when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_secs: Option<f64>,
}

pub const EVAL_CSV_HEADER: &str = "dataset,subset,n_features,mean_re,sd_re";

impl EvalReport {
    pub fn write_csv_row(
        &self,
        out: &mut impl Write,
        dataset: &str,
        subset: &str,
    ) -> std::io::Result<()> {
        writeln!(
            out,
            "{dataset},{subset},{},{},{}",
            self.features.len(),
            self.mean_re,
            self.sd_re
        )
    }
}

fn feature_indices<S: AsRef<str>>(d: &Dataset, features: &[S]) -> Result<Vec<usize>> {
    if features.is_empty() {
        return Err(Error::InvalidArgument("empty feature subset".into()));
    }
    features
        .iter()
        .map(|f| {
            let j = d.index_of(f.as_ref())?;
            if j == d.target_index() {
                Err(Error::InvalidArgument(format!(
                    "{:?} is the target",
                    f.as_ref()
                )))
            } else {
                Ok(j)
            }
        })
        .collect()
}

/// Scores a feature subset of `d` (raw units) under `protocol`.
pub fn evaluate_subset<S: AsRef<str>>(
    d: &Dataset,
    features: &[S],
    protocol: &Protocol,
) -> Result<EvalReport> {
    protocol.validate(d.n_rows())?;
    let idx = feature_indices(d, features)?;
    let start = Instant::now();
    let outcomes: Vec<SplitOutcome> = (0..protocol.splits)
        .into_par_iter()
        .map(|s| run_split(d, &idx, protocol, s))
        .collect::<Result<_>>()?;
    let re: Vec<f64> = outcomes.iter().map(|o| o.relative_error).collect();
    Ok(EvalReport {
        features: features.iter().map(|f| f.as_ref().to_string()).collect(),
        mean_re: mean(&re),
        sd_re: sample_sd(&re),
        chosen_n_hidden: outcomes.iter().map(|o| o.n_hidden).collect(),
        re_per_split: re,
        runtime_secs: Some(start.elapsed().as_secs_f64()),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SfsStep {
    pub feature: String,
    pub cv_mse: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElmSfsResult {
    /// The prefix of the search path with the lowest CV error.
    pub selected: Vec<String>,
    pub cv_mse: f64,
    pub path: Vec<SfsStep>,
}

/// Wrapper baseline: forward selection scored by the cross-validated error
/// (best mean over the hidden grid) on the training portion of the first
/// split. Returns the best set met anywhere along the search.
pub fn elm_sfs(d: &Dataset, protocol: &Protocol) -> Result<ElmSfsResult> {
    protocol.validate(d.n_rows())?;
    let mut pool: Vec<usize> = (0..d.n_cols()).filter(|&j| j != d.target_index()).collect();
    let mut chosen: Vec<usize> = Vec::new();
    let mut path = Vec::new();
    while !pool.is_empty() {
        let scores: Vec<f64> = pool
            .iter()
            .map(|&j| {
                let mut set = chosen.clone();
                set.push(j);
                let (train, _, _) = prepare_split(d, &set, protocol, 0);
                Ok(cross_validate(&train, protocol, 0)?.best.mean_mse)
            })
            .collect::<Result<_>>()?;
        let best = scores
            .iter()
            .enumerate()
            .fold(0, |b, (i, s)| if *s < scores[b] { i } else { b });
        let j = pool.remove(best);
        chosen.push(j);
        log::debug!(
            "elm_sfs step {}: {} ({:.5})",
            chosen.len(),
            d.names()[j],
            scores[best]
        );
        path.push(SfsStep {
            feature: d.names()[j].clone(),
            cv_mse: scores[best],
        });
    }
    let cut = path
        .iter()
        .enumerate()
        .fold(0, |b, (i, s)| if s.cv_mse < path[b].cv_mse { i } else { b });
    Ok(ElmSfsResult {
        selected: path[..=cut].iter().map(|s| s.feature.clone()).collect(),
        cv_mse: path[cut].cv_mse,
        path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_error_examples() {
        let y = [0.0, 1.0, 2.0];
        assert_eq!(relative_error(&y, &y).unwrap(), 0.0);
        assert_eq!(relative_error(&y, &[1.0, 1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(relative_error(&y, &[0.0, 0.0, 0.0]).unwrap(), 2.5);
        assert!(matches!(
            relative_error(&[3.0, 3.0], &[1.0, 2.0]),
            Err(Error::ConstantReference)
        ));
        assert!(relative_error(&[1.0], &[1.0]).is_err());
        assert!(relative_error(&y, &[1.0]).is_err());
    }

    #[test]
    fn thinned_grid_shape() {
        let g = thinned_hidden_grid();
        assert_eq!(&g[..20], &(1..=20).collect::<Vec<_>>()[..]);
        assert_eq!(g[20], 25);
        assert_eq!(*g.last().unwrap(), 350);
        assert_eq!(g.len(), 20 + 66);
        assert_eq!(full_hidden_grid().len(), 350);
    }

    #[test]
    fn scaler_uses_training_range_only() {
        let train = vec![vec![0.0, 10.0, 5.0]];
        let s = UnitScaler::fit(&train);
        let out = s.transform(&[vec![15.0, -5.0]]);
        assert_eq!(out[0], vec![1.5, -0.5]);
    }

    #[test]
    fn hidden_choice_prefers_small_within_one_sd() {
        let curve = [
            CvPoint {
                n_hidden: 1,
                mean_mse: 0.50,
                sd_mse: 0.01,
            },
            CvPoint {
                n_hidden: 2,
                mean_mse: 0.21,
                sd_mse: 0.01,
            },
            CvPoint {
                n_hidden: 3,
                mean_mse: 0.20,
                sd_mse: 0.01,
            },
            CvPoint {
                n_hidden: 4,
                mean_mse: 0.25,
                sd_mse: 0.01,
            },
        ];
        assert!((pooled_sd(&curve) - 0.01).abs() < 1e-15);
        let (chosen, best) = choose_hidden(&curve).unwrap();
        assert_eq!(best.n_hidden, 3);
        assert_eq!(chosen.n_hidden, 2);
    }

    #[test]
    fn splits_are_disjoint_and_shared() {
        let p = Protocol::default();
        let (test, train) = p.split(101, 3);
        assert_eq!(test.len(), 20);
        assert_eq!(train.len(), 81);
        let mut all: Vec<usize> = test.iter().chain(&train).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..101).collect::<Vec<_>>());
        assert_eq!(p.split(101, 3), (test, train));
        assert_ne!(p.split(101, 4).0, p.split(101, 3).0);
    }

    #[test]
    fn derived_seeds_differ_by_path() {
        assert_ne!(derive_seed(1, &[1, 2]), derive_seed(1, &[2, 1]));
        assert_ne!(derive_seed(1, &[1]), derive_seed(2, &[1]));
        assert_eq!(derive_seed(7, &[3, 4]), derive_seed(7, &[3, 4]));
    }

    fn small_protocol() -> Protocol {
        Protocol {
            splits: 2,
            folds: 4,
            retrains: 5,
            hidden_grid: vec![2, 5, 10, 20],
            seed: 11,
            ..Protocol::default()
        }
    }

    fn toy(n: usize) -> Dataset {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let y: Vec<f64> = a.iter().map(|v| 10.0 + v.sin()).collect();
        Dataset::new(vec!["a".into(), "b".into(), "y".into()], vec![a, b, y], "y").unwrap()
    }

    #[test]
    fn informative_feature_beats_noise() {
        let d = toy(300);
        let p = small_protocol();
        let good = evaluate_subset(&d, &["a"], &p).unwrap();
        let bad = evaluate_subset(&d, &["b"], &p).unwrap();
        assert_eq!(good.re_per_split.len(), 2);
        assert!(good.mean_re < 0.05, "{}", good.mean_re);
        assert!(bad.mean_re > 0.8, "{}", bad.mean_re);
        let again = evaluate_subset(&d, &["a"], &p).unwrap();
        assert_eq!(again.re_per_split, good.re_per_split);
    }

    #[test]
    fn rejects_target_and_empty_subsets() {
        let d = toy(100);
        let p = small_protocol();
        assert!(evaluate_subset(&d, &["y"], &p).is_err());
        assert!(evaluate_subset::<&str>(&d, &[], &p).is_err());
        let tiny = toy(6);
        assert!(evaluate_subset(&tiny, &["a"], &p).is_err());
    }

    #[test]
    fn wrapper_search_starts_with_the_informative_feature() {
        let d = toy(300);
        let r = elm_sfs(&d, &small_protocol()).unwrap();
        assert_eq!(r.path.len(), 2);
        assert_eq!(r.path[0].feature, "a");
        assert_eq!(r.selected[0], "a");
    }

    #[test]
    fn csv_row() {
        let r = EvalReport {
            features: vec!["a".into(), "b".into()],
            re_per_split: vec![0.5, 0.25],
            mean_re: 0.375,
            sd_re: 0.125,
            chosen_n_hidden: vec![3, 4],
            runtime_secs: None,
        };
        let mut out = Vec::new();
        r.write_csv_row(&mut out, "toy", "a+b").unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "toy,a+b,2,0.375,0.125\n");
    }
}

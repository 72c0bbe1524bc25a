//! Seeded synthetic regression benchmarks and a Monte Carlo driver.
//!
//! Random streams come from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64`, so a configuration always reproduces the same table.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::Write;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::filter::{mbfr_select, SelectionTrace};
use crate::fit::{mean, sample_sd};
use crate::morisita::ScaleSet;

/// Hidden-layer weights of the butterfly network: `(w1, w2, beta)` per neuron.
pub const BUTTERFLY_WEIGHTS: [[f64; 3]; 10] = [
    [0.6655, 0.8939, 1.3446],
    [1.2611, -0.3512, -0.0115],
    [0.3961, -1.7827, 1.2770],
    [-1.7065, -0.5297, 0.5962],
    [0.8807, 1.9574, -0.8530],
    [1.8260, 0.7962, -0.7290],
    [1.3400, 1.5001, 1.2339],
    [1.2919, -0.4462, 0.1186],
    [-1.3902, 1.6856, 0.5277],
    [0.0743, 1.5625, -0.6952],
];

pub const BUTTERFLY_COLUMNS: [&str; 9] = ["X1", "X2", "J3", "J4", "J5", "I6", "I7", "I8", "Y"];

pub const FRIEDMAN_COLUMNS: [&str; 11] = [
    "X1", "X2", "X3", "X4", "X5", "I6", "I7", "I8", "I9", "I10", "Y",
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sigmoid {
    /// `1 / (1 + e^-x)`
    #[default]
    Logistic,
    Tanh,
}

impl Sigmoid {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Sigmoid::Logistic => 1.0 / (1.0 + (-x).exp()),
            Sigmoid::Tanh => x.tanh(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ButterflyVariant {
    #[default]
    Standard,
    /// J3..J5 are copies of X1 and I7, I8 copies of I6.
    Linear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ButterflyConfig {
    pub n: usize,
    /// Noise sd as a fraction of the sd of the noise-free response.
    pub noise_sd_fraction: f64,
    pub seed: u64,
    pub weights: [[f64; 3]; 10],
    pub sigmoid: Sigmoid,
    pub variant: ButterflyVariant,
}

impl Default for ButterflyConfig {
    fn default() -> Self {
        ButterflyConfig {
            n: 10_000,
            noise_sd_fraction: 0.0,
            seed: 0,
            weights: BUTTERFLY_WEIGHTS,
            sigmoid: Sigmoid::Logistic,
            variant: ButterflyVariant::Standard,
        }
    }
}

impl ButterflyConfig {
    pub fn new(n: usize, noise_sd_fraction: f64, seed: u64) -> Self {
        ButterflyConfig {
            n,
            noise_sd_fraction,
            seed,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidArgument(format!(
                "sample size {} < 2",
                self.n
            )));
        }
        if !(0.0..=1.0).contains(&self.noise_sd_fraction) {
            return Err(Error::InvalidArgument(format!(
                "noise fraction {} outside [0, 1]",
                self.noise_sd_fraction
            )));
        }
        Ok(())
    }
}

/// Noise-free butterfly response at `(x1, x2)`.
pub fn butterfly_response(x1: f64, x2: f64, weights: &[[f64; 3]; 10], sigmoid: Sigmoid) -> f64 {
    weights
        .iter()
        .map(|&[w1, w2, beta]| beta * sigmoid.apply(x1 * w1 + x2 * w2))
        .sum()
}

fn open_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let u: f64 = rng.sample(Open01);
    lo + (hi - lo) * u
}

/// Butterfly data: two relevant inputs on `(-5, 5)`, three redundant and
/// three irrelevant companions, and the network response `Y`.
pub fn gen_butterfly(cfg: &ButterflyConfig) -> Result<Dataset> {
    cfg.validate()?;
    let n = cfg.n;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut x1 = Vec::with_capacity(n);
    let mut x2 = Vec::with_capacity(n);
    let mut i6 = Vec::with_capacity(n);
    for _ in 0..n {
        x1.push(open_uniform(&mut rng, -5.0, 5.0));
        x2.push(open_uniform(&mut rng, -5.0, 5.0));
        i6.push(open_uniform(&mut rng, -5.0, 5.0));
    }
    let mut y: Vec<f64> = x1
        .iter()
        .zip(&x2)
        .map(|(&a, &b)| butterfly_response(a, b, &cfg.weights, cfg.sigmoid))
        .collect();
    let noise_sd = cfg.noise_sd_fraction * sample_sd(&y);
    add_noise(&mut y, noise_sd, &mut rng)?;

    let (j3, j4, j5, i7, i8) = match cfg.variant {
        ButterflyVariant::Standard => {
            let j3 = x1.iter().map(|v| (v + 5.0).log10()).collect();
            let j4 = x1.iter().zip(&x2).map(|(a, b)| a * a - b * b).collect();
            let j5 = x1
                .iter()
                .zip(&x2)
                .map(|(a, b)| a.powi(4) - b.powi(4))
                .collect();
            let i7: Vec<f64> = i6.iter().map(|v| (v + 5.0).log10()).collect();
            let i8 = i6.iter().zip(&i7).map(|(a, b)| a + b).collect();
            (j3, j4, j5, i7, i8)
        }
        ButterflyVariant::Linear => (x1.clone(), x1.clone(), x1.clone(), i6.clone(), i6.clone()),
    };
    let names = BUTTERFLY_COLUMNS.map(String::from).to_vec();
    Dataset::new(names, vec![x1, x2, j3, j4, j5, i6, i7, i8, y], "Y")
}

fn add_noise(y: &mut [f64], sd: f64, rng: &mut ChaCha8Rng) -> Result<()> {
    if sd > 0.0 {
        let normal = Normal::new(0.0, sd).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        for v in y.iter_mut() {
            *v += normal.sample(rng);
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FriedmanConfig {
    pub n: usize,
    pub noise_sd: f64,
    pub seed: u64,
}

impl Default for FriedmanConfig {
    fn default() -> Self {
        FriedmanConfig {
            n: 40_000,
            noise_sd: 1.0,
            seed: 0,
        }
    }
}

/// `10 sin(pi x1 x2) + 20 (x3 - 0.5)^2 + 10 x4 + 5 x5`
pub fn friedman_response(x: &[f64; 5]) -> f64 {
    10.0 * (PI * x[0] * x[1]).sin() + 20.0 * (x[2] - 0.5).powi(2) + 10.0 * x[3] + 5.0 * x[4]
}

/// Friedman data: five relevant and five irrelevant uniform inputs on `[0, 1)`.
pub fn gen_friedman(cfg: &FriedmanConfig) -> Result<Dataset> {
    if cfg.n < 2 {
        return Err(Error::InvalidArgument(format!("sample size {} < 2", cfg.n)));
    }
    if !(cfg.noise_sd >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "noise sd {} < 0",
            cfg.noise_sd
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut cols: Vec<Vec<f64>> = (0..10).map(|_| Vec::with_capacity(cfg.n)).collect();
    for _ in 0..cfg.n {
        for col in cols.iter_mut() {
            col.push(rng.random::<f64>());
        }
    }
    let mut y: Vec<f64> = (0..cfg.n)
        .map(|i| friedman_response(&[cols[0][i], cols[1][i], cols[2][i], cols[3][i], cols[4][i]]))
        .collect();
    add_noise(&mut y, cfg.noise_sd, &mut rng)?;
    cols.push(y);
    Dataset::new(FRIEDMAN_COLUMNS.map(String::from).to_vec(), cols, "Y")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Generator {
    Butterfly(ButterflyConfig),
    Friedman(FriedmanConfig),
}

impl Generator {
    /// Generates with the configured parameters but the given seed.
    pub fn generate(&self, seed: u64) -> Result<Dataset> {
        match self {
            Generator::Butterfly(c) => gen_butterfly(&ButterflyConfig { seed, ..c.clone() }),
            Generator::Friedman(c) => gen_friedman(&FriedmanConfig { seed, ..c.clone() }),
        }
    }
}

/// One Monte Carlo experiment: generate, optionally shuffle the target,
/// rescale, select.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub generator: Generator,
    pub scales: ScaleSet,
    /// Forward steps per run; all features when `None`.
    pub steps: Option<usize>,
    pub shuffle_target: bool,
    /// Length of the leading selection tallied across runs.
    pub first_k: usize,
}

impl Experiment {
    pub fn new(generator: Generator, scales: ScaleSet) -> Self {
        Experiment {
            generator,
            scales,
            steps: None,
            shuffle_target: false,
            first_k: 2,
        }
    }

    /// Runs the experiment once with `seed`.
    pub fn run(&self, seed: u64) -> Result<SelectionTrace> {
        let mut d = self.generator.generate(seed)?;
        if self.shuffle_target {
            // separate stream from the generator's
            d = d.shuffle_target(seed ^ 0x5DEE_CE66_D1CE_5EED);
        }
        let d = d.rescale_unit();
        let steps = self.steps.unwrap_or(d.n_cols() - 1);
        mbfr_select(&d, &self.scales, steps)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub selected: Vec<String>,
    pub diss: Vec<f64>,
    pub id_with_target: Vec<f64>,
    pub id_without_target: Vec<f64>,
    pub target_id: f64,
    pub min_diss: f64,
    /// Relevance of the first `first_k` selected features.
    pub dr_first_k: f64,
}

/// Mean and, for more than one run, sample sd.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sd: Option<f64>,
}

impl Moments {
    pub fn of(xs: &[f64]) -> Self {
        Moments {
            mean: mean(xs),
            sd: (xs.len() > 1).then(|| sample_sd(xs)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepSummary {
    pub step: usize,
    pub diss: Moments,
    pub id_with_target: Moments,
    pub id_without_target: Moments,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirstKCount {
    pub features: Vec<String>,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub sims: usize,
    pub base_seed: u64,
    pub first_k: usize,
    pub steps: Vec<StepSummary>,
    pub target_id: Moments,
    pub min_diss: Moments,
    pub dr_first_k: Moments,
    /// Leading selections, most frequent first.
    pub first_k_counts: Vec<FirstKCount>,
    pub runs: Vec<RunRecord>,
}

impl MonteCarloSummary {
    /// Runs whose first `features.len()` selections are exactly `features`,
    /// in any order.
    pub fn count_of(&self, features: &[&str]) -> usize {
        let k = features.len();
        self.runs
            .iter()
            .filter(|r| {
                r.selected.len() >= k
                    && r.selected[..k]
                        .iter()
                        .all(|f| features.contains(&f.as_str()))
            })
            .count()
    }

    /// `seed,first_k,min_diss,target_id,dr_first_k` with features joined by `;`.
    pub fn write_runs_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "seed,first_k,min_diss,target_id,dr_first_k")?;
        for r in &self.runs {
            let k = self.first_k.min(r.selected.len());
            writeln!(
                out,
                "{},{},{},{},{}",
                r.seed,
                r.selected[..k].join(";"),
                r.min_diss,
                r.target_id,
                r.dr_first_k
            )?;
        }
        Ok(())
    }
}

/// Runs `experiment` with seeds `base_seed .. base_seed + sims` and
/// aggregates the traces. Runs execute in parallel; aggregation follows seed
/// order, so the summary does not depend on scheduling.
pub fn monte_carlo(
    experiment: &Experiment,
    sims: usize,
    base_seed: u64,
) -> Result<MonteCarloSummary> {
    if sims == 0 {
        return Err(Error::InvalidArgument("sims must be >= 1".into()));
    }
    if experiment.first_k == 0 {
        return Err(Error::InvalidArgument("first_k must be >= 1".into()));
    }
    let seeds: Vec<u64> = (0..sims as u64).map(|i| base_seed + i).collect();
    let traces: Vec<SelectionTrace> = seeds
        .par_iter()
        .map(|&s| experiment.run(s))
        .collect::<Result<_>>()?;

    let runs: Vec<RunRecord> = seeds
        .iter()
        .zip(&traces)
        .map(|(&seed, t)| {
            let k = experiment.first_k.min(t.len());
            RunRecord {
                seed,
                selected: t.selected().iter().map(|s| s.to_string()).collect(),
                diss: t.diss_profile(),
                id_with_target: t.steps.iter().map(|s| s.id_with_target).collect(),
                id_without_target: t.steps.iter().map(|s| s.id_without_target).collect(),
                target_id: t.target_id,
                min_diss: t.min_diss().map_or(f64::NAN, |(_, v)| v),
                dr_first_k: t.dr_after(k).unwrap_or(f64::NAN),
            }
        })
        .collect();

    let n_steps = runs.iter().map(|r| r.diss.len()).min().unwrap_or(0);
    let column = |f: &dyn Fn(&RunRecord) -> f64| -> Moments {
        Moments::of(&runs.iter().map(f).collect::<Vec<_>>())
    };
    let steps = (0..n_steps)
        .map(|i| StepSummary {
            step: i + 1,
            diss: column(&|r| r.diss[i]),
            id_with_target: column(&|r| r.id_with_target[i]),
            id_without_target: column(&|r| r.id_without_target[i]),
        })
        .collect();

    let mut counts: HashMap<Vec<String>, usize> = HashMap::new();
    for r in &runs {
        let k = experiment.first_k.min(r.selected.len());
        *counts.entry(r.selected[..k].to_vec()).or_default() += 1;
    }
    let mut first_k_counts: Vec<FirstKCount> = counts
        .into_iter()
        .map(|(features, count)| FirstKCount { features, count })
        .collect();
    first_k_counts.sort_by(|a, b| {
        b.count
            .cmp(&a.count)
            .then_with(|| a.features.cmp(&b.features))
    });

    Ok(MonteCarloSummary {
        sims,
        base_seed,
        first_k: experiment.first_k,
        steps,
        target_id: column(&|r| r.target_id),
        min_diss: column(&|r| r.min_diss),
        dr_first_k: column(&|r| r.dr_first_k),
        first_k_counts,
        runs,
    })
}

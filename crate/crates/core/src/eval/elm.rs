use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Relative singular-value cutoff of the least-squares solve.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ElmOptions {
    /// Add a random bias to every hidden unit.
    pub biases: bool,
    /// Input weights and biases are drawn from `U(-range, range)`.
    pub weight_range: f64,
}

impl Default for ElmOptions {
    fn default() -> Self {
        ElmOptions {
            biases: true,
            weight_range: 1.0,
        }
    }
}

/// Single hidden layer network with frozen random input weights and
/// least-squares output weights.
#[derive(Clone, Debug, PartialEq)]
pub struct ElmModel {
    /// `features x hidden`
    pub input_weights: DMatrix<f64>,
    pub hidden_biases: Option<DVector<f64>>,
    pub output_weights: DVector<f64>,
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl ElmModel {
    /// Fits on the rows of `x` (`samples x features`).
    pub fn fit(
        x: &DMatrix<f64>,
        y: &[f64],
        n_hidden: usize,
        seed: u64,
        opts: &ElmOptions,
    ) -> Result<Self> {
        if n_hidden == 0 {
            return Err(Error::InvalidArgument("n_hidden must be >= 1".into()));
        }
        if x.nrows() != y.len() {
            return Err(Error::Shape(format!(
                "{} rows for {} responses",
                x.nrows(),
                y.len()
            )));
        }
        if x.nrows() == 0 {
            return Err(Error::TooFewPoints { needed: 1, got: 0 });
        }
        if n_hidden >= x.nrows() {
            log::warn!(
                "{n_hidden} hidden units for {} samples: interpolation regime",
                x.nrows()
            );
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = opts.weight_range;
        let input_weights = DMatrix::from_fn(x.ncols(), n_hidden, |_, _| rng.random_range(-r..r));
        let hidden_biases = opts
            .biases
            .then(|| DVector::from_fn(n_hidden, |_, _| rng.random_range(-r..r)));
        let mut model = ElmModel {
            input_weights,
            hidden_biases,
            output_weights: DVector::zeros(n_hidden),
        };
        let h = model.hidden(x);
        model.output_weights = min_norm_lstsq(h, &DVector::from_column_slice(y))?;
        Ok(model)
    }

    pub fn n_hidden(&self) -> usize {
        self.input_weights.ncols()
    }

    fn hidden(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut h = x * &self.input_weights;
        if let Some(b) = &self.hidden_biases {
            for mut row in h.row_iter_mut() {
                row += b.transpose();
            }
        }
        h.apply(|v| *v = logistic(*v));
        h
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Vec<f64> {
        (self.hidden(x) * &self.output_weights)
            .iter()
            .copied()
            .collect()
    }
}

/// Minimum-norm solution of `h b = y` via QR followed by an SVD of the
/// triangular factor; singular values below `RANK_TOLERANCE * max` are dropped.
pub fn min_norm_lstsq(h: DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let qr = h.qr();
    let qty = qr.q().tr_mul(y);
    let svd = qr.r().svd(true, true);
    let (u, v_t) = match (&svd.u, &svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => {
            return Err(Error::Numerical(
                "svd did not return singular vectors".into(),
            ))
        }
    };
    let smax = svd.singular_values.max();
    if !smax.is_finite() {
        return Err(Error::Numerical("non-finite hidden activations".into()));
    }
    let cutoff = RANK_TOLERANCE * smax;
    let mut coef = u.tr_mul(&qty);
    for (c, &s) in coef.iter_mut().zip(svd.singular_values.iter()) {
        *c = if s > cutoff { *c / s } else { 0.0 };
    }
    Ok(v_t.tr_mul(&coef))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, 2, |i, j| ((i * (j + 3)) % n) as f64 / n as f64)
    }

    fn mse(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64
    }

    #[test]
    fn learns_a_linear_response() {
        let x = grid(400);
        let y: Vec<f64> = x.column(0).iter().map(|v| 0.2 + 0.7 * v).collect();
        let m = ElmModel::fit(&x, &y, 50, 1, &ElmOptions::default()).unwrap();
        assert!(mse(&m.predict(&x), &y) < 1e-3);
    }

    #[test]
    fn reproduces_a_constant() {
        let x = grid(20);
        let y = vec![0.37; 20];
        let m = ElmModel::fit(&x, &y, 50, 2, &ElmOptions::default()).unwrap();
        assert!(mse(&m.predict(&x), &y) < 1e-12);
    }

    #[test]
    fn deterministic_per_seed() {
        let x = grid(100);
        let y: Vec<f64> = x.column(1).iter().map(|v| v * v).collect();
        let o = ElmOptions::default();
        assert_eq!(
            ElmModel::fit(&x, &y, 10, 3, &o).unwrap(),
            ElmModel::fit(&x, &y, 10, 3, &o).unwrap()
        );
        assert_ne!(
            ElmModel::fit(&x, &y, 10, 3, &o).unwrap(),
            ElmModel::fit(&x, &y, 10, 4, &o).unwrap()
        );
        let nb = ElmOptions { biases: false, ..o };
        assert!(ElmModel::fit(&x, &y, 10, 3, &nb)
            .unwrap()
            .hidden_biases
            .is_none());
    }

    #[test]
    fn min_norm_on_rank_deficient_system() {
        // duplicated column: the minimum-norm solution splits the weight evenly
        let h = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
        let y = DVector::from_column_slice(&[2.0, 4.0, 6.0]);
        let b = min_norm_lstsq(h, &y).unwrap();
        assert!(
            (b[0] - 1.0).abs() < 1e-12 && (b[1] - 1.0).abs() < 1e-12,
            "{b}"
        );
    }

    #[test]
    fn rejects_bad_shapes() {
        let x = grid(10);
        assert!(ElmModel::fit(&x, &[0.0; 9], 3, 0, &ElmOptions::default()).is_err());
        assert!(ElmModel::fit(&x, &[0.0; 10], 0, 0, &ElmOptions::default()).is_err());
    }
}

use mbfr::eval::{elm_sfs, evaluate_subset, ElmModel, ElmOptions, Protocol, UnitScaler};
use mbfr::simgen::{gen_butterfly, ButterflyConfig};
use mbfr::Dataset;
use nalgebra::DMatrix;

fn quick() -> Protocol {
    Protocol {
        splits: 3,
        folds: 3,
        retrains: 8,
        hidden_grid: vec![5, 10, 20, 40],
        seed: 5,
        ..Protocol::default()
    }
}

#[test]
fn wrapper_search_finds_the_butterfly_inputs() {
    let d = gen_butterfly(&ButterflyConfig::new(2_000, 0.0, 3)).unwrap();
    let r = elm_sfs(&d, &quick()).unwrap();
    assert!(r.selected.iter().any(|f| f == "X1"), "{:?}", r.path);
    assert!(r.selected.iter().any(|f| f == "X2"), "{:?}", r.path);
    assert_eq!(r.path.len(), 8);
}

#[test]
fn wrapper_search_on_one_feature_returns_it() {
    let x: Vec<f64> = (0..60).map(|i| f64::from(i) / 59.0).collect();
    let y: Vec<f64> = x.iter().map(|v| v * v).collect();
    let d = Dataset::new(vec!["x".into(), "y".into()], vec![x, y], "y").unwrap();
    assert_eq!(elm_sfs(&d, &quick()).unwrap().selected, ["x"]);
}

#[test]
fn informative_subsets_beat_irrelevant_ones() {
    let d = gen_butterfly(&ButterflyConfig::new(1_500, 0.1, 6)).unwrap();
    let p = quick();
    let relevant = evaluate_subset(&d, &["X1", "X2", "J3"], &p).unwrap();
    let irrelevant = evaluate_subset(&d, &["I6", "I7", "I8"], &p).unwrap();
    assert!(relevant.mean_re < irrelevant.mean_re);
    assert!(irrelevant.mean_re > 0.9);
    let again = evaluate_subset(&d, &["X1", "X2", "J3"], &p).unwrap();
    assert_eq!(again.re_per_split, relevant.re_per_split);
    assert_eq!(again.chosen_n_hidden, relevant.chosen_n_hidden);
}

#[test]
fn averaging_retrains_reduces_prediction_spread() {
    let n = 300;
    let x = DMatrix::from_fn(n, 2, |i, j| ((i * (3 + 4 * j)) % n) as f64 / n as f64);
    let y: Vec<f64> = (0..n)
        .map(|i| (3.0 * x[(i, 0)]).sin() + x[(i, 1)])
        .collect();
    let probe = DMatrix::from_row_slice(1, 2, &[0.37, 0.81]);
    let single: Vec<f64> = (0..400)
        .map(|s| {
            ElmModel::fit(&x, &y, 30, s, &ElmOptions::default())
                .unwrap()
                .predict(&probe)[0]
        })
        .collect();
    let averages: Vec<f64> = single
        .chunks(100)
        .map(|c| c.iter().sum::<f64>() / 100.0)
        .collect();
    let sd = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        (v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
    };
    assert!(
        sd(&single) > sd(&averages),
        "{} vs {}",
        sd(&single),
        sd(&averages)
    );
}

#[test]
fn test_rows_outside_the_training_range_are_not_clipped() {
    let scaler = UnitScaler::fit(&[vec![2.0, 4.0, 3.0]]);
    let scaled = scaler.transform(&[vec![5.0, 1.0]]);
    assert_eq!(scaled[0], vec![1.5, -0.5]);
    let model = ElmModel::fit(
        &DMatrix::from_row_slice(3, 1, &[0.0, 1.0, 0.5]),
        &[0.0, 1.0, 0.5],
        2,
        1,
        &ElmOptions::default(),
    )
    .unwrap();
    let p = model.predict(&DMatrix::from_row_slice(2, 1, &scaled[0]));
    assert!(p.iter().all(|v| v.is_finite()));
}

use mbfr::simgen::{gen_butterfly, gen_friedman, ButterflyConfig, FriedmanConfig};
use mbfr::{
    classify_rejected, dimensional_relevance, dissimilarity, mbfr_select, Dataset, ScaleSet,
};

fn butterfly(seed: u64) -> Dataset {
    gen_butterfly(&ButterflyConfig::new(10_000, 0.0, seed)).unwrap()
}

#[test]
fn selection_is_invariant_to_positive_affine_maps_of_raw_features() {
    let d = butterfly(4);
    let scales = ScaleSet::range(5, 20).unwrap();
    let base = mbfr_select(&d.rescale_unit(), &scales, 4).unwrap();

    let cols: Vec<Vec<f64>> = d
        .columns()
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let (a, b) = (0.5 + j as f64, -3.0 * j as f64);
            c.iter().map(|v| a * v + b).collect()
        })
        .collect();
    let moved = Dataset::new(d.names().to_vec(), cols, "Y").unwrap();
    let other = mbfr_select(&moved.rescale_unit(), &scales, 4).unwrap();
    assert_eq!(base.selected(), other.selected());
    for (x, y) in base.diss_profile().iter().zip(other.diss_profile()) {
        assert!((x - y).abs() < 1e-2, "{x} vs {y}");
    }
}

#[test]
fn trace_scores_agree_with_direct_dissimilarity() {
    let d = butterfly(8).rescale_unit();
    let scales = ScaleSet::range(5, 20).unwrap();
    let trace = mbfr_select(&d, &scales, 3).unwrap();
    let chosen = trace.selected();
    for (i, step) in trace.steps.iter().enumerate() {
        let direct =
            dissimilarity(&d.columns_of(&chosen[..=i]).unwrap(), d.target(), &scales).unwrap();
        assert_eq!(direct.diss.to_bits(), step.diss.to_bits());
        assert_eq!(step.candidate_scores.len(), d.n_cols() - 1 - i);
        assert_eq!(
            step.candidate_scores[&step.feature].to_bits(),
            step.diss.to_bits()
        );
    }
}

#[test]
fn relevance_of_the_true_inputs_is_high_and_of_noise_low() {
    let d = butterfly(12).rescale_unit();
    let scales = ScaleSet::range(5, 20).unwrap();
    let good =
        dimensional_relevance(&d.columns_of(&["X1", "X2"]).unwrap(), d.target(), &scales).unwrap();
    let bad = dimensional_relevance(
        &d.columns_of(&["I6", "I7", "I8"]).unwrap(),
        d.target(),
        &scales,
    )
    .unwrap();
    assert!(good.dr > 0.9, "{:?}", good);
    assert!(bad.dr < 0.2, "{:?}", bad);
    assert!((0.0..=1.0).contains(&bad.dr_clipped));
}

#[test]
fn redundant_and_irrelevant_features_are_told_apart() {
    let d = butterfly(21).rescale_unit();
    let scales = ScaleSet::range(5, 20).unwrap();
    for j in ["J3", "J4", "J5"] {
        let s = classify_rejected(&d, &["X1", "X2"], j, &scales).unwrap();
        assert!(s.score > 0.8, "{j}: {s:?}");
    }
    for i in ["I6", "I7", "I8"] {
        let s = classify_rejected(&d, &["X1", "X2"], i, &scales).unwrap();
        assert!(s.score < 0.2, "{i}: {s:?}");
    }
}

#[test]
fn friedman_profile_has_its_knee_after_the_relevant_inputs() {
    for seed in [1, 2] {
        let cfg = FriedmanConfig {
            seed,
            ..FriedmanConfig::default()
        };
        let d = gen_friedman(&cfg).unwrap().rescale_unit();
        let trace = mbfr_select(&d, &ScaleSet::range(1, 6).unwrap(), 10).unwrap();
        let mut first: Vec<&str> = trace.selected()[..5].to_vec();
        first.sort_unstable();
        assert_eq!(first, ["X1", "X2", "X3", "X4", "X5"], "seed {seed}");
        assert_eq!(
            trace.knee(),
            Some(5),
            "seed {seed}: {:?}",
            trace.diss_profile()
        );
    }
}

#[test]
fn shuffled_target_profile_stays_near_the_reference() {
    let d = butterfly(30).shuffle_target(31).rescale_unit();
    let trace = mbfr_select(&d, &ScaleSet::range(5, 20).unwrap(), 8).unwrap();
    for s in &trace.steps {
        assert!(s.diss > 0.85 * trace.target_id, "{} {}", s.feature, s.diss);
    }
}

//! Scores feature subsets with the extreme learning machine protocol, here
//! reduced to a few splits and retrains so it finishes quickly.
//!
//! cargo run --release --example elm_evaluation

use mbfr::eval::{evaluate_subset, Protocol};
use mbfr::simgen::{gen_butterfly, ButterflyConfig};

fn main() -> mbfr::Result<()> {
    let d = gen_butterfly(&ButterflyConfig::new(2_000, 0.1, 2))?;
    let protocol = Protocol {
        splits: 3,
        retrains: 10,
        hidden_grid: vec![5, 10, 20, 40, 80],
        ..Protocol::default()
    };
    let subsets: [&[&str]; 3] = [
        &["X1", "X2"],
        &["I6", "I7", "I8"],
        &["X1", "X2", "J3", "J4", "J5", "I6", "I7", "I8"],
    ];
    for s in subsets {
        let r = evaluate_subset(&d, s, &protocol)?;
        println!(
            "{:<28} RE {:.3} (sd {:.3})  hidden {:?}",
            s.join(","),
            r.mean_re,
            r.sd_re,
            r.chosen_n_hidden
        );
    }
    Ok(())
}

//! Tells redundant rejected features (functions of the selected ones) from
//! irrelevant ones.
//!
//! cargo run --release --example redundancy_diagnostic

use mbfr::simgen::{gen_butterfly, ButterflyConfig};
use mbfr::{classify_rejected, ScaleSet};

fn main() -> mbfr::Result<()> {
    let d = gen_butterfly(&ButterflyConfig::new(10_000, 0.0, 5))?.rescale_unit();
    let scales = ScaleSet::range(5, 20)?;
    let selected = ["X1", "X2"];
    for rejected in ["J3", "J4", "J5", "I6", "I7", "I8"] {
        let s = classify_rejected(&d, &selected, rejected, &scales)?;
        let verdict = if s.score > 0.5 {
            "redundant"
        } else {
            "irrelevant"
        };
        println!(
            "{rejected}: score {:.3}  dID {:.3}  M2 alone {:.3}  -> {verdict}",
            s.score, s.delta_id, s.standalone_id
        );
    }
    Ok(())
}

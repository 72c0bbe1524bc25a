//! Permuting the target breaks every relation to the features: the
//! dissimilarity stays close to M2(Y) whatever is selected.
//!
//! cargo run --release --example shuffled_target

use mbfr::simgen::{gen_butterfly, ButterflyConfig};
use mbfr::{mbfr_select, ScaleSet};

fn main() -> mbfr::Result<()> {
    let d = gen_butterfly(&ButterflyConfig::new(10_000, 0.0, 11))?
        .shuffle_target(99)
        .rescale_unit();
    let trace = mbfr_select(&d, &ScaleSet::range(5, 20)?, d.n_cols() - 1)?;
    println!("M2(Y) = {:.4}", trace.target_id);
    for step in &trace.steps {
        println!(
            "{:<3}  diss {:.4}  ({:.0}% of M2(Y))",
            step.feature,
            step.diss,
            100.0 * step.diss / trace.target_id
        );
    }
    Ok(())
}

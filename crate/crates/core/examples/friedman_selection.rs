//! The Friedman benchmark: five relevant inputs should lead the ranking,
//! and the profile should flatten after them.
//!
//! cargo run --release --example friedman_selection

use mbfr::simgen::{gen_friedman, FriedmanConfig};
use mbfr::{mbfr_select, ScaleSet};

fn main() -> mbfr::Result<()> {
    let cfg = FriedmanConfig {
        seed: 3,
        ..FriedmanConfig::default()
    };
    let d = gen_friedman(&cfg)?.rescale_unit();
    let trace = mbfr_select(&d, &ScaleSet::range(1, 6)?, d.n_cols() - 1)?;
    println!("M2(Y) = {:.4}", trace.target_id);
    for (i, step) in trace.steps.iter().enumerate() {
        println!("{:>2}  {:<3}  diss {:.4}", i + 1, step.feature, step.diss);
    }
    println!("knee: {:?}", trace.knee());
    Ok(())
}

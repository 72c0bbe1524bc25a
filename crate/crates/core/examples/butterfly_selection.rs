//! Forward selection on the butterfly data, with the relevance of the
//! chosen pair and the dissimilarity profile plot.
//!
//! cargo run --release --example butterfly_selection [noise] [profile.svg]

use mbfr::report::emit_profile_svg;
use mbfr::simgen::{gen_butterfly, ButterflyConfig};
use mbfr::{dimensional_relevance, mbfr_select, ScaleSet};

fn main() -> mbfr::Result<()> {
    let mut args = std::env::args().skip(1);
    let noise: f64 = args
        .next()
        .map_or(0.0, |a| a.parse().expect("noise fraction"));
    let d = gen_butterfly(&ButterflyConfig::new(10_000, noise, 7))?.rescale_unit();
    let scales = ScaleSet::range(5, 20)?;

    let trace = mbfr_select(&d, &scales, d.n_cols() - 1)?;
    println!("M2(Y) = {:.4}", trace.target_id);
    for (i, step) in trace.steps.iter().enumerate() {
        println!("{:>2}  {:<3}  diss {:.4}", i + 1, step.feature, step.diss);
    }
    if let Some(k) = trace.knee() {
        println!("knee after {k} features");
    }

    let first_two: Vec<&str> = trace.selected().into_iter().take(2).collect();
    let dr = dimensional_relevance(&d.columns_of(&first_two)?, d.target(), &scales)?;
    println!("DR({}) = {:.3}", first_two.join(", "), dr.dr);

    if let Some(path) = args.next() {
        emit_profile_svg(&trace, &path)?;
        println!("wrote {path}");
    }
    Ok(())
}

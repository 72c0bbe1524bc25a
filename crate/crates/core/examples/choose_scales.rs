//! Picks the scale range from the log-log plot of the butterfly data and
//! writes the diagnostic plot.
//!
//! cargo run --release --example choose_scales [out.svg]

use mbfr::morisita::{choose_scales, ScaleSearch};
use mbfr::report::emit_scale_diagnostic_svg;
use mbfr::simgen::{gen_butterfly, ButterflyConfig};

fn main() -> mbfr::Result<()> {
    let d = gen_butterfly(&ButterflyConfig::new(10_000, 0.0, 1))?.rescale_unit();
    let choice = choose_scales(&d.columns(), &ScaleSearch::default())?;
    println!(
        "linear window {}..{} (R^2 {:.4}), upper cap {}",
        choice.window.0, choice.window.1, choice.r_squared, choice.upper_cap
    );
    println!("scales: {}", choice.scales);
    for w in &choice.warnings {
        println!("warning: {w}");
    }
    if let Some(path) = std::env::args().nth(1) {
        emit_scale_diagnostic_svg(&choice, &path)?;
        println!("wrote {path}");
    }
    Ok(())
}

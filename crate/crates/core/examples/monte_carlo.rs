//! Noise sweep over repeated butterfly simulations: how often X1 and X2
//! come first, and how the smallest dissimilarity grows with the noise.
//!
//! cargo run --release --example monte_carlo [sims]

use mbfr::simgen::{monte_carlo, ButterflyConfig, Experiment, Generator};
use mbfr::ScaleSet;

fn main() -> mbfr::Result<()> {
    let sims: usize = std::env::args()
        .nth(1)
        .map_or(10, |a| a.parse().expect("number of runs"));
    for noise in [0.0, 0.25, 1.0] {
        let generator = Generator::Butterfly(ButterflyConfig::new(10_000, noise, 0));
        let mut exp = Experiment::new(generator, ScaleSet::range(5, 20)?);
        exp.steps = Some(3);
        let s = monte_carlo(&exp, sims, 1000)?;
        println!(
            "noise {:>4.2}: X1,X2 first in {}/{}  min diss {:.3}  M2(Y) {:.3}",
            noise,
            s.count_of(&["X1", "X2"]),
            s.sims,
            s.min_diss.mean,
            s.target_id.mean
        );
        for c in s.first_k_counts.iter().take(3) {
            println!("    {:>3}x {}", c.count, c.features.join(", "));
        }
    }
    Ok(())
}

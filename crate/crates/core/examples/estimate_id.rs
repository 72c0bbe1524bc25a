//! Morisita estimates for points on a line, a plane and a diagonal segment.
//!
//! cargo run --release --example estimate_id

use mbfr::{mindid, ScaleSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> mbfr::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let n = 10_000;
    let u: Vec<f64> = (0..n).map(|_| rng.random()).collect();
    let v: Vec<f64> = (0..n).map(|_| rng.random()).collect();
    let scales = ScaleSet::range(2, 20)?;

    let line = mindid(&[&u], 2, &scales)?;
    let plane = mindid(&[&u, &v], 2, &scales)?;
    let diagonal = mindid(&[&u, &u], 2, &scales)?;
    let plane3 = mindid(&[&u, &v], 3, &scales)?;

    println!("line in 1-D      M2 = {:.3}", line.intrinsic_dim);
    println!("square in 2-D    M2 = {:.3}", plane.intrinsic_dim);
    println!("diagonal in 2-D  M2 = {:.3}", diagonal.intrinsic_dim);
    println!("square in 2-D    M3 = {:.3}", plane3.intrinsic_dim);
    Ok(())
}

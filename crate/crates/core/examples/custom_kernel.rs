//! A user-supplied zonal generating function read from `t,value` rows.
//!
//! The profile `ğ(t) = 1 + t²/2` sampled on `[-1, 1]` is even, and it is the
//! support function of a body of revolution, so it drives the polar theorems
//! as well.
//!
//! Run with `cargo run --example custom_kernel`.

use std::sync::Arc;

use zonal_bm::bodies::random_polytope;
use zonal_bm::inequalities::ConvexPair;
use zonal_bm::{build_grid, BMHomomorphism, Result, ZonalKernel};

fn main() -> Result<()> {
    let mut csv = String::from("t,value\n");
    for i in 0..=40 {
        let t = -1.0 + i as f64 / 20.0;
        csv.push_str(&format!("{t},{}\n", 1.0 + 0.5 * t * t));
    }
    let phi = BMHomomorphism::from_kernel(ZonalKernel::from_csv("ellipsoidal", &csv, true, true)?)?;
    println!("{}: r_Φ = ∫ ğ = {:.6}", phi.name(), phi.radius());

    let grid = Arc::new(build_grid(3, 16)?);
    let k = random_polytope(8, 10)?;
    let l = random_polytope(9, 7)?;
    let pair = ConvexPair::new(&phi, &k, &l, &grid);
    for c in pair.minkowski_type()?.iter().chain(&pair.polar_minkowski()?) {
        println!("{c}");
    }
    Ok(())
}

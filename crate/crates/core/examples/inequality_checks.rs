//! Evaluating individual inequalities and identities on chosen bodies, and
//! reading their margins and accuracy rungs.
//!
//! Run with `cargo run --example inequality_checks`.

use std::sync::Arc;

use zonal_bm::bodies::{random_polytope, random_star_body};
use zonal_bm::inequalities::{check_dual_adjointness, check_mixed_adjointness, ConvexPair, StarPair};
use zonal_bm::{build_grid, BMHomomorphism, Polytope, RadialBMHomomorphism, Result};

fn main() -> Result<()> {
    let grid = Arc::new(build_grid(3, 16)?);
    let theta = BMHomomorphism::theta();
    let k = random_polytope(10, 9)?;
    let l = Polytope::standard_simplex();

    let pair = ConvexPair::new(&theta, &k, &l, &grid);
    for c in pair.minkowski_type()?.iter().chain(&pair.polar_brunn_minkowski()?) {
        println!("{c}");
    }

    // a homothetic pair is an equality case
    let h = k.dilate(1.7)?.translate([0.1, 0.0, -0.05])?;
    for c in ConvexPair::new(&theta, &k, &h, &grid).brunn_minkowski_type()? {
        println!("{c}");
    }

    for c in check_mixed_adjointness(&BMHomomorphism::projection(), &k, &l, &grid)?.iter().take(3) {
        println!("{c}");
    }

    let i = RadialBMHomomorphism::intersection();
    let a = random_star_body(grid.clone(), 3, 3)?;
    let b = random_star_body(grid.clone(), 4, 3)?;
    for c in StarPair::new(&i, &a, &b).dual_aleksandrov_fenchel()? {
        println!("{c}");
    }
    let worst = check_dual_adjointness(&i, &a, &b)?.into_iter().map(|c| c.margin.abs()).fold(0.0, f64::max);
    println!("dual adjointness: worst |margin| over i, j ∈ {{0, 1, 2}}: {worst:.1e}");
    Ok(())
}

//! The defining properties of a Blaschke–Minkowski homomorphism: Blaschke
//! additivity `Φ(K # L) = ΦK + ΦL` and rotation intertwining `Φ(ϑK) = ϑΦK`.
//!
//! Run with `cargo run --example blaschke_additivity`.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use zonal_bm::bodies::{random_polytope, random_rotation};
use zonal_bm::minkowski_solver::blaschke_sum;
use zonal_bm::operators::apply_bm;
use zonal_bm::vec3::mat_vec;
use zonal_bm::{build_grid, BMHomomorphism, Result};

fn main() -> Result<()> {
    let grid = Arc::new(build_grid(3, 16)?);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for phi in [BMHomomorphism::projection(), BMHomomorphism::theta()] {
        let k = random_polytope(1, 9)?;
        let l = random_polytope(2, 11)?;
        let kl = blaschke_sum(&k, &l, 1.0, 1.0)?;
        let (a, b, c) = (apply_bm(&phi, &kl, &grid)?, apply_bm(&phi, &k, &grid)?, apply_bm(&phi, &l, &grid)?);
        let scale = a.samples().iter().fold(0.0f64, |m, x| m.max(*x));
        let add = (0..grid.len()).map(|i| (a.samples()[i] - b.samples()[i] - c.samples()[i]).abs()).fold(0.0, f64::max);

        let r = random_rotation(&mut rng);
        let rotated = apply_bm(&phi, &k.rotate(&r)?, &grid)?;
        let rot = grid.nodes3().map(|u| (rotated.eval(mat_vec(&r, u)) - b.eval(u)).abs()).fold(0.0, f64::max);
        println!("{:6} additivity sup error {:.1e} (relative {:.1e}), intertwining sup error {:.1e}", phi.name(), add, add / scale, rot);
    }
    Ok(())
}

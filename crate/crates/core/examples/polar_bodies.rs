//! Polar bodies of homomorphism images and Petty-type products.
//!
//! Run with `cargo run --example polar_bodies`.

use std::f64::consts::PI;
use std::sync::Arc;

use zonal_bm::bodies::random_polytope;
use zonal_bm::operators::{apply_bm, apply_bm_ball, polar_phi};
use zonal_bm::measures::MixedArg;
use zonal_bm::sphere::kappa;
use zonal_bm::volumes::{polar_volume, polar_volume_estimate, volume_star};
use zonal_bm::{build_grid, BMHomomorphism, Polytope, Result};

fn main() -> Result<()> {
    let grid = Arc::new(build_grid(3, 32)?);
    let pi = BMHomomorphism::projection();

    let pb = apply_bm_ball(&pi, &grid)?;
    println!("V(Π*B) = {:.8}, closed form 4/(3π²) = {:.8}", polar_volume(&pb)?, 4.0 / (3.0 * PI * PI));

    let cube = Polytope::cube(1.0)?;
    let star = polar_phi(&pi, &[MixedArg::Polytope(&cube)], &grid)?;
    let d = 1.0 / 3f64.sqrt();
    println!("ρ(Π*C, (1,1,1)/√3) = {:.8}, expected 1/(4√3) = {:.8}", star.eval([d, d, d]), 1.0 / (4.0 * 3f64.sqrt()));

    // Petty's product V(K)² V(Π*K) is maximal at ellipsoids: 64/27 at the ball
    println!("V(B)²V(Π*B) = {:.6} (64/27 = {:.6})", kappa(3).powi(2) * polar_volume(&pb)?, 64.0 / 27.0);
    for seed in 0..4 {
        let k = random_polytope(seed, 12)?;
        let v = polar_volume_estimate(&apply_bm(&pi, &k, &grid)?)?;
        println!("  random polytope {seed}: V(K)²V(Π*K) = {:.6} ({:?})", k.volume().powi(2) * v.value, v.rung);
    }
    println!("V(Π*C) by quadrature of ρ³: {:.6}, exact {:.6}", volume_star(&star), polar_volume_estimate(&apply_bm(&pi, &cube, &grid)?)?.value);
    Ok(())
}

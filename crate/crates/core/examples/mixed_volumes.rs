//! Mixed volumes, quermassintegrals and dual mixed volumes, with the
//! Steiner-type expansions they satisfy.
//!
//! Run with `cargo run --example mixed_volumes`.

use std::sync::Arc;

use zonal_bm::bodies::{random_polytope, random_star_body};
use zonal_bm::inequalities::{dual_volume_expansion_deviation, volume_expansion_deviation};
use zonal_bm::sphere::kappa;
use zonal_bm::volumes::{dual_quermassintegral, dual_v_r, mixed_volume, quermassintegral, volume_star};
use zonal_bm::{build_grid, Polytope, Result};

fn main() -> Result<()> {
    let cube = Polytope::cube(1.0)?;
    println!("cube [-1,1]³: W₀ = {:.6}, W₁ = {:.6} (S/3), W₂ = {:.6} (2π), W₃ = κ₃ = {:.6}",
        quermassintegral(&cube, 0)?, quermassintegral(&cube, 1)?, quermassintegral(&cube, 2)?, kappa(3));

    let k = random_polytope(3, 10)?;
    let l = random_polytope(4, 8)?;
    let v = [k.volume(), mixed_volume(&k, &k, &l)?, mixed_volume(&k, &l, &l)?, l.volume()];
    println!("V(K), V(K,K,L), V(K,L,L), V(L) = {:.6?}", v);
    println!("Minkowski: V(K,K,L)³ − V(K)²V(L) = {:.3e} ≥ 0", v[1].powi(3) - v[0] * v[0] * v[3]);
    for t in [0.3, 1.0, 2.5] {
        println!("V(K + {t}L) vs its cubic expansion: relative deviation {:.1e}", volume_expansion_deviation(&k, &l, t)?);
    }

    let grid = Arc::new(build_grid(3, 24)?);
    let a = random_star_body(grid.clone(), 1, 3)?;
    let b = random_star_body(grid, 2, 3)?;
    println!("star bodies: V(A) = {:.6}, W̃₁(A) = {:.6}, Ṽ₁(A, B) = {:.6}, Ṽ₋₁(A, B) = {:.6}",
        volume_star(&a), dual_quermassintegral(&a, 1)?, dual_v_r(&a, &b, 1.0)?, dual_v_r(&a, &b, -1.0)?);
    println!("V(A +̃ 0.7B) vs its dual expansion: relative deviation {:.1e}", dual_volume_expansion_deviation(&a, &b, 0.7)?);
    Ok(())
}

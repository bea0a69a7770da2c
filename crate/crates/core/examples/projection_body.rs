//! Projection bodies of polytopes: the exact zonotope route and the sampled
//! support function agree, and `Π(cube[−1,1]³) = cube[−4,4]³`.
//!
//! Run with `cargo run --example projection_body`.

use std::sync::Arc;

use zonal_bm::bodies::random_polytope;
use zonal_bm::operators::{apply_bm, projection_zonotope};
use zonal_bm::{build_grid, BMHomomorphism, Polytope, Result};

fn main() -> Result<()> {
    let grid = Arc::new(build_grid(3, 16)?);
    let pi = BMHomomorphism::projection();

    let cube = Polytope::cube(1.0)?;
    let pc = projection_zonotope(&cube)?;
    println!("Π(cube[-1,1]³): {} vertices, volume {:.12}", pc.vertices().len(), pc.volume());
    let target = Polytope::cube(4.0)?;
    let err = grid.nodes3().map(|u| (pc.support(u) - target.support(u)).abs()).fold(0.0, f64::max);
    println!("  sup |h(ΠC) − h(cube[-4,4]³)| over {} directions: {err:.2e}", grid.len());

    let k = random_polytope(2024, 12)?;
    let sampled = apply_bm(&pi, &k, &grid)?;
    let exact = projection_zonotope(&k)?;
    let err = grid
        .nodes3()
        .zip(sampled.samples())
        .map(|(u, h)| (h - exact.support(u)).abs())
        .fold(0.0, f64::max);
    println!("random polytope with {} facets:", k.facets().len());
    println!("  ΠK is a zonotope with {} vertices and volume {:.6}", exact.vertices().len(), exact.volume());
    println!("  sampled vs zonotope support, sup error: {err:.2e}");
    println!("  h(ΠK, e₃) = area of the shadow on e₃^⊥ = {:.6}", sampled.eval([0.0, 0.0, 1.0]));
    Ok(())
}
